"""
Running experiments from configuration files
============================================

The same sweeps are available from the ``smmimo`` command.  This script
writes a tiny config, validates it and runs it into a temporary folder.
"""

import tempfile
from pathlib import Path

from smmimo.cli import main

config = """\
[scenario]
name = quick
K = 4
N = 16
snr_db = 0, 4, 8
min_errors = 50
max_trials = 300

[system:sm]
n_t = 4
qam = 4
detectors = mmse, mpd, hybrid

[system:mmimo]
qam = 16
detectors = sd
"""

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "quick.ini"
    path.write_text(config)
    main(["validate", str(path)])
    main(["run", str(path), "--out", tmp])
    print((Path(tmp) / "quick.csv").read_text())

# The bundled scenarios reproduce the full comparisons:
main(["list-scenarios"])
