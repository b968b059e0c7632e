import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smmimo import ConfigError
from smmimo.detect import DetectionError
from smmimo.sim import (
    DETECTORS,
    BerRecord,
    DetectorSpec,
    ErasureError,
    SystemSpec,
    TrialPlan,
    run_alpha_sweep,
    run_ber_sweep,
    run_complexity_sweep,
    snr_at_ber,
    wilson_interval,
)


def _sm(*dets, n_t=2, order=4):
    return SystemSpec("sm", n_t, order, tuple(DetectorSpec.make(d) for d in dets))


def test_records_shape_and_invariants():
    plan = TrialPlan(_sm("mmse", "mpd"), K=4, N=16, snr_db=(0.0, 6.0), seed=2,
                     min_errors=20, max_trials=200, batch=16)
    recs = run_ber_sweep(plan)
    assert [(r.detector, r.snr_db) for r in recs] == [
        ("mmse", 0.0), ("mpd", 0.0), ("mmse", 6.0), ("mpd", 6.0)
    ]
    for r in recs:
        assert r.bits == r.trials * 4 * 3
        assert 0 <= r.ber <= 1
        assert r.trials % 16 == 0 or r.trials == 200
        lo, hi = r.ci
        assert lo <= r.ber <= hi


def test_stopping_rule_counts_per_point():
    plan = TrialPlan(_sm("mmse"), K=4, N=8, snr_db=(-5.0,), seed=0, min_errors=50, batch=8)
    (r,) = run_ber_sweep(plan)
    assert r.errors >= 50
    # stopped at the first batch boundary after crossing
    fewer = TrialPlan(_sm("mmse"), K=4, N=8, snr_db=(-5.0,), seed=0,
                      min_errors=0, max_trials=r.trials - 8, batch=8)
    (r2,) = run_ber_sweep(fewer)
    assert r2.errors < 50


def test_max_trials_caps():
    plan = TrialPlan(_sm("mpd"), K=2, N=16, snr_db=(30.0,), min_errors=100,
                     max_trials=40, batch=16)
    (r,) = run_ber_sweep(plan)
    assert r.trials == 40


def test_noiseless_point_is_error_free():
    system = _sm("mmse", "mpd", "lsd", "hybrid", "ml")
    plan = TrialPlan(system, K=3, N=8, snr_db=(math.inf,), max_trials=64, batch=16)
    for r in run_ber_sweep(plan):
        assert r.errors == 0, r.detector
        assert r.trials == 64
    sd = SystemSpec("mm", 1, 16, (DetectorSpec.make("sd"),))
    (r,) = run_ber_sweep(TrialPlan(sd, K=4, N=8, snr_db=(math.inf,), max_trials=64))
    assert r.errors == 0


def test_worker_count_does_not_change_results():
    plan = TrialPlan(_sm("mmse", "lsd"), K=4, N=8, snr_db=(2.0, 5.0), seed=11,
                     min_errors=30, batch=8)
    a = run_ber_sweep(plan, workers=1)
    b = run_ber_sweep(plan, workers=2)
    assert a == b


def test_same_seed_same_result_different_seed_differs():
    plan = TrialPlan(_sm("mmse"), K=4, N=8, snr_db=(3.0,), seed=1, max_trials=64, min_errors=0)
    assert run_ber_sweep(plan) == run_ber_sweep(plan)
    other = TrialPlan(_sm("mmse"), K=4, N=8, snr_db=(3.0,), seed=2, max_trials=64, min_errors=0)
    assert run_ber_sweep(plan)[0].errors != run_ber_sweep(other)[0].errors


def test_energy_accounting_matches_snr():
    # measured E||Hx||^2 / (N sigma^2) within 2% of the configured SNR
    for system in (_sm("mmse", n_t=4), SystemSpec("mm", 2, 4, (DetectorSpec.make("mmse"),), streams=2)):
        plan = TrialPlan(system, K=16, N=64, snr_db=(5.0,), min_errors=0, max_trials=400, batch=50)
        (r,) = run_ber_sweep(plan)
        assert r.measured_snr == pytest.approx(10 ** 0.5, rel=0.02)


def test_alpha_sweep_users():
    plan = TrialPlan(_sm("mmse"), K=0, N=16, snr_db=(10.0,), alpha=(0.125, 0.25),
                     min_errors=0, max_trials=16)
    recs = run_alpha_sweep(plan)
    assert [r.K for r in recs] == [2, 4]
    assert [r.alpha for r in recs] == [0.125, 0.25]


@pytest.mark.parametrize("alpha", [0.1, 0.0, 0.01])
def test_alpha_sweep_rejects_bad_alpha(alpha):
    plan = TrialPlan(_sm("mmse"), K=0, N=16, snr_db=(10.0,), alpha=(alpha,))
    with pytest.raises(ConfigError):
        run_alpha_sweep(plan)


def test_plan_validation():
    with pytest.raises(ConfigError):
        TrialPlan(_sm("mmse"), K=0, N=16, snr_db=(1.0,))
    with pytest.raises(ConfigError):
        TrialPlan(_sm("mmse"), K=2, N=16, snr_db=())
    with pytest.raises(ConfigError):
        DetectorSpec.make("nope")
    with pytest.raises(ConfigError):
        DetectorSpec.make("mmse", damping=0.3)
    with pytest.raises(ConfigError):
        SystemSpec("bad", 4, 4, (DetectorSpec.make("sd"),))


def test_complexity_report_positive_and_monotone():
    plan = TrialPlan(_sm("mmse", "mpd", "lsd", "hybrid", n_t=4), K=0, N=64,
                     snr_db=(9.0,), alpha=(0.0625, 0.125, 0.25))
    reports = run_complexity_sweep(plan, trials=4)
    assert {r.detector for r in reports} == {"mmse", "mpd", "lsd", "hybrid"}
    for rep in reports:
        assert rep.alpha == [0.0625, 0.125, 0.25]
        assert all(v > 0 for v in rep.mean_ops)
        assert all(b > a for a, b in zip(rep.mean_ops, rep.mean_ops[1:])), rep.detector


def test_erasures_recorded_and_breach_raises(monkeypatch):
    calls = {"n": 0}

    def flaky(y, H, s2, sset, rng):
        calls["n"] += 1
        if calls["n"] % 50 == 0:
            raise DetectionError("singular")
        return DETECTORS["mmse"][0](y, H, s2, sset, rng)

    monkeypatch.setitem(DETECTORS, "ml", (flaky, ()))
    plan = TrialPlan(_sm("ml"), K=2, N=8, snr_db=(10.0,), min_errors=0, max_trials=100)
    with pytest.raises(ErasureError):
        run_ber_sweep(plan)

    def rare(y, H, s2, sset, rng):
        calls["n"] += 1
        if calls["n"] == 5:
            raise DetectionError("singular")
        return DETECTORS["mmse"][0](y, H, s2, sset, rng)

    calls["n"] = 0
    monkeypatch.setitem(DETECTORS, "ml", (rare, ()))
    plan = TrialPlan(_sm("ml"), K=2, N=8, snr_db=(10.0,), min_errors=0, max_trials=2000, batch=100)
    (r,) = run_ber_sweep(plan)
    assert r.erasures == 1
    assert r.trials == 1999
    assert r.bits == 1999 * 2 * 3


def test_ber_decreases_with_snr():
    plan = TrialPlan(_sm("mpd"), K=4, N=16, snr_db=(0.0, 4.0, 8.0), seed=5,
                     min_errors=0, max_trials=200)
    bers = [r.ber for r in run_ber_sweep(plan)]
    assert bers[0] > bers[1] > bers[2]


def test_wilson_interval_reference():
    # reference values from the closed form with z = 1.96
    lo, hi = wilson_interval(10, 100)
    assert lo == pytest.approx(0.05523, abs=1e-4)
    assert hi == pytest.approx(0.17437, abs=1e-4)
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(0, 1000)
    assert lo == 0.0 and 0 < hi < 0.004


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 10**7), frac=st.floats(0, 1))
def test_wilson_interval_contains_estimate(n, frac):
    e = int(frac * n)
    lo, hi = wilson_interval(e, n)
    assert 0 <= lo <= e / n <= hi <= 1


def _rec(snr, ber, bits=10**6):
    return BerRecord("s", "x", "d", 4, 8, snr, bits // 8, bits, int(round(ber * bits)))


def test_snr_at_ber_interpolates_log_linear():
    recs = [_rec(0, 1e-2), _rec(2, 1e-4)]
    assert snr_at_ber(recs, 1e-3) == pytest.approx(1.0)
    assert snr_at_ber(recs, 1e-2) == pytest.approx(0.0)
    assert math.isnan(snr_at_ber(recs, 1e-5))
    assert math.isnan(snr_at_ber([_rec(0, 1e-4), _rec(2, 1e-5)], 1e-3))


def test_snr_at_ber_zero_point():
    assert snr_at_ber([_rec(0, 1e-2), _rec(2, 0.0)], 1e-3) == 2


def test_detector_labels_distinguish_variants():
    a = DetectorSpec.make("mpd", label="mpd-a", damping=0.2)
    b = DetectorSpec.make("mpd", damping=0.6)
    assert b.label == "mpd"
    system = SystemSpec("sm", 2, 4, (a, b))
    recs = run_ber_sweep(TrialPlan(system, K=2, N=8, snr_db=(5.0,), max_trials=16, min_errors=0))
    assert [r.detector for r in recs] == ["mpd-a", "mpd"]


def test_mpd_invariants_clean_over_sweep():
    plan = TrialPlan(_sm("mpd", "hybrid", n_t=4), K=8, N=32, snr_db=(0.0, 10.0),
                     min_errors=0, max_trials=64)
    assert all(r.violations == 0 for r in run_ber_sweep(plan))


def test_multistream_bits():
    system = SystemSpec("mm", 4, 2, (DetectorSpec.make("mmse"),), streams=4)
    assert system.bits_per_user == 4
    (r,) = run_ber_sweep(TrialPlan(system, K=4, N=32, snr_db=(5.0,), max_trials=10, min_errors=0))
    assert r.K == 4
    assert r.bits == 10 * 4 * 4
    assert np.isfinite(r.ber)
