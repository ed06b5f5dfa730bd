import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgtfourier.blocknum import ModalStack, block_resolvent_norm
from mgtfourier.model import SpectrumModel, assemble_block, build_spectrum, validate_params
from mgtfourier.sweep import (
    FitError,
    analyticity_index,
    default_window,
    fit_exponent,
    global_norms,
    global_resolvent_norm,
    log_grid,
    peak_window,
    resonance_families,
    resonance_frequencies,
    run_sweep,
    track_peaks,
)

from oracles import cofactor_inverse, full_resolvent_norm, generalized_norm

P = validate_params(alpha=1, beta=2, a=1, eta=1, phi=1)
SIGMA = build_spectrum(SpectrumModel.power_law(count=256))


# resonance_frequencies

def test_resonance_families_example():
    fa, fb = resonance_families(P, [1.0, 4.0])
    np.testing.assert_allclose(fa, [1, 2])
    np.testing.assert_allclose(fb, [math.sqrt(2), 2 * math.sqrt(2)])
    np.testing.assert_allclose(resonance_frequencies(P, [1.0, 4.0]), [1, math.sqrt(2), 2, 2 * math.sqrt(2)])


def test_resonance_family_a_speed():
    fa, _ = resonance_families(P.replace(a=2), [4.0])
    assert fa.tolist() == [4.0]


def test_resonance_count():
    f = resonance_frequencies(P, build_spectrum(SpectrumModel.power_law(count=100)))
    assert len(f) == 200 and np.all(f > 0) and np.all(np.diff(f) > 0)


def test_resonance_dedup_when_families_coincide():
    # both families agree on sigma values only through beta/alpha, so merge an explicit duplicate
    f = resonance_frequencies(P, [1.0, 2.0])
    assert len(f) == 3  # sqrt(2) appears in both families


# global_resolvent_norm

def test_single_mode_equals_block():
    s = global_resolvent_norm(P, [9.0], 2.5)
    assert s.norm == pytest.approx(block_resolvent_norm(assemble_block(P, 9.0), 2.5), rel=1e-12)
    assert s.argmax_mode == 1


def test_full_assembly_oracle_three_modes():
    rng = np.random.default_rng(3)
    for phi in (0.0, 0.5, 1.0):
        p = P.replace(phi=phi)
        for lam in rng.uniform(0, 50, 5):
            s = global_resolvent_norm(p, SIGMA[:3], lam)
            assert s.norm == pytest.approx(full_resolvent_norm(p, SIGMA[:3], lam), rel=1e-9)


def test_at_zero_is_sup_of_inverse_norms():
    p = P.replace(phi=0.5)
    s = global_resolvent_norm(p, SIGMA[:16], 0.0)
    ref = [generalized_norm(cofactor_inverse(assemble_block(p, x).B), assemble_block(p, x).W) for x in SIGMA[:16]]
    assert s.norm == pytest.approx(max(ref), rel=1e-10)
    assert s.argmax_mode == int(np.argmax(ref)) + 1


def test_sample_dominates_blocks():
    p = P.replace(phi=0.3)
    stack = ModalStack(p, SIGMA[:40])
    per = stack.resolvent_norms(77.0)
    s = global_resolvent_norm(p, stack, 77.0)
    assert s.norm == per.max() and per[s.argmax_mode - 1] == s.norm


@given(st.floats(0, 1), st.floats(1, 1e4))
def test_block_diagonality_four_modes(phi, lam):
    p = P.replace(phi=phi)
    s = global_resolvent_norm(p, SIGMA[:4], lam)
    assert s.norm == pytest.approx(full_resolvent_norm(p, SIGMA[:4], lam), rel=1e-9)


@pytest.mark.parametrize("lam", [5.0, 60.0, 300.0])
def test_monotone_truncation(lam):
    p = P.replace(phi=0.5)
    norms, _ = global_norms(ModalStack(p, SIGMA), [lam])
    vals = [global_resolvent_norm(p, SIGMA[:n], lam).norm for n in range(1, 257, 5)]
    assert np.all(np.diff(vals) >= 0)
    n_near = int(np.argmin(np.abs(resonance_families(p, SIGMA)[1] - lam))) + 1
    tail = [global_resolvent_norm(p, SIGMA[:n], lam).norm for n in range(n_near + 5, 257, 25)]
    assert np.all(np.abs(np.array(tail) - norms[0]) < 1e-12 * norms[0])


# run_sweep

def test_sweep_count_contract():
    sw = run_sweep(P, [1.0], 1.0, 10.0, 16)
    assert sw.n_base == 17 and len(sw) >= 17
    assert np.all(np.diff(sw.lam) > 0)
    assert sw.sample(0).lam == 1.0


def test_sweep_rejects_bad_grid():
    with pytest.raises(ValueError):
        log_grid(0.0, 10.0)
    with pytest.raises(ValueError):
        log_grid(10.0, 1.0)
    with pytest.raises(ValueError):
        log_grid(1.0, 10.0, 8)


def test_sweep_includes_refined_peaks():
    p = P.replace(phi=0.25)
    sw = run_sweep(p, SIGMA[:32], 1.0, 1e4)
    pk = track_peaks(p, SIGMA[:32])
    assert set(pk.lam_peak).issubset(set(sw.lam))
    assert sw.sup >= pk.peak.max() * (1 - 1e-12)
    assert sw.sup > 3.0 * run_sweep(p, SIGMA[:32], 1.0, 1e4, refine=False).sup / 4


def test_sweep_analytic_case_bounded():
    sw = run_sweep(P, SIGMA)
    prod = sw.lam * sw.norm
    assert np.isfinite(prod.max()) and prod.max() < 10


def test_sweep_exponentially_stable_case_bounded():
    sw = run_sweep(P.replace(phi=0.25), SIGMA)
    assert np.isfinite(sw.sup) and sw.sup < 10


@pytest.mark.parametrize("phi", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_sup_stable_under_mode_doubling(phi):
    p = P.replace(phi=phi)
    s256 = run_sweep(p, SIGMA).sup
    s512 = run_sweep(p, build_spectrum(SpectrumModel.power_law(count=512))).sup
    assert abs(s512 - s256) < 0.01 * s256


# track_peaks

def test_peaks_single_mode_in_bracket():
    pk = track_peaks(P, [SIGMA[0]])
    assert len(pk) == 1 and pk.mode.tolist() == [1]
    lb = pk.lam_res[0]
    assert lb / math.sqrt(2) <= pk.lam_peak[0] <= lb * math.sqrt(2)


def test_peaks_dominate_neighbours():
    p = P.replace(phi=0.25)
    pk = track_peaks(p, SIGMA[:64])
    stack = ModalStack(p, SIGMA[:64])
    for h in (1e-3, 1e-2):
        assert np.all(pk.peak >= stack.resolvent_norms(pk.lam_peak * (1 + h)) * (1 - 1e-9))
        assert np.all(pk.peak >= stack.resolvent_norms(pk.lam_peak * (1 - h)) * (1 - 1e-9))
    assert np.all(np.diff(pk.lam_res) > 0)


@pytest.mark.parametrize("phi", [0.0, 0.25, 0.5])
def test_peaks_flat_without_gevrey(phi):
    pk = track_peaks(P.replace(phi=phi), SIGMA)
    f = fit_exponent(pk.lam_peak, pk.peak, peak_window(pk.lam_peak))
    assert abs(f.slope) <= 0.05
    assert np.all(np.diff(pk.lam_peak) > 0)


def test_peaks_decay_like_inverse_lambda_when_analytic():
    pk = track_peaks(P, SIGMA)
    f = fit_exponent(pk.lam_peak, pk.lam_peak * pk.peak, peak_window(pk.lam_peak))
    assert abs(f.slope) <= 0.05


def test_peak_series_against_dense_oracle_phi_075():
    # modes whose resonances cover lambda in [1e2, 1e5]; the oracle assembles
    # the eight modes around each probe frequency densely
    p = P.replace(phi=0.75)
    lb = math.sqrt(2) * math.pi
    n = np.unique(np.round(np.logspace(math.log10(1e2 / lb), math.log10(1e5 / lb), 24)).astype(int))
    sigma = build_spectrum(SpectrumModel.power_law(count=int(n.max()) + 4))
    pk = track_peaks(p, sigma, modes=n - 1)
    oracle = []
    for k, lam in zip(n, pk.lam_peak):
        lo = max(k - 4, 0)
        oracle.append(full_resolvent_norm(p, sigma[lo:k + 4], lam))
    tool = fit_exponent(pk.lam_peak, pk.peak).slope
    ref = fit_exponent(pk.lam_peak, np.array(oracle)).slope
    assert abs(tool - ref) <= 0.01


# fit_exponent

def test_fit_constant():
    lam = np.logspace(0, 3, 20)
    f = fit_exponent(lam, np.full(20, 5.0))
    assert f.slope == 0.0 and f.r_squared == 1.0 and f.n_points == 20


def test_fit_square():
    lam = np.logspace(0, 4, 33)
    f = fit_exponent(lam, lam**2)
    assert abs(f.slope - 2) <= 1e-12


@pytest.mark.parametrize("k", [-2, -1, -0.5, 0, 0.5, 1, 2])
def test_fit_synthetic_slopes(k):
    lam = np.logspace(-1, 5, 97)
    assert abs(fit_exponent(lam, 3.7 * lam**k).slope - k) <= 1e-10


def test_fit_window_selection():
    lam = np.logspace(0, 6, 61)
    vals = np.where(lam < 1e3, lam, lam**-1)
    f = fit_exponent(lam, vals, (1e3, 1e6))
    assert abs(f.slope + 1) < 1e-12 and f.window == (1e3, 1e6)


def test_fit_rejections():
    lam = np.logspace(0, 3, 20)
    with pytest.raises(FitError, match="points"):
        fit_exponent(lam[:5], lam[:5])
    with pytest.raises(FitError, match="decades"):
        fit_exponent(np.linspace(1, 10, 20), np.linspace(1, 10, 20))
    with pytest.raises(FitError, match="positive"):
        fit_exponent(lam, np.r_[0.0, lam[1:]])


@given(st.floats(-3, 3), st.floats(0.01, 100))
def test_fit_recovers_power_laws(k, c):
    lam = np.logspace(0, 4, 41)
    f = fit_exponent(lam, c * lam**k)
    assert abs(f.slope - k) <= 1e-10 and f.r_squared == pytest.approx(1.0)


def test_default_window():
    lo, hi = default_window(1e6)
    assert hi == pytest.approx(10**5.5) and lo == pytest.approx(10**3.5)


# analyticity_index

def test_analyticity_toy_constant():
    lam = np.logspace(0, 4, 50)
    idx = analyticity_index(lam, 7.0 / lam)
    assert idx.sup == pytest.approx(7.0) and abs(idx.trend.slope) < 1e-12
    assert np.all(np.diff(idx.running_sup) >= 0)


def test_analyticity_phi_one_bounded():
    pk = track_peaks(P, SIGMA)
    assert abs(analyticity_index(pk.lam_peak, pk.peak).trend.slope) <= 0.05


def test_analyticity_phi_quarter_grows():
    pk = track_peaks(P.replace(phi=0.25), SIGMA)
    assert analyticity_index(pk.lam_peak, pk.peak).trend.slope == pytest.approx(1.0, abs=0.1)


def test_analyticity_needs_span():
    with pytest.raises(FitError):
        analyticity_index(np.linspace(1, 10, 30), np.ones(30))
