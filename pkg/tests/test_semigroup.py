import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

import oracles
from liehodge import cochain, lie_core, models, semigroup as sg
from liehodge.errors import ConvergenceWarning, InputError, MajorantError, ScalingError

# omega1 for phi = e^{-t}, psi = t^{-1/2} e^{-t}: 1/(w+1) + sqrt(pi/(w+1)) = 1/16
_X = (np.sqrt(np.pi + 0.25) - np.sqrt(np.pi)) / 2
OMEGA1_HALF_EXACT = 1 / _X**2 - 1


def _half_model(grid):
    return sg.MajorantData(grid, np.exp(-grid), grid ** -0.5 * np.exp(-grid))


def _quiet(fn, *a, **k):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        return fn(*a, **k)


# -- expm -------------------------------------------------------------------------

def test_expm_identities():
    assert np.array_equal(sg.expm(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(sg.expm(np.diag([1.0, -2.0])), np.diag(np.exp([1.0, -2.0])))
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(sg.expm(0.7 * J), [[np.cos(0.7), -np.sin(0.7)],
                                                 [np.sin(0.7), np.cos(0.7)]], atol=1e-15)
    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(sg.expm(N), np.eye(2) + N, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9))
def test_expm_inverse_and_determinant(entries):
    X = np.array(entries).reshape(3, 3)
    E = sg.expm(X)
    np.testing.assert_allclose(E @ sg.expm(-X), np.eye(3), atol=1e-10)
    assert np.linalg.det(E) == pytest.approx(np.exp(np.trace(X)), rel=1e-10)


def test_expm_errors():
    with pytest.raises(ScalingError):
        sg.expm(np.array([[1e6]]))
    with pytest.raises(InputError):
        sg.expm(np.array([[np.nan]]))
    with pytest.raises(InputError):
        sg.expm(np.ones((2, 3)))


# -- Dyson-Phillips ---------------------------------------------------------------

def test_scalar_dyson_terms_match_closed_form():
    a, b, t = 1.0, 0.5, 1.0
    res = _quiet(sg.dyson_phillips, sg.PerturbationSplit([[a]], [[b]]), t, order=10)
    terms = [oracles.dyson_term_scalar(a, b, t, k) for k in range(11)]
    np.testing.assert_allclose(res.per_term_norms, np.abs(terms), rtol=1e-12, atol=1e-16)
    assert res.S[0, 0].real == pytest.approx(sum(terms), abs=1e-14)
    assert abs(res.S[0, 0] - np.exp(-(a + b) * t)) <= res.error_estimate


def test_zero_perturbation_is_exact():
    A = np.diag([1.0, 2.0, 3.0])
    res = sg.dyson_phillips(sg.PerturbationSplit(A, np.zeros((3, 3))), 0.7)
    np.testing.assert_allclose(res.S, sg.expm(-0.7 * A), atol=1e-15)
    assert res.error_estimate == 0.0


def test_non_normal_generator():
    A = np.array([[1.0, 5.0], [0.0, 1.0]])          # defective: expm path
    B = np.array([[0.0, 0.1], [0.1, 0.0]])
    res = _quiet(sg.dyson_phillips, sg.PerturbationSplit(A, B), 0.5, order=12)
    err = np.linalg.norm(res.S - scipy.linalg.expm(-0.5 * (A + B)), 2)
    assert err <= 1e-9
    assert err <= res.error_estimate + 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([0.1, 0.5, 1.0]))
def test_error_within_majorant_tail(seed, t):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(4, 4))
    A = M @ M.T + 0.5 * np.eye(4)
    B = rng.normal(size=(4, 4))
    B *= 0.2 * np.linalg.norm(A, 2) / np.linalg.norm(B, 2)
    split = sg.PerturbationSplit(A, B)
    res = _quiet(sg.dyson_phillips, split, t, order=10)
    err = np.linalg.norm(res.S - sg.expm(-t * (A + B)), 2)
    assert err <= res.error_estimate + 1e-8
    # every term is dominated by its majorant
    assert np.all(np.array(res.per_term_norms) <= np.array(res.majorant_terms) * (1 + 1e-9) + 1e-15)


def test_convergence_warning_for_short_series():
    A = np.eye(2)
    B = 3.0 * np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.warns(ConvergenceWarning):
        sg.dyson_phillips(sg.PerturbationSplit(A, B), 1.0, order=2)


def test_split_validation():
    with pytest.raises(InputError):
        sg.PerturbationSplit(np.eye(2), np.eye(3))
    with pytest.raises(InputError):
        sg.PerturbationSplit(np.eye(2), np.eye(2), t_grid=[1.0, 0.5])
    with pytest.raises(InputError):
        sg.dyson_phillips(sg.PerturbationSplit(np.eye(2), np.eye(2)), 0.0)


# -- majorants --------------------------------------------------------------------

def test_laplace_integral_closed_forms():
    t = np.logspace(-4, 1.5, 400)
    assert sg.laplace_integral(t, np.exp(-t), 3.0) == pytest.approx(0.25, rel=1e-4)
    assert sg.laplace_integral(t, t ** -0.5 * np.exp(-t), 3.0) == pytest.approx(
        np.sqrt(np.pi / 4), rel=1e-3)
    assert sg.laplace_integral(t, np.exp(t), 0.5) == np.inf


def test_omega1_converges_to_closed_form():
    errs = []
    for lo, n in [(-3, 64), (-4, 200), (-5, 800)]:
        w = sg.find_omega1(_half_model(np.logspace(lo, 1, n)))
        errs.append(abs(w - OMEGA1_HALF_EXACT) / OMEGA1_HALF_EXACT)
    assert errs[0] < 0.05
    assert errs[2] < 1e-3
    assert errs[0] > errs[1] > errs[2]


def test_omega1_satisfies_its_conditions():
    grid = np.logspace(-3, 1, 64)
    data = _half_model(grid)
    w = sg.find_omega1(data)
    assert sg.laplace_integral(grid, 2 * data.phi_samples, w) <= 1.0
    assert sg.laplace_integral(grid, data.phi_samples + data.psi_samples, w) <= 1 / 16 + 1e-9


def test_convolutions_against_closed_form():
    grid = np.logspace(-3, 1, 64)
    rep = sg.majorant_theta(_half_model(grid), np.linspace(0.1, 5, 20), n_max=6)
    for n in range(7):
        exact = oracles.half_model_convolution(n, rep.t)
        np.testing.assert_allclose(rep.convolutions[n], exact, rtol=5e-3)
    assert rep.passed
    assert rep.monotone()


def test_zero_psi_gives_zero_convolutions():
    grid = np.logspace(-3, 1, 40)
    data = sg.MajorantData(grid, np.exp(-grid), np.zeros_like(grid))
    rep = sg.majorant_theta(data, n_max=3)
    assert np.abs(rep.convolutions[1:]).max() == 0


def test_majorant_errors():
    grid = np.logspace(-3, 1, 10)
    with pytest.raises(MajorantError):
        sg.MajorantData(grid, -np.ones(10), np.ones(10))
    with pytest.raises(MajorantError):
        sg.find_omega1(sg.MajorantData(grid, np.exp(grid), np.exp(grid)), cap=10.0)


def test_sampled_majorants_of_a_split():
    A = np.diag([1.0, 3.0])
    B = np.array([[0.0, 0.5], [0.5, 0.0]])
    data = sg.sample_majorants(sg.PerturbationSplit(A, B))
    np.testing.assert_allclose(data.phi_samples, np.exp(-data.t), rtol=1e-13)
    np.testing.assert_allclose(data.psi_samples, 0.5 * np.exp(-data.t), rtol=1e-13)


# -- heat flow on cochains ----------------------------------------------------------

def test_heat_decay_rate_su2():
    fr = lie_core.cartan_frame(models.su2())
    rep = models.trivial_module(3)
    v = np.array([1.0, -2.0, 0.5])
    for t in (0.1, 1.0, 3.0):
        np.testing.assert_allclose(sg.heat_apply(fr, rep, 1, t, v), np.exp(-t / 2) * v, atol=1e-14)


def test_heat_small_time_limit():
    fr = lie_core.cartan_frame(models.su2())
    rep = models.spin_half_module().in_frame(fr)
    L = cochain.laplacian(fr, rep, 1).matrix
    v = np.arange(6, dtype=float)
    for t in (1e-3, 1e-5):
        out = sg.heat_apply(fr, rep, 1, t, v)
        np.testing.assert_allclose((v - out) / t, L @ v, atol=10 * t * np.abs(L @ L @ v).max())


def test_heat_semigroup_law_and_harmonic_invariance():
    fr = lie_core.build_frame(models.heisenberg())
    rep = models.trivial_module(3)
    rng = np.random.default_rng(5)
    v = rng.normal(size=3)
    a = sg.heat_apply(fr, rep, 1, 0.3, sg.heat_apply(fr, rep, 1, 0.4, v))
    np.testing.assert_allclose(a, sg.heat_apply(fr, rep, 1, 0.7, v), atol=1e-14)
    L = cochain.laplacian(fr, rep, 1).matrix
    w, V = np.linalg.eigh(L)
    h = V[:, np.abs(w) < 1e-12] @ np.ones(2)
    np.testing.assert_allclose(sg.heat_apply(fr, rep, 1, 5.0, h), h, atol=1e-13)


def test_heat_split_dyson_matches_heat_apply():
    fr = lie_core.cartan_frame(models.su2())
    rep = models.spin_half_module().in_frame(fr)
    split = sg.heat_split(fr, rep, 1)
    np.testing.assert_allclose(split.A + split.B, cochain.laplacian(fr, rep, 1).matrix, atol=1e-15)
    report = sg.semigroup_report(split, 0.5)
    assert report["measured_error"] <= 1e-10
    assert report["measured_error"] <= report["majorant_tail"] + 1e-8
    assert len(report["per_term_norms"]) == report["K"] + 1


def test_heat_rejects_bad_input():
    fr = lie_core.cartan_frame(models.su2())
    rep = models.trivial_module(3)
    with pytest.raises(InputError):
        sg.heat_apply(fr, rep, 1, -1.0, np.ones(3))
    with pytest.raises(InputError):
        sg.heat_apply(fr, rep, 1, 1.0, np.ones(2))
