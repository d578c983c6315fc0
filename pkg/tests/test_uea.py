import json

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from liehodge import lie_core, models, uea
from liehodge.errors import CapError, FormError, InputError, ModelError

SL2 = models.sl2r()          # H, E, F
H, E, F = 0, 1, 2
STD = models.sl2r_standard_module()


def _word_product(rep, word):
    M = np.eye(rep.dim_v, dtype=complex)
    for g in word:
        M = M @ rep.generators[g]
    return M


def test_fe_normal_form():
    x = uea.nf((F, E), frame=SL2)
    expected = uea.nf((E, F), frame=SL2, engine=x.engine) - x.engine.generator(H)
    assert (x - expected).max_abs() == 0
    assert x.coefficient((E, F)) == 1 and x.coefficient((H,)) == -1


def test_sl2_casimir_normal_form():
    om = uea.casimir(SL2)
    assert om.coefficient((H, H)) == pytest.approx(1 / 8)
    assert om.coefficient((E, F)) == pytest.approx(1 / 2)
    assert om.coefficient((H,)) == pytest.approx(-1 / 4)
    assert len(om.terms) == 3
    np.testing.assert_allclose(uea.evaluate(om, STD), 3 / 8 * np.eye(2), atol=1e-15)


def test_su2_omega_bar_on_spin_half():
    fr = lie_core.cartan_frame(models.su2())
    rep = models.spin_half_module().in_frame(fr)
    np.testing.assert_allclose(uea.evaluate(uea.omega_bar(fr), rep), -3 / 8 * np.eye(2), atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=0, max_size=5), st.integers(0, 2**31))
def test_normal_form_is_a_homomorphism_image(word, seed):
    """Evaluating the normal form in a faithful module reproduces the raw product."""
    x = uea.nf(word, frame=SL2)
    np.testing.assert_allclose(uea.evaluate(x, STD), _word_product(STD, word), atol=1e-12)
    y = uea.nf(word, engine=x.engine, seed=seed)
    assert (x - y).max_abs() < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=5), st.permutations([0, 1, 2]))
def test_normal_form_under_other_orders(word, order):
    fr = lie_core.cartan_frame(models.su2())
    rep = models.spin_half_module().in_frame(fr)
    x = uea.nf(word, frame=fr, order=order)
    np.testing.assert_allclose(uea.evaluate(x, rep), _word_product(rep, word), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 2), max_size=2), st.lists(st.integers(0, 2), max_size=2),
       st.lists(st.integers(0, 2), max_size=2))
def test_associativity(a, b, c):
    eng = uea.Enveloping(SL2)
    x, y, z = eng.word(a), eng.word(b), eng.word(c)
    assert ((x * y) * z - x * (y * z)).max_abs() < 1e-12


def test_randomized_descent_agrees_with_cached():
    eng = uea.Enveloping(SL2)
    x = eng.word((F, F, E, H, E))
    for seed in range(5):
        assert (eng.renormalize(x, seed) - x).max_abs() < 1e-12


def test_casimir_identity_and_centrality_sl2():
    fr = lie_core.cartan_frame(SL2)
    eng = uea.Enveloping(fr)
    om = uea.casimir(fr, engine=eng)
    combo = om - 2 * uea.casimir_k(fr, engine=eng) - uea.omega_bar(fr, engine=eng)
    assert combo.max_abs() < 1e-12
    assert uea.centrality_residual(om) < 1e-12


def test_oscillator_casimir_is_central():
    om = uea.casimir(models.oscillator())
    assert uea.centrality_residual(om) < 1e-12
    assert om.degree == 2


def test_heisenberg_has_no_casimir():
    with pytest.raises(FormError):
        uea.casimir(models.heisenberg())
    with pytest.raises(FormError):
        uea.casimir(models.heisenberg(), B=np.diag([1.0, 1.0, 0.0]))


def test_casimir_acts_as_scalar_on_irreps():
    fr = lie_core.cartan_frame(models.su2())
    om = uea.casimir(fr)
    for rep in (models.spin_half_module().in_frame(fr), models.adjoint_module(fr)):
        val = uea.evaluate(om, rep)
        np.testing.assert_allclose(val, val[0, 0] * np.eye(rep.dim_v), atol=1e-13)
    # adjoint Casimir of the Killing form is the identity
    np.testing.assert_allclose(uea.evaluate(om, models.adjoint_module(fr)), np.eye(3), atol=1e-13)


def test_degree_cap():
    eng = uea.Enveloping(SL2, degree_cap=3)
    with pytest.raises(CapError):
        eng.word((0, 1, 2, 0))
    with pytest.raises(CapError):
        uea.centrality_residual(eng.word((0, 1, 2)))


def test_bad_order_and_index():
    with pytest.raises(InputError):
        uea.Enveloping(SL2, order=(0, 0, 1))
    with pytest.raises(InputError):
        uea.Enveloping(SL2).word((3,))


def test_mixing_engines_is_rejected():
    a, b = uea.Enveloping(SL2), uea.Enveloping(SL2)
    with pytest.raises(InputError):
        a.generator(0) + b.generator(0)


def test_json_round_trip():
    eng = uea.Enveloping(SL2, order=(1, 0, 2))
    x = eng.word((F, E, H), 2.5) + eng.unit(1j)
    d = json.loads(json.dumps(x.to_json()))
    y = uea.element_from_json(d, eng)
    assert (x - y).max_abs() == 0


def test_ad_scaling_against_matrices():
    """exp(tH) E^l exp(-tH) in the defining module equals e^{2lt} E^l."""
    for l in (1, 2, 3):
        for t in (-1.0, -0.3, 0.5, 1.0):
            pred, computed, res = uea.ad_scaling_check(SL2, [1.0, 0, 0], (E,) * l, t)
            assert res < 1e-10 * pred
            g = scipy.linalg.expm(t * STD.generators[H])
            conj = g @ np.linalg.matrix_power(STD.generators[E], l) @ np.linalg.inv(g)
            np.testing.assert_allclose(uea.evaluate(computed, STD), conj, atol=1e-12)
            assert pred == pytest.approx(np.exp(2 * l * t), rel=1e-14)


def test_ad_scaling_iwasawa_basis():
    spec = models.sl2r_iwasawa()             # K, H, E
    for l in (1, 2, 3):
        for t in np.linspace(-1, 1, 5):
            pred, _, res = uea.ad_scaling_check(spec, [0, 1.0, 0], (2,) * l, t)
            assert res <= 1e-10 * pred


def test_ad_scaling_rejects_non_root():
    with pytest.raises(ModelError):
        uea.ad_scaling_check(SL2, [0, 1.0, 0], (H,), 0.5)
