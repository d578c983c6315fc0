"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline;
they are also collected in the terminal summary.
"""

import itertools
import subprocess
import sys
import time
import warnings
from math import comb

import numpy as np
import pytest

import oracles
from liehodge import cochain, group_numerics as gn, lie_core, models, semigroup, uea


def _gram(rep, n, q):
    return np.kron(np.eye(comb(n, q)), rep.gram)


def _oracle_delta(frame, rep, q):
    """Gram adjoint of the brute-force d_{q-1}: C^q -> C^{q-1}."""
    n = frame.dim
    d = oracles.d_matrix(frame.structure, rep.generators, q - 1)
    G0, G1 = _gram(rep, n, q - 1), _gram(rep, n, q)
    return np.linalg.solve(G0, d.conj().T @ G1)


def _oracle_laplacian(frame, rep, q):
    n = frame.dim
    size = comb(n, q) * rep.dim_v
    L = np.zeros((size, size), complex)
    if q < n:
        L += _oracle_delta(frame, rep, q + 1) @ oracles.d_matrix(frame.structure, rep.generators, q)
    if q > 0:
        L += oracles.d_matrix(frame.structure, rep.generators, q - 1) @ _oracle_delta(frame, rep, q)
    return L


def test_criterion_01_d_squared(corpus, record):
    start = time.perf_counter()
    worst = 0.0
    for _, frame, rep in corpus:
        for q in range(frame.dim - 1):
            d0 = cochain.d_full(frame, rep, q).matrix
            d1 = cochain.d_full(frame, rep, q + 1).matrix
            scale = max(np.linalg.norm(d0, 2) * np.linalg.norm(d1, 2), 1.0)
            worst = max(worst, np.abs(d1 @ d0).max() / scale)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    record(1, "d^2 = 0", ok, f"residual {worst:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_02_adjointness(corpus, record):
    worst = 0.0
    for _, frame, rep in corpus:
        for q in range(1, frame.dim + 1):
            circ, wedge = cochain.delta_parts(frame, rep, q)
            ref = _oracle_delta(frame, rep, q)
            worst = max(worst, np.abs(circ.matrix + wedge.matrix - ref).max())
    ok = worst <= 1e-10
    record(2, "closed-form delta equals Gram adjoint of d", ok, f"residual {worst:.1e}")
    assert ok


def test_criterion_03_component_identity(corpus, record):
    worst = 0.0
    for _, frame, rep in corpus:
        for q in range(frame.dim + 1):
            total = sum(c.matrix for c in cochain.laplacian_components(frame, rep, q))
            worst = max(worst, np.abs(total - _oracle_laplacian(frame, rep, q)).max())
    ok = worst <= 1e-10
    record(3, "four Laplacian components sum to delta d + d delta", ok, f"residual {worst:.1e}")
    assert ok


def test_criterion_04_kuga_blocks(record):
    frame = lie_core.cartan_frame(models.sl2r())
    worst = 0.0
    kinds = []
    for rep in (models.trivial_module(3), models.adjoint_module(frame)):
        kb = cochain.kuga_blocks(frame, rep)
        kinds.append(kb.kind)
        worst = max(worst, np.abs(kb.block.matrix - _oracle_laplacian(frame, rep, 1)).max())
    ok = worst <= 1e-10
    record(4, "Kuga block operator equals Delta_1 on sl2r", ok,
           f"residual {worst:.1e}, kinds {kinds}")
    assert ok


def test_criterion_05_zeroth_laplacian(record):
    frame = lie_core.cartan_frame(models.su2())
    rep = models.spin_half_module().in_frame(frame)
    L0 = cochain.laplacian(frame, rep, 0).matrix
    via_uea = -uea.evaluate(uea.omega_bar(frame), rep)
    brute = _oracle_laplacian(frame, rep, 0)
    target = 3 / 8 * np.eye(2)
    worst = max(np.abs(L0 - target).max(), np.abs(via_uea - target).max(),
                np.abs(brute - target).max())
    ok = worst <= 1e-12
    record(5, "Delta_0 = -tau(Omega_bar) = 3/8 I on su2 spin-1/2", ok, f"residual {worst:.1e}")
    assert ok


def test_criterion_06_casimir(record):
    frame = lie_core.cartan_frame(models.sl2r())
    eng = uea.Enveloping(frame)
    omega = uea.casimir(frame, engine=eng)
    combo = omega - uea.casimir_k(frame, engine=eng) * eng.unit(2.0) - uea.omega_bar(frame, engine=eng)
    identity = combo.max_abs()
    central = uea.centrality_residual(omega)
    ok = identity <= 1e-12 and central <= 1e-12
    record(6, "Omega - 2 Omega_K - Omega_bar = 0 and Omega central", ok,
           f"identity {identity:.1e}, centrality {central:.1e}")
    assert ok


def test_criterion_07_box_derivation(record):
    frame = lie_core.cartan_frame(models.su2())
    rep = models.spin_half_module().in_frame(frame)
    worst = max(cochain.derivation_check(frame, rep, q) for q in (2, 3))
    ok = worst <= 1e-12
    record(7, "box_circ acts as a derivation at q = 2, 3", ok, f"residual {worst:.1e}")
    assert ok


def test_criterion_08_betti(record):
    cases = {
        "su2": (models.su2(), [1, 0, 0, 1]),
        "h3": (models.heisenberg(), [1, 2, 2, 1]),
    }
    for n in range(1, 5):
        cases[f"abelian{n}"] = (models.abelian(n), [comb(n, q) for q in range(n + 1)])
    ok = True
    details = []
    for name, (spec, expected) in cases.items():
        frame = lie_core.build_frame(spec)
        rep = models.trivial_module(spec.dim)
        res = [cochain.betti(frame, rep, q) for q in range(spec.dim + 1)]
        values = [r.value for r in res]
        exact = oracles.exact_betti_trivial(spec.entries(one_based=False), spec.dim)
        good = values == expected == exact and all(r.consistent for r in res)
        ok &= good
        details.append(f"{name} {values}")
    record(8, "Betti numbers", ok, "; ".join(details))
    assert ok


def _random_split(rng, n=8):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    A = (Q * rng.uniform(0.5, 5.0, n)) @ Q.conj().T
    B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    B *= 0.1 * np.linalg.norm(A, 2) / np.linalg.norm(B, 2)
    return A, B


def test_criterion_09_dyson_phillips(record):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst, over = 0.0, 0
    for _ in range(20):
        A, B = _random_split(rng)
        split = semigroup.PerturbationSplit(A, B, order=12)
        for t in (0.1, 0.5, 1.0):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = semigroup.dyson_phillips(split, t)
            err = np.linalg.norm(res.S - semigroup.expm(-t * (A + B)), 2)
            worst = max(worst, err)
            over += err > res.error_estimate + 1e-8
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and over == 0 and elapsed < 30
    record(9, "Dyson-Phillips partial sums match expm", ok,
           f"worst {worst:.1e}, {over} above tail, {elapsed:.1f} s")
    assert ok


def test_criterion_10_majorant_lemma(record):
    t_eval = np.linspace(0.1, 5.0, 25)
    grid = np.logspace(-3, 1, 64)
    half = semigroup.MajorantData(grid, np.exp(-grid), grid ** -0.5 * np.exp(-grid))
    rep_half = semigroup.majorant_theta(half, t_eval, n_max=8)

    rng = np.random.default_rng(4)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    A = (Q * np.array([1.0, 2.0, 3.0, 4.0])) @ Q.T
    B = rng.normal(size=(4, 4))
    B *= 0.5 / np.linalg.norm(B, 2)
    split = semigroup.PerturbationSplit(A, B)
    rep_op = semigroup.majorant_theta(semigroup.sample_majorants(split), t_eval, n_max=8)

    # termwise: ||Per^n(t)|| <= 2^{-n} t^{-2} e^{t omega1}
    termwise = True
    for j in (0, 4, 8, 12, 24):
        t = t_eval[j]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = semigroup.dyson_phillips(split, t, order=8)
        per = np.array(res.per_term_norms)
        termwise &= bool(np.all(per <= np.exp(rep_op.log_bounds[:, j])))
        termwise &= bool(np.all(per <= np.array(res.majorant_terms) * (1 + 1e-9) + 1e-15))
    ok = rep_half.passed and rep_op.passed and termwise
    record(10, "majorant lemma bounds for n <= 8", ok,
           f"omega1 half-model {rep_half.omega1:.1f}, 4x4 {rep_op.omega1:.2f}, termwise {termwise}")
    assert ok


def test_criterion_11_iwasawa_kak(record):
    rng = np.random.default_rng(11)
    recon, agree = 0.0, 0.0
    for _ in range(1000):
        x = gn.random_sl2r(rng, t_max=3.0)
        f1, f2 = gn.iwasawa_nak(x), gn.iwasawa_gram_schmidt(x)
        k1, a, k2 = gn.cartan_kak(x)
        recon = max(recon, np.abs(f1.product() - x).max(), np.abs(f2.product() - x).max(),
                    np.abs(k1 @ a @ k2 - x).max())
        agree = max(agree, *(np.abs(getattr(f1, f) - getattr(f2, f)).max() for f in "nakH"))
    ok = recon <= 1e-12 and agree <= 1e-10
    record(11, "Iwasawa and KAK factorizations", ok,
           f"reconstruction {recon:.1e}, paths agree {agree:.1e}")
    assert ok


def test_criterion_12_spherical(record):
    cfg = gn.SphericalConfig(quad_nodes=256)
    at_e = gn.spherical_phi0(np.eye(2), cfg)
    rng = np.random.default_rng(12)
    inv = 0.0
    for _ in range(100):
        x = gn.random_sl2r(rng)
        k1, k2 = gn.rotation(rng.uniform(0, 2 * np.pi)), gn.rotation(rng.uniform(0, 2 * np.pi))
        v = gn.spherical_phi0(x, cfg)
        inv = max(inv, abs(gn.spherical_phi0(k1 @ x @ k2, cfg) - v),
                  abs(gn.spherical_phi0(np.linalg.inv(x), cfg) - v))
    orders, _ = gn.richardson_orders(np.diag([np.e, 1 / np.e]))
    fit = gn.growth_fit(np.linspace(0.5, 5.0, 19))
    ok = at_e == 1.0 and inv <= 1e-8 and orders.min() >= 2.0 and fit.passed
    record(12, "spherical function checks", ok,
           f"phi0(e) = {at_e!r}, invariance {inv:.1e}, orders {np.round(orders, 1).tolist()}, "
           f"growth d = {fit.d:.2f}")
    assert ok


def test_criterion_13_ad_scaling(record):
    frame = models.sl2r().structure          # basis H, E, F
    eng = uea.Enveloping(frame)
    worst = 0.0
    for l in range(1, 4):
        for t in np.linspace(-1, 1, 9):
            pred, _, res = uea.ad_scaling_check(frame, [1.0, 0.0, 0.0], (1,) * l, t, engine=eng)
            worst = max(worst, res / pred, abs(pred - np.exp(2 * l * t)))
    ok = worst <= 1e-10
    record(13, "Ad(exp tH) scales E^l by e^{2lt}", ok, f"residual {worst:.1e}")
    assert ok


def test_criterion_14_cli_determinism(record):
    cmd = [sys.executable, "-m", "liehodge", "report-all", "--seed", "7", "--out", "-", "--quiet"]
    runs = [subprocess.run(cmd, capture_output=True, timeout=300) for _ in range(2)]
    same = runs[0].stdout == runs[1].stdout and len(runs[0].stdout) > 0
    ok = same and all(r.returncode == 0 for r in runs)
    record(14, "report-all --seed 7 is byte-identical", ok,
           f"{len(runs[0].stdout)} bytes, exit codes {[r.returncode for r in runs]}")
    assert ok
