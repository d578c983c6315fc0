"""Command-line front end.

    liehodge validate  ALGEBRA [--module M]
    liehodge laplacian ALGEBRA [--module M] [--degree q] [--out FILE]
    liehodge kuga      ALGEBRA [--module M]
    liehodge betti     ALGEBRA [--module M]
    liehodge casimir   ALGEBRA [--module M]
    liehodge semigroup [ALGEBRA] [--module M] [--degree q] [--t T] [--order K] [--nodes N]
    liehodge spherical [ELEMENT] [--nodes N]
    liehodge report-all [--seed S] [--out FILE]

ALGEBRA is a JSON path or the name of a bundled example (su2, sl2r,
heisenberg, abelian2, ...).  M is ``trivial``, ``adjoint`` or a module JSON
path / bundled module name; module generators are read in the input basis.

Exit codes: 0 pass, 1 identity failure, 2 numerical warning under --strict,
3 parse or IO error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import cochain, group_numerics, lie_core, models, semigroup, uea
from .errors import FrameError, LieHodgeError

DATA = Path(__file__).resolve().parent / "data"
DEFAULT_SEED = 20240611
CORPUS = ("su2", "sl2r", "heisenberg", "abelian2", "abelian3", "oscillator")

EXIT_PASS, EXIT_FAIL, EXIT_WARN, EXIT_IO = 0, 1, 2, 3

SIGN_CONVENTIONS = {
    "inner_product": "B_theta(X, Y) = -B(X, theta Y)",
    "delta_wedge": "(-1)^u with u counted from 1",
    "delta_circ_closed_form": "I (x) sum tau_j^* tau_j + sum_ij Der(E_ij) (x) [tau_i, tau_j^*]",
    "delta_circ_wedge": "sum_k Der(cadj*_k) (x) tau_k",
    "delta_wedge_circ": "sum_k Der(cadj_k) (x) tau_k^*",
    "square_circ": "Delta_circ - Delta_0 (x) I",
    "kuga_unitary": "[[A + B_k, C_p], [-C_p, A + 3 B_k]] + D, A = sum tau^* tau",
    "kuga_cartan": "A + B_k + C_p + D, A = tau(Omega_G)",
}


class UsageError(Exception):
    """Bad input files or arguments; maps to exit code 3."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    spec_path: str | None = None
    rep_path: str = "trivial"
    degree: int | None = None
    t: float = 0.5
    order: int = 12
    nodes: int | None = None
    seed: int = DEFAULT_SEED
    strict: bool = False
    out_path: str | None = None
    tolerance: float | None = None


# -- input -----------------------------------------------------------------------

def _resolve(path, sub=""):
    p = Path(path)
    if p.exists():
        return p
    for cand in (DATA / sub / p.name, DATA / sub / f"{p.name}.json"):
        if cand.exists():
            return cand
    raise UsageError(f"file not found: {path}")


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: "
                         f"{exc.msg}") from exc


def load_algebra(path):
    try:
        return lie_core.algebra_from_dict(_read_json(_resolve(path)))
    except (LieHodgeError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{path}: {exc}") from exc


def load_rep(name, spec, frame):
    if name in (None, "trivial"):
        return models.trivial_module(spec.dim)
    if name == "adjoint":
        return models.adjoint_module(frame)
    try:
        rep = lie_core.module_from_dict(_read_json(_resolve(name, "modules")))
    except (LieHodgeError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{name}: {exc}") from exc
    if rep.n != spec.dim:
        raise UsageError(f"module has {rep.n} generators, algebra has dimension {spec.dim}")
    return rep.in_frame(frame)


def _setup(cfg):
    if cfg.spec_path is None:
        raise UsageError(f"{cfg.command} needs an algebra file")
    spec = load_algebra(cfg.spec_path)
    try:
        frame = lie_core.build_frame(spec)
    except LieHodgeError as exc:
        raise UsageError(f"{cfg.spec_path}: {exc}") from exc
    return spec, frame, load_rep(cfg.rep_path, spec, frame)


def _tol(cfg, default):
    return default if cfg.tolerance is None else cfg.tolerance


def _check(name, residual, tol):
    return {"name": name, "residual": float(residual), "tolerance": tol,
            "passed": bool(residual <= tol)}


def _passed(checks):
    return all(c["passed"] for c in checks)


# -- commands ---------------------------------------------------------------------

def cmd_validate(cfg):
    spec = load_algebra(cfg.spec_path)
    rep_ = lie_core.validate_algebra(spec)
    tol = _tol(cfg, 1e-12)
    checks = [_check(f"algebra.{k}", v, tol) for k, v in rep_.residuals.items()]
    out = {"command": "validate", "algebra": spec.labels}
    try:
        frame = lie_core.build_frame(spec)
        checks += [_check(f"frame.{k}", v, tol) for k, v in frame.residuals.items()]
        checks.append(_check("frame.musical", lie_core.musical_residual(frame), tol))
        out["frame"] = {"kind": "cartan" if frame.has_involution else "metric",
                        "k_indices": [i + 1 for i in frame.k_indices],
                        "p_indices": [i + 1 for i in frame.p_indices],
                        "change_of_basis": frame.change_of_basis.tolist()}
        if cfg.rep_path not in (None, "trivial"):
            rep = load_rep(cfg.rep_path, spec, frame)
            mrep = lie_core.validate_module(rep, frame)
            checks += [_check(f"module.{k}", v, _tol(cfg, 1e-10)) for k, v in mrep.residuals.items()]
    except FrameError as exc:
        checks.append({"name": "frame", "passed": False, "error": str(exc)})
    out["checks"] = checks
    out["passed"] = _passed(checks)
    return out


def _laplacian_suite(frame, rep, q, tol_d=1e-12, tol=1e-10):
    n = frame.dim
    checks = []
    d = cochain.d_full(frame, rep, q).matrix if q < n else None
    if q < n - 1:
        d2 = cochain.d_full(frame, rep, q + 1).matrix
        scale = max(1.0, np.linalg.norm(d2, 2) * np.linalg.norm(d, 2))
        checks.append(_check("d_squared", np.abs(d2 @ d).max() / scale, tol_d))
    if q > 0:
        do, dw = cochain.delta_parts(frame, rep, q)
        oracle = cochain.delta_oracle(frame, rep, q).matrix
        checks.append(_check("adjointness", np.abs(do.matrix + dw.matrix - oracle).max(), tol))
    L = cochain.laplacian(frame, rep, q).matrix
    comps = cochain.laplacian_components(frame, rep, q)
    assemblies = cochain.component_assemblies(frame, rep, q)
    checks.append(_check("component_sum", np.abs(sum(c.matrix for c in comps) - L).max(), tol))
    for name, c, a in zip(("circ", "wedge", "circ_wedge", "wedge_circ"), comps, assemblies):
        checks.append(_check(f"component_{name}", np.abs(c.matrix - a.matrix).max(), tol))
    G = cochain.cochain_gram(rep, n, q)
    GL = G @ L
    checks.append(_check("hermitian", np.abs(GL - GL.conj().T).max(), tol))
    Gh = np.linalg.cholesky(G)
    sym = np.linalg.solve(Gh, np.linalg.solve(Gh, GL.conj().T).conj().T)
    eig = np.linalg.eigvalsh(0.5 * (sym + sym.conj().T))
    checks.append(_check("positive_semidefinite", max(0.0, -float(eig.min())) if eig.size else 0.0, tol))
    checks.append(_check("square_circ_closed_form",
                         np.abs(cochain.box_circ(frame, rep, q).matrix
                                - cochain.square_circ(frame, rep, q).matrix).max(), tol))
    return checks, L, np.sort(eig)


def cmd_laplacian(cfg):
    spec, frame, rep = _setup(cfg)
    degrees = range(frame.dim + 1) if cfg.degree is None else [cfg.degree]
    _degree_ok(cfg, frame)
    out = {"command": "laplacian", "conventions": SIGN_CONVENTIONS, "degrees": []}
    ops = {}
    for q in degrees:
        checks, L, eig = _laplacian_suite(frame, rep, q, _tol(cfg, 1e-12), _tol(cfg, 1e-10))
        out["degrees"].append({"q": q, "checks": checks, "spectrum": eig.tolist()})
        ops[str(q)] = cochain.LinOp(L, q, q).to_json()
    out["passed"] = all(_passed(d["checks"]) for d in out["degrees"])
    out["_artifact"] = {"operators": ops}
    return out


def _degree_ok(cfg, frame):
    if cfg.degree is not None and not 0 <= cfg.degree <= frame.dim:
        raise UsageError(f"degree {cfg.degree} outside [0, {frame.dim}]")


def cmd_kuga(cfg):
    spec, frame, rep = _setup(cfg)
    try:
        kb = cochain.kuga_blocks(frame, rep)
    except LieHodgeError as exc:
        raise UsageError(str(exc)) from exc
    L1 = cochain.laplacian(frame, rep, 1).matrix
    res = np.abs(kb.block.matrix - L1).max()
    checks = [_check("kuga_blocks", res, _tol(cfg, 1e-10))]
    return {"command": "kuga", "kind": kb.kind, "checks": checks, "passed": _passed(checks),
            "conventions": {k: SIGN_CONVENTIONS[k] for k in ("kuga_unitary", "kuga_cartan")}}


def cmd_betti(cfg):
    spec, frame, rep = _setup(cfg)
    table, checks = [], []
    for q in range(frame.dim + 1):
        b = cochain.betti(frame, rep, q)
        table.append(b.value)
        checks.append({"name": f"rank_check_{q}", "value": b.value, "rank_check": b.rank_check,
                       "near_threshold": b.near_threshold, "passed": b.consistent})
    euler_complex = sum((-1) ** q * rep.dim_v * cochain.CochainBasis(q, frame.dim, 1).size
                        for q in range(frame.dim + 1))
    euler_betti = sum((-1) ** q * b for q, b in enumerate(table))
    checks.append({"name": "euler_characteristic", "value": euler_betti,
                   "expected": euler_complex, "passed": euler_betti == euler_complex})
    return {"command": "betti", "betti": table, "checks": checks, "passed": _passed(checks),
            "_summary": " ".join(str(b) for b in table)}


def cmd_casimir(cfg):
    spec, frame, rep = _setup(cfg)
    eng = uea.Enveloping(frame)
    checks = []
    out = {"command": "casimir"}
    tol = _tol(cfg, 1e-12)
    if frame.form is not None:
        om = uea.casimir(frame, engine=eng)
        out["casimir"] = om.to_json()
        checks.append(_check("centrality", uea.centrality_residual(om), tol))
        if frame.has_involution:
            ident = om - 2 * uea.casimir_k(frame, engine=eng) - uea.omega_bar(frame, engine=eng)
            checks.append(_check("omega_bar_identity", ident.max_abs(), tol))
    else:
        out["casimir"] = None
    ob = uea.omega_bar(frame, engine=eng)
    out["omega_bar"] = ob.to_json()
    val = uea.evaluate(ob, rep)
    out["omega_bar_on_module"] = [[float(z.real), float(z.imag)] for z in val.ravel()]
    if rep.unitary:
        L0 = cochain.laplacian(frame, rep, 0).matrix
        checks.append(_check("laplacian_0_vs_omega_bar", np.abs(L0 + val).max(), tol))
    out["checks"] = checks
    out["passed"] = _passed(checks)
    return out


def _random_split(rng, dim=8, ratio=0.1):
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    A = (Q * rng.uniform(0.5, 5.0, dim)) @ Q.conj().T
    A = 0.5 * (A + A.conj().T)
    B = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    B *= ratio * np.linalg.norm(A, 2) / np.linalg.norm(B, 2)
    return A, B


def cmd_semigroup(cfg):
    cfg = dataclasses.replace(cfg, nodes=cfg.nodes or 32)
    if cfg.t <= 0 or cfg.order < 0 or cfg.nodes < 2:
        raise UsageError("--t must be positive, --order nonnegative, --nodes at least 2")
    if cfg.spec_path is not None:
        spec, frame, rep = _setup(cfg)
        _degree_ok(cfg, frame)
        q = 1 if cfg.degree is None else cfg.degree
        split = semigroup.heat_split(frame, rep, q, cfg.order, cfg.nodes)
        source = {"degree": q}
    else:
        rng = np.random.default_rng(cfg.seed)
        A, B = _random_split(rng)
        split = semigroup.PerturbationSplit(A, B, order=cfg.order, quad_nodes=cfg.nodes)
        source = {"random_split": {"dim": 8, "seed": cfg.seed}}
    rep_ = semigroup.semigroup_report(split, cfg.t)
    tol = _tol(cfg, 1e-6)
    checks = [_check("measured_error", rep_["measured_error"], tol),
              _check("within_majorant", rep_["measured_error"] - rep_["majorant_tail"], 1e-8)]
    norms = np.array(rep_["per_term_norms"])
    maj = np.array(rep_["majorant_terms"])
    checks.append(_check("per_term_domination", float(np.max(norms - maj * (1 + 1e-9))), 1e-12))
    return {"command": "semigroup", **source, "report": rep_, "checks": checks,
            "passed": _passed(checks), "_warnings": rep_.pop("warnings")}


def cmd_spherical(cfg):
    try:
        cfgs = group_numerics.SphericalConfig(cfg.nodes or 256)
    except LieHodgeError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.spec_path is not None:
        d = _read_json(_resolve(cfg.spec_path))
        if d.get("model", "sl2r") != "sl2r":
            raise UsageError("only the sl2r model supports these operations")
        try:
            elements = [group_numerics.GroupElement("sl2r", d["element"])]
        except (KeyError, LieHodgeError) as exc:
            raise UsageError(f"{cfg.spec_path}: {exc}") from exc
    else:
        rng = np.random.default_rng(cfg.seed)
        elements = [group_numerics.GroupElement("sl2r", group_numerics.random_sl2r(rng))
                    for _ in range(20)]
    rows, checks = [], []
    worst_rec = worst_inv = 0.0
    rng = np.random.default_rng(cfg.seed + 1)
    for g in elements:
        f = group_numerics.iwasawa_nak(g)
        k1, a, k2 = group_numerics.cartan_kak(g)
        phi = group_numerics.spherical_phi0(g, cfgs)
        worst_rec = max(worst_rec, np.abs(f.product() - g.matrix).max(),
                        np.abs(k1 @ a @ k2 - g.matrix).max())
        kk = group_numerics.rotation(rng.uniform(0, 2 * np.pi))
        kr = group_numerics.rotation(rng.uniform(0, 2 * np.pi))
        worst_inv = max(worst_inv,
                        abs(group_numerics.spherical_phi0(g.inverse(), cfgs, warn=False) - phi),
                        abs(group_numerics.spherical_phi0(kk @ g.matrix @ kr, cfgs, warn=False) - phi))
        rows.append({"element": g.matrix.tolist(), "H": float(f.H[0, 0]),
                     "a_plus": float(a[0, 0]), "norm_p": group_numerics.norm_p(g), "phi0": phi})
    checks.append(_check("reconstruction", worst_rec, _tol(cfg, 1e-12)))
    checks.append(_check("spherical_invariance", worst_inv, 1e-8))
    checks.append({"name": "phi0_identity", "value": group_numerics.spherical_phi0(np.eye(2), cfgs),
                   "passed": group_numerics.spherical_phi0(np.eye(2), cfgs) == 1.0})
    return {"command": "spherical", "conventions": group_numerics.CONVENTIONS,
            "elements": rows, "checks": checks, "passed": _passed(checks)}


def cmd_report_all(cfg):
    jobs = []
    for name in CORPUS:
        mods = ["trivial", "adjoint"]
        if name == "su2":
            mods.append("su2_spin_half")
        if name == "sl2r":
            mods += ["sl2r_adjoint", "sl2r_standard"]
        for m in mods:
            base = dataclasses.replace(cfg, spec_path=name, rep_path=m, out_path=None, degree=None)
            jobs.append((f"laplacian/{name}/{m}", cmd_laplacian, base))
            jobs.append((f"betti/{name}/{m}", cmd_betti, base))
            if name in ("sl2r", "su2") and m != "sl2r_standard":
                jobs.append((f"kuga/{name}/{m}", cmd_kuga, base))
        jobs.append((f"validate/{name}", cmd_validate,
                     dataclasses.replace(cfg, spec_path=name, rep_path="trivial")))
    for name in ("su2", "sl2r", "oscillator"):
        m = "su2_spin_half" if name == "su2" else "trivial"
        jobs.append((f"casimir/{name}", cmd_casimir, dataclasses.replace(cfg, spec_path=name, rep_path=m)))
    for t in (0.1, 0.5, 1.0):
        jobs.append((f"semigroup/random/t={t}", cmd_semigroup,
                     dataclasses.replace(cfg, spec_path=None, t=t)))
    jobs.append(("spherical/random", cmd_spherical,
                 dataclasses.replace(cfg, spec_path=None, nodes=256)))

    def run(job):
        name, fn, c = job
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = fn(c)
        res.pop("_artifact", None)
        res.pop("_summary", None)
        res["_warnings"] = res.get("_warnings", []) + [str(w.message) for w in caught]
        return name, res

    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    suites = {name: res for name, res in results}
    warns = sorted({w for res in suites.values() for w in res.pop("_warnings")})
    return {"command": "report-all", "seed": cfg.seed, "suites": suites,
            "passed": all(r["passed"] for r in suites.values()), "_warnings": warns}


COMMANDS = {
    "validate": cmd_validate,
    "laplacian": cmd_laplacian,
    "kuga": cmd_kuga,
    "betti": cmd_betti,
    "casimir": cmd_casimir,
    "semigroup": cmd_semigroup,
    "spherical": cmd_spherical,
    "report-all": cmd_report_all,
}


def _threads():
    try:
        return max(1, int(os.environ.get("LIEHODGE_THREADS", "1")))
    except ValueError:
        return 1


# -- output ------------------------------------------------------------------

def _clean(obj, digits=10):
    """Round floats to ``digits`` significant digits for byte-stable output."""
    if isinstance(obj, dict):
        return {str(k): _clean(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v, digits) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return str(x)
        return float(f"{x:.{digits}g}") + 0.0
    return obj


def dumps(obj, exact=None):
    """Rounded report plus ``exact`` entries (operator exports) kept at full precision."""
    payload = _clean(obj)
    payload.update(exact or {})
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def _summary_lines(res):
    lines = []
    if "_summary" in res:
        lines.append(res["_summary"])
    if res.get("command") == "report-all":
        for name, sub in res["suites"].items():
            lines.append(f"{'PASS' if sub['passed'] else 'FAIL'}  {name}")
    else:
        for c in res.get("checks", []):
            val = c.get("residual", c.get("value", ""))
            lines.append(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}  {val}")
        for d in res.get("degrees", []):
            for c in d["checks"]:
                lines.append(f"{'PASS' if c['passed'] else 'FAIL'}  q={d['q']} {c['name']}  "
                             f"{c['residual']:.3e}")
    lines.append("passed" if res["passed"] else "FAILED")
    return lines


def build_parser():
    p = argparse.ArgumentParser(prog="liehodge", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("path", nargs="?", help="algebra JSON (or element JSON for spherical)")
    p.add_argument("--module", default="trivial")
    p.add_argument("--degree", type=int)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--order", type=int, default=12)
    p.add_argument("--nodes", type=int, help="quadrature nodes (32 for semigroup, 256 for spherical)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", help="write the JSON report here ('-' for stdout)")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--quiet", action="store_true", help="suppress the text summary")
    return p


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = COMMANDS[cfg.command](cfg)
    except (UsageError, LieHodgeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO
    warns = sorted(set(res.pop("_warnings", [])) | {str(w.message) for w in caught})
    res["warnings"] = warns
    artifact = res.pop("_artifact", None)
    summary = _summary_lines(res)
    res.pop("_summary", None)
    if cfg.out_path:
        text = dumps(res, artifact)
        if cfg.out_path == "-":
            stdout.write(text)
        else:
            try:
                Path(cfg.out_path).write_text(text)
            except OSError as exc:
                print(f"error: cannot write {cfg.out_path}: {exc}", file=stderr)
                return EXIT_IO
    if cfg.out_path != "-":
        for line in summary:
            print(line, file=stdout)
    for w in warns:
        print(f"warning: {w}", file=stderr)
    if not res["passed"]:
        return EXIT_FAIL
    if warns and cfg.strict:
        return EXIT_WARN
    return EXIT_PASS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.command, args.path, args.module, args.degree, args.t, args.order,
                    args.nodes, args.seed, args.strict, args.out, args.tolerance)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
