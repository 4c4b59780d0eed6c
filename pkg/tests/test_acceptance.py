"""Exit criteria of the build, one test per criterion.

Run with ``pytest -m acceptance`` (or ``python3 tests/test_acceptance.py``);
each criterion prints a single PASS/FAIL line.
"""

import functools
import subprocess
import sys

import numpy as np
import pytest

from lstar.cat0 import (alexandrov_angle, bounded_curvature_experiment, comparison_angle,
                        direction_to, exp_discontinuity_demo, l2_distance, l2_midpoint,
                        random_direction, random_l2_point, tangent_cone_check)
from lstar.core import decompose_ideals, verify_lstar_axiom
from lstar.curvature import (curvature_operator, reconstruct_lstar, riemann_tensor,
                             sectional_curvatures, symmetry_report)
from lstar.factory import FamilySpec, all_specs, make_pair
from lstar.pairs import (classify_type, direct_sum_pairs, dualize, flat_pair, rank,
                         sign_decompose)

from conftest import record_criterion

pytestmark = pytest.mark.acceptance

SCALES = (0.5, 1.0, 2.0)
A_TYPES = ("ai", "aii", "aiii", "a")


def factory_specs(scales=(1.0,)):
    """All families with p, q, n <= 4, both signs, plus the centre-free A-type variants."""
    specs = list(all_specs(4, scales=scales))
    extra = [FamilySpec(s.family, s.type_sign, p=s.p, q=s.q, n=s.n, scale=s.scale,
                        with_center=False)
             for s in specs if s.family in A_TYPES]
    return specs + extra


def label(spec):
    core = ",".join(str(v) for v in spec.params)
    z = "" if spec.family not in A_TYPES else ("+z" if spec.with_center else "")
    return f"{spec.family}({core}){z}/{spec.type_sign}/x{spec.scale:g}"


@functools.lru_cache(maxsize=None)
def pair_of(spec):
    return make_pair(spec)


@functools.lru_cache(maxsize=None)
def curvature_of(spec):
    data = riemann_tensor(pair_of(spec))
    _, cert = curvature_operator(data, 1e-9)
    return data, cert


def check(number, failures, total, what):
    ok = not failures
    detail = f"{what}: {total - len(failures)}/{total} ok"
    if failures:
        detail += f"; first failure {failures[0]}"
    record_criterion(number, ok, detail)
    assert ok, detail


def test_criterion_01_lstar_axiom():
    specs = factory_specs(SCALES)
    failures = []
    worst = 0.0
    for spec in specs:
        rep = verify_lstar_axiom(make_pair(spec).algebra, 1e-10)
        worst = max(worst, rep.max_residual)
        if rep.max_residual > 1e-10:
            failures.append((label(spec), rep.max_residual))
    check(1, failures, len(specs), f"L* axiom residual <= 1e-10 (worst {worst:.1e})")


def test_criterion_02_curvature_sign():
    rng = np.random.default_rng(2)
    specs = factory_specs()
    failures = []
    for spec in specs:
        data, cert = curvature_of(spec)
        ev = cert.eigenvalues
        if spec.compact:
            ok = ev.size == 0 or ev.min() >= -1e-9
            ok = ok and cert.label in ("NNCO", "flat")
        else:
            ok = ev.size == 0 or ev.max() <= 1e-9
            ok = ok and cert.label in ("NPCO", "flat")
        if data.p_dim >= 2:
            X, Y = rng.standard_normal((2, 200, data.p_dim))
            sec = sectional_curvatures(data, X, Y)
            ok = ok and (sec.min() >= -1e-9 if spec.compact else sec.max() <= 1e-9)
        if not ok:
            failures.append((label(spec), cert.label))
    check(2, failures, len(specs), "operator certificate and 200 sampled planes")


def swapped(types):
    flip = {"simple-compact": "simple-noncompact", "simple-noncompact": "simple-compact"}
    return sorted(flip.get(t, t) for t in types)


def test_criterion_03_duality():
    specs = factory_specs()
    failures = []
    for spec in specs:
        pair = pair_of(spec)
        dual = dualize(pair)
        back = dualize(dual)
        if not (np.array_equal(back.algebra.structure, pair.algebra.structure)
                and np.array_equal(back.s, pair.s) and np.array_equal(back.algebra.star, pair.algebra.star)):
            failures.append((label(spec), "double dual"))
            continue
        _, cert = curvature_of(spec)
        _, dcert = curvature_operator(riemann_tensor(dual), 1e-9)
        gap = float(np.max(np.abs(np.sort(-dcert.eigenvalues) - cert.eigenvalues))) if cert.eigenvalues.size else 0.0
        if gap > 1e-10:
            failures.append((label(spec), f"eigenvalue gap {gap:.1e}"))
            continue
        t1, t2 = classify_type(pair).ideal_types, classify_type(dual).ideal_types
        if swapped(t1) != sorted(t2):
            failures.append((label(spec), f"types {t1} vs {t2}"))
    check(3, failures, len(specs), "double dual exact, eigenvalues negate, ideal types swap")


def test_criterion_04_reconstruction():
    specs = factory_specs()
    failures = []
    worst = 0.0
    for spec in specs:
        data, _ = curvature_of(spec)
        rec = reconstruct_lstar(data, "NNCO" if spec.compact else "NPCO")
        worst = max(worst, rec.lstar_residual, rec.roundtrip_residual)
        if rec.lstar_residual > 1e-10 or rec.roundtrip_residual > 1e-10:
            failures.append((label(spec), rec.lstar_residual, rec.roundtrip_residual))
    check(4, failures, len(specs), f"reconstruction residuals <= 1e-10 (worst {worst:.1e})")


def test_criterion_05_riemann_symmetries():
    specs = factory_specs(SCALES)
    failures = []
    worst = 0.0
    for spec in specs:
        data = curvature_of(spec)[0] if spec.scale == 1.0 else riemann_tensor(make_pair(spec))
        rep = symmetry_report(data, with_kappa=False)
        r = max(rep.antisym_12, rep.antisym_34, rep.pair_symmetry, rep.bianchi)
        worst = max(worst, r)
        if r > 1e-12:
            failures.append((label(spec), r))
    check(5, failures, len(specs), f"symmetries and Bianchi <= 1e-12 (worst {worst:.1e})")


def test_criterion_06_ideals():
    failures = []
    so4 = make_pair(FamilySpec("bdi", "compact", p=2, q=2)).algebra
    dec = decompose_ideals(so4)
    if not (so4.dim == 6 and dec.sizes == [3, 3] and dec.types == ["simple-compact"] * 2
            and dec.cross_residual <= 1e-12):
        failures.append(("so(4)", dec.sizes, dec.types, dec.cross_residual))
    sphere = make_pair(FamilySpec("bdi", "compact", p=1, q=2))
    hyper = make_pair(FamilySpec("bdi", "noncompact", p=1, q=2))
    dims = sign_decompose(direct_sum_pairs([sphere, flat_pair(1), hyper])).dims
    if dims != (2, 1, 2):
        failures.append(("sphere+R+hyperbolic", dims))
    check(6, failures, 2, f"so(4) ideals {dec.sizes} cross {dec.cross_residual:.1e}; sign split {dims}")


def test_criterion_07_rank():
    failures = []
    cases = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3)]
    for p, q in cases:
        res = rank(make_pair(FamilySpec("bdi", p=p, q=q)), exhaustive=True)
        if res.rank != min(p, q) or not res.exact:
            failures.append((f"bdi({p},{q})", res.rank, res.exact))
    check(7, failures, len(cases), "exhaustive rank equals min(p, q)")


def test_criterion_08_cat0():
    rng = np.random.default_rng(8)
    cn = 0.0
    for _ in range(500):
        x, y, z = (random_l2_point(rng) for _ in range(3))
        m = l2_midpoint(x, y)
        rhs = 0.5 * l2_distance(z, x) ** 2 + 0.5 * l2_distance(z, y) ** 2 - 0.25 * l2_distance(x, y) ** 2
        cn = max(cn, l2_distance(z, m) ** 2 - rhs)
    hinge = 0.0
    for _ in range(200):
        x, y, z = (random_l2_point(rng) for _ in range(3))
        _, dy = direction_to(x, y)
        _, dz = direction_to(x, z)
        hinge = max(hinge, alexandrov_angle(dy, dz) - comparison_angle(x, y, z))
    samples = []
    for _ in range(1000):
        x = random_l2_point(rng)
        samples.append(((rng.uniform(0, 3), random_direction(rng, x)),
                        (rng.uniform(0, 3), random_direction(rng, x))))
    cone = tangent_cone_check(samples)
    failures = []
    if cn > 1e-9:
        failures.append(("CN", cn))
    if hinge > 1e-9:
        failures.append(("hinge", hinge))
    if cone > 1e-12:
        failures.append(("tangent cone", cone))
    check(8, failures, 3, f"CN excess {max(cn, 0):.1e}, angle excess {max(hinge, 0):.1e}, cone {cone:.1e}")


def test_criterion_09_bounded_curvature():
    rows = bounded_curvature_experiment(1.0, 0.3, [1e-2, 1e-3, 1e-4])
    comp = [r["comparison_angle_rad"] for r in rows]
    failures = []
    if not all(a < b for a, b in zip(comp, comp[1:])):
        failures.append(("not increasing", comp))
    if comp[-1] < 2.7:
        failures.append(("final angle", comp[-1]))
    for r in rows:
        if abs(r["alexandrov_angle_rad"] - 0.3) > 1e-9:
            failures.append(("alexandrov", r["lam"], r["alexandrov_angle_rad"]))
        if abs(r["d_xy"] - 1.0) > 1e-12:
            failures.append(("d_xy", r["lam"], r["d_xy"]))
    demo = exp_discontinuity_demo(1.0)
    close = [r for r in demo if r["cone_distance"] <= 1e-3]
    if not close or not all(r["exp_distance"] >= 0.5 for r in close):
        failures.append(("exp demo", demo))
    angles = ", ".join(f"{a:.4f}" for a in comp)
    check(9, failures, 4 + 2 * len(rows), f"comparison angles {angles}; exp demo ok")


CLI_SEED = ["--seed", "7"]


def _cli(args, cwd):
    out = subprocess.run([sys.executable, "-m", "lstar.cli", *CLI_SEED, *args],
                         cwd=cwd, capture_output=True, check=False)
    return out.returncode, out.stdout


def _cli_session(tmp):
    """Every command once; returns the stdout of each run and the bytes of each written file."""
    steps = [
        ["make", "--family", "bdi", "--noncompact", "--p", "2", "--q", "2", "-o", "pair.json"],
        ["check", "pair.json"],
        ["curvature", "pair.json", "--data-out", "R.json"],
        ["dual", "pair.json", "-o", "dual.json"],
        ["decompose", "pair.json"],
        ["rank", "pair.json"],
        ["reconstruct", "R.json", "--sign", "npco", "-o", "rec.json"],
        ["cat0-sweep", "--r", "1", "--alpha", "0.3", "--lambdas", "1e-2,1e-3,1e-4", "-o", "sweep.csv"],
        ["exp-demo"],
    ]
    outputs = []
    for s in steps:
        code, out = _cli(s, tmp)
        outputs.append((s[0], code, out))
    files = {p.name: p.read_bytes() for p in sorted(tmp.iterdir())}
    return outputs, files


def test_criterion_10_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    run_a, files_a = _cli_session(a)
    run_b, files_b = _cli_session(b)
    failures = [cmd for (cmd, code, _) in run_a if code != 0]
    failures += [ra[0] for ra, rb in zip(run_a, run_b) if ra != rb]
    failures += [name for name in files_a if files_a[name] != files_b.get(name)]
    check(10, failures, len(run_a) + len(files_a), "byte-identical CLI outputs across two runs")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
