"""Acceptance criteria, each run at its stated tolerance.

Every test records one ``CRITERION n PASS|FAIL`` line (printed and repeated in
the terminal summary) before asserting.
"""

import time

import numpy as np

from vcpknot import ambient, immersion as im, knot as kn, vcp
from vcpknot import verification as ver

SWEEP_N = [32, 64, 128]
SWEEP_H = [1e-3, 3e-4, 1e-4]

SETUPS = {
    "R3 loop": ({"m": 3, "vcp": {"kind": "volume"}}, {"preset": "circle"}),
    "R4 torus": ({"m": 4, "vcp": {"kind": "volume"}}, {"preset": "clifford_torus"}),
    "G2 loop": ({"m": 7, "vcp": {"kind": "g2"}}, {"preset": "circle"}),
    "Spin7 torus": ({"m": 8, "vcp": {"kind": "spin7"}}, {"preset": "clifford_torus"}),
}


def experiment(setup, checks, N=(128,), h=(1e-4,), trials=5, richardson=True, ambient_cfg=None):
    amb, imm = SETUPS[setup]
    data = {
        "name": setup,
        "ambient": ambient_cfg or amb,
        "immersion": imm,
        "sweep": {"N": list(N), "h": list(h), "seed": 0, "trials": trials, "richardson": richardson},
        "checks": list(checks),
    }
    return ver.run_experiment(ver.ExperimentSpec.from_dict(data))


_CACHE = {}


def nijenhuis_sweep(setup):
    if setup not in _CACHE:
        _CACHE[setup] = experiment(setup, ["nijenhuis"], N=SWEEP_N, h=SWEEP_H)
    return _CACHE[setup]


def test_criterion_01_vcp_axioms(criterion):
    kinds = [("kaehler", m) for m in (2, 4, 6, 8)] + [("volume", m) for m in (3, 4, 5)] + [("g2", 7), ("spin7", 8)]
    start = time.perf_counter()
    worst = max(vcp.verify_vcp_axioms(vcp.from_kind(k, m), trials=1000, seed=0).max_violation for k, m in kinds)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed <= 1.0
    criterion(1, "VCP axioms, all kinds", ok, f"max violation {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_02_pointwise_complex_structure(criterion):
    kinds = [("kaehler", 4), ("volume", 3), ("volume", 4), ("g2", 7), ("spin7", 8)]
    start = time.perf_counter()
    worst = 0.0
    for kind, m in kinds:
        chi = vcp.from_kind(kind, m)
        rng = np.random.default_rng(11)
        for _ in range(1000):
            raw = rng.normal(size=(chi.r - 1, m))
            plane = vcp.OrientedPlaneElement.from_vectors(raw) if chi.r > 1 else vcp.OrientedPlaneElement(np.zeros((0, m)))
            xi, zeta = (plane.project_out(x) for x in rng.normal(size=(2, m)))
            Jxi = vcp.induced_complex_structure(chi, plane, xi)
            JJxi = vcp.induced_complex_structure(chi, plane, Jxi)
            worst = max(
                worst,
                float(np.max(np.abs(JJxi + xi))),
                abs(np.dot(Jxi, Jxi) - np.dot(xi, xi)),
                abs(vcp.vcp_form(chi, *plane.frame, xi, zeta) - np.dot(Jxi, zeta)),
            )
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed <= 1.0
    criterion(2, "pointwise J^2 = -1, isometry, form identity", ok, f"max violation {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_03_hermitian_compatibility(criterion):
    cases = [
        (ambient.euclidean(vcp.volume_form(3)), lambda s: im.circle(s, 128)),
        (ambient.euclidean(vcp.g2()), lambda s: im.circle(s, 128)),
        (ambient.euclidean(vcp.volume_form(4)), lambda s: im.clifford_torus(s, 128)),
        (ambient.euclidean(vcp.spin7()), lambda s: im.clifford_torus(s, 128)),
        (ambient.euclidean(vcp.kaehler(4)), im.point),
    ]
    start = time.perf_counter()
    worst = 0.0
    for space, make in cases:
        imm = make(space)
        u, v, _ = ver.trial_fields(imm, 0, 0, 2)
        Ju = kn.apply_J(u)
        worst = max(worst, (kn.apply_J(Ju) + u).max_norm(), abs(kn.omega2(u, v) - kn.l2_inner(Ju, v)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed <= 5.0
    criterion(3, "knot-space J^2 = -1 and omega2 = <J., .>", ok, f"max defect {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_04_normal_lemma(criterion):
    details, ok = [], True
    for setup in SETUPS:
        report = experiment(setup, ["lemma_normal"], h=SWEEP_H, richardson=False)
        s = report.checks["lemma_normal"]
        rate = s.rate_h
        good = s.finest_defect <= 1e-6 and isinstance(rate, float) and rate >= 1.9
        ok &= good
        details.append(f"{setup}: {s.finest_defect:.1e}, slope {rate if isinstance(rate, str) else f'{rate:.2f}'}")
    criterion(4, "exponential-extension lemma", ok, "; ".join(details))
    assert ok


def test_criterion_05_torsion_and_metric(criterion):
    checks = ["torsion_perp", "torsion_lc", "metric_lc", "metric_perp"]
    details, ok = [], True
    for setup in SETUPS:
        report = experiment(setup, checks, trials=3)
        worst = {c: report.checks[c].finest_defect for c in checks}
        good = all(report.checks[c].verdict == ver.PASS for c in checks)
        ok &= good
        details.append(f"{setup}: " + ", ".join(f"{c} {worst[c]:.1e}" for c in checks))
    criterion(5, "torsion-free, Levi-Civita metric, volume term", ok, "; ".join(details))
    assert ok


def test_criterion_06_nijenhuis(criterion):
    start = time.perf_counter()
    details, ok = [], True
    for setup in SETUPS:
        s = nijenhuis_sweep(setup).checks["nijenhuis"]
        good = s.finest_defect <= 1e-6 and s.monotone
        ok &= good
        details.append(f"{setup}: {s.finest_defect:.2e}{'' if s.monotone else ' non-monotone'}")
    elapsed = time.perf_counter() - start
    ok &= elapsed <= 300
    criterion(6, "N_J = 0 for parallel VCPs", ok, "; ".join(details) + f"; {elapsed:.0f} s")
    assert ok


def test_criterion_07_J_parallel(criterion):
    details, ok = [], True
    for setup in SETUPS:
        report = experiment(setup, ["nablaJ_perp", "nablaJ_lc"])
        perp, lc = report.checks["nablaJ_perp"].finest_defect, report.checks["nablaJ_lc"].finest_defect
        ok &= perp <= 1e-6 and lc <= 1e-6
        details.append(f"{setup}: perp {perp:.2e}, lc {lc:.2e}")
    criterion(7, "nabla J = 0 for both connections", ok, "; ".join(details))
    assert ok


def test_criterion_08_negative_control(criterion):
    parallel = nijenhuis_sweep("G2 loop").checks["nijenhuis"]
    twisted = experiment("G2 loop", ["nijenhuis"], N=SWEEP_N, h=SWEEP_H, ambient_cfg={"m": 7, "vcp": {"kind": "g2", "parallel": False, "twist_rate": 0.5}}).checks["nijenhuis"]
    ratios = [t["max_defect"] / max(p["max_defect"], np.finfo(float).tiny) for t, p in zip(twisted.cells, parallel.cells)]
    separated = min(ratios) >= 1e3
    weak = experiment("G2 loop", ["nijenhuis"], ambient_cfg={"m": 7, "vcp": {"kind": "g2", "parallel": False, "twist_rate": 1e-3}}).checks["nijenhuis"]
    limit = weak.finest_defect / parallel.finest_defect
    interpolates = 0.1 <= limit <= 10.0
    ok = separated and interpolates
    criterion(
        8,
        "twisted control separates and interpolates",
        ok,
        f"min ratio twisted/parallel {min(ratios):.2f} (need >= 1e3); rate 1e-3 vs parallel {limit:.3f} (need within 10x)",
    )
    assert ok


def test_criterion_09_reparametrization(criterion):
    cases = [
        (ambient.euclidean(vcp.g2()), lambda s: im.perturb(im.circle(s, 64), 0.2, 2, 1), (13,)),
        (ambient.euclidean(vcp.volume_form(3)), lambda s: im.trefoil(s, 64), (-9,)),
        (ambient.euclidean(vcp.volume_form(4)), lambda s: im.perturb(im.clifford_torus(s, 32), 0.1, 2, 2), (5, -3)),
    ]
    mismatches = []
    for space, make, shift in cases:
        imm = make(space)
        moved = im.reparametrize(imm, shift)
        fields = ver.trial_fields(imm, 0, 0, 2)
        shifted = tuple(kn.KnotTangent(moved, im.shift_values(f.values, shift)) for f in fields)
        for name, check in ver.CHECKS.items():
            for rich in (False, True):
                a = check.evaluate(ver.Trial(imm, *fields, 1e-4, rich, 1, 0))
                b = check.evaluate(ver.Trial(moved, *shifted, 1e-4, rich, 1, 0))
                if a != b:
                    mismatches.append(f"{name} ({imm.m}D, richardson={rich}): {a!r} vs {b!r}")
    ok = not mismatches
    criterion(9, "scalars bit-identical under reparametrization", ok, "; ".join(mismatches[:3]) or "all checks exact")
    assert ok


def test_criterion_10_closed_omega(criterion):
    details, ok = [], True
    for setup in SETUPS:
        s = experiment(setup, ["domega"], trials=3).checks["domega"]
        ok &= s.verdict == ver.PASS
        details.append(f"{setup}: {s.finest_defect:.1e}")
    criterion(10, "d omega2 = 0", ok, "; ".join(details))
    assert ok
