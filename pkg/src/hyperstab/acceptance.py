"""The twelve acceptance criteria as runnable checks.

Each ``criterion_k`` returns a CriterionResult; ``run_all`` executes them in
order.  Eigenvalue checks use a companion linearization solved by QZ
(``scipy.linalg.eig``), independent of the determinant-based engine.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import scipy.linalg

from .config import DEFAULT_BUDGET
from .matpoly import MatrixPolynomial, entries_linearly_independent
from .regions import CLOSED_UNIT_DISC, H, Region

SLACK_INEQ = 1e-10
TRIALS = 10_000


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float = 0.0
    checks: dict[str, bool] = field(default_factory=dict)
    detail: dict[str, Any] = field(default_factory=dict)

    def line(self) -> str:
        failed = [k for k, v in self.checks.items() if not v]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:>2}. {self.name} [{self.seconds:.2f}s]{tail}"

    def to_json(self) -> dict[str, Any]:
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "seconds": round(self.seconds, 3), "checks": self.checks, "detail": self.detail}


def _finish(number: int, name: str, t0: float, checks: dict[str, bool], **detail) -> CriterionResult:
    checks = {k: bool(v) for k, v in checks.items()}
    return CriterionResult(number, name, all(checks.values()), time.perf_counter() - t0, checks, detail)


def companion_eigenvalues(P: MatrixPolynomial, inf_tol: float = 1e-12) -> np.ndarray:
    """Finite eigenvalues from the first companion pencil (QZ)."""
    d, n = P.degree, P.n
    if d < 1:
        return np.zeros(0, dtype=complex)
    C = P.coeffs
    N = d * n
    A = np.zeros((N, N), dtype=complex)
    B = np.eye(N, dtype=complex)
    B[-n:, -n:] = C[d]
    A[:-n, n:] = np.eye(N - n)
    for j in range(d):
        A[-n:, j * n:(j + 1) * n] = -C[j]
    w = scipy.linalg.eig(A, B, right=False, homogeneous_eigvals=True)
    alpha, beta = w[0], w[1]
    scale = np.maximum(np.abs(alpha), np.abs(beta))
    ok = np.abs(beta) > inf_tol * scale
    return alpha[ok] / beta[ok]


# ---------------------------------------------------------------------------


def criterion_1(seed: int = 0) -> CriterionResult:
    from .fixtures import exa
    from .stability import check_hyperstable, check_stable
    t0 = time.perf_counter()
    P = exa()
    v = check_hyperstable(P, CLOSED_UNIT_DISC, DEFAULT_BUDGET, seed)
    elapsed = time.perf_counter() - t0
    st = check_stable(P, CLOSED_UNIT_DISC)
    angle = None
    if v.x is not None:
        x = np.asarray(v.x, dtype=complex)
        angle = math.acos(min(1.0, abs(x[1]) / np.linalg.norm(x)))
    return _finish(1, "exa falsified on the closed unit disc", t0, {
        "falsified": v.status == "falsified",
        "witness_near_e2": angle is not None and angle <= 1e-6,
        "stable": st.status == "stable",
        "runtime_lt_5s": elapsed < 5.0,
    }, angle=angle)


def criterion_2(seed: int = 0) -> CriterionResult:
    from .szasz import COMP_EXPECTED, compare, comp_case
    t0 = time.perf_counter()
    checks, tags, rel = {}, [], {}
    for case in (1, 2, 3):
        rep = compare(comp_case(case))
        for tag, want in COMP_EXPECTED[case].items():
            err = abs(rep.bounds[tag] - want) / want
            rel[f"{case}/{tag}"] = err
            checks[f"case{case}_{tag}"] = err <= 1e-9
        tags.append(rep.tightest)
    checks["tightest_distinct"] = len(set(tags)) == 3
    return _finish(2, "comp bound triples", t0, checks, tightest=tags, relative_errors=rel)


def criterion_3(seed: int = 0) -> CriterionResult:
    from .szasz import bound_frob, ones_factored
    t0 = time.perf_counter()
    worst, dominated = 0.0, True
    for n in (2, 3):
        for d in (1, 2, 3, 4):
            F = ones_factored(n, d)
            for lam in (0.5, 1.0, 2.0):
                lhs2 = float(np.linalg.norm(F(lam), "fro") ** 2)
                want = (n * lam + 1.0) ** (2 * d) + n - 1
                worst = max(worst, abs(lhs2 - want) / want)
                dominated &= bound_frob(F, lam) >= math.sqrt(lhs2)
    return _finish(3, "ones closed form and frob dominance", t0,
                   {"closed_form": worst <= 1e-10, "frob_dominates": dominated}, worst_relative_error=worst)


def criterion_4(seed: int = 0) -> CriterionResult:
    from .szasz import CmvFixture
    t0 = time.perf_counter()
    ks = [2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13]
    checks, errs = {}, {}
    for n in (2, 1):
        target = CmvFixture.limit(n, 1.0)
        e = [abs(float(np.linalg.norm(CmvFixture(n, k)(1j), "fro")) - target) for k in ks]
        errs[n] = e
        checks[f"n{n}_monotone"] = all(a > b for a, b in zip(e, e[1:]))
        checks[f"n{n}_final_lt_0.05"] = e[-1] < 0.05
    return _finish(4, "cmv convergence", t0, checks, errors={str(k): v for k, v in errs.items()})


def criterion_5(seed: int = 0) -> CriterionResult:
    from .fixtures import nonstab
    from .multipoly import mv_stable
    t0 = time.perf_counter()
    Q = nonstab()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(32):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        got = np.linalg.det(Q(z))
        want = 1.0 - ((z[0] - z[1]) / 2.0) ** 2
        worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    res = mv_stable(Q, [H(0.0), H(0.0)], DEFAULT_BUDGET, seed)
    gap = abs(res.witness[0] - res.witness[1]) if res.witness is not None else None
    return _finish(5, "nonstab determinant and falsifier", t0, {
        "det_identity": worst <= 1e-10,
        "falsified": res.status == "falsified",
        "gap_is_2": gap is not None and abs(gap - 2.0) <= 1e-6,
    }, worst_det_error=worst, gap=gap)


def _violates(gap: float, rhs: float) -> bool:
    return not gap >= -SLACK_INEQ * (1.0 + abs(rhs))


def criterion_6(seed: int = 0, trials: int = TRIALS) -> CriterionResult:
    from .numrange import numerical_radius
    from .scalarpoly import ComplexPolynomial, random_stable_polynomial
    from .szasz import gap_de_branges, gap_imm, gap_mlog, gap_sums, gap_von_neumann
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    bad = {"mlog": 0, "sums": 0, "imm": 0, "dB": 0, "vN": 0, "sandwich": 0}

    def cmat(n, s=1.0):
        return s * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))

    for _ in range(trials):
        n = int(rng.integers(1, 5))
        A = cmat(n, float(rng.uniform(0.01, 1.5)))
        bad["mlog"] += _violates(*gap_mlog(A))
        bad["imm"] += _violates(*gap_imm(cmat(n, float(rng.uniform(0.01, 3.0)))))
        Bs = []
        for _ in range(int(rng.integers(2, 5))):
            M = cmat(n)
            G = cmat(n)
            Bs.append(0.5 * (M + M.conj().T) - 1j * (G @ G.conj().T) / n)
        bad["sums"] += _violates(*gap_sums(Bs))
        p = random_stable_polynomial(rng, int(rng.integers(1, 7)))
        lam = 2.0 * math.sqrt(rng.random()) * complex(math.cos(t := 2 * math.pi * rng.random()), math.sin(t))
        bad["dB"] += _violates(*gap_de_branges(p, lam))
        k = int(rng.integers(1, 6))
        q = ComplexPolynomial(rng.standard_normal(k) + 1j * rng.standard_normal(k))
        bad["vN"] += _violates(*gap_von_neumann(q, cmat(n, float(rng.uniform(0.1, 1.0)))))
        B = cmat(n)
        try:
            w = numerical_radius(B)
            nrm = float(np.linalg.norm(B, 2))
            bad["sandwich"] += _violates(w - 0.5 * nrm, w) or _violates(nrm - w, nrm)
        except ArithmeticError:
            bad["sandwich"] += 1
    elapsed = time.perf_counter() - t0
    checks = {f"{k}_no_violations": v == 0 for k, v in bad.items()}
    checks["runtime_lt_60s"] = elapsed < 60.0
    return _finish(6, "inequality property suites", t0, checks, violations=bad, trials=trials)


def _two_route(P: MatrixPolynomial, ok: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> bool:
    """Location check on the engine's eigenvalues (slack 1e-8) and on QZ companion eigenvalues.

    The QZ route loses accuracy on multiple eigenvalues (a k-fold eigenvalue
    is only accurate to ~eps^(1/k)), so its slack grows with cluster size.
    """
    from .matpoly import eigenvalues
    from .scalarpoly import cluster_tolerances
    ev = eigenvalues(P).finite
    qz = companion_eigenvalues(P)
    tol_qz = np.maximum(1e-8, cluster_tolerances(qz, 0.0))
    return bool(np.all(ok(ev, np.full(ev.shape, 1e-8))) and np.all(ok(qz, tol_qz)))


def criterion_7(seed: int = 0, count: int = 100) -> CriterionResult:
    from . import fixtures as fx
    from .stability import structured_corollaries, structured_halfplane
    t0 = time.perf_counter()
    bad = {"cube": 0, "quad": 0, "halfplane": 0, "mgt": 0}
    left = lambda ev, tol: ev.real <= tol
    for s in range(seed, seed + count):
        As = fx.cube(s)
        d = len(As) - 1
        structured_corollaries("cube", A=As)
        angle = lambda ev, tol, d=d: (np.abs(np.angle(ev)) >= math.pi / d - tol) | (np.abs(ev) <= tol)
        bad["cube"] += not _two_route(MatrixPolynomial(As), angle)
        A0, A1, A2 = fx.quad(s)
        structured_corollaries("quad", A0=A0, A1=A1, A2=A2)
        bad["quad"] += not _two_route(MatrixPolynomial([A0, A1, A2]), left)
        hp = fx.halfplane3x3() if s == seed else fx.halfplane_random(s)
        v = structured_halfplane(hp.R2, hp.R1, hp.R0, hp.J)
        bad["halfplane"] += not (v.certified and _two_route(hp.P, left))
        m = fx.mgt_random(s)
        v = structured_corollaries("mgt", **m)
        bad["mgt"] += not (v.certified and _two_route(fx.mgt(m["a"], m["b"], m["c"], m["R"]), left))
    return _finish(7, "structured-class localization", t0, {f"{k}_all": v == 0 for k, v in bad.items()},
                   failures=bad, instances=count)


def criterion_8(seed: int = 0, count: int = 100) -> CriterionResult:
    from . import fixtures as fx
    from .stability import poly2_route
    t0 = time.perf_counter()
    bad = {"subadd": 0, "subadd2": 0}
    worst = {"subadd": -np.inf, "subadd2": -np.inf}
    for s in range(seed, seed + count):
        for name, make in (("subadd", fx.subadd), ("subadd2", fx.subadd2)):
            inst = make(s)
            P = inst.P
            v = poly2_route(P.coeff(2), P.coeff(1), P.coeff(0), inst.D, "a", search=False)
            ev = companion_eigenvalues(P)
            m = float(np.max(inst.D.margins(ev))) if ev.size else -np.inf
            worst[name] = max(worst[name], m)
            bad[name] += not (v.certified and m <= 1e-8)
    return _finish(8, "subadd and subadd2 certificates", t0, {f"{k}_all": v == 0 for k, v in bad.items()},
                   failures=bad, worst_inside_margin=worst)


def _random_exact(rng: np.random.Generator, n: int = 3, deg: int = 2):
    from .smith import ExactPolyMatrix, GaussianRational
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            k = int(rng.integers(0, deg + 2))
            if rng.random() < 0.15:
                k = 0
            row.append([GaussianRational(int(rng.integers(-3, 4)), int(rng.integers(-1, 2)) * int(rng.random() < 0.3))
                        for _ in range(k)])
        rows.append(row)
    return ExactPolyMatrix(rows)


def criterion_9(seed: int = 0, count: int = 200) -> CriterionResult:
    from .smith import LAMBDA, ExactPolyMatrix, ExactPolynomial, invariant_factors_via_minors, smith_form
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    bad = {"UPV": 0, "unimodular": 0, "divisibility": 0, "oracle": 0}
    for _ in range(count):
        P = _random_exact(rng)
        r = smith_form(P)
        bad["UPV"] += (r.U @ P @ r.V) != r.S
        bad["unimodular"] += not (r.U.det().degree == 0 and r.V.det().degree == 0)
        f = r.invariant_factors
        bad["divisibility"] += not all(f[j + 1].divides(f[j]) for j in range(len(f) - 1))
        bad["oracle"] += list(f) != invariant_factors_via_minors(P)
    one = ExactPolynomial([1])
    ex = {
        "diag": (ExactPolyMatrix.diag([LAMBDA, 1]), [LAMBDA, one], ExactPolyMatrix.diag([LAMBDA, 1])),
        "unimodular": (ExactPolyMatrix([[1, LAMBDA ** 2], [0, 1]]), [one, one], ExactPolyMatrix.identity(2)),
        "singular": (ExactPolyMatrix([[LAMBDA ** 2, LAMBDA], [LAMBDA, 1]]), [one], ExactPolyMatrix.diag([1, 0])),
    }
    checks = {f"{k}_all": v == 0 for k, v in bad.items()}
    for name, (P, factors, S) in ex.items():
        r = smith_form(P)
        checks[f"example_{name}"] = (list(r.invariant_factors) == factors and r.S == S
                                     and invariant_factors_via_minors(P) == factors)
    return _finish(9, "exact Smith form suite", t0, checks, failures=bad, instances=count)


def criterion_10(seed: int = 0) -> CriterionResult:
    from .fixtures import exa
    from .smith import ExactPolyMatrix, is_unimodular
    from .fixtures import orbits
    from .stability import directional_certificate
    t0 = time.perf_counter()
    w = orbits(2)
    res = directional_certificate(w.Q.to_matrix_polynomial(), np.array([0.0, 1.0]), CLOSED_UNIT_DISC,
                                  DEFAULT_BUDGET, seed)
    return _finish(10, "orbit witness", t0, {
        "Q_equals_exa": w.Q == ExactPolyMatrix.from_matrix_polynomial(exa()),
        "F_unimodular": is_unimodular(w.F),
        "no_certificate": res.status == "no_certificate",
        "via_vieta": bool(res.proof) and res.proof.startswith("vieta"),
    }, proof=res.proof)


def hyper_nsinf_report(eps: float = 0.01, seed: int = 0) -> dict[str, Any]:
    from .fixtures import hyper_nsinf
    from .stability import check_hyperstable, check_stable
    D = Region.disc_exterior(0j, 1.0)
    P = hyper_nsinf(eps)
    dP = P.derivative()
    v = check_hyperstable(P, D, DEFAULT_BUDGET, seed)
    return {
        "derivative_independent": entries_linearly_independent(dP),
        "P_stable": check_stable(P, D).status == "stable",
        "P_prime_unstable": check_stable(dP, D).status != "stable",
        "engine_consistent": (not v.certified) and v.status in ("falsified", "not_stable", "unknown"),
        "verdict": v.status,
        "eigenvalue_moduli": sorted(float(abs(z)) for z in companion_eigenvalues(P)),
    }


def criterion_11(seed: int = 0, count: int = 500) -> CriterionResult:
    from .scalarpoly import ComplexPolynomial, gauss_lucas_check
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    fails = 0
    for _ in range(count):
        d = int(rng.integers(2, 9))
        c = rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)
        c[-1] = c[-1] if abs(c[-1]) > 0.1 else 1.0
        fails += not gauss_lucas_check(ComplexPolynomial(c))
    rep = hyper_nsinf_report(0.01, seed)
    return _finish(11, "Gauss-Lucas sweep and hyper_nsinf", t0, {
        "scalar_sweep": fails == 0,
        "derivative_independent": rep["derivative_independent"],
        "P_stable": rep["P_stable"],
        "P_prime_unstable": rep["P_prime_unstable"],
        "engine_not_certified": rep["engine_consistent"],
    }, sweep_failures=fails, verdict=rep["verdict"], eigenvalue_moduli=rep["eigenvalue_moduli"])


def criterion_12(seed: int = 0) -> CriterionResult:
    from .fixtures import corpus
    from .numrange import wp_disjoint_from
    from .stability import check_hyperstable, check_stable
    t0 = time.perf_counter()
    bad = []
    for name, P, D in corpus():
        st = check_stable(P, D)
        nr = wp_disjoint_from(P, D, DEFAULT_BUDGET, seed)
        v = check_hyperstable(P, D, DEFAULT_BUDGET, seed)
        if nr.status == "disjoint" and nr.label == "proven" and st.status != "stable":
            bad.append(f"{name}: numerical range disjoint but not stable")
        if v.certified and st.status != "stable":
            bad.append(f"{name}: certified but not stable")
        if v.status == "not_stable" and st.status == "stable":
            bad.append(f"{name}: verdict not_stable but stable")
    return _finish(12, "implication-chain consistency", t0, {"no_contradictions": not bad}, contradictions=bad)


CRITERIA: list[Callable[..., CriterionResult]] = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
]


def run_all(seed: int = 0) -> list[CriterionResult]:
    return [c(seed) for c in CRITERIA]
