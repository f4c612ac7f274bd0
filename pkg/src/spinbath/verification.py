"""Machine-checkable invariant suite behind the `verify` subcommand.

Each check runs a self-contained oracle comparison and reports the measured
worst case against its tolerance.  The suite is the fast (< 2 min) everyday
gate; the full acceptance battery lives in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import closed_forms as cf
from . import dynamics as dyn
from . import spectra as sp
from .liouvillian import build_bruteforce, build_sector, gamma0_shift_check
from .model import ModelParams, sector_basis

__all__ = ["CheckResult", "run_all_checks", "ALL_CHECKS"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def multiset_match_error(a, b) -> float:
    """Max pair distance of the optimal matching between two eigenvalue sets."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return float("inf")
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def _sector_union_eigs(params: ModelParams) -> np.ndarray:
    out = [sp.eigenvalues_only(build_sector(params, M)) for M in range(-params.two_j, params.two_j + 1)]
    return np.concatenate(out)


def check_bruteforce_oracle() -> CheckResult:
    worst = 0.0
    for two_j in (2, 3, 4):
        for p in (-1.0, -0.5, 0.0, 0.5, 1.0):
            for g0 in (0.0, 0.7):
                params = ModelParams(two_j=two_j, h=1.0, gamma=1.0, gamma0=g0, p=p)
                full = build_bruteforce(params)
                err = multiset_match_error(full.eigenvalues(), _sector_union_eigs(params))
                worst = max(worst, err)
    return CheckResult("bruteforce-oracle-equivalence", worst <= 1e-10, worst, 1e-10)


def check_unique_steady_state() -> CheckResult:
    worst = 0
    for two_j in (2, 3, 5):
        for p in (-1.0, -0.5, 0.0, 0.5, 1.0):
            params = ModelParams(two_j=two_j, p=p)
            ev = build_bruteforce(params).eigenvalues()
            nzero = int(np.sum(np.abs(ev) < 1e-10))
            worst = max(worst, abs(nzero - 1))
    return CheckResult("unique-zero-eigenvalue", worst == 0, float(worst), 0.0,
                       "count of |lambda|<1e-10 minus one, worst case")


def check_triangularity() -> CheckResult:
    worst = 0.0
    for two_j in (7, 20):
        for M in (-3, 0, 4):
            up = build_sector(ModelParams(two_j=two_j, p=1.0), M).upper
            lo = build_sector(ModelParams(two_j=two_j, p=-1.0), M).lower
            if len(up):
                worst = max(worst, float(np.abs(up).max()))
            if len(lo):
                worst = max(worst, float(np.abs(lo).max()))
    return CheckResult("triangularity-at-full-polarization", worst == 0.0, worst, 0.0)


def check_trace_preservation() -> CheckResult:
    worst = 0.0
    for two_j in (8, 21):
        for p in (-0.7, 0.0, 0.4, 1.0):
            op = build_sector(ModelParams(two_j=two_j, p=p, gamma0=0.3), 0)
            col = op.diag.copy()
            col[:-1] += op.upper
            col[1:] += op.lower
            worst = max(worst, float(np.abs(col).max()) / op.scale())
    return CheckResult("trace-preservation-columns", worst <= 1e-12, worst, 1e-12,
                       "column sums of the M=0 sector relative to the operator scale")


def check_hermiticity_covariance() -> CheckResult:
    worst = 0.0
    for two_j in (9, 16):
        params = ModelParams(two_j=two_j, p=0.35, gamma0=0.2)
        for M in (1, 3, two_j - 1):
            a = build_sector(params, M)
            b = build_sector(params, -M)
            worst = max(worst, float(np.abs(b.diag - np.conj(a.diag)).max()))
            worst = max(worst, float(np.abs(b.upper - np.conj(a.upper)).max(initial=0.0)))
            worst = max(worst, float(np.abs(b.lower - np.conj(a.lower)).max(initial=0.0)))
    return CheckResult("hermiticity-covariance", worst <= 1e-12, worst, 1e-12,
                       "sector -M equals the elementwise conjugate of sector M")


def check_sector_conjugation() -> CheckResult:
    worst = 0.0
    for two_j in (14,):
        params = ModelParams(two_j=two_j, p=0.5)
        for M in (1, 4):
            wa = sp.eigenvalues_only(build_sector(params, M))
            wb = sp.eigenvalues_only(build_sector(params, -M))
            worst = max(worst, multiset_match_error(wa, np.conj(wb)))
    return CheckResult("sector-conjugation-spectra", worst <= 1e-10, worst, 1e-10)


def check_dissipativity() -> CheckResult:
    worst = -np.inf
    for two_j in (11, 24):
        for p in (-0.8, 0.0, 0.5, 1.0):
            params = ModelParams(two_j=two_j, p=p)
            for M in range(-two_j, two_j + 1):
                w = sp.eigenvalues_only(build_sector(params, M))
                worst = max(worst, float(w.real.max()))
    return CheckResult("dissipativity-re-nonpositive", worst <= 1e-10, worst, 1e-10,
                       "largest real part across sampled spectra")


def check_triangular_closed_form() -> CheckResult:
    worst = 0.0
    for two_j in (13, 28):
        for p in (1.0, -1.0):
            params = ModelParams(two_j=two_j, p=p)
            for M in (-2, 0, 5):
                tri = cf.triangular_solution(params, M)
                w = sp.eigenvalues_only(build_sector(params, M))
                worst = max(worst, multiset_match_error(w, tri.eigenvalues))
    return CheckResult("triangular-closed-form", worst <= 1e-9, worst, 1e-9)


def check_o3_closed_form() -> CheckResult:
    worst = 0.0
    for two_j in (12, 25):
        params = ModelParams(two_j=two_j, p=0.0)
        for M in (-3, 0, 6):
            w = sp.eigenvalues_only(build_sector(params, M))
            ref = np.array([cf.o3_eigenvalue(params, K, M) for K in range(abs(M), two_j + 1)])
            worst = max(worst, multiset_match_error(w, ref))
    return CheckResult("o3-closed-form", worst <= 1e-9, worst, 1e-9)


def check_gamma0_shift() -> CheckResult:
    worst = 0.0
    for two_j in (10,):
        base = ModelParams(two_j=two_j, p=0.3, gamma0=0.0)
        shifted = ModelParams(two_j=two_j, p=0.3, gamma0=1.0)
        for M in (0, 2, 7):
            w0 = sp.eigenvalues_only(build_sector(base, M))
            w1 = sp.eigenvalues_only(build_sector(shifted, M))
            delta = gamma0_shift_check(shifted, M)
            worst = max(worst, multiset_match_error(w1, w0 + delta))
    return CheckResult("gamma0-constant-shift", worst <= 1e-10, worst, 1e-10)


def check_cg_orthogonality() -> CheckResult:
    worst = 0.0
    for j in (2.5, 10.0):
        two_j = int(round(2 * j))
        for K in (0, 2, int(j)):
            for Kp in (K, K + 1):
                if Kp > two_j:
                    continue
                s = 0.0
                for two_m in range(-two_j, two_j + 1, 2):
                    s += (cf.clebsch_gordan(j, two_m / 2, j, -two_m / 2, K, 0)
                          * cf.clebsch_gordan(j, two_m / 2, j, -two_m / 2, Kp, 0))
                worst = max(worst, abs(s - (1.0 if K == Kp else 0.0)))
    return CheckResult("cg-orthogonality", worst <= 1e-12, worst, 1e-12)


def check_thermal_null_vector() -> CheckResult:
    worst = 0.0
    for two_j in (20, 40, 80):
        for p in (-0.7, -0.3, 0.3, 0.7):
            params = ModelParams(two_j=two_j, p=p, gamma0=0.5)
            op = build_sector(params, 0)
            vec = cf.thermal_ss(params).coefficients
            worst = max(worst, float(np.linalg.norm(op.matvec(vec.astype(complex)))) / op.scale())
    return CheckResult("thermal-steady-state-null", worst <= 1e-12, worst, 1e-12,
                       "||L_0 rho_ss|| / ||L|| with the geometric vector")


def check_propagation_conservation() -> CheckResult:
    worst = 0.0
    for p in (0.0, 0.5, -0.5, 1.0):
        params = ModelParams(two_j=12, p=p)
        rho0 = dyn.coherent_state(12, 1.1, 0.4)
        states = dyn.propagate(params, rho0, [0.0, 2.5, 10.0])
        for s in states:
            worst = max(worst, abs(s.trace() - 1.0))
            worst = max(worst, s.hermiticity_defect())
    return CheckResult("propagation-trace-hermiticity", worst <= 1e-10, worst, 1e-10)


def check_semigroup() -> CheckResult:
    params = ModelParams(two_j=10, p=0.4)
    rho0 = dyn.coherent_state(10, 0.8, 0.0)
    one = dyn.propagate(params, rho0, [1.3])[0]
    two = dyn.propagate(params, one, [0.9])[0]
    direct = dyn.propagate(params, rho0, [2.2])[0]
    worst = max(
        float(np.abs(two.sectors[M] - direct.sectors[M]).max()) for M in direct.sectors
    )
    return CheckResult("semigroup-property", worst <= 1e-8, worst, 1e-8)


def check_residual_norms() -> CheckResult:
    worst = 0.0
    for two_j in (20, 64):
        for p in (0.0, 0.5, 1.0):
            op = build_sector(ModelParams(two_j=two_j, p=p), 0)
            dec = sp.diagonalize(op)
            worst = max(worst, float(dec.residual_norms.max()) / dec.operator_scale)
    return CheckResult("eigen-residuals", worst <= 1e-8, worst, 1e-8)


def check_pairing_involution() -> CheckResult:
    ok = True
    detail = ""
    for two_j in (8, 13):
        params = ModelParams(two_j=two_j, p=1.0)
        for M in (0, 1, -2):
            tri = cf.triangular_solution(params, M)
            for m, partner in tri.pairing.items():
                if abs(tri.pairing.get(partner, np.nan) - m) > 1e-12:
                    ok = False
                    detail = f"pairing not involutive at two_j={two_j}, M={M}, m={m}"
            expected_top = -params.j + M if M >= 0 else -params.j
            if not any(abs(e - expected_top) < 1e-9 for e in tri.exceptions):
                ok = False
                detail = f"missing extremal exception at two_j={two_j}, M={M}"
            if M % 2 == 1:
                fixed = (M + params.p) / 2
                sec = sector_basis(params, M)
                on_grid = abs((fixed - sec.m_min) - round(fixed - sec.m_min)) < 1e-9
                if on_grid and not any(abs(e - fixed) < 1e-9 for e in tri.exceptions):
                    ok = False
                    detail = f"missing odd-M fixed point at two_j={two_j}, M={M}"
    return CheckResult("triangular-pairing-involution", ok, 0.0 if ok else 1.0, 0.0, detail)


ALL_CHECKS = [
    check_bruteforce_oracle,
    check_unique_steady_state,
    check_triangularity,
    check_trace_preservation,
    check_hermiticity_covariance,
    check_sector_conjugation,
    check_dissipativity,
    check_triangular_closed_form,
    check_o3_closed_form,
    check_gamma0_shift,
    check_cg_orthogonality,
    check_thermal_null_vector,
    check_propagation_conservation,
    check_semigroup,
    check_residual_norms,
    check_pairing_involution,
]


def run_all_checks() -> list[CheckResult]:
    return [chk() for chk in ALL_CHECKS]
