"""Analytic solutions used as oracles throughout the test suite.

Four solvable corners of the model:
  * |p| = 1: the sector operator is triangular; eigenvalues are its diagonal
    and eigenvectors follow from a one-sided recursion.  All non-extremal
    eigenvalues pair up exactly and each pair carries a single eigenvector.
  * p = 0: the generator closes an O(3) algebra; eigenvalues are labelled by
    rotor quantum numbers (K, M) and the eigenmatrices decouple through
    Clebsch-Gordan coefficients, giving closed-form observable dynamics.
  * large j, 0 < |p| < 1: a bosonic expansion around the steady state.  The
    non-unitary Bogoliubov transformation uses u = (1+p)/(2 sqrt(p)),
    v = (1-p)/(2 sqrt(p)), ubar = vbar = 1/sqrt(p); these satisfy the
    commutator normalization [beta_i, betabar_j] = delta_ij identically
    (u*ubar - v*vbar = 1), which fixes u's denominator to sqrt(p).
  * any |p| < 1: the steady state is a thermal (geometric) diagonal state and
    annihilates the M = 0 sector operator exactly at finite j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .liouvillian import build_sector
from .model import ModelParams, sector_basis

__all__ = [
    "TriangularSolution",
    "HPStates",
    "ThermalSS",
    "DefectiveChainError",
    "triangular_eigenvalue",
    "triangular_solution",
    "triangular_eigenvector",
    "o3_eigenvalue",
    "clebsch_gordan",
    "o3_expectation",
    "hp_states",
    "thermal_ss",
    "ep_halflife",
]


class DefectiveChainError(ArithmeticError):
    """Raised when the triangular recursion hits a degenerate denominator."""


def _require_full_polarization(params: ModelParams):
    if abs(abs(params.p) - 1.0) > 1e-14:
        raise ValueError(f"requires |p| = 1, got p={params.p}")


def triangular_eigenvalue(params: ModelParams, m: float, M: int) -> complex:
    """Diagonal eigenvalue of the triangular limit |p| = 1."""
    _require_full_polarization(params)
    sec = sector_basis(params, M)
    if not (sec.m_min - 1e-9 <= m <= sec.m_max + 1e-9):
        raise ValueError(f"m={m} outside sector M={M}")
    j, G, h, p = params.j, params.gamma, params.h, params.p
    lam = -G * (j + 1) + 1j * h * M + (G / (2 * j)) * (M * (M + p) - 2 * m * (M - m + p))
    if params.gamma0:
        lam += -params.gamma0 * M**2 / (2 * j)
    return complex(lam)


@dataclass(frozen=True)
class TriangularSolution:
    """Eigenvalue table of one sector at |p| = 1 with its exact pairing.

    pairing maps the m label to its degenerate partner M - m + p; labels in
    exceptions are unpaired (the extremal eigenvalues of the sector).
    """

    M: int
    p: float
    m_labels: np.ndarray
    eigenvalues: np.ndarray
    pairing: dict
    exceptions: list


def triangular_solution(params: ModelParams, M: int) -> TriangularSolution:
    _require_full_polarization(params)
    sec = sector_basis(params, M)
    ms = sec.m_values()
    lams = np.array([triangular_eigenvalue(params, m, M) for m in ms])
    pairing = {}
    exceptions = []
    for m in ms:
        partner = M - m + params.p
        if sec.m_min - 1e-9 <= partner <= sec.m_max + 1e-9 and abs(partner - m) > 1e-9:
            pairing[float(m)] = float(partner)
        elif abs(partner - m) <= 1e-9:
            exceptions.append(float(m))  # fixed point: odd-M lowest eigenvalue
        else:
            exceptions.append(float(m))  # falls outside the sector: extremal state
    return TriangularSolution(
        M=M, p=params.p, m_labels=ms, eigenvalues=lams, pairing=pairing, exceptions=exceptions
    )


def triangular_eigenvector(params: ModelParams, N: float, M: int) -> np.ndarray:
    """Closed-form right eigenvector of the triangular limit, label m = N.

    For p = 1 the chain terminates at m = N and extends downward through
    rho_m = prod_{i=m}^{N-1} c_{i+1} / (lambda_N - lambda_i); the p = -1 case
    is the mirror construction.  A degenerate denominator means the requested
    label is the defective member of a pair.
    """
    _require_full_polarization(params)
    sec = sector_basis(params, M)
    ms = sec.m_values()
    k_N = int(round(N - sec.m_min))
    if not 0 <= k_N < sec.dim:
        raise ValueError(f"label N={N} outside sector M={M}")
    op = build_sector(params, M)
    lams = op.diag
    vec = np.zeros(sec.dim, dtype=complex)
    vec[k_N] = 1.0
    if params.p > 0:
        # lower[k] couples component m_{k+1} into m_k
        for k in range(k_N - 1, -1, -1):
            denom = lams[k_N] - lams[k]
            if denom == 0:
                raise DefectiveChainError(
                    f"degenerate chain at m={ms[k]} for label N={N}, M={M}: kernel is one-dimensional"
                )
            vec[k] = op.lower[k] * vec[k + 1] / denom
    else:
        # p = -1: raising channel only; chain extends upward from the label
        for k in range(k_N + 1, sec.dim):
            denom = lams[k_N] - lams[k]
            if denom == 0:
                raise DefectiveChainError(
                    f"degenerate chain at m={ms[k]} for label N={N}, M={M}: kernel is one-dimensional"
                )
            vec[k] = op.upper[k - 1] * vec[k - 1] / denom
    return vec


def o3_eigenvalue(params: ModelParams, K: int, M: int) -> complex:
    """Rotor eigenvalue at p = 0: i h M + Gamma M^2/(2j) - Gamma K(K+1)/(2j)."""
    if params.p != 0:
        raise ValueError(f"requires p = 0, got p={params.p}")
    if not 0 <= K <= params.two_j:
        raise ValueError(f"K={K} outside [0, {params.two_j}]")
    if abs(M) > K:
        raise ValueError(f"|M|={abs(M)} exceeds K={K}")
    j, G, h = params.j, params.gamma, params.h
    return complex(1j * h * M + (G / (2 * j)) * M**2 - (G / (2 * j)) * K * (K + 1))


@lru_cache(maxsize=None)
def _lfact(n: int) -> float:
    return math.lgamma(n + 1)


def _as_two(x, name: str) -> int:
    two = 2 * x
    if abs(two - round(two)) > 1e-9:
        raise ValueError(f"{name}={x} is not half-integer")
    return int(round(two))


@lru_cache(maxsize=1 << 20)
def _cg_two(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> float:
    if tm1 + tm2 != tM:
        return 0.0
    if tJ < abs(tj1 - tj2) or tJ > tj1 + tj2 or (tj1 + tj2 + tJ) % 2 != 0:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tJ + tM) % 2:
        return 0.0

    def half(x: int) -> int:
        return x // 2

    a = half(tj1 + tj2 - tJ)
    b = half(tj1 - tj2 + tJ)
    c = half(-tj1 + tj2 + tJ)
    d = half(tj1 + tj2 + tJ) + 1
    j1mm1 = half(tj1 - tm1)
    j1pm1 = half(tj1 + tm1)
    j2mm2 = half(tj2 - tm2)
    j2pm2 = half(tj2 + tm2)
    JmM = half(tJ - tM)
    JpM = half(tJ + tM)
    pref = 0.5 * (
        math.log(tJ + 1.0)
        + _lfact(a) + _lfact(b) + _lfact(c) - _lfact(d)
        + _lfact(JmM) + _lfact(JpM)
        + _lfact(j1mm1) + _lfact(j1pm1) + _lfact(j2mm2) + _lfact(j2pm2)
    )
    t1 = half(tJ - tj2 + tm1)
    t2 = half(tJ - tj1 - tm2)
    kmin = max(0, -t1, -t2)
    kmax = min(a, j1mm1, j2pm2)
    total = 0.0
    for k in range(kmin, kmax + 1):
        lt = (
            _lfact(k) + _lfact(a - k) + _lfact(j1mm1 - k) + _lfact(j2pm2 - k)
            + _lfact(t1 + k) + _lfact(t2 + k)
        )
        total += (-1) ** k * math.exp(pref - lt)
    return total


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float, K: float, M: float) -> float:
    """Condon-Shortley <j1 m1, j2 m2 | K M> via the Racah sum with log factorials.

    Selection-rule violations return 0 rather than raising.
    """
    return _cg_two(
        _as_two(j1, "j1"), _as_two(m1, "m1"),
        _as_two(j2, "j2"), _as_two(m2, "m2"),
        _as_two(K, "K"), _as_two(M, "M"),
    )


def _observable_matrix(params: ModelParams, observable) -> np.ndarray:
    N = params.hilbert_dim
    j = params.j
    ms = -j + np.arange(N)
    if isinstance(observable, str):
        name = observable.lower()
        if name == "jz":
            return np.diag(ms).astype(complex)
        Jp = np.zeros((N, N), dtype=complex)
        Jp[np.arange(1, N), np.arange(N - 1)] = np.sqrt(j * (j + 1) - ms[:-1] * (ms[:-1] + 1))
        if name == "jx":
            return (Jp + Jp.conj().T) / 2
        if name == "jy":
            return (Jp - Jp.conj().T) / (2j)
        raise ValueError(f"unknown observable {observable!r}")
    O = np.asarray(observable, dtype=complex)
    if O.shape != (N, N):
        raise ValueError(f"observable must be {N}x{N}, got {O.shape}")
    return O


def o3_expectation(params: ModelParams, rho0, observable, t: float) -> float:
    """<O(t)> at p = 0 from the rotor spectrum and Clebsch-Gordan decoupling.

    rho0 is a VectorizedDensityMatrix; the double sum reduces per sector M to
    sum_K rho~_K O~_K exp(lambda_{K,M} t) with the sign-augmented Clebsch-
    Gordan projections rho~ and O~.  For Jz and Jx this reproduces the simple
    exponential and damped-cosine laws exactly at any finite j.
    """
    if params.p != 0:
        raise ValueError(f"requires p = 0, got p={params.p}")
    two_j = params.two_j
    if rho0.two_j != two_j:
        raise ValueError("size mismatch between params and rho0")
    j = params.j
    O = _observable_matrix(params, observable)
    total = 0.0 + 0.0j
    for M, vec in rho0.sectors.items():
        sec = sector_basis(params, M)
        ms = sec.m_values()
        for K in range(abs(M), two_j + 1):
            lam = o3_eigenvalue(params, K, M)
            rho_K = 0.0 + 0.0j
            for kk, coef in enumerate(vec):
                if coef == 0:
                    continue
                m = ms[kk]
                mp = m - M
                sign = (-1) ** round(j - mp)
                rho_K += coef * sign * _cg_two(two_j, int(round(2 * m)), two_j, -int(round(2 * mp)), 2 * K, 2 * M)
            if rho_K == 0:
                continue
            O_K = 0.0 + 0.0j
            for kk in range(sec.dim):
                n = ms[kk]
                npr = n - M
                a = int(round(n + j))
                bidx = int(round(npr + j))
                o_el = O[bidx, a]
                if o_el == 0:
                    continue
                sign = (-1) ** round(j - npr)
                O_K += o_el * sign * _cg_two(two_j, int(round(2 * n)), two_j, -int(round(2 * npr)), 2 * K, 2 * M)
            total += rho_K * O_K * np.exp(lam * t)
    return float(total.real)


@dataclass(frozen=True)
class HPStates:
    """Large-j bosonic states of the M = 0 sector for 0 < |p| < 1.

    Coefficient vectors live on the diagonal basis |m, m>, m = -j..j (index
    m + j), truncated at occupation 2j.  steady_state is trace normalized;
    eigvec (the slowest decaying eigenvector) and gen_eigvec (its rank-2
    generalized partner, printed-coefficient gauge) are Euclidean normalized.
    jordan_scale kappa makes (L_TL - lambda1) gen_eigvec = kappa * eigvec.
    """

    alpha: float
    lambda1: complex
    steady_state: np.ndarray
    eigvec: np.ndarray
    gen_eigvec: np.ndarray
    jordan_scale: float
    omegas: np.ndarray
    mirrored: bool
    gamma: float = 1.0
    p: float = 0.0

    def doublet_eigenvalue(self, n: int) -> complex:
        """Large-j doublet eigenvalue -2|p|Gamma*n of the M = 0 tower."""
        if n < 0:
            raise ValueError("doublet index must be nonnegative")
        return complex(-2 * abs(self.p) * self.gamma * n)


def _omega_coefficients(p: float, nmax: int) -> np.ndarray:
    om = np.zeros(nmax + 1)
    om[0] = 1.0
    if nmax >= 1:
        om[1] = -(1 + 2 * p) / (1 + p)
    if nmax >= 2:
        om[2] = p / (1 + p) ** 2
    g = 2 * p / (1 + p)
    for n in range(3, nmax + 1):
        om[n] = om[2] * g ** (n - 2) / math.comb(n, 2)
    return om


def _gen_eigvec_raw(p: float, nmax: int) -> np.ndarray:
    """Quasi-vacuum expansion of the printed coefficients: sum_n Omega_n/n! (b1+ b2+)^n |0,0>.

    Coefficient on occupation K is sum_n Omega_n C(K,n) alpha^(K-n).  The
    individual binomial factors overflow long before the damped sum does, so
    each term is assembled in log space with its sign.
    """
    om = _omega_coefficients(p, nmax)
    log_om = np.full(nmax + 1, -math.inf)
    sign_om = np.zeros(nmax + 1)
    nz = om != 0.0
    log_om[nz] = np.log(np.abs(om[nz]))
    sign_om[nz] = np.sign(om[nz])
    la = math.log((1 - p) / (1 + p))
    ns = np.arange(nmax + 1)
    lfacts = np.array([_lfact(int(n)) for n in ns])
    out = np.zeros(nmax + 1)
    for K in range(nmax + 1):
        lterm = log_om[: K + 1] + (lfacts[K] - lfacts[: K + 1] - lfacts[K::-1]) + (K - ns[: K + 1]) * la
        peak = lterm.max()
        if peak == -math.inf:
            continue
        out[K] = math.exp(peak) * float(np.sum(sign_om[: K + 1] * np.exp(lterm - peak)))
    return out


def hp_states(params: ModelParams) -> HPStates:
    """Steady state, slowest doublet eigenvector, and its generalized partner.

    Valid for 0 < p < 1; negative p is handled by the m -> -m mirror.  The
    jordan_scale is (1+p)/2 rescaled by the Euclidean normalization, exact for
    the infinite bosonic tower (checked symbolically order by order).
    """
    p = params.p
    if not 0 < abs(p) < 1:
        raise ValueError(f"requires 0 < |p| < 1, got p={p}")
    mirrored = p < 0
    pa = abs(p)
    nmax = params.two_j
    alpha = (1 - pa) / (1 + pa)
    n = np.arange(nmax + 1)
    ss = alpha**n
    ss = ss / ss.sum()
    eig = alpha**n * (2 * pa * n - (1 - pa))
    eig *= 2 / (1 - pa**2)  # printed compact normalization
    gen = _gen_eigvec_raw(pa, nmax)
    kappa = (1 + pa) / 2 * np.linalg.norm(eig) / np.linalg.norm(gen)
    eigh_ = eig / np.linalg.norm(eig)
    genh = gen / np.linalg.norm(gen)
    if mirrored:
        ss, eigh_, genh = ss[::-1].copy(), eigh_[::-1].copy(), genh[::-1].copy()
    return HPStates(
        alpha=alpha,
        lambda1=complex(-2 * pa * params.gamma),
        steady_state=ss,
        eigvec=eigh_,
        gen_eigvec=genh,
        jordan_scale=float(kappa),
        omegas=_omega_coefficients(pa, nmax),
        mirrored=mirrored,
        gamma=params.gamma,
        p=p,
    )


@dataclass(frozen=True)
class ThermalSS:
    """Thermal form of the steady state: rho_SS = exp(beta h Jz)/Z.

    beta is None at h = 0, where only the geometric (alpha) parametrization is
    regular.  coefficients is the trace-normalized diagonal on m = -j..j.
    """

    beta: float | None
    Z: float
    jz: float
    coefficients: np.ndarray
    alpha: float


def thermal_ss(params: ModelParams) -> ThermalSS:
    """Exact finite-j steady state for |p| < 1, plus magnetization.

    The geometric vector alpha^(m+j) annihilates the M = 0 sector operator
    identically (term-by-term cancellation), for any gamma0.  At |p| = 1 the
    state degenerates to the pure extremal state and is returned as such.
    """
    p, j, h = params.p, params.j, params.h
    N = params.hilbert_dim
    if abs(p) >= 1:
        coef = np.zeros(N)
        coef[0 if p > 0 else -1] = 1.0
        return ThermalSS(beta=None, Z=1.0, jz=(-j if p > 0 else j), coefficients=coef, alpha=(0.0 if p > 0 else np.inf))
    alpha = (1 - p) / (1 + p)
    # weights alpha^(m+j), stably normalized through logs for large j
    expo = np.arange(N) * (math.log(alpha) if alpha > 0 else 0.0)
    if p == 0:
        w = np.ones(N)
    else:
        w = np.exp(expo - expo.max())
    Zshift = w.sum()
    coef = w / Zshift
    ms = -j + np.arange(N)
    jz = float(np.sum(ms * coef))
    # partition function in the beta parametrization (reference value; may
    # overflow to inf at large j without affecting the normalized coefficients)
    if h != 0:
        beta = math.log(alpha) / h
        bh = beta * h
        try:
            if abs(bh) > 1e-12:
                Z = math.exp(-bh * j) * (1 - math.exp(bh * (2 * j + 1))) / (1 - math.exp(bh))
            else:
                Z = float(N)
        except OverflowError:
            Z = math.inf
    else:
        beta = None
        with np.errstate(over="ignore"):
            Z = float(np.sum(np.exp(expo))) if alpha > 0 else float(N)
    return ThermalSS(beta=beta, Z=float(Z), jz=jz, coefficients=coef, alpha=alpha)


def ep_halflife(lambda_rate: float, has_generalized: bool) -> float:
    """Half-life of the mode population envelope.

    Plain eigenstate: exp(lambda t) = 1/2.  With an equally populated rank-2
    partner the envelope is (1 + t) exp(lambda t), solved by bracketed root
    finding.
    """
    if lambda_rate >= 0:
        raise ValueError(f"decay rate must be negative, got {lambda_rate}")
    t_plain = math.log(2.0) / abs(lambda_rate)
    if not has_generalized:
        return t_plain
    f = lambda t: (1 + t) * math.exp(lambda_rate * t) - 0.5
    hi = t_plain
    while f(hi) > 0:
        hi *= 2
    return float(brentq(f, t_plain / 4, hi, xtol=1e-12))
