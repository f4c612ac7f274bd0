"""Time propagation of vectorized density matrices, observables, and the
slowing-down / critical-dynamics experiments.

Propagation applies exp(t L_M) per sector through dense scaling-and-squaring
(scipy expm), never a spectral decomposition: near coalescing pairs the
eigenbasis is exponentially ill-conditioned while expm stays backward stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .closed_forms import hp_states, thermal_ss
from .liouvillian import build_sector
from .model import ModelParams

__all__ = [
    "VectorizedDensityMatrix",
    "ObservableTrace",
    "PositivityError",
    "SlowdownResult",
    "coherent_state",
    "fock_state",
    "maximally_mixed",
    "propagate",
    "expectation",
    "entropy",
    "slowdown_experiment",
    "btc_experiment",
]


class PositivityError(ValueError):
    """Reconstructed density matrix has a genuinely negative eigenvalue."""


@dataclass
class VectorizedDensityMatrix:
    """Density matrix stored per sector: sectors[M][k] = <m|rho|m-M>, m ascending.

    Sectors absent from the dict are zero.  Physical states satisfy
    sum(sectors[0]) = 1 and the Hermitian mirror relation between M and -M.
    """

    two_j: int
    sectors: dict = field(default_factory=dict)

    @property
    def j(self) -> float:
        return self.two_j / 2.0

    def copy(self) -> "VectorizedDensityMatrix":
        return VectorizedDensityMatrix(self.two_j, {M: v.copy() for M, v in self.sectors.items()})

    def trace(self) -> complex:
        v = self.sectors.get(0)
        return complex(v.sum()) if v is not None else 0.0 + 0.0j

    def hermiticity_defect(self) -> float:
        """Max deviation from the mirror rule rho(-M) = conj(rho(M)).

        Index alignment works out elementwise: component k of sector -M is the
        conjugate of component k of sector M.
        """
        worst = 0.0
        for M, v in self.sectors.items():
            w = self.sectors.get(-M, np.zeros_like(v))
            worst = max(worst, float(np.abs(w - np.conj(v)).max(initial=0.0)))
        return worst

    def to_dense(self) -> np.ndarray:
        N = self.two_j + 1
        rho = np.zeros((N, N), dtype=complex)
        for M, vec in self.sectors.items():
            # sector M lives on the diagonal with column = row - M
            rows = np.arange(max(0, M), N + min(0, M))
            rho[rows, rows - M] = vec
        return rho

    @classmethod
    def from_dense(cls, two_j: int, rho: np.ndarray, prune: float = 0.0) -> "VectorizedDensityMatrix":
        N = two_j + 1
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (N, N):
            raise ValueError(f"expected {N}x{N} matrix, got {rho.shape}")
        sectors = {}
        for M in range(-two_j, two_j + 1):
            v = np.diagonal(rho, offset=-M).copy()
            if prune and np.abs(v).max(initial=0.0) <= prune:
                continue
            sectors[M] = v
        return cls(two_j, sectors)


def fock_state(two_j: int, m: float) -> VectorizedDensityMatrix:
    """|m><m| as a vectorized state."""
    j = two_j / 2.0
    if abs(m) > j or abs(2 * m - round(2 * m)) > 1e-9 or (round(2 * m) - two_j) % 2 != 0:
        raise ValueError(f"m={m} invalid for two_j={two_j}")
    v = np.zeros(two_j + 1, dtype=complex)
    v[int(round(m + j))] = 1.0
    return VectorizedDensityMatrix(two_j, {0: v})


def maximally_mixed(two_j: int) -> VectorizedDensityMatrix:
    N = two_j + 1
    return VectorizedDensityMatrix(two_j, {0: np.full(N, 1.0 / N, dtype=complex)})


def coherent_state(two_j: int, theta: float, phi: float) -> VectorizedDensityMatrix:
    """Pure spin coherent state; theta = pi/2, phi = 0 maximizes <Jx> = j.

    Amplitudes c_m = sqrt(C(2j, j+m)) cos(theta/2)^(j+m) sin(theta/2)^(j-m)
    e^{-i(j-m)phi} on the Jz basis.
    """
    N = two_j + 1
    k = np.arange(N)  # k = m + j
    logc = 0.5 * (
        np.array([_log_binom(two_j, int(kk)) for kk in k])
    )
    with np.errstate(divide="ignore"):
        amp = np.exp(logc) * np.cos(theta / 2) ** k * np.sin(theta / 2) ** (two_j - k)
    c = amp * np.exp(-1j * (two_j - k) * phi)
    c = c / np.linalg.norm(c)
    rho = np.outer(c, c.conj())
    return VectorizedDensityMatrix.from_dense(two_j, rho)


def _log_binom(n: int, k: int) -> float:
    import math

    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _check_times(times) -> np.ndarray:
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or len(ts) == 0:
        raise ValueError("times must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(ts)):
        raise ValueError("times must be finite")
    if np.any(np.diff(ts) < 0) or ts[0] < 0:
        raise ValueError("times must be nondecreasing and nonnegative")
    return ts


# substep bound on ||A||_inf * dt: keeps the forward error of the exponential
# small for the highly non-normal sector generators near the triangular limits
_EXPM_STEP_NORM = 4.0


def propagate(params: ModelParams, rho0: VectorizedDensityMatrix, times) -> list[VectorizedDensityMatrix]:
    """States exp(t L) rho0 at the requested times (nondecreasing, t >= 0).

    Each populated sector is propagated with dense matrix exponentials,
    internally substepped so that each exponential argument stays small; equal
    steps reuse a cached exponential.
    """
    ts = _check_times(times)
    if rho0.two_j != params.two_j:
        raise ValueError("size mismatch between params and rho0")
    out = [rho0.copy() for _ in ts]
    for M, v0 in rho0.sectors.items():
        op = build_sector(params, M)
        A = op.to_dense()
        scale = op.scale()
        cache: dict[float, np.ndarray] = {}
        v = np.asarray(v0, dtype=complex)
        prev_t = 0.0
        for i, t in enumerate(ts):
            dt = t - prev_t
            if dt > 0:
                k = max(1, int(np.ceil(scale * dt / _EXPM_STEP_NORM)))
                sub = dt / k
                E = cache.get(sub)
                if E is None:
                    E = expm(A * sub)
                    cache[sub] = E
                for _ in range(k):
                    v = E @ v
                prev_t = t
            out[i].sectors[M] = v.copy()
    return out


def expectation(rho: VectorizedDensityMatrix, which: str) -> float:
    """<Jz>, <Jx>, <Jy>, or a diagonal projector <m> population.

    Jz reads sector 0 only; Jx and Jy read sectors +-1 through the ladder
    coefficients.  The imaginary part must vanish for Hermitian input and is
    checked against a 1e-10 tolerance.
    """
    j = rho.j
    name = which.lower()
    if name == "jz":
        v = rho.sectors.get(0)
        if v is None:
            raise ValueError("state has no M=0 sector")
        ms = -j + np.arange(len(v))
        val = complex(np.sum(ms * v))
    elif name in ("jx", "jy"):
        vp = rho.sectors.get(1)
        vm = rho.sectors.get(-1)
        if vp is None and vm is None:
            raise ValueError("state has no M=+-1 sectors")
        # Tr(rho J-) = sum_m rho(+1)_m C-(m); Tr(rho J+) is its Hermitian mirror
        if vp is not None:
            m_min = max(-j, -j + 1)
            ms = m_min + np.arange(len(vp))
            jminus = complex(np.sum(vp * np.sqrt(j * (j + 1) - ms * (ms - 1))))
        else:
            m_min = -j
            ms = m_min + np.arange(len(vm))
            jminus = complex(np.conj(np.sum(vm * np.sqrt(j * (j + 1) - ms * (ms + 1)))))
        val = complex(jminus.real) if name == "jx" else complex(-jminus.imag)
    elif name.startswith("pop:"):
        m = float(name.split(":", 1)[1])
        v = rho.sectors.get(0)
        if v is None:
            raise ValueError("state has no M=0 sector")
        val = complex(v[int(round(m + j))])
    else:
        raise ValueError(f"unknown observable {which!r}")
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation value not real: {val} (non-Hermitian state?)")
    return float(val.real)


def entropy(rho: VectorizedDensityMatrix) -> float:
    """Von Neumann entropy -Tr[rho ln rho] of the reconstructed matrix.

    Eigenvalues in [-1e-10, 0) are clipped to zero (roundoff); anything below
    -1e-8 signals genuine positivity loss and raises.
    """
    dense = rho.to_dense()
    w = np.linalg.eigvalsh(0.5 * (dense + dense.conj().T))
    if w.min() < -1e-8:
        raise PositivityError(f"negative eigenvalue {w.min():.3e} in density matrix")
    w = np.clip(w, 0.0, None)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


@dataclass(frozen=True)
class ObservableTrace:
    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values length mismatch")
        if np.any(np.diff(self.times) <= 0) and len(self.times) > 1:
            raise ValueError("times must be strictly increasing")


@dataclass(frozen=True)
class SlowdownResult:
    numeric: ObservableTrace
    theory: ObservableTrace
    initial_state: VectorizedDensityMatrix
    jz_infinity: float
    jordan_scale: float


def slowdown_experiment(params: ModelParams, a: float, b: float, times) -> SlowdownResult:
    """Relaxation of delta-Jz from the steady state dressed with its slowest
    doublet, against the thermodynamic-limit two-mode prediction.

    The initial state is SS + a*eigvec + b*gen_eigvec (trace renormalized) and
    must pass the positivity check.  The theory curve propagates the rank-2
    pair: coefficients (a + kappa b t) e^{lambda1 t} and b e^{lambda1 t}, with
    kappa the Jordan scale of the normalized states.
    """
    if not 0 < abs(params.p) < 1:
        raise ValueError("slowdown experiment needs 0 < |p| < 1")
    if a == 0 and b == 0:
        raise ValueError("nothing to relax: a and b both zero")
    ts = _check_times(times)
    hp = hp_states(params)
    rho_vec = hp.steady_state + a * hp.eigvec + b * hp.gen_eigvec
    tr = rho_vec.sum()
    rho_vec = rho_vec / tr
    if rho_vec.min() < -1e-10:
        raise ValueError(
            f"initial state not positive (min diagonal {rho_vec.min():.3e}); reduce |a|, |b|"
        )
    two_j = params.two_j
    rho0 = VectorizedDensityMatrix(two_j, {0: rho_vec.astype(complex)})
    states = propagate(params, rho0, ts)
    jz_inf = thermal_ss(params).jz
    jz0 = expectation(rho0, "jz")
    num = np.array([(expectation(s, "jz") - jz_inf) / (jz0 - jz_inf) for s in states])

    ms = -params.j + np.arange(two_j + 1)
    jz_of = lambda vec: float(np.sum(ms * vec))
    lam1 = hp.lambda1.real
    jz_e = jz_of(hp.eigvec)
    jz_g = jz_of(hp.gen_eigvec)
    denom = a * jz_e + b * jz_g
    theo = np.exp(lam1 * ts) * ((a + hp.jordan_scale * b * ts) * jz_e + b * jz_g) / denom
    return SlowdownResult(
        numeric=ObservableTrace(ts, num, "delta_jz_numeric"),
        theory=ObservableTrace(ts, theo, "delta_jz_theory"),
        initial_state=rho0,
        jz_infinity=jz_inf,
        jordan_scale=hp.jordan_scale,
    )


def btc_experiment(params: ModelParams, two_j_list, times, cross_check_max_two_j: int = 0) -> dict:
    """Undamped-oscillation curves <Jx(t)/j> = e^{-Gamma t/(2j)} cos(h t) at p = 0.

    The initial state maximizes <Jx(0)> (coherent theta=pi/2, phi=0), for which
    the law is exact at every finite j.  Sizes up to cross_check_max_two_j are
    verified against direct propagation.
    """
    if params.p != 0:
        raise ValueError("btc experiment requires p = 0")
    ts = _check_times(times)
    out = {}
    for two_j in two_j_list:
        j = two_j / 2.0
        vals = np.exp(-params.gamma * ts / (2 * j)) * np.cos(params.h * ts)
        if two_j <= cross_check_max_two_j:
            pj = ModelParams(two_j=two_j, h=params.h, gamma=params.gamma, gamma0=params.gamma0, p=0.0)
            rho0 = coherent_state(two_j, np.pi / 2, 0.0)
            states = propagate(pj, rho0, ts)
            num = np.array([expectation(s, "jx") / j for s in states])
            if np.abs(num - vals).max() > 1e-8:
                raise AssertionError(
                    f"closed form and propagation disagree at two_j={two_j}: {np.abs(num - vals).max():.2e}"
                )
        out[two_j] = ObservableTrace(ts, vals, f"jx_over_j_two_j_{two_j}")
    return out
