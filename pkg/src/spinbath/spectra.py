"""Non-Hermitian sector diagonalization and the exceptional-point scan pipeline.

Every sector operator is a real tridiagonal matrix plus the constant imaginary
shift i*h*M, and for |p| < 1 both off-diagonal bands are strictly positive.
Such a matrix is diagonally similar to a real symmetric tridiagonal one, so the
spectrum is {real value + i h M} exactly and is obtained, fully converged, from
the symmetric eigenproblem.  Eigenvectors come from inverse iteration on the
original tridiagonal; near a coalesced pair both shifts converge onto the
common direction, which is precisely the physics the eigenvector distance d_N
is meant to capture.  A dense QR path (numpy.linalg.eig) is kept for
cross-validation at small j, where it is reliable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal, solve_banded

from .liouvillian import SectorOperator, build_sector

__all__ = [
    "SpectralDecomposition",
    "EPScanResult",
    "FitResult",
    "DensityOfStates",
    "EigensolverError",
    "diagonalize",
    "eigenvalues_only",
    "eigenvector_distance",
    "pair_distances",
    "ep_scan",
    "fit_power_law",
    "fit_exponential",
    "density_of_states",
    "kernel_dimension",
    "doublet_distance_decay",
    "DISTANCE_FLOOR",
]

# below this the double-precision floor dominates eigenvector distances
DISTANCE_FLOOR = 1e-12

_INV_ITER_SEED = 12345
_INV_ITER_STEPS = 4


class EigensolverError(RuntimeError):
    """Eigensolver failure, annotated with the sector it occurred in."""

    def __init__(self, message: str, two_j: int, M: int):
        super().__init__(f"{message} (two_j={two_j}, M={M})")
        self.two_j = two_j
        self.M = M


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ordered spectrum of one sector with unit-norm right eigenvectors.

    eigenvalues are sorted by descending real part, ties by ascending
    imaginary part; right_eigenvectors[:, N] belongs to eigenvalues[N].
    """

    sector: "object"
    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    residual_norms: np.ndarray
    operator_scale: float
    method: str

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def near_defective_pairs(self, condition_bound: float = 1e8) -> list[int]:
        """Indices N whose pair (N, N+1) has overlap condition above the bound."""
        d = pair_distances(self)
        return [int(N) for N in range(len(d)) if 1.0 / max(d[N], 1e-300) > condition_bound]


@dataclass(frozen=True)
class EPScanResult:
    """Outcome of the coalescence walk at one bound gamma."""

    gamma_bound: float
    precursor: complex | None
    precursor_index: int | None
    paired_indices: list[tuple[int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class FitResult:
    exponent: float
    prefactor: float
    r_squared: float
    n_points: int


@dataclass(frozen=True)
class DensityOfStates:
    bin_edges: np.ndarray
    density: np.ndarray
    peak_location: float
    n_eigenvalues: int


def _order(w: np.ndarray) -> np.ndarray:
    return np.lexsort((w.imag, -w.real))


def eigenvalues_only(op: SectorOperator) -> np.ndarray:
    """Sector spectrum (descending real part) without eigenvectors.

    Uses the similarity to a real symmetric tridiagonal for |p| < 1; at the
    triangular limits the spectrum is the diagonal itself.
    """
    n = op.dim
    shift = 1j * op.diag[0].imag
    if n == 1:
        return op.diag.astype(complex).copy()
    up = op.upper.real
    lo = op.lower.real
    prod = up * lo
    if np.all(prod > 0):
        w = eigvalsh_tridiagonal(op.diag.real, np.sqrt(prod))[::-1]
        return w + shift
    if np.all(np.abs(op.upper) == 0) or np.all(np.abs(op.lower) == 0):
        return np.sort(op.diag.real)[::-1] + shift
    # mixed-sign couplings cannot occur for this model; fall back to QR
    A = op.to_dense()
    w = np.linalg.eigvals(A)
    return w[_order(w)]


def _inverse_iteration(op: SectorOperator, lams: np.ndarray) -> np.ndarray:
    """Unit right eigenvectors by shifted inverse iteration on the bands.

    The iterate is renormalized by its max element: the resolvent of this
    highly non-normal family can exceed the double range in 2-norm.
    """
    n = op.dim
    rng = np.random.default_rng(_INV_ITER_SEED)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v0 /= np.abs(v0).max()
    scale = op.scale()
    V = np.empty((n, len(lams)), dtype=complex)
    for idx, lam in enumerate(lams):
        ab = np.zeros((3, n), dtype=complex)
        ab[0, 1:] = op.lower
        ab[1, :] = op.diag - lam
        ab[2, :-1] = op.upper
        v = v0.copy()
        for _ in range(_INV_ITER_STEPS):
            try:
                w = solve_banded((1, 1), ab, v, check_finite=False)
            except Exception:
                # exactly singular shift: nudge off the eigenvalue
                ab[1, :] = op.diag - lam + 1e-13 * scale
                w = solve_banded((1, 1), ab, v, check_finite=False)
            w = np.where(np.isfinite(w), w, 0.0)
            mx = np.abs(w).max()
            if mx == 0.0:
                break
            v = w / mx
        v = v / np.linalg.norm(v)
        k = int(np.argmax(np.abs(v)))
        V[:, idx] = v * (abs(v[k]) / v[k])
    return V


def diagonalize(op: SectorOperator, method: str = "auto") -> SpectralDecomposition:
    """Full spectral decomposition of a sector operator.

    method "auto" exploits the exact symmetrizability of the bands (see module
    docstring); "qr" forces the dense general solver.
    """
    if op.dim < 1:
        raise ValueError("empty sector operator")
    sec = op.sector
    if method not in ("auto", "qr"):
        raise ValueError(f"unknown method {method!r}")
    try:
        if method == "qr":
            w, V = np.linalg.eig(op.to_dense())
            order = _order(w)
            w = w[order]
            V = V[:, order]
            V = V / np.linalg.norm(V, axis=0)
            ks = np.argmax(np.abs(V), axis=0)
            phases = V[ks, np.arange(V.shape[1])]
            V = V * (np.abs(phases) / phases)[None, :]
        else:
            w = eigenvalues_only(op)
            V = _inverse_iteration(op, w) if op.dim > 1 else np.ones((1, 1), complex)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc), two_j=sec.dim - 1 + abs(sec.M), M=sec.M) from exc
    res = np.linalg.norm(
        np.stack([op.matvec(V[:, k]) - w[k] * V[:, k] for k in range(op.dim)], axis=1),
        axis=0,
    )
    return SpectralDecomposition(
        sector=sec,
        eigenvalues=w,
        right_eigenvectors=V,
        residual_norms=res,
        operator_scale=op.scale(),
        method=method,
    )


def eigenvector_distance(dec: SpectralDecomposition, N: int) -> float:
    """d_N = 1 - |<N+1|N>| for unit-norm right eigenvectors; 0 means coalesced."""
    if not 0 <= N < dec.dim - 1:
        raise IndexError(f"pair index N={N} out of range for dim={dec.dim}")
    ov = abs(np.vdot(dec.right_eigenvectors[:, N + 1], dec.right_eigenvectors[:, N]))
    return float(min(max(1.0 - ov, 0.0), 1.0))


def pair_distances(dec: SpectralDecomposition) -> np.ndarray:
    """All consecutive distances d_0 .. d_{dim-2} in one pass."""
    V = dec.right_eigenvectors
    ov = np.abs(np.sum(V[:, 1:].conj() * V[:, :-1], axis=0))
    return np.clip(1.0 - ov, 0.0, 1.0)


def ep_scan(dec: SpectralDecomposition, gamma_bound: float) -> EPScanResult:
    """Walk the doublets (2n-1, 2n) down the spectrum against a bound gamma.

    Pairs with d_N < gamma count as coalesced; the precursor is the eigenvalue
    lambda_{N+1} at the first doublet whose distance exceeds the bound.  When
    every doublet is below the bound the precursor is None.
    """
    if not 0 < gamma_bound < 1:
        raise ValueError(f"gamma_bound must lie in (0, 1), got {gamma_bound}")
    d = pair_distances(dec)
    paired: list[tuple[int, int]] = []
    for n in range(1, (dec.dim - 1) // 2 + 1):
        N = 2 * n - 1
        if N >= len(d):
            break
        if d[N] < gamma_bound:
            paired.append((N, N + 1))
        else:
            return EPScanResult(
                gamma_bound=gamma_bound,
                precursor=complex(dec.eigenvalues[N + 1]),
                precursor_index=N + 1,
                paired_indices=paired,
            )
    return EPScanResult(gamma_bound=gamma_bound, precursor=None, precursor_index=None, paired_indices=paired)


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sst = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 if sst == 0 else 1.0 - np.sum(resid**2) / sst
    return float(slope), float(intercept), float(r2)


def fit_power_law(xs, ys) -> FitResult:
    """Least-squares line in log-log coordinates: ys ~ prefactor * xs^exponent."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3:
        raise ValueError(f"need at least 3 points, got {len(xs)}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fit requires strictly positive data")
    slope, intercept, r2 = _linear_fit(np.log(xs), np.log(ys))
    return FitResult(exponent=slope, prefactor=float(np.exp(intercept)), r_squared=r2, n_points=len(xs))


def fit_exponential(xs, ys) -> FitResult:
    """Least-squares line of ln(ys) against xs: ys ~ prefactor * exp(rate*xs)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3:
        raise ValueError(f"need at least 3 points, got {len(xs)}")
    if np.any(ys <= 0):
        raise ValueError("exponential fit requires strictly positive ys")
    rate, intercept, r2 = _linear_fit(xs, np.log(ys))
    return FitResult(exponent=rate, prefactor=float(np.exp(intercept)), r_squared=r2, n_points=len(xs))


def density_of_states(decs, two_j: int, bins: int | None = None) -> DensityOfStates:
    """Normalized histogram of Re(lambda)/j pooled over the given decompositions.

    The peak bin center is the finite-size estimate of the critical line.
    Default bin count is ceil(sqrt(#eigenvalues)); an explicit bins must be
    at least 10.
    """
    if isinstance(decs, SpectralDecomposition):
        decs = [decs]
    vals = [np.asarray(d.eigenvalues).real for d in decs]
    if not vals or sum(len(v) for v in vals) == 0:
        raise ValueError("no eigenvalues given")
    x = np.concatenate(vals) / (two_j / 2.0)
    if bins is None:
        bins = max(1, math.ceil(math.sqrt(len(x))))
    elif bins < 10:
        raise ValueError(f"bins must be >= 10 when given explicitly, got {bins}")
    counts, edges = np.histogram(x, bins=bins)
    widths = np.diff(edges)
    total = counts.sum()
    density = counts / (total * widths) if total > 0 else counts.astype(float)
    k = int(np.argmax(counts))
    peak = 0.5 * (edges[k] + edges[k + 1])
    return DensityOfStates(bin_edges=edges, density=density, peak_location=float(peak), n_eigenvalues=len(x))


def kernel_dimension(op: SectorOperator, lam: complex, rel_tol: float = 1e-8) -> int:
    """Numerical nullity of (L - lam I) via singular values below rel_tol*||L||."""
    A = op.to_dense() - lam * np.eye(op.dim)
    sv = np.linalg.svd(A, compute_uv=False)
    tol = rel_tol * max(op.scale(), 1e-300)
    return int(np.sum(sv < tol))


def doublet_distance_decay(
    params_for: "callable",
    two_j_values,
    pair_index: int = 1,
    floor: float = DISTANCE_FLOOR,
    M: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """d_{pair_index}(j) over a list of sizes, stopping once the floor is hit.

    params_for maps two_j -> ModelParams; returns the sizes actually used and
    their distances.  Sizes whose distance falls below the double-precision
    floor terminate the scan (the values there are rounding noise).
    """
    js, ds = [], []
    for two_j in two_j_values:
        params = params_for(two_j)
        dec = diagonalize(build_sector(params, M))
        if dec.dim <= pair_index + 1:
            continue
        d = eigenvector_distance(dec, pair_index)
        if d < floor:
            break
        js.append(two_j / 2.0)
        ds.append(d)
    return np.asarray(js, dtype=float), np.asarray(ds, dtype=float)
