"""Ground truth by brute force: dense eigenvalues, closed-walk counts and
excursion counts. Nothing here uses the message-passing code except
:func:`series_check`, which compares against it."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._accel import njit
from .errors import TooDeep, TooLarge
from .graph import FactorGraph, adjacency

DEFAULT_CAP = 5000
MAX_WALK_ORDER = 12


@njit
def _jacobi_sweeps(a, tol, max_sweeps):
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if off <= tol * tol:
            return True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
    return False


def jacobi_eigvalsh(a, tol=1e-13, max_sweeps=100):
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(a, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(np.abs(a).max(), 1.0) if a.size else 1.0
    if not _jacobi_sweeps(a, tol * scale * max(a.shape[0], 1), max_sweeps):
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(a).copy())


@dataclass
class EigenReport:
    eigenvalues: np.ndarray
    bin_edges: np.ndarray
    hist_density: np.ndarray
    grid: np.ndarray | None = None
    smoothed: np.ndarray | None = None
    moments: list | None = None

    @property
    def n(self):
        return len(self.eigenvalues)


def histogram(eigenvalues, bin_width=0.1):
    """Density-normalized histogram over [min - 0.5, max + 0.5]."""
    lam = np.asarray(eigenvalues)
    lo = lam.min() - 0.5
    nbins = int(np.ceil((lam.max() + 0.5 - lo) / bin_width))
    edges = lo + bin_width * np.arange(nbins + 1)
    counts, _ = np.histogram(lam, bins=edges)
    return edges, counts / (len(lam) * bin_width)


def diagonalize(fg: FactorGraph, method: str = "lapack", cap: int = DEFAULT_CAP,
                bin_width: float = 0.1, grid=None, eta: float | None = None,
                r_max: int = 0) -> EigenReport:
    """All adjacency eigenvalues (ascending) plus derived summaries.

    ``method`` is ``"lapack"`` (``numpy.linalg.eigvalsh``) or ``"jacobi"``
    (the in-package rotation solver; slow, meant for small networks).
    """
    if fg.n > cap:
        raise TooLarge(f"n={fg.n} exceeds the dense diagonalization cap {cap}")
    A = adjacency(fg).to_dense()
    if method == "lapack":
        lam = np.linalg.eigvalsh(A)
    elif method == "jacobi":
        lam = jacobi_eigvalsh(A)
    else:
        raise ValueError(f"unknown method {method!r}")
    lam = np.sort(lam)
    edges, dens = histogram(lam, bin_width)
    report = EigenReport(lam, edges, dens)
    if grid is not None and eta is not None:
        report.grid = np.asarray(grid, dtype=float)
        report.smoothed = smoothed_density(lam, report.grid, eta)
    if r_max:
        report.moments = [float(np.mean(lam**r)) for r in range(r_max + 1)]
    return report


def smoothed_density(eigenvalues, grid, eta, chunk=256):
    """Mean of unit Lorentzians of width ``eta`` centred on each eigenvalue."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    lam = np.asarray(getattr(eigenvalues, "eigenvalues", eigenvalues), dtype=float)
    x = np.asarray(grid, dtype=float)
    out = np.empty_like(x)
    for a in range(0, len(x), chunk):
        d = x[a:a + chunk, None] - lam[None, :]
        out[a:a + chunk] = (eta / np.pi / (d * d + eta * eta)).mean(axis=1)
    return out


def trace_moments(fg: FactorGraph, r_max: int, block: int = 512) -> list:
    """``Tr A^r / n`` for r = 0..r_max via sparse products on column blocks."""
    if r_max > MAX_WALK_ORDER:
        raise ValueError(f"r_max must be at most {MAX_WALK_ORDER}")
    n = fg.n
    A = adjacency(fg).to_sparse()
    traces = np.zeros(r_max + 1)
    traces[0] = n
    for a in range(0, n, block):
        cols = np.arange(a, min(a + block, n))
        X = np.zeros((n, len(cols)))
        X[cols, np.arange(len(cols))] = 1.0
        for r in range(1, r_max + 1):
            X = A @ X
            traces[r] += X[cols, np.arange(len(cols))].sum()
    return (traces / n).tolist()


def count_excursions(fg: FactorGraph, u: int, sigma: int, r: int) -> int:
    """Walks of length ``r`` from ``u`` whose first and last steps use edges
    of motif ``sigma`` and which visit ``u`` only at the two ends.

    Counted by depth-first recursion over the adjacency (with multiplicity),
    memoized on (current node, steps left).
    """
    if r > MAX_WALK_ORDER:
        raise TooDeep(f"excursion length {r} exceeds {MAX_WALK_ORDER}")
    motif = fg.motifs[sigma]
    if u not in motif.members:
        raise ValueError(f"node {u} is not in motif {sigma}")
    if r < 2:
        return 0
    nbrs = adjacency(fg).neighbours()
    # sigma's own edges touching u: these are the allowed first/last steps
    via_sigma = [b if a == u else a for a, b in motif.global_edges() if u in (a, b)]

    @lru_cache(maxsize=None)
    def walks(v, left):
        if left == 1:
            return via_sigma.count(v)
        return sum(walks(w, left - 1) for w in nbrs[v] if w != u)

    return sum(walks(v, r - 1) for v in via_sigma)


@dataclass(frozen=True)
class SeriesCheck:
    mu: complex
    series: complex
    residual: float
    bound: float
    counts: tuple

    @property
    def ok(self):
        return self.residual <= self.bound


def series_check(fg: FactorGraph, u: int, sigma: int, z_large: complex, r_max: int,
                 tol: float = 1e-13) -> SeriesCheck:
    """Compare the solved message mu_{u,sigma}(z) with its excursion series
    ``sum_r N_r / z^(r-1)`` truncated at ``r_max``.

    With D the maximum degree, N_r <= D^(r-1), so the truncation error is at
    most q^r_max / (1 - q) with q = D/|z|; the solver tolerance is added.
    """
    from .messages import SolveConfig, _solve

    D = int(adjacency(fg).degrees.max()) if fg.n else 0
    z = complex(z_large)
    if abs(z) <= 2 * D:
        raise ValueError(f"|z| must exceed twice the maximum degree ({2 * D})")
    state = _solve(fg, z, SolveConfig(tol=tol, max_iter=10_000), None, None)
    mu = complex(state.mu[fg.incidence_id(u, sigma)])
    counts = tuple(count_excursions(fg, u, sigma, r) for r in range(1, r_max + 1))
    series = sum(c / z ** (r - 1) for r, c in enumerate(counts, start=1))
    q = D / abs(z)
    bound = q**r_max / (1 - q) + 10 * tol
    return SeriesCheck(mu, complex(series), abs(mu - series), bound, counts)
