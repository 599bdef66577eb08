"""Self-consistent message passing for the spectral density.

Two kinds of message live on every node/motif incidence:

``mu``  motif -> node. The generating function of excursions from the
        node that leave and re-enter it through that motif.
``g``   node -> motif. The cavity resolvent of the node with that motif
        removed, ``1 / (z - sum of the node's other mu)``.

A motif turns the ``g`` of its other members into ``mu`` by summing the
weights of all closed walks inside the motif that touch the receiving node
only at the ends. Single edges and triangles have closed forms; every other
motif is resummed exactly with a small dense solve.

The complex density is ``rho(z) = -(1/(n pi)) sum_u 1/(z - sum_sigma mu)``
and ``Im rho(x + i eta)`` is the eta-broadened spectral density at ``x``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._accel import HAVE_NUMBA, default_backend, max_workers
from .errors import (
    GeometricSeriesDivergence,
    GridTooNarrow,
    NearSingular,
    NotConverged,
    NumericalBreakdown,
    SingularMotifSolve,
)
from .graph import FactorGraph, Motif


@dataclass(frozen=True)
class ComplexArg:
    x: float
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be strictly positive, got {self.eta}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.eta)


@dataclass(frozen=True)
class SolveConfig:
    tol: float = 1e-10
    max_iter: int = 100_000
    damping: float = 0.0
    warm_start: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class MessageState:
    """Messages at one complex argument, indexed by incidence id."""

    mu: np.ndarray
    g: np.ndarray
    z: complex
    converged: bool = False
    iterations: int = 0
    max_delta: float = float("inf")

    @classmethod
    def zeros(cls, fg: FactorGraph, z) -> "MessageState":
        m = fg.n_incidences
        return cls(np.zeros(m, dtype=np.complex128), np.zeros(m, dtype=np.complex128), _as_z(z))

    def copy(self) -> "MessageState":
        return MessageState(self.mu.copy(), self.g.copy(), self.z, self.converged,
                            self.iterations, self.max_delta)


@dataclass
class SpectrumResult:
    grid: np.ndarray
    rho: np.ndarray
    eta: float
    converged: np.ndarray
    iterations: np.ndarray
    meta: dict = field(default_factory=dict)


def _as_z(z) -> complex:
    if isinstance(z, ComplexArg):
        return z.z
    return complex(z)


# --- single-message rules -------------------------------------------------------

def g_update(fg: FactorGraph, state: MessageState, u: int, sigma: int) -> complex:
    """Node ``u`` -> motif ``sigma`` message from the current ``mu``."""
    own = fg.incidence_id(u, sigma)
    others = [i for i in fg.incidences_of(u) if i != own]
    den = state.z - state.mu[others].sum()
    if abs(den) < kernels.SINGULAR_EPS:
        raise NearSingular(f"g denominator vanishes at node {u}, motif {sigma}",
                           incidence=own, node=u, motif=sigma)
    return complex(1.0 / den)


def mu_edge(g_v: complex) -> complex:
    """A single edge returns the far end's message unchanged."""
    return g_v


def mu_triangle(g_v: complex, g_w: complex) -> complex:
    den = 1.0 - g_v * g_w
    if abs(den) < kernels.SINGULAR_EPS:
        raise GeometricSeriesDivergence("triangle walk sum diverges (|g_v g_w| ~ 1)")
    return (2.0 * g_v * g_w + g_v + g_w) / den


def mu_general(motif: Motif, u_position: int, g_values) -> complex:
    """Resummed walk weight for member ``u_position`` of an arbitrary motif.

    ``g_values`` holds one message per member (the receiving member's entry
    is ignored). Computes ``(B (I - G B)^{-1})[u, u]`` with ``B`` the motif
    adjacency and ``G`` the diagonal of messages with the ``u`` entry zeroed.
    """
    B = motif.local_adjacency()
    g = np.asarray(g_values, dtype=np.complex128).copy()
    if g.shape != (motif.size,):
        raise ValueError(f"expected {motif.size} messages, got shape {g.shape}")
    g[u_position] = 0.0
    A = np.eye(motif.size) - g[:, None] * B
    rhs = np.zeros(motif.size, dtype=np.complex128)
    rhs[u_position] = 1.0
    try:
        if np.linalg.cond(A) > 1e14:
            raise np.linalg.LinAlgError
        y = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        raise SingularMotifSolve("I - G B is singular for this motif") from None
    return complex(B[u_position] @ y)


# --- sweeps and solves -------------------------------------------------------------

def _raise_breakdown(fg, status, inc, z):
    node = int(fg.inc_node[inc]) if inc >= 0 else None
    motif = int(fg.inc_motif[inc]) if inc >= 0 else None
    where = f"at z={z}, node {node}, motif {motif} (incidence {inc})"
    if status == kernels.NEAR_SINGULAR:
        raise NearSingular(f"g denominator below 1e-14 {where}", inc, node, motif)
    if status == kernels.SERIES_DIVERGENCE:
        raise GeometricSeriesDivergence(f"triangle walk sum diverges {where}", inc, node, motif)
    raise SingularMotifSolve(f"singular motif solve {where}", inc, node, motif)


def _check_shape(fg, state):
    m = fg.n_incidences
    if state.mu.shape != (m,) or state.g.shape != (m,):
        raise ValueError(f"message arrays must have length {m} (incidence count)")


def _backend(name):
    name = name or default_backend()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}; use 'numba' or 'numpy'")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is not installed")
    return name


def sweep(fg: FactorGraph, state: MessageState, cfg: SolveConfig | None = None,
          backend: str | None = None):
    """One synchronous update of every message.

    All ``g`` are formed from the old ``mu``, then every ``mu`` from the new
    ``g``. Returns ``(new_state, max_delta)``; ``state`` is left untouched.
    """
    cfg = cfg or SolveConfig()
    _check_shape(fg, state)
    backend = _backend(backend)
    z = state.z
    if backend == "numba":
        a = fg.kernel_arrays()
        mu = np.empty_like(state.mu)
        g = np.empty_like(state.g)
        kmax = a["kmax"]
        status, bad, delta = kernels.sweep_loop(
            z, a["node_ptr"], a["node_inc"], a["inc_node"], a["motif_ptr"], a["motif_kind"],
            a["adj_ptr"], a["adj_data"], state.mu, state.g, mu, g, cfg.damping,
            np.empty(kmax * kmax, dtype=np.complex128), np.empty(kmax, dtype=np.complex128),
        )
    else:
        status, bad, mu, g, delta = kernels.sweep_numpy(
            kernels.numpy_plan(fg), z, state.mu, state.g, cfg.damping)
    if status != kernels.OK:
        _raise_breakdown(fg, status, bad, z)
    new = MessageState(mu, g, z, delta < cfg.tol, state.iterations + 1, float(delta))
    return new, float(delta)


def _solve(fg, z, cfg, init, backend):
    if init is None:
        state = MessageState.zeros(fg, z)
    else:
        _check_shape(fg, init)
        state = MessageState(init.mu.copy(), init.g.copy(), z)
    if fg.n_incidences == 0:
        state.converged, state.iterations, state.max_delta = True, 0, 0.0
        return state
    backend = _backend(backend)
    if backend == "numba":
        a = fg.kernel_arrays()
        status, bad, it, delta = kernels.solve_loop(
            z, a["node_ptr"], a["node_inc"], a["inc_node"], a["motif_ptr"], a["motif_kind"],
            a["adj_ptr"], a["adj_data"], state.mu, state.g, cfg.damping, cfg.tol, cfg.max_iter)
    else:
        status, bad, it, delta = kernels.solve_numpy(
            kernels.numpy_plan(fg), z, state.mu, state.g, cfg.damping, cfg.tol, cfg.max_iter)
    if status != kernels.OK:
        _raise_breakdown(fg, status, bad, z)
    state.iterations = int(it)
    state.max_delta = float(delta)
    state.converged = bool(delta < cfg.tol)
    return state


def solve_at_z(fg: FactorGraph, z, cfg: SolveConfig | None = None,
               init: MessageState | None = None, backend: str | None = None,
               strict: bool = False) -> MessageState:
    """Iterate sweeps from ``init`` (all zeros by default) to a fixed point.

    ``z`` is a :class:`ComplexArg` or a complex number with positive
    imaginary part. An unconverged result is returned with
    ``converged=False`` unless ``strict`` is set, in which case
    :class:`NotConverged` is raised.
    """
    zc = _as_z(z)
    if not zc.imag > 0:
        raise ValueError(f"Im z must be strictly positive, got {zc}")
    cfg = cfg or SolveConfig()
    state = _solve(fg, zc, cfg, init, backend)
    if strict and not state.converged:
        raise NotConverged(f"no convergence at z={zc} after {state.iterations} sweeps",
                           state.max_delta, state.iterations)
    return state


def spectral_density_at(fg: FactorGraph, state: MessageState, backend: str | None = None) -> complex:
    """Complex density rho(z); its imaginary part is the broadened density."""
    _check_shape(fg, state)
    if fg.n == 0:
        raise ValueError("empty network has no spectral density")
    backend = _backend(backend)
    if backend == "numba":
        a = fg.kernel_arrays()
        status, bad, val = kernels.density_loop(state.z, a["node_ptr"], a["node_inc"], state.mu)
    else:
        status, bad, val = kernels.density_numpy(kernels.numpy_plan(fg), state.z, state.mu)
    if status != kernels.OK:
        raise NearSingular(f"density denominator vanishes at node {bad}, z={state.z}", node=bad)
    return complex(val)


# --- scans ----------------------------------------------------------------------------

def make_grid(xmin: float, xmax: float, dx: float) -> np.ndarray:
    """``xmin, xmin+dx, ...`` up to ``xmax`` inclusive (within rounding)."""
    if not dx > 0:
        raise ValueError("dx must be positive")
    if xmax < xmin:
        raise ValueError("xmax must not be below xmin")
    count = int(np.floor((xmax - xmin) / dx + 1e-9)) + 1
    return xmin + dx * np.arange(count)


def _point(fg, x, eta, cfg, init, backend):
    try:
        state = _solve(fg, complex(x, eta), cfg, init, backend)
        rho = spectral_density_at(fg, state, backend).imag
    except NumericalBreakdown:
        return None, np.nan, False, 0
    if not np.isfinite(rho):
        return state, np.nan, False, state.iterations
    return state, rho, state.converged, state.iterations


def density_scan(fg: FactorGraph, xmin: float, xmax: float, dx: float, eta: float = 0.01,
                 cfg: SolveConfig | None = None, backend: str | None = None) -> SpectrumResult:
    """Broadened density ``Im rho(x + i eta)`` on a uniform grid.

    With ``cfg.warm_start`` each point starts from the previous point's
    messages and the scan is sequential. Without it, points are independent
    and are spread over ``LOOPY_SPECTRA_THREADS`` workers. Points that hit a
    numerical breakdown get ``rho = nan`` and are flagged unconverged.
    """
    if not eta > 0:
        raise ValueError("eta must be strictly positive")
    cfg = cfg or SolveConfig()
    backend = _backend(backend)
    grid = make_grid(xmin, xmax, dx)
    rho = np.empty(len(grid))
    conv = np.zeros(len(grid), dtype=bool)
    iters = np.zeros(len(grid), dtype=np.int64)

    if cfg.warm_start:
        prev = None
        for k, x in enumerate(grid):
            state, rho[k], conv[k], iters[k] = _point(fg, x, eta, cfg, prev, backend)
            prev = state if conv[k] else None
    else:
        workers = min(max_workers(), len(grid))
        if workers > 1 and backend == "numba":
            with ThreadPoolExecutor(workers) as pool:
                out = list(pool.map(lambda x: _point(fg, x, eta, cfg, None, backend), grid))
        else:
            out = [_point(fg, x, eta, cfg, None, backend) for x in grid]
        for k, (_, r, c, it) in enumerate(out):
            rho[k], conv[k], iters[k] = r, c, it
    return SpectrumResult(grid=grid, rho=rho, eta=float(eta), converged=conv, iterations=iters,
                          meta={"tol": cfg.tol, "max_iter": cfg.max_iter,
                                "damping": cfg.damping, "warm_start": cfg.warm_start,
                                "backend": backend})


def moments_from_density(result: SpectrumResult, max_order: int, support=None) -> list:
    """Trapezoid moments ``int x^r rho(x) dx`` for ``r = 0..max_order``.

    The Lorentzian tails of a broadened density make every moment biased by
    O(eta) (even orders pick up roughly ``eta * (xmax - xmin)^(r-1) / pi``
    from the tails). ``support`` is the (lo, hi) interval holding the
    spectrum; when omitted it is taken as the region where ``rho`` exceeds
    1e-3 of its maximum. The grid must extend ``10 * eta * max_order``
    beyond it on both sides.
    """
    x = np.asarray(result.grid)
    rho = np.asarray(result.rho)
    ok = np.isfinite(rho)
    if support is None:
        above = np.flatnonzero(ok & (rho > 1e-3 * np.nanmax(rho)))
        support = (x[above[0]], x[above[-1]])
    lo, hi = support
    margin = 10.0 * result.eta * max_order
    if x[0] > lo - margin or x[-1] < hi + margin:
        raise GridTooNarrow(
            f"grid [{x[0]}, {x[-1]}] must cover [{lo - margin}, {hi + margin}]")
    x, rho = x[ok], rho[ok]
    return [float(np.trapezoid(x ** r * rho, x)) for r in range(max_order + 1)]
