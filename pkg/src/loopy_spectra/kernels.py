"""Message-passing inner loops.

Two implementations of the same three operations (one synchronous sweep,
iterate-to-convergence, density assembly):

* ``*_loop`` functions are explicit loops compiled with numba;
* ``*_numpy`` functions are vectorized numpy built on a precomputed
  :class:`NumpyPlan`.

Both report failures as ``(status, index)`` instead of raising, so the
compiled path stays in nopython mode. Status codes are listed below.
"""
import numpy as np

from ._accel import njit

OK = 0
NEAR_SINGULAR = 1
SERIES_DIVERGENCE = 2
SINGULAR_MOTIF = 3

SINGULAR_EPS = 1e-14
SINGULAR_EPS2 = SINGULAR_EPS * SINGULAR_EPS
# above this node degree the cavity sum is formed as total minus own term
EXACT_EXCLUSION_MAX = 32


# --- compiled loops -----------------------------------------------------------
# Magnitudes are compared squared: complex abs() goes through hypot and
# dominates the sweep cost otherwise.

@njit
def _abs2(c):
    return c.real * c.real + c.imag * c.imag


@njit
def _recip(c, c2):
    """1/c given c2 = |c|^2 (avoids the scaled complex division)."""
    return complex(c.real / c2, -c.imag / c2)


@njit
def _general_mu(adj, k, g, pos, M, y):
    """(B (I - G_u B)^{-1})_{uu} for one member, by pivoted elimination.

    ``adj`` is the flat k*k motif adjacency, ``g`` the member messages.
    ``M`` and ``y`` are scratch buffers of at least k*k and k entries.
    Returns (value, ok).
    """
    for i in range(k):
        gi = g[i] if i != pos else 0.0j
        for j in range(k):
            M[i * k + j] = (1.0 if i == j else 0.0) - gi * adj[i * k + j]
        y[i] = 0.0j
    y[pos] = 1.0 + 0.0j
    for c in range(k):
        p = c
        best = _abs2(M[c * k + c])
        for r in range(c + 1, k):
            a = _abs2(M[r * k + c])
            if a > best:
                best = a
                p = r
        if best < SINGULAR_EPS2:
            return 0.0j, False
        if p != c:
            for j in range(k):
                tmp = M[c * k + j]
                M[c * k + j] = M[p * k + j]
                M[p * k + j] = tmp
            tmp = y[c]
            y[c] = y[p]
            y[p] = tmp
        piv = M[c * k + c]
        for r in range(c + 1, k):
            f = M[r * k + c] / piv
            if f != 0.0:
                for j in range(c, k):
                    M[r * k + j] -= f * M[c * k + j]
                y[r] -= f * y[c]
    for c in range(k - 1, -1, -1):
        acc = y[c]
        for j in range(c + 1, k):
            acc -= M[c * k + j] * y[j]
        y[c] = acc / M[c * k + c]
    out = 0.0j
    for j in range(k):
        out += adj[pos * k + j] * y[j]
    return out, True


@njit
def sweep_loop(z, node_ptr, node_inc, inc_node, motif_ptr, motif_kind,
               adj_ptr, adj_data, mu_old, g_old, mu_new, g_new, damping, M, y):
    """One synchronous sweep. Writes ``mu_new``/``g_new``.

    Returns (status, offending incidence or -1, max abs change).
    """
    n = node_ptr.shape[0] - 1
    keep = 1.0 - damping
    delta2 = 0.0
    for u in range(n):
        a = node_ptr[u]
        b = node_ptr[u + 1]
        deg = b - a
        total = 0.0j
        if deg > EXACT_EXCLUSION_MAX:
            for t in range(a, b):
                total += mu_old[node_inc[t]]
        for t in range(a, b):
            i = node_inc[t]
            if deg > EXACT_EXCLUSION_MAX:
                s = total - mu_old[i]
            else:
                s = 0.0j
                for t2 in range(a, b):
                    if t2 != t:
                        s += mu_old[node_inc[t2]]
            den = z - s
            den2 = _abs2(den)
            if den2 < SINGULAR_EPS2:
                return NEAR_SINGULAR, i, np.inf
            val = damping * g_old[i] + keep * _recip(den, den2)
            g_new[i] = val
            d = _abs2(val - g_old[i])
            if d > delta2:
                delta2 = d
    m = motif_ptr.shape[0] - 1
    for s in range(m):
        a = motif_ptr[s]
        k = motif_ptr[s + 1] - a
        kind = motif_kind[s]
        for p in range(k):
            i = a + p
            if kind == 0:
                raw = g_new[a + 1 - p]
            elif kind == 1:
                gv = g_new[a + (p + 1) % 3]
                gw = g_new[a + (p + 2) % 3]
                vw = gv * gw
                den = 1.0 - vw
                den2 = _abs2(den)
                if den2 < SINGULAR_EPS2:
                    return SERIES_DIVERGENCE, i, np.inf
                raw = (2.0 * vw + gv + gw) * _recip(den, den2)
            else:
                raw, ok = _general_mu(adj_data[adj_ptr[s]:adj_ptr[s + 1]], k,
                                      g_new[a:a + k], p, M, y)
                if not ok:
                    return SINGULAR_MOTIF, i, np.inf
            val = damping * mu_old[i] + keep * raw
            mu_new[i] = val
            d = _abs2(val - mu_old[i])
            if d > delta2:
                delta2 = d
    return OK, -1, np.sqrt(delta2)


@njit
def solve_loop(z, node_ptr, node_inc, inc_node, motif_ptr, motif_kind,
               adj_ptr, adj_data, mu, g, damping, tol, max_iter):
    """Iterate sweeps in place on ``mu``/``g`` until the change drops below
    ``tol``. Returns (status, offending incidence, iterations, last change)."""
    kmax = 1
    for s in range(motif_ptr.shape[0] - 1):
        k = motif_ptr[s + 1] - motif_ptr[s]
        if k > kmax:
            kmax = k
    M = np.empty(kmax * kmax, dtype=np.complex128)
    y = np.empty(kmax, dtype=np.complex128)
    # ping-pong between the caller's arrays and scratch copies
    mu_a, g_a = mu, g
    mu_b = np.empty_like(mu)
    g_b = np.empty_like(g)
    delta = np.inf
    it = 0
    status = OK
    bad = -1
    swapped = False
    while it < max_iter:
        status, bad, delta = sweep_loop(z, node_ptr, node_inc, inc_node, motif_ptr,
                                        motif_kind, adj_ptr, adj_data, mu_a, g_a, mu_b, g_b,
                                        damping, M, y)
        it += 1
        if status != OK:
            break
        mu_a, mu_b = mu_b, mu_a
        g_a, g_b = g_b, g_a
        swapped = not swapped
        if delta < tol:
            break
    if swapped:
        mu[:] = mu_a
        g[:] = g_a
    return status, bad, it, delta


@njit
def density_loop(z, node_ptr, node_inc, mu):
    """-(1/(n pi)) sum_u 1/(z - sum_sigma mu_u,sigma). Returns (status, node, value)."""
    n = node_ptr.shape[0] - 1
    acc = 0.0j
    for u in range(n):
        s = 0.0j
        for t in range(node_ptr[u], node_ptr[u + 1]):
            s += mu[node_inc[t]]
        den = z - s
        if _abs2(den) < SINGULAR_EPS2:
            return NEAR_SINGULAR, u, 0.0j
        acc += 1.0 / den
    return OK, -1, -acc / (n * np.pi)


# --- numpy fallback -------------------------------------------------------------

class NumpyPlan:
    """Index arrays grouping motifs by kind (and by size for dense solves)."""

    def __init__(self, arrays):
        self.n = len(arrays["node_ptr"]) - 1
        self.inc_node = arrays["inc_node"]
        self.n_inc = len(self.inc_node)
        ptr = arrays["motif_ptr"]
        kind = arrays["motif_kind"]
        sizes = np.diff(ptr)
        starts = ptr[:-1]
        e = starts[kind == 0]
        self.edge = np.stack([e, e + 1]) if len(e) else np.zeros((2, 0), dtype=np.int64)
        t = starts[kind == 1]
        self.tri = (np.stack([t, t + 1, t + 2]) if len(t)
                    else np.zeros((3, 0), dtype=np.int64))
        self.general = []
        gen = np.flatnonzero(kind == 2)
        for k in np.unique(sizes[gen]):
            ids = gen[sizes[gen] == k]
            inc = starts[ids][:, None] + np.arange(k)[None, :]
            B = np.stack([
                arrays["adj_data"][arrays["adj_ptr"][s]:arrays["adj_ptr"][s + 1]].reshape(k, k)
                for s in ids
            ])
            self.general.append((int(k), inc, B))


def numpy_plan(fg):
    plan = fg.__dict__.get("_numpy_plan")
    if plan is None:
        plan = NumpyPlan(fg.kernel_arrays())
        object.__setattr__(fg, "_numpy_plan", plan)
    return plan


def _node_sums(plan, mu):
    re = np.bincount(plan.inc_node, weights=mu.real, minlength=plan.n)
    im = np.bincount(plan.inc_node, weights=mu.imag, minlength=plan.n)
    return re + 1j * im


def general_mu_batch(B, g):
    """Motif messages for a stack of same-size motifs.

    ``B`` is (M, k, k), ``g`` is (M, k); returns (M, k) where entry (s, u)
    is (B (I - G_u B)^{-1})_{uu} with G_u = diag(g) with its u entry zeroed.
    Raises ``numpy.linalg.LinAlgError`` when a system is (near) singular.
    """
    M, k, _ = B.shape
    out = np.empty((M, k), dtype=np.complex128)
    eye = np.eye(k)
    for p in range(k):
        gz = g.copy()
        gz[:, p] = 0.0
        A = eye[None] - gz[:, :, None] * B
        # LAPACK only rejects exact zeros; match the compiled pivot guard
        if (np.abs(np.linalg.det(A)) < SINGULAR_EPS).any():
            raise np.linalg.LinAlgError("near-singular motif system")
        rhs = np.zeros((M, k, 1), dtype=np.complex128)
        rhs[:, p, 0] = 1.0
        sol = np.linalg.solve(A, rhs)[:, :, 0]
        out[:, p] = np.einsum("mj,mj->m", B[:, p, :], sol)
    return out


def sweep_numpy(plan, z, mu_old, g_old, damping):
    """Vectorized sweep. Returns (status, offending incidence, mu, g, change)."""
    keep = 1.0 - damping
    tot = _node_sums(plan, mu_old)
    den = z - (tot[plan.inc_node] - mu_old)
    small = np.abs(den) < SINGULAR_EPS
    if small.any():
        return NEAR_SINGULAR, int(np.flatnonzero(small)[0]), mu_old, g_old, np.inf
    g = damping * g_old + keep / den

    raw = np.empty_like(mu_old)
    a, b = plan.edge
    raw[a] = g[b]
    raw[b] = g[a]
    if plan.tri.shape[1]:
        gt = g[plan.tri]
        for p in range(3):
            gv = gt[(p + 1) % 3]
            gw = gt[(p + 2) % 3]
            d = 1.0 - gv * gw
            bad = np.abs(d) < SINGULAR_EPS
            if bad.any():
                i = int(plan.tri[p][np.flatnonzero(bad)[0]])
                return SERIES_DIVERGENCE, i, mu_old, g_old, np.inf
            raw[plan.tri[p]] = (2.0 * gv * gw + gv + gw) / d
    for k, inc, B in plan.general:
        try:
            raw[inc] = general_mu_batch(B, g[inc])
        except np.linalg.LinAlgError:
            return SINGULAR_MOTIF, int(inc[0, 0]), mu_old, g_old, np.inf
    mu = damping * mu_old + keep * raw
    delta = 0.0
    if plan.n_inc:
        delta = max(np.abs(mu - mu_old).max(), np.abs(g - g_old).max())
    return OK, -1, mu, g, float(delta)


def solve_numpy(plan, z, mu, g, damping, tol, max_iter):
    """Same contract as :func:`solve_loop`; updates ``mu``/``g`` in place."""
    delta = np.inf
    it = 0
    while it < max_iter:
        status, bad, mu2, g2, delta = sweep_numpy(plan, z, mu, g, damping)
        it += 1
        if status != OK:
            return status, bad, it, delta
        mu[:] = mu2
        g[:] = g2
        if delta < tol:
            break
    return OK, -1, it, delta


def density_numpy(plan, z, mu):
    den = z - _node_sums(plan, mu)
    small = np.abs(den) < SINGULAR_EPS
    if small.any():
        return NEAR_SINGULAR, int(np.flatnonzero(small)[0]), 0j
    return OK, -1, -np.sum(1.0 / den) / (plan.n * np.pi)
