import numpy as np
import pytest

from conftest import dense_rho, fixture_network, k3, path3, single_edge
from loopy_spectra.errors import TooDeep, TooLarge
from loopy_spectra.generators import gen_poisson_edge_triangle, gen_regular_edge_triangle
from loopy_spectra.graph import Motif, adjacency, build_factor_graph
from loopy_spectra.oracle import (
    count_excursions,
    diagonalize,
    histogram,
    jacobi_eigvalsh,
    series_check,
    smoothed_density,
    trace_moments,
)


def test_k3_eigenvalues():
    assert np.allclose(diagonalize(k3()).eigenvalues, [-1, -1, 2], atol=1e-12)


def test_single_edge_and_path_eigenvalues():
    assert np.allclose(diagonalize(single_edge()).eigenvalues, [-1, 1], atol=1e-12)
    r2 = np.sqrt(2)
    assert np.allclose(diagonalize(path3()).eigenvalues, [-r2, 0, r2], atol=1e-12)


@pytest.mark.parametrize("name", ["fig1", "house", "house_tree"])
def test_jacobi_matches_lapack(name):
    fg = fixture_network(name)
    a = diagonalize(fg, method="jacobi").eigenvalues
    b = diagonalize(fg).eigenvalues
    assert np.allclose(a, b, atol=1e-10)


def test_jacobi_random_symmetric():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(40, 40))
    m = m + m.T
    assert np.allclose(jacobi_eigvalsh(m), np.linalg.eigvalsh(m), atol=1e-10)


def test_unknown_method():
    with pytest.raises(ValueError):
        diagonalize(k3(), method="qr")


def test_too_large():
    fg = build_factor_graph(12, [])
    with pytest.raises(TooLarge):
        diagonalize(fg, cap=10)


def test_histogram_normalized():
    lam = diagonalize(gen_regular_edge_triangle(300, seed=0)).eigenvalues
    edges, dens = histogram(lam, 0.1)
    assert np.allclose(np.diff(edges), 0.1)
    assert edges[0] <= lam.min() - 0.5 + 1e-12
    assert edges[-1] >= lam.max() + 0.5 - 1e-12
    assert np.sum(dens) * 0.1 == pytest.approx(1.0)


def test_lorentzian_peak_height():
    # one eigenvalue at 0 broadened by 0.01: peak height 1/(pi eta)
    assert smoothed_density([0.0], [0.0], 0.01)[0] == pytest.approx(31.831, abs=1e-3)


def test_smoothed_density_matches_dense_resolvent(fig1):
    lam = diagonalize(fig1).eigenvalues
    x = np.linspace(-3, 3, 25)
    eta = 0.05
    ref = np.array([dense_rho(fig1, xi + 1j * eta).imag for xi in x])
    assert np.allclose(smoothed_density(lam, x, eta), ref, atol=1e-12)


def test_diagonalize_report_extras():
    x = np.linspace(-3, 3, 7)
    rep = diagonalize(k3(), grid=x, eta=0.1, r_max=3)
    assert rep.n == 3
    assert np.allclose(rep.smoothed, smoothed_density(rep.eigenvalues, x, 0.1))
    assert rep.moments == pytest.approx([1, 0, 2, 2])


def test_trace_moments_k3():
    m = trace_moments(k3(), 3)
    assert m == pytest.approx([1, 0, 2, 2])


def test_trace_moments_match_eigen_power_sums():
    fg = gen_poisson_edge_triangle(300, 2, 2, seed=5)
    lam = diagonalize(fg).eigenvalues
    tm = trace_moments(fg, 12, block=64)
    for r in range(13):
        ref = float(np.mean(lam**r))
        assert tm[r] == pytest.approx(ref, rel=1e-6, abs=1e-6)


def test_trace_moments_counts_are_degree_and_triangles():
    fg = gen_poisson_edge_triangle(400, 2, 2, seed=2)
    view = adjacency(fg)
    tm = trace_moments(fg, 3)
    assert tm[2] == pytest.approx(view.degrees.mean())
    n_tri = sum(m.kind == "triangle" for m in fg.motifs)
    # the generator produces no accidental triangles at this density only
    # rarely; Tr A^3 counts every triangle six times
    assert tm[3] >= 6 * n_tri / fg.n - 1e-12


def test_trace_moments_too_deep():
    with pytest.raises(ValueError):
        trace_moments(k3(), 13)


def test_excursion_counts_small():
    assert count_excursions(single_edge(), 0, 0, 2) == 1
    assert count_excursions(single_edge(), 0, 0, 3) == 0
    # 0-1-0-1-0 returns to 0 midway, so it is not an excursion
    assert count_excursions(single_edge(), 0, 0, 4) == 0
    assert count_excursions(k3(), 0, 0, 2) == 2
    assert count_excursions(k3(), 0, 0, 3) == 2
    assert count_excursions(k3(), 0, 0, 1) == 0


def test_excursion_length_two_sums_to_degree(fig1):
    deg = adjacency(fig1).degrees
    for u, s_u in enumerate(fig1.incidence):
        assert sum(count_excursions(fig1, u, s, 2) for s, _ in s_u) == deg[u]


def test_excursion_errors():
    with pytest.raises(TooDeep):
        count_excursions(k3(), 0, 0, 13)
    fg = build_factor_graph(4, [Motif.edge(0, 1), Motif.edge(2, 3)])
    with pytest.raises(ValueError):
        count_excursions(fg, 0, 1, 2)


def test_series_check_single_edge():
    chk = series_check(single_edge(), 0, 0, 10.0, 8)
    assert chk.ok
    assert chk.mu == pytest.approx(0.1)
    assert chk.counts == (0, 1, 0, 0, 0, 0, 0, 0)


def test_series_check_triangle():
    chk = series_check(k3(), 0, 0, 10.0, 8)
    assert chk.ok
    assert chk.residual < 0.2**8


def test_series_check_fixture_with_cycles(fig1):
    chk = series_check(fig1, 2, 1, 30.0, 12)
    assert chk.ok


def test_series_check_rejects_small_z():
    with pytest.raises(ValueError):
        series_check(k3(), 0, 0, 3.0, 6)
