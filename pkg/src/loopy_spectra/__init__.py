"""Adjacency spectra of networks built from motifs (edges, triangles,
cycles, small subgraphs) by message passing on the factor graph."""
from .closed_form import (
    band_edges,
    mu_regular,
    peak_weights,
    rho_regular_complex,
    rho_regular_real,
)
from .generators import (
    degrees_of,
    gen_configuration_model,
    gen_poisson_edge_triangle,
    gen_regular_edge_triangle,
)
from .graph import (
    FactorGraph,
    Motif,
    adjacency,
    build_factor_graph,
    factor_graph_girth_check,
    load_network,
    save_network,
)
from .messages import (
    ComplexArg,
    MessageState,
    SolveConfig,
    SpectrumResult,
    density_scan,
    g_update,
    moments_from_density,
    mu_edge,
    mu_general,
    mu_triangle,
    solve_at_z,
    spectral_density_at,
    sweep,
)
from .oracle import (
    count_excursions,
    diagonalize,
    series_check,
    smoothed_density,
    trace_moments,
)

__version__ = "0.1.0"
