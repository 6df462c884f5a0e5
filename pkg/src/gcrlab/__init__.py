"""Exact generic completion ranks of partial-matrix patterns, combinatorial
bounds and certificates, chordal completions, and real typical-rank sampling."""

from .ffmat import (
    DEFAULT_PRIME,
    RankedPoint,
    rank_float,
    rank_mod,
    random_ranked_point,
    random_sym_ranked_point,
    solve_underdetermined,
)
from .pattern import (
    BipartitePattern,
    EliminationTrace,
    SymmetricPattern,
    clique_sum,
    find_bisimplicial_edge,
    generate,
    is_chordal_bipartite,
    k_core,
    load_pattern,
    max_biclique,
    mutate,
    save_pattern,
)
from .gcr import (
    GcrReport,
    TangentReport,
    build_circulant_certificate,
    clique_sum_combine,
    dimension_bound,
    gcr,
    sgcr,
    tangent_projection,
    verify_partition_certificate,
    vertex_deletion_check,
)
from .complete import (
    CompletionResult,
    FitOptions,
    FitResult,
    PartialMatrix,
    chordal_complete,
    fit_column,
    load_partial,
    lowrank_fit,
    random_partial,
    save_partial,
    sym_lowrank_fit,
)
from .typical import (
    GnReport,
    TypicalSampleReport,
    cube_discriminant,
    cube_typical_sample,
    gn_report,
    knk1_boundary,
    knk1_typical_sample,
    typical_scan,
)

__version__ = "0.1.0"
