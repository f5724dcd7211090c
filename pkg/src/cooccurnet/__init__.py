"""Weighted topic co-occurrence networks and their analysis pipeline."""

__version__ = "0.1.0"

from .community import (
    ConsensusResult,
    Partition,
    classification_partition,
    consensus_partition,
    louvain_partition,
    modularity,
    partition_jaccard,
    select_gamma,
)
from .corpus import (
    Corpus,
    Document,
    TopicVocabulary,
    assign_classifications,
    extract_candidate_topics,
    normalize_phrase,
    parse_corpus,
    select_vocabulary,
    topic_prevalence,
)
from .graphbuild import (
    IncidenceMatrix,
    TopicNetwork,
    WindowSpec,
    build_incidence,
    build_network,
    generate_windows,
    phi_coefficient,
)
from .metrics import (
    betweenness,
    clustering_barrat,
    degree_strength,
    global_efficiency,
    path_length,
    shortest_path_lengths,
    small_world_propensity,
)
from .nulls import (
    NullEnsemble,
    lattice_reference,
    permute_corpus_temporal,
    random_reference,
    rewire_preserving,
    standardize_trajectory,
)
from .scoring import (
    BlockFit,
    InterdisciplinarityScore,
    block_expected_weights,
    compare_dependent_correlations,
    compare_partition_deviances,
    disciplinarity,
    interdisciplinarity,
    partial_correlation,
    partition_deviance,
    residualize,
    spline_interpolate_monthly,
    trend_r2,
    wilcoxon_signed_rank,
)
from .trajectories import MeasureTrajectory
