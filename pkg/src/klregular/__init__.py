"""Tools for (k,l)-regular maps: exact and numeric verification, adversarial
search, dimension bounds, certificates and dimension reduction."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundsResult,
    bounds_table,
    brs_bound,
    exact_curve,
    lower_bound_closed,
    lower_bound_count,
    lower_bound_main,
    upper_bound_main,
)
from .embeddings import (  # noqa: E402
    Configuration,
    DomainChart,
    EmbeddingSpec,
    Jet,
    SampledMap,
    complex_moment_curve,
    evaluate_jet,
    moment_curve,
    restrict_coordinates,
    tensor_product,
    trig_curve,
)
from .errors import *  # noqa: E402,F401,F403
from .lift import (  # noqa: E402
    LiftedMatrix,
    RankReport,
    affine_span_dim,
    assemble_lifted_matrix,
    exact_rank,
    lift_direction,
    lift_point,
    rank_and_margin,
)
from .reduction import (  # noqa: E402
    ProjectionStep,
    ReductionPlan,
    project_step,
    reduce_dimension,
    span_union_dimension,
)
from .roots import (  # noqa: E402
    IncidencePolynomial,
    count_roots_with_multiplicity,
    incidence_polynomial,
)
from .search import SearchReport, adversarial_search, sample_verify  # noqa: E402
from .verifier import (  # noqa: E402
    CrossingProbe,
    FlatWitness,
    RegularityVerdict,
    check_configuration,
    check_subspace_configuration,
    confluent_vandermonde_certificate,
    find_violating_hyperplane,
    tangency_crossing_probe,
)
