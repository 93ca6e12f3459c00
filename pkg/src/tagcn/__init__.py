"""Graph-filter toolkit: polynomial graph convolutions, baselines, and training."""

from .data import Dataset, generate_sbm, load_dataset, validate_splits, write_dataset
from .estimator import TagcnNodeClassifier
from .filters import (
    PolyFilterParams,
    SpectralDecomposition,
    apply_poly_filter,
    chebyshev_apply,
    count_filter_weights,
    layer_forward,
    make_cyclic_graph,
    shift_invariance_residual,
    spectral_decompose,
    spectral_filter_response,
)
from .graph import (
    Graph,
    ShiftKind,
    ShiftOperator,
    build_graph,
    degrees,
    normalize,
    path_weight_sum,
    spmv,
)
from .limits import (
    MonomialStackSpec,
    convergence_report,
    deep_monomial_forward,
    dominant_projection,
)
from .nn import (
    ChebLayer,
    DcnnLayer,
    GcnLayer,
    Model,
    TagcnLayer,
    inverted_dropout,
    load_model,
    masked_softmax_xent,
    relu,
    save_model,
)
from .trainer import (
    TrainConfig,
    adam_step,
    aggregate_runs,
    early_stop_check,
    train_model,
    train_multi,
)

__version__ = "0.1.0"
