"""Exact monotone majorization: HLP matrices, step-function majorants,
K-functionals and couple operators over :class:`fractions.Fraction`."""

__version__ = "0.1.0"

from .errors import (
    MonomajError,
    DimensionError,
    PreconditionError,
    MajorizationError,
    InfeasibleHeadError,
    GaugeError,
    ParameterError,
    SupportError,
    GridTooFineError,
    KDominanceError,
    MonotonicityError,
    DegenerateInputError,
    NonterminationError,
    RepresentationError,
)
from .vectors import first_prefix_violation, majorizes, rearrange_desc, submajorizes, vector
from .stochastic import (
    Block,
    HLPConstruction,
    block_partition,
    head_matrix,
    hlp_construct,
    hlp_monotone_ds,
    hlp_monotone_substoch,
    hlp_reduce_head,
    is_doubly_stochastic,
    is_monotone_matrix,
    is_substochastic,
    matvec,
    pushing_mass_trace,
)
from .stepfn import (
    INF,
    L1,
    LINF,
    Lambda,
    PiecewiseLinear,
    StepFunction,
    Tilde,
    indicator,
    k_dominates,
    k_profile,
    k_via_inf,
    majorant,
    norm,
    p_convexify,
    rearrangement,
    submajorizes_fn,
)
from .kernels import (
    CoupleCertificate,
    KernelOp,
    Multiply,
    OperatorChain,
    PCKernel,
    SignFlip,
    apply,
    calderon_factorize,
    certify,
    dmitriev_D,
    dmitriev_factorize,
    majorant_S,
    monotone_lemma_check,
    simple_calderon_T,
)
