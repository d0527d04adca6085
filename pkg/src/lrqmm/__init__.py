"""Low-rank residual compensation for quantized matrix multiplication."""
from .bounds import (
    BoundInputs,
    Regime,
    SingularEstimate,
    error_ratio_bound,
    estimate_singular,
    lrqmm_bound,
    mp_edges,
    quant_gemm_bound,
    quant_matrix_bound,
    rsvd_expected_bound,
    svd_truncation_bound,
)
from .errors import (
    DegenerateInputError,
    LrqmmError,
    OverflowPreconditionError,
    ParameterError,
    RegimeError,
    ShapeError,
)
from .matrix import (
    DistributionSpec,
    MatrixStats,
    generate,
    matmul_exact,
    parse_distribution,
    relative_error,
    stats,
)
from .qgemm import (
    GemmResult,
    GemmScheme,
    SchemeKind,
    direct_quant_gemm,
    int_gemm,
    lrqmm_full_rank_check,
    lrqmm_gemm,
    qt_gemm,
    run_scheme,
)
from .quantize import QuantizedMatrix, Rounding, dequantize, quantize, residual
from .rsvd import LowRankFactors, RsvdConfig, range_finder, rsvd, small_svd

__version__ = "0.1.0"
