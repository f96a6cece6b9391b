"""Bispectrum forward maps and recovery of band-limited signals from them."""
from .errors import (
    BispecError,
    DegenerateSignalError,
    DivergedError,
    IllConditionedError,
    InvalidSupportError,
    ParseError,
)
from .kernels import BACKEND
from .polyspectra import (
    BispectrumGrid,
    CumulantGrid,
    add_noise,
    bispectrum,
    check_conjugate_symmetry,
    mask_k1_rows,
    signal_bispectrum,
    third_order_cumulant,
)
from .recovery import (
    InitConfig,
    SolverConfig,
    SolverTrace,
    armijo_backtrack,
    constructive_recover,
    init_spectral,
    objective_h,
    sample_block,
    trust_region_solve,
    wirtinger_gradient,
)
from .signals import (
    Domain,
    Signal,
    SupportKind,
    SupportSpec,
    dft,
    generate_gaussian_spectrum,
    idft,
    is_support_satisfied,
)

__version__ = "0.1.0"
