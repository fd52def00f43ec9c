"""Function-specific mixing times and concentration bounds for finite reversible Markov chains."""

from .chain import (
    SpectralDecomposition,
    TransitionMatrix,
    load_chain,
    save_chain,
    spectral_decompose,
    stationary_distribution,
    validate_chain,
)
from .discrepancy import (
    DiscrepancyCurve,
    FunctionOnChain,
    MixingTimeTable,
    discrepancy_curve,
    f_discrepancy,
    f_mixing_time,
    function_on_chain,
    tv_discrepancy,
    tv_mixing_time,
    worst_case_f_discrepancy,
    worst_case_tv,
)
from .errors import (
    FnmixError,
    InputError,
    NotAttained,
    NotAttainedError,
    PreconditionViolated,
)
from .spectral import FSpectrum, JSplit, f_spectrum, j_split

__version__ = "0.1.0"

__all__ = [
    "DiscrepancyCurve",
    "FSpectrum",
    "FnmixError",
    "FunctionOnChain",
    "InputError",
    "JSplit",
    "MixingTimeTable",
    "NotAttained",
    "NotAttainedError",
    "PreconditionViolated",
    "SpectralDecomposition",
    "TransitionMatrix",
    "discrepancy_curve",
    "f_discrepancy",
    "f_mixing_time",
    "f_spectrum",
    "function_on_chain",
    "j_split",
    "load_chain",
    "save_chain",
    "spectral_decompose",
    "stationary_distribution",
    "tv_discrepancy",
    "tv_mixing_time",
    "validate_chain",
    "worst_case_f_discrepancy",
    "worst_case_tv",
]
