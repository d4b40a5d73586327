"""Fast complex transition transform and a CT-OFDM link simulator."""

__version__ = "0.1.0"

from .transforms import (  # noqa: E402
    FctPlan,
    InvalidLengthError,
    cascaded_cht_fft,
    cht_matrix,
    ct_matrix,
    dft_matrix,
    fcht,
    fct,
    fft,
    ifct,
    ifft,
    plan_fct,
    wht_matrix,
)

__all__ = [
    "__version__",
    "FctPlan",
    "InvalidLengthError",
    "cascaded_cht_fft",
    "cht_matrix",
    "ct_matrix",
    "dft_matrix",
    "fcht",
    "fct",
    "fft",
    "ifct",
    "ifft",
    "plan_fct",
    "wht_matrix",
]
