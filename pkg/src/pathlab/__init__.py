"""pathlab: statistical verification of queueing path transforms,
non-colliding processes and random-matrix laws."""

from ._kernels.backend import NUMBA_ENABLED, backend_name
from .paths import (GridPath, PathBundle, PathDomainError, StepPath, chain_inf, chain_sup,
                    gamma2, gamma_n, inf_conv, m_n_functional, nested_sup_oracle, sup_conv)
from .sampling import (HermitianMatrix, RngStream, derive_stream, sample_brownian_grid,
                       sample_gaussian_seq, sample_gue, sample_pm1_chain,
                       sample_poisson_path, sample_srw_path)
from .stats import TestReport

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED", "backend_name",
    "StepPath", "GridPath", "PathBundle", "PathDomainError",
    "inf_conv", "sup_conv", "gamma2", "gamma_n", "chain_inf", "chain_sup",
    "m_n_functional", "nested_sup_oracle",
    "RngStream", "derive_stream", "HermitianMatrix",
    "sample_poisson_path", "sample_brownian_grid", "sample_srw_path",
    "sample_pm1_chain", "sample_gue", "sample_gaussian_seq",
    "TestReport",
    "__version__",
]
