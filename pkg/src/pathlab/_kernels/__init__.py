from .backend import NUMBA_ENABLED, backend_name, njit

__all__ = ["NUMBA_ENABLED", "backend_name", "njit"]
