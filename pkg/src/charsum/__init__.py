"""Character sums, Kloosterman sums and cubic-moment numerics for real characters mod squarefree q."""

from .classical import SumValue, gauss_sum, kloosterman, kloosterman_table, ramanujan_sum
from .config import SizeLimitError
from .ffarith import MultChar, enumerate_characters, jacobi_character
from .twisted import IdentityReport

__version__ = "0.1.0"

__all__ = [
    "IdentityReport",
    "MultChar",
    "SizeLimitError",
    "SumValue",
    "enumerate_characters",
    "gauss_sum",
    "jacobi_character",
    "kloosterman",
    "kloosterman_table",
    "ramanujan_sum",
]
