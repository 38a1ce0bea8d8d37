"""Budget-constrained clinching auctions in exact rational arithmetic."""

from ._kernel import BACKEND
from .combinatorial import run_combinatorial
from .divisible import run_divisible
from .errors import (ClinchError, DimensionError, EngineInvariantError,
                     InputError, ValidationError)
from .model import (AuctionInstance, Bidder, CombinatorialAllocation,
                    DivisibleAllocation, IndivisibleAllocation, Mode, Rational,
                    Slot, check_legal, make_instance, utilities,
                    validate_instance)
from .rounding import run_rounds

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AuctionInstance", "Bidder", "Slot", "Mode", "Rational",
    "DivisibleAllocation", "IndivisibleAllocation", "CombinatorialAllocation",
    "make_instance", "validate_instance", "check_legal", "utilities",
    "run_divisible", "run_rounds", "run_combinatorial",
    "ClinchError", "ValidationError", "InputError", "DimensionError", "EngineInvariantError",
]
