"""SoC-dependent storage bids in regulation capacity markets.

Subpackages: :mod:`socreg.lp` (simplex and branch-and-bound),
:mod:`socreg.market` (clearing and settlement) and :mod:`socreg.sim`
(scenario studies). Bid and cost models live in :mod:`socreg.bids`,
:mod:`socreg.costs` and :mod:`socreg.worstcase`.
"""

from .bids import SegmentedBid, StorageAsset, check_edcr, make_bid, validate
from .errors import BidError, ConfigError, EdcrError, SocRangeError, SocRegError, SolverError

__version__ = "0.1.0"

__all__ = [
    "BidError",
    "ConfigError",
    "EdcrError",
    "SegmentedBid",
    "SocRangeError",
    "SocRegError",
    "SolverError",
    "StorageAsset",
    "__version__",
    "check_edcr",
    "make_bid",
    "validate",
]
