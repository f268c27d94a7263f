"""Second-price auction surplus and revenue under light and heavy tails."""

from auctionlab.distributions import Exponential, ParetoI, Uniform, from_dict
from auctionlab.errors import DomainError

__version__ = "0.1.0"

__all__ = ["DomainError", "Exponential", "ParetoI", "Uniform", "from_dict", "__version__"]
