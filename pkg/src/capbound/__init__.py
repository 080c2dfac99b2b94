"""Upper and lower bounds on the classical capacity of small quantum channels."""

from . import capacity, channels, linalg, sdp, symmetry
from .channels import Channel, ChoiOperator, named_channel
from .errors import CapboundError, SolverError

__version__ = "0.1.0"
