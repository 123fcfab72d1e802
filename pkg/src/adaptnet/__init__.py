"""Diffusion adaptive filtering over networks, read as a graphical evolutionary game."""

from importlib.metadata import PackageNotFoundError, version

from .topology import Topology, TopologyError, complete_graph, grid_torus, random_geometric, regular_circulant
from .signal_model import NodeProfile, SignalSource, make_true_parameter
from .combiners import RULES, combination_matrix
from .adaptation import NetworkState, network_step
from .policies import resolve_policy
from .metrics import LearningCurve, emse, msd

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree without install
    __version__ = "0.1.0"

__all__ = [
    "Topology", "TopologyError", "complete_graph", "grid_torus", "random_geometric",
    "regular_circulant", "NodeProfile", "SignalSource", "make_true_parameter", "RULES",
    "combination_matrix", "NetworkState", "network_step", "resolve_policy", "LearningCurve",
    "emse", "msd", "__version__",
]
