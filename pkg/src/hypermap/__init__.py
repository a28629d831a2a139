"""Hyperbolic embedding of growing networks by maximum likelihood, using
links and common-neighbour counts."""
__version__ = "0.1.0"

from .geometry import ModelParams, PolarCoord  # noqa: E402,F401
from .graph import Graph, load_edge_list, rank_by_degree  # noqa: E402,F401
from .generate import generate  # noqa: E402,F401
from .embed import EmbedConfig, Embedding, embed  # noqa: E402,F401
