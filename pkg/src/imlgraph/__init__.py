"""imlgraph: multi-layout engine and streaming server for exploring
community-structured networks.

The pipeline: load a graph, detect its community hierarchy, and drive a
scene through four coordinated layouts (overview miniature, spherical
treemap, floating 3D community, floor projection) with mode-dependent edge
bundling. Frames stream to viewers over WebSocket in a compact binary
format.
"""

__version__ = "0.1.0"

from .community import LouvainConfig, detect_communities, louvain, modularity
from .errors import EngineError
from .frame import LayoutFrame
from .graph import Graph, HierarchicalGraph, load_graph, save_graph
from .protocol import decode_frame, encode_frame
from .scene import Command, SceneConfig, SceneEngine, SceneState

__all__ = [
    "Command",
    "EngineError",
    "Graph",
    "HierarchicalGraph",
    "LayoutFrame",
    "LouvainConfig",
    "SceneConfig",
    "SceneEngine",
    "SceneState",
    "__version__",
    "detect_communities",
    "decode_frame",
    "encode_frame",
    "load_graph",
    "louvain",
    "modularity",
    "save_graph",
]
