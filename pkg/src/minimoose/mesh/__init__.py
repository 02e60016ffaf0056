from .partition import GhostMap, Partition, compute_ghosts, partition_mesh
from .presplit import PartView, read_presplit, write_presplit
from .structured import Mesh, build_structured_mesh, locate_point

__all__ = [
    "GhostMap",
    "Mesh",
    "PartView",
    "Partition",
    "build_structured_mesh",
    "compute_ghosts",
    "locate_point",
    "partition_mesh",
    "read_presplit",
    "write_presplit",
]
