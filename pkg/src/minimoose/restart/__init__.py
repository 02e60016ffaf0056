from .checkpoint import (
    FORMAT_VERSION,
    checkpoint_path,
    read_checkpoint,
    read_checkpoint_file,
    write_checkpoint,
    write_checkpoint_file,
)
from .store import RestartableStore, register_restartable

__all__ = [
    "FORMAT_VERSION",
    "RestartableStore",
    "checkpoint_path",
    "read_checkpoint",
    "read_checkpoint_file",
    "register_restartable",
    "write_checkpoint",
    "write_checkpoint_file",
]
