from contextlib import contextmanager
from pathlib import Path
from typing import Union

import portalocker

from soliton_surfaces.utils.atomic_write import atomic_write

DEFAULT_LOCK_TIMEOUT = 10.0


@contextmanager
def export_lock(path: Union[Path, str], timeout: float = DEFAULT_LOCK_TIMEOUT):
    """
    Verrou exclusif sur ``<path>.lock`` (utile si plusieurs processus écrivent
    le même export).

    Usage:
        with export_lock("mesh.obj"):
            ...
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lock_path = path.with_name(path.name + ".lock")
    with portalocker.Lock(str(lock_path), mode="a", timeout=timeout):
        yield


def write_with_lock(path: Union[Path, str], data: bytes, timeout: float = DEFAULT_LOCK_TIMEOUT):
    """Écriture atomique protégée par verrouillage."""
    with export_lock(path, timeout=timeout):
        atomic_write(path, data)
