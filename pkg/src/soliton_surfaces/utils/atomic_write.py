import os
import stat
import tempfile
from pathlib import Path
from typing import Iterable, Union

Payload = Union[bytes, str, Iterable[bytes]]


def _chunks(data: Payload, encoding: str):
    if isinstance(data, str):
        yield data.encode(encoding)
    elif isinstance(data, (bytes, bytearray, memoryview)):
        yield bytes(data)
    else:
        yield from data


def atomic_write(path: Union[Path, str], data: Payload, encoding: str = "utf-8") -> int:
    """
    Remplace `path` par `data` sans jamais laisser un export à moitié écrit.

    `data` peut être du texte, des octets ou un itérable de blocs d'octets
    (maillages volumineux). Le fichier temporaire vit dans le même dossier
    que la cible ; les droits d'un export existant sont conservés.

    Retourne le nombre d'octets écrits.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    previous_mode = stat.S_IMODE(target.stat().st_mode) if target.exists() else None
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".part")
    written = 0
    try:
        with os.fdopen(fd, "wb") as out:
            for block in _chunks(data, encoding):
                written += out.write(block)
            out.flush()
            os.fsync(out.fileno())
        if previous_mode is not None:
            os.chmod(tmp_name, previous_mode)
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return written
