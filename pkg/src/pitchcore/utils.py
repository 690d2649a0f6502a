# pitchcore/utils.py
import os
import stat
import tempfile
from pathlib import Path
from typing import Union

PathLike = Union[str, os.PathLike]

# src/pitchcore/utils.py -> project root
PROJECT_ROOT = Path(__file__).resolve().parents[2]


def get_absolute_path(relative_path: PathLike) -> str:
    """
    Gets the absolute path to a project resource such as config/config.json.
    Absolute paths are returned unchanged.
    """
    path = Path(relative_path)
    if path.is_absolute():
        return str(path)
    return str(PROJECT_ROOT / path)


def _new_file_mode() -> int:
    """0o666 minus the process umask, the mode open() would give a new file."""
    umask = os.umask(0)
    os.umask(umask)
    return 0o666 & ~umask


def atomic_write_bytes(path: PathLike, data: bytes) -> None:
    """
    Writes data to a temp file next to `path`, then renames it into place.
    The result keeps the mode of the file it replaces, or gets the umask
    default for a new file.
    """
    destination = Path(path)
    directory = destination.parent if str(destination.parent) else Path(".")
    mode = stat.S_IMODE(destination.stat().st_mode) if destination.exists() else _new_file_mode()
    fd, temp_name = tempfile.mkstemp(prefix=f".{destination.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.chmod(temp_name, mode)
        os.replace(temp_name, destination)
    except BaseException:
        if os.path.exists(temp_name):
            os.remove(temp_name)
        raise


def atomic_write_text(path: PathLike, text: str) -> None:
    """UTF-8, LF line endings."""
    atomic_write_bytes(path, text.encode("utf-8"))
