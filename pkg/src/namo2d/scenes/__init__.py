"""Bundled scenario files."""
from importlib import resources


def scene_path(name: str) -> str:
    """Filesystem path of a bundled scene file."""
    p = resources.files(__package__) / name
    if not p.is_file():
        raise FileNotFoundError(f"no bundled scene named {name!r}")
    return str(p)
