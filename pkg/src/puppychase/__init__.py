"""Puppy pursuit on orthogonal straight-line drawings with exact rational arithmetic."""

from importlib import resources

__version__ = "0.1.0"


def gallery_path(name: str):
    """Path of a shipped gallery scenario, e.g. ``gallery_path("f2_five_components")``."""
    return resources.files(__name__) / "gallery" / f"{name}.json"


def gallery_names() -> list[str]:
    return sorted(p.name[:-5] for p in (resources.files(__name__) / "gallery").iterdir() if p.name.endswith(".json"))
