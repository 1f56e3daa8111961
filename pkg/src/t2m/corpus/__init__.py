"""Machines shipped with the package, loaded by name."""
from importlib import resources

from ..dsl import parse_machine


def names() -> list:
    return sorted(p.name[:-4] for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".t2m"))


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.t2m").read_text(encoding="utf-8")


def load(name: str):
    return parse_machine(source(name))


def load_all() -> dict:
    return {n: load(n) for n in names()}
