"""Named Hadamard matrices and affine families stored as exact-phase JSON."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from ..exact import ExactAffineMatrix


class UnknownEntry(KeyError):
    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    matrix: ExactAffineMatrix
    ranges: dict
    provenance: str

    @property
    def params(self) -> tuple[str, ...]:
        return self.matrix.params


def _data(name: str) -> str:
    return resources.files(__name__).joinpath("data", name).read_text()


@lru_cache(maxsize=None)
def _index() -> dict:
    return json.loads(_data("index.json"))


@lru_cache(maxsize=None)
def _vectors() -> dict:
    return json.loads(_data("vectors.json"))


def names() -> list[str]:
    return list(_index())


def list_entries() -> list[tuple[str, str]]:
    """``(name, provenance)`` for every entry."""
    return [(n, meta["provenance"]) for n, meta in _index().items()]


@lru_cache(maxsize=None)
def get(name: str) -> CatalogEntry:
    index = _index()
    if name not in index:
        raise UnknownEntry(f"unknown catalog entry {name!r}; available: {', '.join(index)}")
    matrix = ExactAffineMatrix.from_json(json.loads(_data(f"{name}.json")))
    meta = index[name]
    return CatalogEntry(name, matrix, dict(meta["ranges"]), meta["provenance"])


def vector_sets() -> list[str]:
    return list(_vectors())


def vectors(name: str) -> np.ndarray:
    """Integer core vectors shipped alongside the matrices, as rows."""
    table = _vectors()
    if name not in table:
        raise UnknownEntry(f"unknown vector set {name!r}; available: {', '.join(table)}")
    return np.array(table[name]["vectors"], dtype=int)
