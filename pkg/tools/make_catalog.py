"""Regenerate src/hadflow/catalog/data/*.json from the transcriptions below.

Entry syntax: a unit ``1 -1 i -i``, or ``w<k>`` (exp(2 pi i k/6)) or
``e<k>`` (exp(2 pi i k/10)), optionally followed by parameter terms such as
``+a`` or ``-b`` meaning a factor exp(+i a) / exp(-i b).

    python tools/make_catalog.py
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "hadflow" / "catalog" / "data"

UNITS = {"1": Fraction(0), "-1": Fraction(1, 2), "i": Fraction(1, 4), "-i": Fraction(3, 4)}
TOKEN = re.compile(r"^(-?1|-?i|w\d+|e\d+)((?:[+-][a-z])*)$")


def parse(entry: str) -> dict:
    m = TOKEN.match(entry)
    if not m:
        raise ValueError(f"bad entry {entry!r}")
    unit, terms = m.groups()
    if unit in UNITS:
        q = UNITS[unit]
    elif unit[0] == "w":
        q = Fraction(int(unit[1:]), 6)
    else:
        q = Fraction(int(unit[1:]), 10)
    lin: dict[str, int] = {}
    for sign, name in re.findall(r"([+-])([a-z])", terms):
        lin[name] = lin.get(name, 0) + (1 if sign == "+" else -1)
    q %= 1
    return {"q": f"{q.numerator}/{q.denominator}", "lin": {k: v for k, v in lin.items() if v}}


def matrix(rows: list[str], params=()) -> dict:
    grid = [r.split() for r in rows]
    d = len(grid) + 1
    full = [["1"] * d] + [["1"] + r for r in grid]
    if any(len(r) != d for r in full):
        raise ValueError("ragged matrix")
    return {"d": d, "params": list(params), "entries": [[parse(x) for x in r] for r in full]}


def with_directions(base: dict, directions: dict[str, list[list[int]]]) -> dict:
    """base o EXP(i * sum_p p * R_p) with integer d x d matrices R_p."""
    out = json.loads(json.dumps(base))
    out["params"] = list(base["params"]) + list(directions)
    for name, R in directions.items():
        for r, row in enumerate(R):
            for c, v in enumerate(row):
                if v:
                    e = out["entries"][r][c]
                    e["lin"][name] = e["lin"].get(name, 0) + v
    return out


def from_core_vector(d: int, vec: list[int]) -> list[list[int]]:
    m = d - 1
    R = [[0] * d for _ in range(d)]
    for k, v in enumerate(vec):
        R[1 + k // m][1 + k % m] = v
    return R


def sparse(d: int, plus: list[int], minus: list[int]) -> list[int]:
    """Core vector of length (d-1)**2 from 1-based coordinates."""
    v = [0] * (d - 1) ** 2
    for k in plus:
        v[k - 1] = 1
    for k in minus:
        v[k - 1] = -1
    return v


def marks(d: int, rows: dict[int, list[int]], value: int = 1) -> list[list[int]]:
    """d x d integer matrix with ``value`` at 1-based (row, col) positions."""
    R = [[0] * d for _ in range(d)]
    for r, cols in rows.items():
        for c in cols:
            R[r - 1][c - 1] = value
    return R


F4_1 = matrix([
    "i+a -1 -i+a",
    "-1 1 -1",
    "-i+a -1 i+a",
], params=("a",))

F6 = matrix([" ".join(f"w{(r * c) % 6}" for c in range(1, 6)) for r in range(1, 6)])

R6 = [[0] * 6 for _ in range(6)]
for r in (2, 4, 6):
    R6[r - 1][1] = R6[r - 1][4] = 1  # a
R6b = [[0] * 6 for _ in range(6)]
for r in (2, 4, 6):
    R6b[r - 1][2] = R6b[r - 1][5] = 1  # b
F6_2 = with_directions(F6, {"a": R6, "b": R6b})
F6_2T = with_directions(F6, {"a": [list(x) for x in zip(*R6)], "b": [list(x) for x in zip(*R6b)]})

D6 = matrix([
    "-1 i -i -i i",
    "i -1 i -i -i",
    "-i i -1 i -i",
    "-i -i i -1 i",
    "i -i -i i -1",
])
RD6 = [[0] * 6 for _ in range(6)]
for r, cols, v in ((3, (4, 5), 1), (4, (3, 6), -1), (5, (3, 6), -1), (6, (4, 5), 1)):
    for c in cols:
        RD6[r - 1][c - 1] = v
D6_1 = with_directions(D6, {"c": RD6})

B9_0 = matrix([
    "-1 e3 e3 -1 e9 e8 e7 e1",
    "e4 -1 e7 e1 e3 -1 e9 e9",
    "e3 e7 -1 e1 e8 e9 e3 -1",
    "e9 e1 -1 -1 e3 e7 e2 e7",
    "e9 -1 e1 e3 -1 e1 e7 e6",
    "e1 e7 e9 e6 e1 -1 -1 e3",
    "e7 e9 e4 e9 -1 e3 -1 e1",
    "-1 e2 e9 e7 e7 e3 e1 -1",
])

G10_1 = matrix([
    "i+a i+a 1+a -i+a -1 1+a -i+a -1+a -1+a",
    "-1 -i+a -1+a 1+a i -i 1+a -1+a i+a",
    "i -i -i+a i+a -i i -1 -1+a 1+a",
    "1 i -1 i+a i -1 -i -i -i+a",
    "-i+a -1+a 1+a 1+a -1 -1+a -1+a 1+a i+a",
    "i 1+a -1+a -i+a -i -1 i+a 1+a -1+a",
    "-1 -i i+a -1+a i 1 -1 1+a -i+a",
    "-i i i -1+a -i -i i -1 1+a",
    "-i -1 -i -1 1 i 1 i -1",
], params=("a",))

M10_1 = matrix([
    "i-a i 1-a -i-a -1 1 -i -1 -1-a",
    "-1 -i -1-a 1-a i -i 1 -1 i",
    "i -i -i-a i-a -i i -1 -1 1",
    "1 i+a -1 i i -1 -i+a -i -i",
    "-i -1 1 1 -1 -1 -1 1 i",
    "i 1+a -1 -i -i+a -1+a i+a 1 -1",
    "-1 -i+a i -1 i+a 1+a -1+a 1 -i",
    "-i-a i i-a -1-a -i -i i -1 1-a",
    "-i -1+a -i -1 1 i 1+a i -1",
], params=("a",))

M10_2 = matrix([
    "i i+b 1+b -i -1+b 1+b -i+b -1+b -1",
    "-1 -i+b -1+a 1+a i+b -i+a 1+a -1+a i+a",
    "i -i -i+a i -i i+a -1 -1 1",
    "1 i -1 i i -1 -i -i -i",
    "-i -1 1+a 1 -1 -1+a -1 1 i",
    "i 1+b -1+b -i -i+b -1+b i+b 1+b -1",
    "-1 -i+b i+a -1+a i+b 1+a -1+a 1+a -i+a",
    "-i i+b i+a -1 -i+b -i+a i -1 1",
    "-i -1+b -i+a -1 1+b i+a 1 i -1",
], params=("a", "b"))

D10 = matrix([
    "-1 -i -i -i -i i i i i",
    "-i -1 i i -i -i -i i i",
    "-i i -1 -i i -i i -i i",
    "-i i -i -1 i i -i i -i",
    "-i -i i i -1 i i -i -i",
    "i -i -i i i -1 -i -i i",
    "i -i i -i i -i -1 i -i",
    "i i -i i -i -i i -1 -i",
    "i i i -i -i i -i -i -1",
])

# nonzero coordinates (1-based, row-major over the 9x9 core) of the 16 kernel vectors at D10
D10_TABLE = [
    ([2, 3, 7, 8, 74, 75, 79, 80], [10, 18, 19, 27, 55, 63, 64, 72]),
    ([10, 12, 16, 18, 64, 66, 70, 72], [2, 8, 20, 26, 56, 62, 74, 80]),
    ([28, 29, 35, 36, 46, 47, 53, 54], [4, 6, 13, 15, 67, 69, 76, 78]),
    ([4, 8, 24, 25, 40, 44, 78, 79], [28, 32, 48, 54, 57, 63, 64, 68]),
    ([37, 40, 47, 54, 55, 58, 65, 72], [5, 7, 15, 17, 32, 34, 78, 80]),
    ([4, 9, 12, 14, 48, 50, 67, 72], [20, 24, 28, 35, 38, 42, 73, 80]),
    ([19, 27, 29, 34, 38, 43, 64, 72], [3, 8, 13, 14, 58, 59, 75, 80]),
    ([37, 39, 43, 45, 46, 48, 52, 54], [5, 6, 23, 24, 59, 60, 77, 78]),
    ([2, 8, 20, 26, 43, 45, 52, 54], [10, 12, 59, 60, 64, 66, 77, 78]),
    ([47, 48, 49, 50, 74, 75, 76, 77], [15, 18, 24, 27, 33, 36, 42, 45]),
    ([2, 6, 30, 32, 65, 69, 75, 77], [10, 17, 22, 27, 40, 45, 46, 53]),
    ([12, 14, 30, 32, 48, 50, 75, 77], [20, 22, 24, 27, 38, 40, 42, 45]),
    ([47, 50, 56, 59, 65, 68, 74, 77], [15, 16, 17, 18, 42, 43, 44, 45]),
    ([25, 26, 34, 35, 47, 50, 74, 77], [15, 18, 42, 45, 57, 58, 66, 67]),
    ([19, 23, 28, 32, 64, 68, 73, 77], [3, 4, 8, 9, 39, 40, 44, 45]),
    ([19, 23, 49, 53, 58, 62, 73, 77], [3, 9, 33, 34, 39, 45, 69, 70]),
]
D10_BASIS = [sparse(10, p, m) for p, m in D10_TABLE]
D10_3 = with_directions(D10, {name: from_core_vector(10, D10_BASIS[k]) for k, name in enumerate("abc")})

G10_V = [[-x for x in row] for row in marks(10, {2: [2, 4, 5, 10], 3: [4, 5], 4: [4, 5], 9: [2, 4, 5, 10]})]
for r, cols in {5: [3, 8], 7: [3, 6, 7, 8], 8: [3, 6, 7, 8], 10: [3, 8]}.items():
    for c in cols:
        G10_V[r - 1][c - 1] = 1
G10_U = marks(10, {3: [4, 5, 7, 8, 9, 10], 4: [4, 7], 6: [4, 7], 8: [4, 5, 7, 8, 9, 10], 9: [4, 7], 10: [4, 7]})
G10_W = marks(10, {2: [3, 4, 6, 7, 8, 9], 3: [3, 6], 7: [3, 4, 6, 7, 8, 9], 8: [3, 6], 9: [3, 6], 10: [3, 6]})


def core_of(R: list[list[int]]) -> list[int]:
    return [v for row in R[1:] for v in row[1:]]


ENTRIES = {
    "F4_1": (F4_1, "one-parameter family containing every 4x4 Hadamard up to equivalence",
             {"a": [0, "pi"]}),
    "F6": (F6, "Fourier matrix of order 6", {}),
    "F6_2": (F6_2, "affine two-parameter Fourier family F6 o EXP(iR(a,b))", {"a": ["-pi", "pi"], "b": ["-pi", "pi"]}),
    "F6_2T": (F6_2T, "transposed affine Fourier family F6 o EXP(iR(a,b)^T)", {"a": ["-pi", "pi"], "b": ["-pi", "pi"]}),
    "D6": (D6, "Dita's symmetric order-6 matrix", {}),
    "D6_1": (D6_1, "Dita's affine family D6 o EXP(iR(c))", {"c": ["-pi/2", "pi/2"]}),
    "B9_0": (B9_0, "Beauchamp-Nicoara order-9 matrix with tenth roots of unity", {}),
    "G10_1": (G10_1, "Golay-sequence one-parameter family of Lampio et al., dephased", {"a": ["-pi", "pi"]}),
    "M10_1": (M10_1, "one-parameter affine family G10(0) o EXP(i a V)", {"a": ["-pi", "pi"]}),
    "M10_2": (M10_2, "two-parameter affine family G10(0) o EXP(i(a U + b W))", {"a": ["-pi", "pi"], "b": ["-pi", "pi"]}),
    "D10": (D10, "non-Dita-type order-10 matrix of Szollosi", {}),
    "D10_3": (D10_3, "three-parameter affine family D10 o EXP(i(a V1 + b V2 + c V3)) from the integer kernel basis",
              {"a": ["-pi", "pi"], "b": ["-pi", "pi"], "c": ["-pi", "pi"]}),
}

VECTORS = {
    "F4_1_center": {"base": "F4_1", "at": {"a": "pi/2"}, "vectors": [
        [1, 0, 1, 0, 0, 0, 1, 0, 1],
        [0, 0, 0, 1, 1, 0, 1, 1, 0],
        [0, 1, 1, 0, 1, 1, 0, 0, 0],
    ]},
    "F6_center": {"base": "F6", "vectors": [
        [1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0],
        [0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1],
        [1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 1],
    ]},
    "D6_center": {"base": "D6", "vectors": [
        [0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, -1, 0, 0, -1, 0, -1, 0, 0, -1, 0, 0, 1, 1, 0],
        [0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, -1, 0, -1, 0, 0, -1, 0, -1, 0, 0],
        [0, -1, 0, -1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, -1, 0, -1, 0],
        [0, 1, 1, 0, 0, -1, 0, 0, -1, 0, -1, 0, 0, -1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0],
    ]},
    "D6_permuted_fifth": {"base": "D6", "vectors": [
        [0, 0, -1, 0, -1, 0, 0, -1, 0, -1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0],
    ]},
    "G10_V": {"base": "G10_1", "at": {"a": "0"}, "vectors": [core_of(G10_V)]},
    "G10_UW": {"base": "G10_1", "at": {"a": "0"}, "vectors": [core_of(G10_U), core_of(G10_W)]},
    "D10_table": {"base": "D10", "vectors": D10_BASIS},
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    index = {}
    for name, (mat, provenance, ranges) in ENTRIES.items():
        (OUT / f"{name}.json").write_text(json.dumps(mat, indent=None) + "\n")
        index[name] = {"provenance": provenance, "ranges": ranges}
    (OUT / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    (OUT / "vectors.json").write_text(json.dumps(VECTORS) + "\n")


if __name__ == "__main__":
    main()
