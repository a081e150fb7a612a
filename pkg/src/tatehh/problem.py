"""Input schema, parsing and the built-in corpus.

A problem file is JSON with top-level keys ``p``, ``algebra`` and the
optional ``module`` and ``resolution``.  Structure constants are sparse
triples ``[i, j, coefficient-vector]``; coefficients are reduced mod p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .complexes import ChainComplex
from .dg_algebra import AlgebraError, BimoduleComplex, DgAlgebra, DgBimodule, validate
from .fp_linalg import PrimeFieldMatrix, is_prime


class ParseError(ValueError):
    """Malformed input or a structure that fails validation."""

    def __init__(self, problems: list[str] | str):
        self.problems = [problems] if isinstance(problems, str) else list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class ProblemSpec:
    name: str
    p: int
    algebra: DgAlgebra
    module: DgBimodule
    resolution: BimoduleComplex | None = None
    expected_smooth: bool | None = None
    source: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def module_is_regular(self) -> bool:
        return self.module.is_regular_of(self.algebra)


def _vector(raw, n: int, p: int, where: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != n:
        raise ParseError(f"{where}: expected a coefficient vector of length {n}")
    try:
        return np.mod(np.asarray([int(x) for x in raw], dtype=np.int64), p)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: coefficients must be integers") from None


def _basis(raw: dict, where: str) -> tuple[list[str], list[int]]:
    basis = raw.get("basis")
    if not isinstance(basis, list) or not basis:
        raise ParseError(f"{where}.basis must be a non-empty list")
    labels = [str(b) for b in basis]
    if len(set(labels)) != len(labels):
        raise ParseError(f"{where}.basis has repeated labels")
    degrees = raw.get("degrees", [0] * len(labels))
    if not isinstance(degrees, list) or len(degrees) != len(labels):
        raise ParseError(f"{where}.degrees must list one integer per basis element")
    return labels, [int(d) for d in degrees]


def _index(x, labels: list[str], where: str) -> int:
    if isinstance(x, str):
        if x not in labels:
            raise ParseError(f"{where}: unknown basis element {x!r}")
        return labels.index(x)
    if isinstance(x, int) and 0 <= x < len(labels):
        return x
    raise ParseError(f"{where}: bad basis reference {x!r}")


def _table(raw, rows: list[str], cols: list[str], out_dim: int, p: int, where: str) -> np.ndarray:
    t = np.zeros((len(rows), len(cols), out_dim), dtype=np.int64)
    for k, entry in enumerate(raw or []):
        if not isinstance(entry, list) or len(entry) != 3:
            raise ParseError(f"{where}[{k}]: expected [i, j, coefficient-vector]")
        i = _index(entry[0], rows, f"{where}[{k}]")
        j = _index(entry[1], cols, f"{where}[{k}]")
        t[i, j] = (t[i, j] + _vector(entry[2], out_dim, p, f"{where}[{k}]")) % p
    return t


def _diff(raw, labels: list[str], p: int, where: str) -> np.ndarray:
    n = len(labels)
    d = np.zeros((n, n), dtype=np.int64)
    for k, entry in enumerate(raw or []):
        if not isinstance(entry, list) or len(entry) != 2:
            raise ParseError(f"{where}[{k}]: expected [i, coefficient-vector]")
        j = _index(entry[0], labels, f"{where}[{k}]")
        d[:, j] = (d[:, j] + _vector(entry[1], n, p, f"{where}[{k}]")) % p
    return d


def _parse_algebra(raw: dict, p: int, name: str, smooth) -> DgAlgebra:
    if not isinstance(raw, dict):
        raise ParseError("algebra must be an object")
    labels, degrees = _basis(raw, "algebra")
    unit = _index(raw.get("unit", 0), labels, "algebra.unit")
    mult = _table(raw.get("mult"), labels, labels, len(labels), p, "algebra.mult")
    # products with the unit need not be listed
    eye = np.eye(len(labels), dtype=np.int64)
    mult[unit, :, :] = eye
    mult[:, unit, :] = eye
    diff = _diff(raw.get("diff"), labels, p, "algebra.diff")
    return DgAlgebra(p, labels, degrees, unit, mult, diff, name=name, expected_smooth=smooth)


def _parse_module(raw: dict, a: DgAlgebra) -> DgBimodule:
    if not isinstance(raw, dict):
        raise ParseError("module must be an object")
    labels, degrees = _basis(raw, "module")
    p = a.p
    left = _table(raw.get("left"), list(a.labels), labels, len(labels), p, "module.left")
    right = _table(raw.get("right"), labels, list(a.labels), len(labels), p, "module.right")
    eye = np.eye(len(labels), dtype=np.int64)
    left[a.unit] = eye
    right[:, a.unit, :] = eye
    diff = _diff(raw.get("diff"), labels, p, "module.diff")
    return DgBimodule(a, labels, degrees, left, right, diff, name=str(raw.get("name", "M")))


def _triplet_matrix(raw, p: int, rows: int, cols: int, where: str) -> PrimeFieldMatrix:
    r, c, v = [], [], []
    for k, entry in enumerate(raw or []):
        if not isinstance(entry, list) or len(entry) != 3:
            raise ParseError(f"{where}[{k}]: expected [row, col, coefficient]")
        i, j, x = (int(e) for e in entry)
        if not (0 <= i < rows and 0 <= j < cols):
            raise ParseError(f"{where}[{k}]: entry outside a {rows}x{cols} matrix")
        r.append(i); c.append(j); v.append(x)
    return PrimeFieldMatrix.from_triplets(p, rows, cols, r, c, v)


def _parse_resolution(raw: dict, a: DgAlgebra) -> BimoduleComplex:
    """Finite complex of bimodules: dims, diff, left, right per degree (sparse triplets)."""
    if not isinstance(raw, dict):
        raise ParseError("resolution must be an object")
    p = a.p
    try:
        dims = {int(n): int(k) for n, k in raw["dims"].items()}
    except (KeyError, AttributeError, ValueError):
        raise ParseError("resolution.dims must map degrees to dimensions") from None
    d = {}
    for n, entries in (raw.get("diff") or {}).items():
        n = int(n)
        d[n] = _triplet_matrix(entries, p, dims.get(n - 1, 0), dims.get(n, 0), f"resolution.diff[{n}]")
    try:
        c = ChainComplex(p, dims, d)
    except ValueError as exc:
        raise ParseError(f"resolution: {exc}") from None
    left, right = {}, {}
    for key, store in (("left", left), ("right", right)):
        acts = raw.get(key) or {}
        for n in dims:
            store[n] = []
            per = acts.get(str(n), {})
            for i in range(a.dim):
                tgt = n + a.degrees[i]
                if i == a.unit:
                    store[n].append(PrimeFieldMatrix.identity(p, dims[n]))
                else:
                    store[n].append(_triplet_matrix(per.get(a.labels[i], per.get(str(i))), p, dims.get(tgt, 0),
                                                    dims[n], f"resolution.{key}[{n}][{a.labels[i]}]"))
    return BimoduleComplex(a, c, left, right)


def parse(source: str | Path | dict) -> ProblemSpec:
    """Read a problem from a corpus name, a file path, inline JSON text or a dict."""
    origin = ""
    if isinstance(source, dict):
        data = source
    else:
        text = None
        s = str(source)
        if s.lstrip().startswith("{"):
            text = s
            origin = "<inline>"
        else:
            path = Path(s)
            if not path.exists() and corpus_path(s) is not None:
                path = corpus_path(s)
            if not path.exists():
                raise ParseError(f"no such input file or corpus entry: {s}")
            text = path.read_text(encoding="utf-8")
            origin = str(path)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    if "p" not in data or "algebra" not in data:
        raise ParseError("top-level keys 'p' and 'algebra' are required")
    try:
        p = int(data["p"])
    except (TypeError, ValueError):
        raise ParseError("p must be an integer") from None
    if not is_prime(p):
        raise ParseError(f"modulus not prime: {p}")
    name = str(data.get("name", Path(origin).stem if origin and origin != "<inline>" else "input"))
    smooth = data.get("expected_smooth")
    try:
        a = _parse_algebra(data["algebra"], p, name, smooth)
    except AlgebraError as exc:
        raise ParseError(str(exc)) from None
    problems = validate(a)
    if problems:
        raise ParseError(problems)
    if "module" in data:
        try:
            m = _parse_module(data["module"], a)
        except AlgebraError as exc:
            raise ParseError(str(exc)) from None
        problems = validate(m)
        if problems:
            raise ParseError(problems)
    else:
        m = DgBimodule.regular(a)
    res = None
    if "resolution" in data:
        res = _parse_resolution(data["resolution"], a)
        problems = res.violations()
        if problems:
            raise ParseError(problems)
    return ProblemSpec(name, p, a, m, res, smooth, origin, data)


# ---------------------------------------------------------------------------
# corpus

CORPUS = ("f2", "f3", "f2xf2", "f2eps", "f3eps", "a2quiver", "m2f2", "dg1")


def corpus_path(name: str) -> Path | None:
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in CORPUS:
        return None
    return Path(str(resources.files("tatehh") / "corpus" / f"{stem}.json"))


def load(name: str) -> ProblemSpec:
    path = corpus_path(name)
    if path is None:
        raise ParseError(f"unknown corpus entry {name!r}")
    return parse(path)


def corpus() -> list[ProblemSpec]:
    return [load(n) for n in CORPUS]
