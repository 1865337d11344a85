"""Instance generation and I/O: synthetic chains, PDB backbones, and the text formats.

Instance file::

    DMDGP <K> <n>
    <i> <j> <d>        # one edge per line, i < j, d as shortest round-trip decimal

Realization file: one line per vertex, ``<i> <x1> ... <xK>``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ArgumentError, EmptyStructureError, GenerationError, InstanceError, ParseError
from .geometry import canonicalize, scaled_cayley_menger
from .instance import DMDGPInstance

BACKBONE = ("N", "CA", "C")
STANDARD_RESIDUES = frozenset(
    "ALA ARG ASN ASP CYS GLN GLU GLY HIS ILE LEU LYS MET PHE PRO SER THR TRP TYR VAL".split()
)
GEN_CM_THRESHOLD = 1e-6
MAX_TRIES = 1000
PAIR_BLOCK = 256


class DegeneracyWarning(UserWarning):
    pass


class SkippedRecordWarning(UserWarning):
    pass


# ---------------------------------------------------------------- synthetic


def sample_chain(n: int, K: int, rng: np.random.Generator) -> np.ndarray:
    """Random chain in R^K with steps in [1, 2] and no nearly flat K- or (K+1)-windows."""
    x = np.zeros((n, K))
    for v in range(1, n):
        for _ in range(MAX_TRIES):
            step = rng.normal(size=K)
            step *= rng.uniform(1.0, 2.0) / np.linalg.norm(step)
            x[v] = x[v - 1] + step
            if _window_ok(x, v, K):
                break
        else:
            raise GenerationError(f"could not place point {v + 1} in general position after {MAX_TRIES} tries")
    return x


def _window_ok(x: np.ndarray, v: int, K: int) -> bool:
    for size in (K, K + 1):
        if size >= 2 and v + 1 >= size and scaled_cayley_menger(x[v + 1 - size : v + 1]) <= GEN_CM_THRESHOLD:
            return False
    return True


def instance_from_points(
    points: np.ndarray,
    K: int,
    cutoff: Optional[float] = None,
    pruning_pairs: Optional[Iterable[tuple[int, int]]] = None,
) -> DMDGPInstance:
    """Exact-distance instance: all |i-j| <= K pairs plus pruning pairs.

    Pruning pairs are the explicit ``pruning_pairs`` (1-based) and/or every
    |i-j| > K pair closer than ``cutoff`` (strict).
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    edges = {}
    for i in range(1, n + 1):
        for j in range(i + 1, min(n, i + K) + 1):
            edges[(i, j)] = float(np.linalg.norm(pts[i - 1] - pts[j - 1]))
    if cutoff is not None and n > K + 1:
        # row blocks keep memory at O(block * n) for long chains
        for lo in range(0, n - K - 1, PAIR_BLOCK):
            hi = min(lo + PAIR_BLOCK, n - K - 1)
            diff = pts[lo:hi, None, :] - pts[None, :, :]
            dist = np.sqrt(np.einsum("abk,abk->ab", diff, diff))
            ii, jj = np.nonzero(np.triu(dist < cutoff, k=lo + K + 1))
            for a, b in zip(ii.tolist(), jj.tolist()):
                edges[(lo + a + 1, b + 1)] = float(dist[a, b])
    for i, j in pruning_pairs or ():
        if j - i <= K:
            raise InstanceError(f"{(i, j)} is not a pruning pair for K={K}")
        edges[(i, j)] = float(np.linalg.norm(pts[i - 1] - pts[j - 1]))
    return DMDGPInstance(n, K, edges)


def generate_synthetic(
    n: int,
    K: int,
    cutoff: float,
    seed: Optional[int] = None,
    pruning_pairs: Optional[Iterable[tuple[int, int]]] = None,
) -> tuple[DMDGPInstance, np.ndarray]:
    """Random DMDGP instance with its ground-truth realization.

    The ground truth is returned in the canonical root-clique frame, so it
    coincides with a solver output or with its total mirror image.
    """
    if not (n > K >= 1):
        raise InstanceError(f"need n > K >= 1, got n={n}, K={K}")
    if cutoff < 0:
        raise InstanceError("cutoff must be non-negative")
    rng = np.random.default_rng(seed)
    pts = canonicalize(sample_chain(n, K, rng))
    return instance_from_points(pts, K, cutoff=cutoff, pruning_pairs=pruning_pairs), pts


# ---------------------------------------------------------------- PDB


@dataclass(frozen=True)
class AtomRecord:
    serial: int
    name: str
    res_name: str
    res_seq: int
    chain: str
    model: int
    pos: tuple


@dataclass
class RawStructure:
    atoms: list

    def __len__(self):
        return len(self.atoms)

    @property
    def coords(self) -> np.ndarray:
        return np.array([a.pos for a in self.atoms], dtype=float)


def parse_pdb(text: str) -> RawStructure:
    """Backbone N/CA/C ATOM records of the first model and first chain, in file order."""
    atoms = []
    model = None
    chain = None
    seen_model = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        rec = line[:6]
        if rec.startswith("MODEL"):
            if seen_model:
                break
            seen_model = True
            try:
                model = int(line[10:14])
            except ValueError:
                model = 1
            continue
        if rec.startswith("ENDMDL"):
            if seen_model:
                break
            continue
        if rec == "HETATM":
            warnings.warn(f"line {lineno}: HETATM record skipped", SkippedRecordWarning, stacklevel=2)
            continue
        if rec != "ATOM  ":
            continue
        if len(line) < 54:
            raise ParseError(f"ATOM record too short ({len(line)} columns)", line=lineno)
        name = line[12:16].strip()
        if name not in BACKBONE:
            continue
        alt = line[16]
        if alt not in (" ", "A"):
            continue
        this_chain = line[21]
        if chain is None:
            chain = this_chain
        elif this_chain != chain:
            continue
        res_name = line[17:20].strip()
        if line[26] not in (" ", ""):
            warnings.warn(f"line {lineno}: insertion code {line[26]!r} skipped", SkippedRecordWarning, stacklevel=2)
            continue
        if res_name not in STANDARD_RESIDUES:
            warnings.warn(f"line {lineno}: non-standard residue {res_name} skipped", SkippedRecordWarning, stacklevel=2)
            continue
        try:
            serial = int(line[6:11])
            res_seq = int(line[22:26])
            pos = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
        except ValueError as exc:
            raise ParseError(f"malformed ATOM record: {exc}", line=lineno) from None
        atoms.append(AtomRecord(serial, name, res_name, res_seq, chain, model or 1, pos))
    if not atoms:
        raise EmptyStructureError("no backbone N/CA/C atoms found")
    return RawStructure(atoms)


def build_instance(structure: RawStructure | np.ndarray, cutoff: float) -> DMDGPInstance:
    """K=3 instance over the backbone: |i-j| <= 3 pairs plus |i-j| > 3 pairs closer than ``cutoff``."""
    pts = structure.coords if isinstance(structure, RawStructure) else np.asarray(structure, dtype=float)
    if pts.shape[0] < 4:
        raise InstanceError(f"need at least 4 atoms, got {pts.shape[0]}")
    flat = []
    for v in range(pts.shape[0]):
        for size in (3, 4):
            if v + 1 >= size and scaled_cayley_menger(pts[v + 1 - size : v + 1]) <= GEN_CM_THRESHOLD:
                flat.append(tuple(range(v + 2 - size, v + 2)))
    if flat:
        warnings.warn(f"degenerate consecutive atoms: {flat[:10]}", DegeneracyWarning, stacklevel=2)
    return instance_from_points(pts, 3, cutoff=cutoff)


# ---------------------------------------------------------------- text formats


def write_instance(instance: DMDGPInstance) -> str:
    lines = [f"DMDGP {instance.K} {instance.n}"]
    for (i, j), d in sorted(instance.edges.items()):
        lines.append(f"{i} {j} {d!r}")
    return "\n".join(lines) + "\n"


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def read_instance(text: str) -> DMDGPInstance:
    header = None
    edges: dict = {}
    for lineno, tok in _content_lines(text):
        if header is None:
            if tok[0] != "DMDGP" or len(tok) != 3:
                raise ParseError("expected header 'DMDGP <K> <n>'", line=lineno)
            try:
                header = (int(tok[1]), int(tok[2]))
            except ValueError:
                raise ParseError("header K and n must be integers", line=lineno) from None
            continue
        if not tok[0].lstrip("+-").isdigit():
            raise ParseError(f"unknown directive {tok[0]!r}", line=lineno)
        if len(tok) != 3:
            raise ParseError(f"expected '<i> <j> <d>', got {len(tok)} fields", line=lineno)
        try:
            i, j, d = int(tok[0]), int(tok[1]), float(tok[2])
        except ValueError:
            raise ParseError("edge fields must be '<int> <int> <float>'", line=lineno) from None
        if not i < j:
            raise ParseError(f"edge must have i < j, got {i} {j}", line=lineno)
        if (i, j) in edges:
            raise ParseError(f"duplicate edge {i} {j}", line=lineno)
        edges[(i, j)] = d
    if header is None:
        raise ParseError("empty instance file")
    if not edges:
        raise ParseError("no edges")
    K, n = header
    try:
        return DMDGPInstance(n, K, edges)
    except InstanceError as exc:
        raise ParseError(str(exc)) from None


def write_realization(x: np.ndarray) -> str:
    return "".join(f"{v} " + " ".join(repr(float(c)) for c in row) + "\n" for v, row in enumerate(np.asarray(x), start=1))


def read_realization(text: str, K: Optional[int] = None) -> np.ndarray:
    rows: dict[int, Sequence[float]] = {}
    for lineno, tok in _content_lines(text):
        try:
            v = int(tok[0])
            coords = [float(c) for c in tok[1:]]
        except ValueError:
            raise ParseError("expected '<i> <x1> ... <xK>'", line=lineno) from None
        if K is not None and len(coords) != K:
            raise ParseError(f"expected {K} coordinates, got {len(coords)}", line=lineno)
        if v in rows:
            raise ParseError(f"duplicate vertex {v}", line=lineno)
        rows[v] = coords
    if not rows:
        raise ParseError("empty realization file")
    n = max(rows)
    missing = [v for v in range(1, n + 1) if v not in rows]
    if missing:
        raise ParseError(f"missing vertices {missing[:10]}")
    dims = {len(c) for c in rows.values()}
    if len(dims) != 1:
        raise ParseError("inconsistent coordinate counts")
    return np.array([rows[v] for v in range(1, n + 1)], dtype=float)


def mde(x: np.ndarray, instance: DMDGPInstance) -> float:
    """Mean over edges of | ||x_i - x_j|| - d_ij | / d_ij."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < instance.n or x.shape[1] != instance.K:
        raise ArgumentError(f"realization of shape {x.shape} does not cover {instance.n} vertices in R^{instance.K}")
    ij = np.array(list(instance.edges.keys())) - 1
    d = np.array(list(instance.edges.values()))
    got = np.linalg.norm(x[ij[:, 0]] - x[ij[:, 1]], axis=1)
    return float(np.mean(np.abs(got - d) / d))


def edge_residuals(x: np.ndarray, instance: DMDGPInstance, edges=None) -> dict:
    """Relative residual | ||x_i - x_j|| - d | / d per edge."""
    keys = instance.edges.keys() if edges is None else edges
    return {e: abs(math.dist(x[e[0] - 1], x[e[1] - 1]) - instance.edges[e]) / instance.edges[e] for e in keys}
