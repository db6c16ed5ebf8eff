"""Finite subgroups of O(d): construction, closure, orbits, stabilizers.

Groups are stored as explicit element lists in a canonical order
(lexicographic on flattened matrix entries) so that every enumeration
downstream is deterministic.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ClosureOverflow, NotOrthogonal, SizeOverflow
from .tolerances import DEFAULT_TOL, TolerancePolicy

__all__ = [
    "GroupElement",
    "FiniteGroup",
    "Orbit",
    "generate_group",
    "build_family",
    "cyclic_rotation_2d",
    "axis_rotation_3d",
    "dihedral_2d",
    "sign_flips",
    "permutations",
    "plus_minus_id",
    "circular_shifts",
    "orbit_of",
    "stabilizer_order",
    "save_group",
    "load_group",
    "FAMILIES",
]


def _as_matrix(matrix, dim: int | None = None) -> np.ndarray:
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if dim is not None and M.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {M.shape[0]}")
    return M


def _check_orthogonal(M: np.ndarray, tol: TolerancePolicy) -> None:
    defect = np.abs(M.T @ M - np.eye(M.shape[0])).max()
    if defect > tol.eq_tol:
        raise NotOrthogonal(f"matrix is not orthogonal: |Q^T Q - I|_max = {defect:.3e}")


@dataclass(frozen=True)
class GroupElement:
    """One orthogonal matrix, entries frozen after construction."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        M = _as_matrix(self.matrix, self.dim)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    def validate(self, tol: TolerancePolicy = DEFAULT_TOL) -> None:
        _check_orthogonal(self.matrix, tol)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)


def _canonical_order(stack: np.ndarray) -> np.ndarray:
    """Indices sorting matrices lexicographically on flattened entries."""
    flat = stack.reshape(stack.shape[0], -1)
    return np.lexsort(flat.T[::-1])


def _dedup_stack(stack: np.ndarray, eq_tol: float) -> np.ndarray:
    """Keep the first representative of each eq_tol-cluster, in given order."""
    kept: list[np.ndarray] = []
    for M in stack:
        if not any(np.abs(M - K).max() <= eq_tol for K in kept):
            kept.append(M)
    return np.stack(kept) if kept else stack[:0]


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Finite subgroup of O(dim) with explicit elements.

    ``stack`` holds all matrices as one (order, dim, dim) array for
    vectorized orbit computations.  ``family`` records the constructor
    used, which is the only mechanism by which structure-specific fast
    paths (the circular-shift FFT route) are enabled.
    """

    dim: int
    elements: tuple[GroupElement, ...]
    family: str | None = None
    stack: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        stack = np.stack([e.matrix for e in self.elements])
        stack.setflags(write=False)
        object.__setattr__(self, "stack", stack)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def identity_index(self) -> int:
        eye = np.eye(self.dim)
        dists = np.abs(self.stack - eye).max(axis=(1, 2))
        idx = int(np.argmin(dists))
        if dists[idx] > DEFAULT_TOL.eq_tol:
            raise ValueError("group does not contain the identity")
        return idx

    def apply_all(self, x: np.ndarray) -> np.ndarray:
        """All images g.x, shape (order, dim), in canonical element order."""
        return self.stack @ np.asarray(x, dtype=float)

    def contains(self, matrix, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
        M = _as_matrix(matrix, self.dim)
        return bool(np.abs(self.stack - M).max(axis=(1, 2)).min() <= tol.eq_tol)

    def closure_defect(self, chunk: int = 512) -> float:
        """Max distance from any pairwise product to its nearest element.

        Zero (up to float noise) iff the element list is closed under
        multiplication.  Quadratic in the order; meant for audits.
        """
        m = self.order
        prods = np.einsum("aij,bjk->abik", self.stack, self.stack).reshape(m * m, self.dim, self.dim)
        worst = 0.0
        for lo in range(0, m * m, chunk):
            block = prods[lo:lo + chunk]
            # (chunk, m) distance matrix in the entrywise max norm
            d = np.abs(block[:, None, :, :] - self.stack[None, :, :, :]).max(axis=(2, 3))
            worst = max(worst, float(d.min(axis=1).max()))
        return worst

    @classmethod
    def from_matrices(cls, mats: np.ndarray, family: str | None = None) -> "FiniteGroup":
        stack = np.asarray(mats, dtype=float)
        order = _canonical_order(stack)
        dim = stack.shape[1]
        elems = tuple(GroupElement(dim, stack[i].copy()) for i in order)
        return cls(dim=dim, elements=elems, family=family)


@dataclass(frozen=True)
class Orbit:
    """Deduplicated orbit of ``base``; ``rep_elements[k]`` is the index of
    one group element sending base to ``points[k]``."""

    base: np.ndarray
    points: np.ndarray
    rep_elements: np.ndarray

    def __post_init__(self):
        for name in ("base", "points", "rep_elements"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]


def generate_group(
    generators,
    max_order: int = 100_000,
    tol: TolerancePolicy = DEFAULT_TOL,
    family: str | None = None,
) -> FiniteGroup:
    """Close a generator list under multiplication.

    Every element of a finite matrix group is a positive power of the
    generators, so right-multiplication BFS without explicit inverses
    reaches the full group.
    """
    gens = [_as_matrix(g) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    dim = gens[0].shape[0]
    for g in gens:
        _as_matrix(g, dim)
        _check_orthogonal(g, tol)

    gen_stack = _dedup_stack(np.stack(gens), tol.eq_tol)
    elements = [np.eye(dim)]

    def _known(M: np.ndarray) -> bool:
        arr = np.stack(elements)
        return bool(np.abs(arr - M).max(axis=(1, 2)).min() <= tol.eq_tol)

    frontier = [g for g in gen_stack if not _known(g)]
    elements.extend(frontier)
    while frontier:
        if len(elements) > max_order:
            raise ClosureOverflow(f"closure exceeded max_order={max_order}")
        new: list[np.ndarray] = []
        for f in frontier:
            for g in gen_stack:
                cand = f @ g
                if not _known(cand) and not any(np.abs(cand - M).max() <= tol.eq_tol for M in new):
                    new.append(cand)
        elements.extend(new)
        frontier = new
    if len(elements) > max_order:
        raise ClosureOverflow(f"closure exceeded max_order={max_order}")
    return FiniteGroup.from_matrices(np.stack(elements), family=family)


# ---------------------------------------------------------------------------
# named families


def _rotation_2d(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _family_cap(order: int, max_order: int, name: str) -> None:
    if order > max_order:
        raise SizeOverflow(f"{name} would have order {order} > max_order={max_order}")


def cyclic_rotation_2d(m: int, max_order: int = 100_000) -> FiniteGroup:
    """Planar rotations by multiples of 2*pi/m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    _family_cap(m, max_order, "cyclic_rotation_2d")
    mats = np.stack([_rotation_2d(2 * math.pi * k / m) for k in range(m)])
    return FiniteGroup.from_matrices(mats, family="cyclic_rotation_2d")


def axis_rotation_3d(m: int, max_order: int = 100_000) -> FiniteGroup:
    """Rotations about the e3 axis by multiples of 2*pi/m; e3 is fixed."""
    if m < 1:
        raise ValueError("m must be >= 1")
    _family_cap(m, max_order, "axis_rotation_3d")
    mats = []
    for k in range(m):
        M = np.eye(3)
        M[:2, :2] = _rotation_2d(2 * math.pi * k / m)
        mats.append(M)
    return FiniteGroup.from_matrices(np.stack(mats), family="axis_rotation_3d")


def dihedral_2d(m: int, max_order: int = 100_000) -> FiniteGroup:
    """Order-2m dihedral group: m rotations and m reflections."""
    if m < 1:
        raise ValueError("m must be >= 1")
    _family_cap(2 * m, max_order, "dihedral_2d")
    flip = np.diag([1.0, -1.0])
    rots = [_rotation_2d(2 * math.pi * k / m) for k in range(m)]
    mats = np.stack(rots + [R @ flip for R in rots])
    return FiniteGroup.from_matrices(mats, family="dihedral_2d")


def sign_flips(d: int, max_order: int = 100_000) -> FiniteGroup:
    """All 2^d diagonal matrices with +-1 entries."""
    if d < 1:
        raise ValueError("d must be >= 1")
    _family_cap(2 ** d, max_order, "sign_flips")
    mats = np.stack([np.diag(np.array(s, dtype=float))
                     for s in itertools.product((1.0, -1.0), repeat=d)])
    return FiniteGroup.from_matrices(mats, family="sign_flips")


def permutations(d: int, max_order: int = 100_000) -> FiniteGroup:
    """All d! coordinate-permutation matrices."""
    if d < 1:
        raise ValueError("d must be >= 1")
    _family_cap(math.factorial(d), max_order, "permutations")
    mats = []
    for p in itertools.permutations(range(d)):
        M = np.zeros((d, d))
        M[np.arange(d), p] = 1.0
        mats.append(M)
    return FiniteGroup.from_matrices(np.stack(mats), family="permutations")


def plus_minus_id(d: int, max_order: int = 100_000) -> FiniteGroup:
    """The two-element group {I, -I} on R^d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    _family_cap(2, max_order, "plus_minus_id")
    return FiniteGroup.from_matrices(np.stack([np.eye(d), -np.eye(d)]), family="plus_minus_id")


def circular_shifts(d: int, max_order: int = 100_000) -> FiniteGroup:
    """Cyclic shifts of coordinates; the only family with an FFT fast path."""
    if d < 1:
        raise ValueError("d must be >= 1")
    _family_cap(d, max_order, "circular_shifts")
    shift = np.zeros((d, d))
    shift[np.arange(d), (np.arange(d) - 1) % d] = 1.0  # (S x)[i] = x[i-1]
    mats = [np.eye(d)]
    for _ in range(d - 1):
        mats.append(shift @ mats[-1])
    return FiniteGroup.from_matrices(np.stack(mats), family="circular_shifts")


FAMILIES = {
    "cyclic_rotation_2d": cyclic_rotation_2d,
    "axis_rotation_3d": axis_rotation_3d,
    "dihedral_2d": dihedral_2d,
    "sign_flips": sign_flips,
    "permutations": permutations,
    "plus_minus_id": plus_minus_id,
    "circular_shifts": circular_shifts,
}


def build_family(name: str, param: int, max_order: int = 100_000) -> FiniteGroup:
    """Build a named family; ``param`` is m for the rotation families and
    d for the coordinate families."""
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")
    return FAMILIES[name](param, max_order=max_order)


# ---------------------------------------------------------------------------
# orbits and stabilizers


def orbit_of(group: FiniteGroup, x, tol: TolerancePolicy = DEFAULT_TOL) -> Orbit:
    """Deduplicated orbit of x, first-seen order over canonical elements."""
    x = np.asarray(x, dtype=float)
    images = group.apply_all(x)
    thresh = tol.eq_tol * (1.0 + float(np.linalg.norm(x)))
    points: list[np.ndarray] = []
    reps: list[int] = []
    for gi, p in enumerate(images):
        if not points:
            points.append(p)
            reps.append(gi)
            continue
        dists = np.linalg.norm(np.stack(points) - p, axis=1)
        if dists.min() > thresh:
            points.append(p)
            reps.append(gi)
    return Orbit(base=x.copy(), points=np.stack(points),
                 rep_elements=np.array(reps, dtype=int))


def stabilizer_order(group: FiniteGroup, x, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Number of elements fixing x, relative threshold eq_tol*(1+|x|)."""
    x = np.asarray(x, dtype=float)
    images = group.apply_all(x)
    thresh = tol.eq_tol * (1.0 + float(np.linalg.norm(x)))
    return int((np.linalg.norm(images - x, axis=1) <= thresh).sum())


# ---------------------------------------------------------------------------
# file format: {"dim": d, "generators": [[row-major d*d reals], ...]}


def save_group(group: FiniteGroup, path) -> None:
    payload = {
        "dim": group.dim,
        "generators": [e.matrix.reshape(-1).tolist() for e in group.elements],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_group(path, max_order: int = 100_000, tol: TolerancePolicy = DEFAULT_TOL) -> FiniteGroup:
    payload = json.loads(Path(path).read_text())
    dim = int(payload["dim"])
    gens = [np.array(g, dtype=float).reshape(dim, dim) for g in payload["generators"]]
    return generate_group(gens, max_order=max_order, tol=tol)
