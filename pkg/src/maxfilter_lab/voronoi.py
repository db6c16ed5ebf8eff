"""Voronoi cells of orbits, S-sets, choice assignments, and the Voronoi
characteristic chi.

The open cell V_x collects the points whose best orbit representative is
x itself and nobody else; joint nonemptiness of several open cells is
decided by a small margin LP rather than sampling.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import LpNumericalFailure, NotNicePoint
from .filtering import MaxFilterBank
from .groups import FiniteGroup, Orbit, orbit_of, stabilizer_order
from .tolerances import DEFAULT_TOL, TolerancePolicy

__all__ = [
    "VoronoiCellSpec",
    "ConeFeasibility",
    "SSet",
    "ChoiceAssignment",
    "ChoiceEnumeration",
    "ChiEstimate",
    "cell_of",
    "strict_cones_feasible",
    "in_Q",
    "is_principal",
    "sample_principal",
    "sample_nice",
    "s_set",
    "choice_assignments",
    "voronoi_characteristic",
]


@dataclass(frozen=True)
class VoronoiCellSpec:
    """Open cell {y : <center, y> > <p, y> for all other orbit points p}."""

    center: np.ndarray
    orbit: Orbit

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        thresh = DEFAULT_TOL.eq_tol * (1.0 + float(np.linalg.norm(c)))
        dists = np.linalg.norm(self.orbit.points - c, axis=1)
        idx = int(np.argmin(dists))
        if dists[idx] > thresh:
            raise ValueError("cell center does not lie on the supplied orbit")
        object.__setattr__(self, "_center_index", idx)

    @property
    def rows(self) -> np.ndarray:
        """Constraint normals center - p, one per non-center orbit point."""
        mask = np.ones(self.orbit.size, dtype=bool)
        mask[self._center_index] = False
        return self.center[None, :] - self.orbit.points[mask]

    def contains(self, y, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
        """Strict membership with margin lp_tol * |y|."""
        y = np.asarray(y, dtype=float)
        rows = self.rows
        if rows.shape[0] == 0:
            return True
        return bool((rows @ y > tol.lp_tol * np.linalg.norm(y)).all())

    def closure_contains(self, y, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
        y = np.asarray(y, dtype=float)
        rows = self.rows
        if rows.shape[0] == 0:
            return True
        return bool((rows @ y >= -tol.lp_tol * np.linalg.norm(y)).all())


def cell_of(group: FiniteGroup, x, tol: TolerancePolicy = DEFAULT_TOL) -> VoronoiCellSpec:
    x = np.asarray(x, dtype=float)
    return VoronoiCellSpec(center=x, orbit=orbit_of(group, x, tol))


@dataclass(frozen=True)
class ConeFeasibility:
    feasible: bool
    witness: np.ndarray | None
    margin: float


def strict_cones_feasible(
    cells: list[VoronoiCellSpec] | tuple[VoronoiCellSpec, ...],
    tol: TolerancePolicy = DEFAULT_TOL,
) -> ConeFeasibility:
    """Decide whether the open cells intersect.

    Solves  max t  s.t.  <c_k - p, y> >= t  for every cell k and every
    non-center orbit point p of that cell, with |y|_inf <= 1.  The zero
    point is always feasible at t = 0, so the LP is bounded and feasible;
    the intersection is nonempty iff the optimum exceeds lp_tol.
    """
    rows_list = [c.rows for c in cells if c.rows.shape[0] > 0]
    if not rows_list:
        d = cells[0].center.shape[0] if cells else 0
        return ConeFeasibility(feasible=True, witness=np.zeros(d), margin=np.inf)
    rows = np.vstack(rows_list)
    d = rows.shape[1]
    # minimize -t subject to [-rows | 1] [y, t] <= 0 and the unit box on y
    A = np.hstack([-rows, np.ones((rows.shape[0], 1))])
    cost = np.zeros(d + 1)
    cost[-1] = -1.0
    res = linprog(cost, A_ub=A, b_ub=np.zeros(rows.shape[0]),
                  bounds=[(-1.0, 1.0)] * d + [(None, None)], method="highs")
    if res.status != 0 or res.x is None:
        raise LpNumericalFailure(f"margin LP failed with status {res.status}: {res.message}")
    margin = float(res.x[-1])
    feasible = margin > tol.lp_tol
    witness = res.x[:d].copy() if feasible else None
    return ConeFeasibility(feasible=feasible, witness=witness, margin=margin)


def in_Q(orbit: Orbit, y, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Unique-argmax test: the top inner product beats the runner-up by
    more than sample_tol * (1 + |y|)."""
    y = np.asarray(y, dtype=float)
    vals = orbit.points @ y
    if vals.shape[0] == 1:
        return True
    top2 = np.partition(vals, vals.shape[0] - 2)[-2:]
    gap = float(top2[1] - top2[0])
    return gap > tol.sample_tol * (1.0 + float(np.linalg.norm(y)))


def is_principal(group: FiniteGroup, x, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Trivial stabilizer, i.e. the orbit has full size |G|."""
    return stabilizer_order(group, x, tol) == 1


def sample_principal(
    group: FiniteGroup,
    rng: np.random.Generator,
    tol: TolerancePolicy = DEFAULT_TOL,
    max_tries: int = 100,
) -> np.ndarray:
    """Standard Gaussian draw, rejected until the point is principal."""
    for _ in range(max_tries):
        x = rng.standard_normal(group.dim)
        if is_principal(group, x, tol):
            return x
    raise NotNicePoint(f"no principal point found in {max_tries} Gaussian draws")


def sample_nice(
    bank: MaxFilterBank,
    rng: np.random.Generator,
    tol: TolerancePolicy = DEFAULT_TOL,
    max_tries: int = 100,
) -> np.ndarray:
    """Principal point that also has a unique best representative in every
    template orbit."""
    orbits = [orbit_of(bank.group, z, tol) for z in bank.templates]
    for _ in range(max_tries):
        x = rng.standard_normal(bank.dim)
        if is_principal(bank.group, x, tol) and all(in_Q(o, x, tol) for o in orbits):
            return x
    raise NotNicePoint(f"no nice point found in {max_tries} Gaussian draws")


@dataclass(frozen=True)
class SSet:
    """Orbit points of y whose open cells meet V_x, with LP witnesses."""

    base_x: np.ndarray
    base_y: np.ndarray
    members: np.ndarray
    witnesses: np.ndarray

    @property
    def size(self) -> int:
        return self.members.shape[0]


def s_set(group: FiniteGroup, x, y, tol: TolerancePolicy = DEFAULT_TOL) -> SSet:
    """S(x, y) = {q in [y] : V_q meets V_x}, in canonical orbit order."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for name, pt in (("x", x), ("y", y)):
        if not is_principal(group, pt, tol):
            warnings.warn(f"s_set: {name} is not principal; result may be degenerate",
                          stacklevel=2)
    orbit_x = orbit_of(group, x, tol)
    orbit_y = orbit_of(group, y, tol)
    cell_x = VoronoiCellSpec(center=x, orbit=orbit_x)
    members, witnesses = [], []
    for q in orbit_y.points:
        cell_q = VoronoiCellSpec(center=q, orbit=orbit_y)
        result = strict_cones_feasible([cell_q, cell_x], tol)
        if result.feasible:
            members.append(q)
            witnesses.append(result.witness)
    return SSet(base_x=x.copy(), base_y=y.copy(),
                members=np.stack(members), witnesses=np.stack(witnesses))


@dataclass(frozen=True)
class ChoiceAssignment:
    """One admissible map template index -> member of S(x, y).

    member_index[i] indexes into the S-set; images[i] is the chosen
    orbit point of y for template i.
    """

    member_index: np.ndarray
    images: np.ndarray


@dataclass(frozen=True)
class ChoiceEnumeration:
    x: np.ndarray
    y: np.ndarray
    aligned: np.ndarray           # v_i(x), the unique best representative of [z_i]
    s: SSet
    assignments: tuple[ChoiceAssignment, ...]
    truncated: bool


def choice_assignments(
    bank: MaxFilterBank,
    x,
    y,
    tol: TolerancePolicy = DEFAULT_TOL,
    cap: int = 100_000,
) -> ChoiceEnumeration:
    """Enumerate F(x, y): maps f with f(i) in S(x, y) attaining the best
    score of v_i(x) against the orbit of y, up to a sample_tol tie.

    Requires x principal with a unique best representative in every
    template orbit; raises NotNicePoint otherwise.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    group = bank.group
    if not is_principal(group, x, tol):
        raise NotNicePoint("x is not principal")
    aligned = []
    for z in bank.templates:
        orb = orbit_of(group, z, tol)
        if not in_Q(orb, x, tol):
            raise NotNicePoint("x has a tied best representative for a template orbit")
        aligned.append(orb.points[int(np.argmax(orb.points @ x))])
    aligned = np.stack(aligned)

    s = s_set(group, x, y, tol)
    orbit_y = orbit_of(group, y, tol)
    candidates: list[list[int]] = []
    for v in aligned:
        best = float((orbit_y.points @ v).max())
        cand = [k for k, q in enumerate(s.members) if float(q @ v) >= best - tol.sample_tol]
        if not cand:
            raise NotNicePoint("no S-set member attains the best score for a template")
        candidates.append(cand)

    assignments: list[ChoiceAssignment] = []
    truncated = False
    for combo in itertools.product(*candidates):
        if len(assignments) >= cap:
            truncated = True
            break
        idx = np.array(combo, dtype=int)
        assignments.append(ChoiceAssignment(member_index=idx, images=s.members[idx]))
    return ChoiceEnumeration(x=x.copy(), y=y.copy(), aligned=aligned, s=s,
                             assignments=tuple(assignments), truncated=truncated)


# stage tag separating the chi sampling stream from other seeded stages
_CHI_STREAM = 211


@dataclass(frozen=True)
class ChiEstimate:
    """Sampled lower bound for chi(G) = max |S(x, y)| over principal pairs."""

    chi_lower: int
    saturated: bool
    witness_x: np.ndarray
    witness_y: np.ndarray
    n_samples: int
    seed: int
    sizes: np.ndarray


def voronoi_characteristic(
    group: FiniteGroup,
    n_samples: int,
    seed: int,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> ChiEstimate:
    """Monte Carlo lower bound on chi(G) over seeded Gaussian principal
    pairs.  Sample k is driven by default_rng((seed, tag, k)), so prefixes
    of the sample stream agree across different n_samples.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    best = 0
    wx = wy = None
    sizes = np.zeros(n_samples, dtype=int)
    for k in range(n_samples):
        rng = np.random.default_rng((seed, _CHI_STREAM, k))
        x = sample_principal(group, rng, tol)
        y = sample_principal(group, rng, tol)
        sizes[k] = s_set(group, x, y, tol).size
        if sizes[k] > best:
            best, wx, wy = int(sizes[k]), x, y
    return ChiEstimate(chi_lower=best, saturated=(best == group.order),
                       witness_x=wx, witness_y=wy, n_samples=n_samples, seed=seed,
                       sizes=sizes)
