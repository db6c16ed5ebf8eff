"""Lipschitz bounds for max filter banks.

Four bounds are computed per bank: the exact upper constant over finite
groups (max spectral norm over jointly realizable tuples), the relaxed
upper constant (all tuples), a sampled estimate of the sharp lower
constant, and the certified pigeonhole lower constant alpha_tilde.
Closed-form distortion predictions for Gaussian templates and the two
optimality witness constructions round out the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, CaseMismatch, DomainError, NotNicePoint
from .filtering import MaxFilterBank, apply_bank, apply_bank_batch, max_filter_pairs, quotient_distance
from .groups import orbit_of
from .tolerances import DEFAULT_TOL, TolerancePolicy
from .voronoi import (
    VoronoiCellSpec,
    choice_assignments,
    sample_nice,
    strict_cones_feasible,
    voronoi_characteristic,
)

__all__ = [
    "UpperBound",
    "AlphaSharp",
    "EmpiricalLipschitz",
    "DistortionBoundParams",
    "WitnessPair",
    "StabilityReport",
    "upper_bound_exact",
    "upper_bound_relaxed",
    "pair_lower_value",
    "lower_bound_sharp",
    "alpha_tilde",
    "empirical_lipschitz",
    "theoretical_sigma",
    "theoretical_distortion_bound",
    "optimality_witness",
    "compute_stability_report",
    "ordering_audit",
]

# fixed stage tags keep the seeded streams of different estimators disjoint
_ALPHA_STREAM = 311
_EMP_STREAM = 977
_WITNESS_STREAM = 541


def _sigma_max(cols: np.ndarray) -> float:
    """Largest singular value of a d x n matrix given as columns."""
    return float(np.linalg.svd(cols, compute_uv=False)[0])


def _lam_min(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(M)[0])


def _lam_min_batch(S: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of a batch of symmetric (N, d, d) matrices."""
    d = S.shape[-1]
    if d == 1:
        return S[:, 0, 0]
    if d == 2:
        a, b, c = S[:, 0, 0], S[:, 0, 1], S[:, 1, 1]
        half = 0.5 * (a + c)
        return half - np.sqrt((0.5 * (a - c)) ** 2 + b * b)
    return np.linalg.eigvalsh(S)[:, 0]


# ---------------------------------------------------------------------------
# upper bounds


@dataclass(frozen=True)
class UpperBound:
    beta: float
    argmax_tuple: tuple[int, ...]   # one group-element index per template
    lp_solves: int
    feasible_tuples: int


def upper_bound_exact(
    bank: MaxFilterBank,
    tol: TolerancePolicy = DEFAULT_TOL,
    max_lp_solves: int = 500_000,
) -> UpperBound:
    """Max of |{g_i z_i}|_2->2 over tuples whose open cells intersect.

    Depth-first search over per-template orbit points; a partial tuple is
    extended only while its cells are jointly feasible, which is safe
    because adding a cell only shrinks the intersection.  One template is
    pinned to a single orbit point: left-multiplying a whole tuple by any
    group element maps feasible tuples to feasible tuples and preserves
    the spectral norm.
    """
    group = bank.group
    n = bank.n_templates
    orbits = [orbit_of(group, z, tol) for z in bank.templates]
    cells = [[VoronoiCellSpec(center=p, orbit=orb) for p in orb.points] for orb in orbits]
    pin = int(np.argmax([orb.size for orb in orbits]))
    visit = [pin] + [i for i in range(n) if i != pin]

    best = -math.inf
    best_choice: dict[int, int] | None = None
    solves = 0
    leaves = 0

    def extend(pos: int, cur_cells: list, choice: dict[int, int]) -> None:
        nonlocal best, best_choice, solves, leaves
        if pos == n:
            leaves += 1
            cols = np.stack([orbits[t].points[c] for t, c in choice.items()], axis=1)
            sigma = _sigma_max(cols)
            if sigma > best:
                best = sigma
                best_choice = dict(choice)
            return
        t = visit[pos]
        candidates = range(1) if pos == 0 else range(orbits[t].size)
        for c in candidates:
            if solves >= max_lp_solves:
                raise BudgetExceeded("upper_bound_exact LP budget exhausted",
                                     partial=None if best == -math.inf else best)
            solves += 1
            trial = cur_cells + [cells[t][c]]
            if strict_cones_feasible(trial, tol).feasible:
                choice[t] = c
                extend(pos + 1, trial, choice)
                del choice[t]

    extend(0, [], {})
    if best_choice is None:
        raise RuntimeError("no feasible tuple found; tolerances are inconsistent")
    elems = tuple(int(orbits[i].rep_elements[best_choice[i]]) for i in range(n))
    return UpperBound(beta=float(best), argmax_tuple=elems,
                      lp_solves=solves, feasible_tuples=leaves)


def upper_bound_relaxed(
    bank: MaxFilterBank,
    max_leaves: int = 2_000_000,
    tol: TolerancePolicy = DEFAULT_TOL,
    chunk: int = 4096,
) -> float:
    """Max spectral norm over ALL tuples, no cell-feasibility filter.

    Same pinning symmetry as the exact search; enumeration is vectorized
    over chunks of the remaining index product.
    """
    orbits = [orbit_of(bank.group, z, tol) for z in bank.templates]
    pin = int(np.argmax([orb.size for orb in orbits]))
    sizes = [1 if i == pin else orbits[i].size for i in range(len(orbits))]
    total = int(np.prod(sizes))
    best = -math.inf
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        if hi > max_leaves:
            raise BudgetExceeded("upper_bound_relaxed tuple budget exhausted",
                                 partial=None if best == -math.inf else best)
        idx = np.unravel_index(np.arange(lo, hi), sizes)
        cols = np.stack([orbits[i].points[idx[i]] for i in range(len(orbits))], axis=2)
        best = max(best, float(np.linalg.svd(cols, compute_uv=False)[:, 0].max()))
    return float(best)


# ---------------------------------------------------------------------------
# lower bounds


def pair_lower_value(
    bank: MaxFilterBank,
    x,
    y,
    tol: TolerancePolicy = DEFAULT_TOL,
    cap: int = 100_000,
) -> float:
    """Inner value of the sharp lower bound at one nice pair:
    max over admissible assignments f of
    sqrt( sum over S-members w of lambda_min( sum_{i in f^-1(w)} v_i v_i^T ) ).
    """
    enum = choice_assignments(bank, x, y, tol, cap)
    best = -math.inf
    for a in enum.assignments:
        total = 0.0
        for w in np.unique(a.member_index):
            V = enum.aligned[a.member_index == w]
            total += _lam_min(V.T @ V)
        best = max(best, total)
    return float(math.sqrt(max(best, 0.0)))


@dataclass(frozen=True)
class AlphaSharp:
    alpha: float
    witness_x: np.ndarray
    witness_y: np.ndarray
    n_pairs: int
    seed: int


def lower_bound_sharp(
    bank: MaxFilterBank,
    n_pairs: int,
    seed: int,
    tol: TolerancePolicy = DEFAULT_TOL,
    cap: int = 100_000,
    max_attempts: int = 10,
) -> AlphaSharp:
    """Sampled estimate of the sharp lower constant: min of pair_lower_value
    over seeded Gaussian nice pairs.  An upper estimate of the true inf;
    the certified lower bound is alpha_tilde.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    best = math.inf
    wx = wy = None
    for k in range(n_pairs):
        val = None
        for attempt in range(max_attempts):
            rng = np.random.default_rng((seed, _ALPHA_STREAM, k, attempt))
            try:
                x = sample_nice(bank, rng, tol)
                y = sample_nice(bank, rng, tol)
                val = pair_lower_value(bank, x, y, tol, cap)
                break
            except NotNicePoint:
                continue
        if val is None:
            raise NotNicePoint(f"pair {k}: no nice pair found in {max_attempts} attempts")
        if val < best:
            best, wx, wy = val, x, y
    return AlphaSharp(alpha=float(best), witness_x=wx, witness_y=wy,
                      n_pairs=n_pairs, seed=seed)


def alpha_tilde(
    bank: MaxFilterBank,
    chi: int,
    budget: int = 30_000_000,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> float:
    """Pigeonhole lower bound: exact min of sqrt(lambda_min) of
    sum_{i in I} (g_i z_i)(g_i z_i)^T over subsets of size ceil(n/chi)
    and all assignments.  Larger subsets cannot do better since
    lambda_min is superadditive over PSD sums.

    Assignments are deduplicated by the rank-1 summand they induce
    (p and -p agree), and the subset search shares partial-sum tensors
    along combination prefixes, pruning branches whose partial
    lambda_min already meets the incumbent (adding PSD terms never
    lowers lambda_min).
    """
    if chi < 1:
        raise ValueError("chi must be >= 1")
    n, d = bank.n_templates, bank.dim
    k = math.ceil(n / chi)
    if k <= d - 1:
        return 0.0

    outers: list[np.ndarray] = []
    for z in bank.templates:
        orb = orbit_of(bank.group, z, tol)
        reps: list[np.ndarray] = []
        for p in orb.points:
            thresh = tol.eq_tol * (1.0 + float(np.linalg.norm(p)))
            if not any(np.linalg.norm(p + q) <= thresh for q in reps):
                reps.append(p)
        R = np.stack(reps)
        outers.append(np.einsum("rd,re->rde", R, R))

    best = math.inf
    used = 0

    def descend(start: int, left: int, partial: np.ndarray) -> None:
        nonlocal best, used
        if used + partial.shape[0] > budget:
            raise BudgetExceeded(
                "alpha_tilde assignment budget exhausted",
                partial=None if best == math.inf else float(math.sqrt(max(best, 0.0))))
        used += partial.shape[0]
        lam = _lam_min_batch(partial)
        if left == 0:
            low = float(lam.min())
            if low < best:
                best = low
            return
        live = partial[lam < best] if best < math.inf else partial
        if live.shape[0] == 0:
            return
        for nxt in range(start, n - left + 1):
            child = (live[:, None, :, :] + outers[nxt][None, :, :, :]).reshape(-1, d, d)
            descend(nxt + 1, left - 1, child)

    descend(0, k, np.zeros((1, d, d)))
    return float(math.sqrt(max(best, 0.0)))


@dataclass(frozen=True)
class EmpiricalLipschitz:
    alpha_emp: float
    beta_emp: float
    min_pair: np.ndarray       # (2, d): the pair attaining the min ratio
    max_pair: np.ndarray
    ratios: np.ndarray
    distances: np.ndarray
    image_distances: np.ndarray


def empirical_lipschitz(
    bank: MaxFilterBank,
    n_pairs: int,
    seed: int,
    min_separation: float = 1e-6,
    batch: int = 1024,
    stream: int = 0,
) -> EmpiricalLipschitz:
    """Min and max of |Phi x - Phi y| / d([x],[y]) over seeded Gaussian
    pairs; pairs closer than min_separation in the quotient are rejected
    to avoid ratio instability near the diagonal.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    group, d = bank.group, bank.dim
    rng = np.random.default_rng((seed, _EMP_STREAM, stream))
    Xs, Ys, dist_all, dphi_all = [], [], [], []
    collected = 0
    while collected < n_pairs:
        b = max(batch, 2 * (n_pairs - collected))
        X = rng.standard_normal((b, d))
        Y = rng.standard_normal((b, d))
        rad = (X * X).sum(axis=1) + (Y * Y).sum(axis=1) - 2.0 * max_filter_pairs(group, X, Y)
        dist = np.sqrt(np.maximum(rad, 0.0))
        keep = dist > min_separation
        X, Y, dist = X[keep], Y[keep], dist[keep]
        dphi = np.linalg.norm(apply_bank_batch(bank, X) - apply_bank_batch(bank, Y), axis=1)
        Xs.append(X); Ys.append(Y); dist_all.append(dist); dphi_all.append(dphi)
        collected += X.shape[0]
    X = np.concatenate(Xs)[:n_pairs]
    Y = np.concatenate(Ys)[:n_pairs]
    dist = np.concatenate(dist_all)[:n_pairs]
    dphi = np.concatenate(dphi_all)[:n_pairs]
    ratios = dphi / dist
    lo, hi = int(np.argmin(ratios)), int(np.argmax(ratios))
    return EmpiricalLipschitz(
        alpha_emp=float(ratios[lo]), beta_emp=float(ratios[hi]),
        min_pair=np.stack([X[lo], Y[lo]]), max_pair=np.stack([X[hi], Y[hi]]),
        ratios=ratios, distances=dist, image_distances=dphi)


# ---------------------------------------------------------------------------
# closed-form distortion predictions for Gaussian templates


def theoretical_sigma(ell: int, lam: float, t: float) -> float:
    """(1/sqrt(e)) (1 - 1/lam) (1/(2(2+sqrt(2)) sqrt(e) lam))^{1/(lam-1)}
    (1/sqrt(t))^{1/(lam-1)} e^{-t lam/(lam-1)} sqrt(ell)."""
    if lam <= 1:
        raise DomainError("lam must exceed 1")
    if t < 1:
        raise DomainError("t must be >= 1")
    if ell < 1:
        raise DomainError("ell must be >= 1")
    expo = 1.0 / (lam - 1.0)
    return (
        (1.0 / math.sqrt(math.e))
        * (1.0 - 1.0 / lam)
        * (1.0 / (2.0 * (2.0 + math.sqrt(2.0)) * math.sqrt(math.e) * lam)) ** expo
        * (1.0 / math.sqrt(t)) ** expo
        * math.exp(-t * lam / (lam - 1.0))
        * math.sqrt(ell)
    )


@dataclass(frozen=True)
class DistortionBoundParams:
    """Inputs of the random-template distortion bound.  lam = n/(chi d)
    must dominate the reference level lambda0 > 1; the constants C and c
    are closed forms with no free knobs."""

    m: int          # group order
    chi: int
    d: int
    n: int
    lambda0: float

    def __post_init__(self):
        if self.m < 1 or self.chi < 1 or self.d < 1 or self.n < 1:
            raise DomainError("m, chi, d, n must all be >= 1")
        if self.lambda0 <= 1:
            raise DomainError("lambda0 must exceed 1")

    @property
    def lam(self) -> float:
        return self.n / (self.chi * self.d)

    @property
    def C(self) -> float:
        return 4.0 * math.e ** 1.5

    @property
    def c(self) -> float:
        return 2.0 + (math.sqrt(self.lambda0) + 2.0) / (self.lambda0 - 1.0)

    @property
    def success_probability(self) -> float:
        return 1.0 - 3.0 * math.exp(-self.d * math.sqrt(self.lam))


def theoretical_distortion_bound(params: DistortionBoundParams) -> float:
    """(C chi^{3/2} m log^{1/2}(e m))^{1 + c/sqrt(lam)}."""
    if params.lam < params.lambda0:
        raise DomainError(f"lam = {params.lam:.6g} below lambda0 = {params.lambda0:.6g}")
    base = params.C * params.chi ** 1.5 * params.m * math.sqrt(math.log(math.e * params.m))
    return base ** (1.0 + params.c / math.sqrt(params.lam))


# ---------------------------------------------------------------------------
# optimality witnesses


@dataclass(frozen=True)
class WitnessPair:
    x: np.ndarray
    y: np.ndarray
    achieved_ratio: float
    target_alpha: float
    case: str


def _pm_id_witness(bank: MaxFilterBank) -> WitnessPair:
    """Best partition I | J of the templates; x = u + v, y = u - v with u, v
    unit bottom eigenvectors of the two partial Gram sums."""
    Z = bank.templates
    n, d = Z.shape
    if n > 22:
        raise BudgetExceeded("pm_id witness enumerates 2^n partitions; n too large")
    best = (math.inf, None)
    for mask in range(2 ** n):
        sel = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        A = Z[sel].T @ Z[sel] if sel.any() else np.zeros((d, d))
        B = Z[~sel].T @ Z[~sel] if (~sel).any() else np.zeros((d, d))
        val = _lam_min(A) + _lam_min(B)
        if val < best[0]:
            best = (val, (A, B))
    delta_sq, (A, B) = best
    u = np.linalg.eigh(A)[1][:, 0]
    v = np.linalg.eigh(B)[1][:, 0]
    x, y = u + v, u - v
    target = math.sqrt(max(delta_sq, 0.0))
    dq = quotient_distance(bank.group, x, y)
    dphi = float(np.linalg.norm(apply_bank(bank, x) - apply_bank(bank, y)))
    return WitnessPair(x=x, y=y, achieved_ratio=dphi / dq, target_alpha=target, case="pm_id")


def _reflection_witness(bank: MaxFilterBank, tol: TolerancePolicy, seed: int) -> WitnessPair:
    """x in an open chamber aligned with every template, y = x + t v for a
    bottom eigenvector v of sum v_i v_i^T and t small enough to stay in V_x."""
    group = bank.group
    rng = np.random.default_rng((seed, _WITNESS_STREAM))
    x = sample_nice(bank, rng, tol)
    aligned = []
    for z in bank.templates:
        orb = orbit_of(group, z, tol)
        aligned.append(orb.points[int(np.argmax(orb.points @ x))])
    V = np.stack(aligned)
    M = V.T @ V
    lam, vecs = np.linalg.eigh(M)
    bottom = vecs[:, 0]
    target = math.sqrt(max(float(lam[0]), 0.0))

    cell = VoronoiCellSpec(center=x, orbit=orbit_of(group, x, tol))
    rows = cell.rows
    a = rows @ x
    b = rows @ bottom
    neg = b < 0
    t = 0.5 * float((a[neg] / -b[neg]).min()) if neg.any() else 0.5 * float(np.linalg.norm(x))
    for _ in range(60):
        if cell.contains(x + t * bottom, tol):
            break
        t *= 0.5
    else:
        raise NotNicePoint("could not place the witness inside the open cell")
    y = x + t * bottom
    dq = quotient_distance(group, x, y)
    dphi = float(np.linalg.norm(apply_bank(bank, x) - apply_bank(bank, y)))
    return WitnessPair(x=x, y=y, achieved_ratio=dphi / dq, target_alpha=target, case="reflection")


def optimality_witness(
    bank: MaxFilterBank,
    case: str,
    tol: TolerancePolicy = DEFAULT_TOL,
    seed: int = 0,
    chi_samples: int = 100,
) -> WitnessPair:
    """Construct a pair whose ratio attains the case's closed-form sharp
    lower constant: 'pm_id' for G = {+I, -I}, 'reflection' for groups
    certified as reflection groups by chi sampling."""
    group = bank.group
    if case == "pm_id":
        eye = np.eye(group.dim)
        if group.order != 2 or not group.contains(-eye, tol) or not group.contains(eye, tol):
            raise CaseMismatch("pm_id witness requires the group {+I, -I}")
        return _pm_id_witness(bank)
    if case == "reflection":
        est = voronoi_characteristic(group, chi_samples, seed=seed, tol=tol)
        if est.chi_lower != 1:
            raise CaseMismatch(
                f"reflection witness requires chi = 1; sampling found {est.chi_lower}")
        return _reflection_witness(bank, tol, seed)
    raise CaseMismatch(f"unknown witness case {case!r}")


# ---------------------------------------------------------------------------
# consolidated report


@dataclass(frozen=True)
class StabilityReport:
    beta_exact: float
    beta_relaxed: float
    alpha_sharp: float
    alpha_tilde: float
    alpha_empirical: float
    beta_empirical: float
    kappa_certified: float
    kappa_empirical: float
    witnesses: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "beta_exact": self.beta_exact,
            "beta_relaxed": self.beta_relaxed,
            "alpha_sharp": self.alpha_sharp,
            "alpha_tilde": self.alpha_tilde,
            "alpha_empirical": self.alpha_empirical,
            "beta_empirical": self.beta_empirical,
            "kappa_certified": self.kappa_certified,
            "kappa_empirical": self.kappa_empirical,
            "witnesses": self.witnesses,
            "provenance": self.provenance,
        }


def ordering_audit(report: StabilityReport, slack: float = 1e-7) -> list[tuple[str, bool, float, float]]:
    """The chain alpha_tilde <= alpha_sharp <= alpha_empirical <=
    beta_empirical <= beta_exact <= beta_relaxed, each step with slack."""
    chain = [
        ("alpha_tilde_le_alpha_sharp", report.alpha_tilde, report.alpha_sharp),
        ("alpha_sharp_le_alpha_empirical", report.alpha_sharp, report.alpha_empirical),
        ("alpha_empirical_le_beta_empirical", report.alpha_empirical, report.beta_empirical),
        ("beta_empirical_le_beta_exact", report.beta_empirical, report.beta_exact),
        ("beta_exact_le_beta_relaxed", report.beta_exact, report.beta_relaxed),
    ]
    out = [(name, bool(lhs <= rhs + slack), float(lhs), float(rhs)) for name, lhs, rhs in chain]
    nonneg = all(v >= 0 for v in (report.beta_exact, report.beta_relaxed, report.alpha_sharp,
                                  report.alpha_tilde, report.alpha_empirical, report.beta_empirical))
    out.append(("all_fields_nonnegative", nonneg, 0.0, 0.0))
    return out


def compute_stability_report(
    bank: MaxFilterBank,
    chi: int,
    n_pairs: int = 200,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
    lp_budget: int = 500_000,
    tuple_budget: int = 2_000_000,
    subset_budget: int = 30_000_000,
    assignment_cap: int = 100_000,
    alpha_pairs: int | None = None,
) -> tuple[StabilityReport, EmpiricalLipschitz]:
    """All bounds for one bank, plus the raw empirical sample so callers
    can dump per-pair ratios without recomputation.  Budget misses do not
    raise here; they are recorded as certified=False flags with the
    partial values."""
    flags = {"beta_exact_certified": True, "beta_relaxed_certified": True,
             "alpha_tilde_certified": True}
    argmax_tuple: tuple[int, ...] | None = None
    try:
        ub = upper_bound_exact(bank, tol, max_lp_solves=lp_budget)
        beta_exact, argmax_tuple = ub.beta, ub.argmax_tuple
    except BudgetExceeded as e:
        beta_exact = e.partial if e.partial is not None else math.nan
        flags["beta_exact_certified"] = False
    try:
        beta_relaxed = upper_bound_relaxed(bank, max_leaves=tuple_budget, tol=tol)
    except BudgetExceeded as e:
        beta_relaxed = e.partial if e.partial is not None else math.nan
        flags["beta_relaxed_certified"] = False
    try:
        a_tilde = alpha_tilde(bank, chi, budget=subset_budget, tol=tol)
    except BudgetExceeded as e:
        a_tilde = e.partial if e.partial is not None else math.nan
        flags["alpha_tilde_certified"] = False

    a_pairs = alpha_pairs if alpha_pairs is not None else min(n_pairs, 200)
    sharp = lower_bound_sharp(bank, a_pairs, seed=seed, tol=tol, cap=assignment_cap)
    emp = empirical_lipschitz(bank, n_pairs, seed=seed)

    kappa_certified = math.inf if a_tilde == 0 else beta_exact / a_tilde
    kappa_empirical = math.inf if emp.alpha_emp == 0 else emp.beta_emp / emp.alpha_emp
    witnesses = {
        "alpha_sharp_pair": [sharp.witness_x.tolist(), sharp.witness_y.tolist()],
        "alpha_empirical_pair": emp.min_pair.tolist(),
        "beta_empirical_pair": emp.max_pair.tolist(),
    }
    provenance = {
        "seed": seed,
        "n_pairs": n_pairs,
        "alpha_pairs": a_pairs,
        "chi": chi,
        "budgets": {"lp": lp_budget, "tuples": tuple_budget,
                    "assignments": subset_budget, "choice_cap": assignment_cap},
        "beta_argmax_tuple": list(argmax_tuple) if argmax_tuple is not None else None,
        **flags,
    }
    return StabilityReport(
        beta_exact=float(beta_exact), beta_relaxed=float(beta_relaxed),
        alpha_sharp=float(sharp.alpha), alpha_tilde=float(a_tilde),
        alpha_empirical=float(emp.alpha_emp), beta_empirical=float(emp.beta_emp),
        kappa_certified=float(kappa_certified), kappa_empirical=float(kappa_empirical),
        witnesses=witnesses, provenance=provenance), emp
