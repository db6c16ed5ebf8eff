"""Positive-semidefiniteness audits for the max-filter kernel.

The similarity K(x, y) = max_g <g x, y> defines a kernel on orbit space.
This module builds Gram matrices of that kernel on finite point sets,
checks them for negative eigenvalues, and searches for certificates that
the kernel fails to be positive semidefinite.  For reflection groups
(chi == 1) no such certificate exists; for every other group a random
search finds one quickly at small dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CaseMismatch
from .filtering import max_filter
from .groups import FiniteGroup
from .tolerances import DEFAULT_TOL, TolerancePolicy
from .voronoi import voronoi_characteristic

# stage tag separating the psd search stream from other seeded stages
_PSD_STREAM = 613


@dataclass(frozen=True)
class GramAudit:
    """Eigenvalue audit of a max-filter Gram matrix.

    ``coeffs`` is the unit eigenvector attaining ``min_eig``; when the
    verdict is "not_psd" it certifies sum_ij c_i c_j K(x_i, x_j) < 0.
    """

    points: np.ndarray
    gram: np.ndarray
    min_eig: float
    verdict: str
    coeffs: np.ndarray

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "gram": self.gram.tolist(),
            "min_eig": self.min_eig,
            "verdict": self.verdict,
            "coeffs": self.coeffs.tolist(),
        }


def gram_matrix(group: FiniteGroup, points: np.ndarray) -> np.ndarray:
    """Pairwise max-filter similarities, symmetrized.

    Entry (i, j) is max_g <g x_i, x_j>.  The max filter is symmetric in
    its arguments, so averaging with the transpose only removes float
    noise from the two evaluation orders.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2:
        raise ValueError("points must be a 2d array (k, dim)")
    if X.shape[1] != group.dim:
        raise ValueError(
            f"points have dim {X.shape[1]}, group acts on dim {group.dim}")
    moved = np.einsum("gde,ke->kgd", group.stack, X)
    gram = np.einsum("kgd,ld->kgl", moved, X).max(axis=1)
    return 0.5 * (gram + gram.T)


def gram_audit(
    group: FiniteGroup,
    points: np.ndarray,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> GramAudit:
    """Audit the max-filter Gram matrix of a point set.

    Verdict is "not_psd" exactly when the smallest eigenvalue drops below
    -psd_tol * (1 + max diagonal entry); otherwise "psd".  Accepts any
    point set with at least one row (a single point always audits psd).
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("need at least one point")
    gram = gram_matrix(group, X)
    eigvals, eigvecs = np.linalg.eigh(gram)
    min_eig = float(eigvals[0])
    scale = 1.0 + float(np.max(np.diag(gram))) if gram.size else 1.0
    verdict = "not_psd" if min_eig < -tol.psd_tol * scale else "psd"
    return GramAudit(points=X.copy(), gram=gram, min_eig=min_eig,
                     verdict=verdict, coeffs=eigvecs[:, 0].copy())


def direct_quadratic_form(
    group: FiniteGroup,
    points: np.ndarray,
    coeffs: np.ndarray,
) -> float:
    """sum_ij c_i c_j K(x_i, x_j) evaluated entry by entry.

    Independent of the batched Gram construction: each kernel value goes
    through the scalar max_filter on the matrix path.  Used to re-verify
    negativity certificates.
    """
    X = np.asarray(points, dtype=float)
    c = np.asarray(coeffs, dtype=float)
    if X.shape[0] != c.shape[0]:
        raise ValueError("one coefficient per point required")
    total = 0.0
    for i in range(X.shape[0]):
        for j in range(X.shape[0]):
            total += c[i] * c[j] * max_filter(group, X[i], X[j], allow_fft=False)
    return total


@dataclass(frozen=True)
class PsdSearchResult:
    """Outcome of a random search for a non-psd Gram matrix."""

    found: bool
    certificate: GramAudit | None
    trials_run: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "certificate": None if self.certificate is None
            else self.certificate.to_dict(),
            "trials_run": self.trials_run,
            "seed": self.seed,
        }


def search_psd_violation(
    group: FiniteGroup,
    dim: int,
    n_trials: int,
    points_per_trial: int,
    seed: int,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> PsdSearchResult:
    """Search Gaussian point sets for a Gram matrix with a negative eigenvalue.

    Trial t draws from default_rng((seed, tag, t)), so results are
    reproducible and prefix-stable in n_trials.  Stops at the first
    certificate.
    """
    if dim != group.dim:
        raise CaseMismatch(f"group acts on dim {group.dim}, requested {dim}")
    if n_trials < 1 or points_per_trial < 1:
        raise ValueError("n_trials and points_per_trial must be >= 1")
    for trial in range(n_trials):
        rng = np.random.default_rng((seed, _PSD_STREAM, trial))
        X = rng.standard_normal((points_per_trial, dim))
        audit = gram_audit(group, X, tol)
        if audit.verdict == "not_psd":
            return PsdSearchResult(found=True, certificate=audit,
                                   trials_run=trial + 1, seed=seed)
    return PsdSearchResult(found=False, certificate=None,
                           trials_run=n_trials, seed=seed)


def is_reflection_group(
    group: FiniteGroup,
    n_samples: int,
    seed: int,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> bool:
    """Sampled test for the reflection-group property via chi(G) == 1.

    chi == 1 means generic Voronoi cells meet only one cell per orbit,
    which happens exactly when the cell decomposition comes from mirror
    hyperplanes.  A sampled chi of 1 is a statistical verdict: larger
    n_samples makes a false positive less likely.
    """
    est = voronoi_characteristic(group, n_samples, seed, tol)
    return est.chi_lower == 1
