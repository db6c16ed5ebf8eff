"""Max filtering and the induced quotient metric.

The filter value of two orbits is max_g <g.x, y>; the quotient distance
follows by polarization:  d([x],[y])^2 = |x|^2 + |y|^2 - 2 max_g <g.x, y>.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LengthMismatch, NegativeRadicand
from .groups import FiniteGroup
from .tolerances import DEFAULT_TOL, TolerancePolicy

__all__ = [
    "FilterValue",
    "MaxFilterBank",
    "max_filter",
    "quotient_distance",
    "apply_bank",
    "apply_bank_batch",
    "max_filter_pairs",
    "max_filter_circular_fft",
    "max_filter_circular_brute",
    "save_templates",
    "load_templates",
]


class FilterValue(float):
    """A realized max-filter value.  Plain float with a named type; always
    at least the unrotated inner product of its arguments."""

    __slots__ = ()


@dataclass(frozen=True)
class MaxFilterBank:
    """Templates z_1..z_n (rows) filtered against a common group."""

    group: FiniteGroup
    templates: np.ndarray

    def __post_init__(self):
        Z = np.asarray(self.templates, dtype=float)
        if Z.ndim != 2:
            raise ValueError(f"templates must be 2-D (n, d), got shape {Z.shape}")
        if Z.shape[0] < 1:
            raise ValueError("need at least one template")
        if Z.shape[1] != self.group.dim:
            raise ValueError(
                f"template dimension {Z.shape[1]} != group dimension {self.group.dim}")
        Z.setflags(write=False)
        object.__setattr__(self, "templates", Z)

    @property
    def n_templates(self) -> int:
        return self.templates.shape[0]

    @property
    def dim(self) -> int:
        return self.group.dim


def max_filter(group: FiniteGroup, x, y, allow_fft: bool = True) -> FilterValue:
    """max over g in G of <g.x, y>.

    Groups built by the circular_shifts constructor take the FFT route
    unless allow_fft=False; nothing is ever inferred from the matrices.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (group.dim,) or y.shape != (group.dim,):
        raise ValueError("x and y must be vectors of the group dimension")
    if allow_fft and group.family == "circular_shifts":
        return max_filter_circular_fft(x, y)
    return FilterValue(float((group.apply_all(x) @ y).max()))


def quotient_distance(group: FiniteGroup, x, y, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """min over g of |x - g.y|, computed by polarization."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    radicand = float(x @ x) + float(y @ y) - 2.0 * max_filter(group, x, y)
    if radicand < -tol.eq_tol:
        raise NegativeRadicand(
            f"polarization radicand {radicand:.3e} < -eq_tol; group data inconsistent")
    return float(np.sqrt(max(radicand, 0.0)))


def apply_bank(bank: MaxFilterBank, x) -> np.ndarray:
    """Bank image (max_filter(z_i, x))_i as an (n,) array.

    One pass: the group acts on x, every template is scored against the
    whole orbit at once.
    """
    return apply_bank_batch(bank, np.asarray(x, dtype=float)[None, :])[0]


def apply_bank_batch(bank: MaxFilterBank, X) -> np.ndarray:
    """Bank images for a batch of points, shape (batch, n)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != bank.dim:
        raise ValueError(f"expected batch shape (b, {bank.dim}), got {X.shape}")
    if bank.group.family == "circular_shifts":
        # cross-correlate every template with every point in one rfft block
        d = bank.dim
        F = np.fft.rfft(X, axis=1)                 # (b, d//2+1)
        Zf = np.fft.rfft(bank.templates, axis=1)   # (n, d//2+1)
        corr = np.fft.irfft(Zf[None, :, :] * np.conj(F)[:, None, :], n=d, axis=2)
        return corr.max(axis=2)
    images = np.einsum("gde,be->bgd", bank.group.stack, X)
    return np.einsum("bgd,nd->bgn", images, bank.templates).max(axis=1)


def max_filter_pairs(group: FiniteGroup, X, Y) -> np.ndarray:
    """Row-wise filter values max_g <g.x_b, y_b> for paired batches."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape or X.ndim != 2:
        raise ValueError("X and Y must be equal-shape (b, d) batches")
    images = np.einsum("gde,be->bgd", group.stack, X)
    return np.einsum("bgd,bd->bg", images, Y).max(axis=1)


# ---------------------------------------------------------------------------
# circular shifts via FFT


def _check_signals(f, g) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.ndim != 1 or g.ndim != 1:
        raise ValueError("signals must be 1-D")
    if f.shape[0] != g.shape[0]:
        raise LengthMismatch(f"signal lengths differ: {f.shape[0]} vs {g.shape[0]}")
    return f, g


def max_filter_circular_fft(f, g) -> FilterValue:
    """max over shifts a of sum_x f(x) g(x - a), length-d DFT, no padding."""
    f, g = _check_signals(f, g)
    d = f.shape[0]
    corr = np.fft.irfft(np.fft.rfft(f) * np.conj(np.fft.rfft(g)), n=d)
    return FilterValue(float(corr.max()))


def max_filter_circular_brute(f, g) -> FilterValue:
    """Shift-domain oracle for the FFT path: O(d^2) roll-and-dot."""
    f, g = _check_signals(f, g)
    d = f.shape[0]
    best = -np.inf
    for a in range(d):
        best = max(best, float(np.roll(f, a) @ g))
    return FilterValue(best)


# ---------------------------------------------------------------------------
# template files: CSV, one template per row


def save_templates(templates, path) -> None:
    Z = np.asarray(templates, dtype=float)
    np.savetxt(path, Z, delimiter=",", fmt="%.17g")


def load_templates(path) -> np.ndarray:
    Z = np.loadtxt(Path(path), delimiter=",", ndmin=2)
    return np.asarray(Z, dtype=float)
