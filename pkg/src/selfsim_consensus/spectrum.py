"""Full Laplacian spectra of H(n, k) and S(n, k) by recursive decimation.

Each nonzero eigenvalue of generation ``n - 1`` spawns two eigenvalues of
generation ``n`` as the roots of a quadratic; a handful of fixed eigenvalues
with known multiplicities fill up the rest.  Nothing is diagonalised.

Spectra are stored compressed: one entry per distinct (parent, branch), with
the parent multiplicity carried along.  The number of entries roughly doubles
per generation while ``k**n`` multiplies by ``k``, so generation 20 is cheap
even though the graph itself could never be built.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BudgetExceededError
from .graphs import Family, GraphSpec

__all__ = [
    "Branch",
    "DEFAULT_ENTRY_BUDGET",
    "SpectrumMultiset",
    "SpectrumSummary",
    "hierarchical_spectrum",
    "sierpinski_spectrum",
    "spectrum",
    "spectrum_summary",
]

logger = logging.getLogger(__name__)

DEFAULT_ENTRY_BUDGET = 1 << 22
# expanding a spectrum materialises k**n floats
DEFAULT_EXPAND_BUDGET = 20_000_000

IDENTITY_RTOL = 1e-12
ORDERING_TOL = 1e-9


class Branch:
    """Origin codes for spectrum entries; also the tie-break order."""

    ZERO = 0
    FIXED_K = 1  # eigenvalue k of the fixed block
    FIXED_K2 = 2  # eigenvalue k + 2 (Sierpinski only)
    MINUS = 3
    PLUS = 4


@dataclass(frozen=True, eq=False)
class SpectrumMultiset:
    """Sorted eigenvalue multiset.

    ``values[i]`` occurs ``multiplicities[i]`` times.  ``branch[i]`` and
    ``parent[i]`` record where the entry came from (``parent`` indexes the
    previous generation's entries, ``-1`` for fixed entries).
    """

    family: Family
    n: int
    k: int
    values: np.ndarray
    multiplicities: np.ndarray
    branch: np.ndarray
    parent: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    @property
    def total_multiplicity(self) -> int:
        return int(sum(int(m) for m in self.multiplicities))

    @property
    def trace(self) -> float:
        return math.fsum((self.values * self.multiplicities).tolist())

    def nonzero(self) -> tuple[np.ndarray, np.ndarray]:
        mask = self.branch != Branch.ZERO
        return self.values[mask], self.multiplicities[mask]

    def reciprocal_sums(self) -> tuple[float, float]:
        """``(sum 1/lambda, sum 1/lambda**2)`` over nonzero eigenvalues."""
        v, m = self.nonzero()
        return (
            math.fsum((m / v).tolist()),
            math.fsum((m / (v * v)).tolist()),
        )

    def multiplicity_of(self, branch: int) -> int:
        return int(self.multiplicities[self.branch == branch].sum())

    def expand(self, budget: int = DEFAULT_EXPAND_BUDGET) -> np.ndarray:
        total = self.total_multiplicity
        if total > budget:
            raise BudgetExceededError(f"expanding {total} eigenvalues exceeds budget {budget}")
        return np.repeat(self.values, self.multiplicities)

    def rows(self) -> list[tuple[float, int]]:
        return list(zip(self.values.tolist(), self.multiplicities.tolist()))


class SpectrumSummary(NamedTuple):
    min_nonzero: float
    max: float
    count: int
    trace: float


def spectrum_summary(s: SpectrumMultiset) -> SpectrumSummary:
    v, _ = s.nonzero()
    return SpectrumSummary(float(v.min()), float(s.values.max()), s.total_multiplicity, s.trace)


def expected_entries(family: Family, n: int) -> int:
    """Number of stored entries after ``n`` generations."""
    if n == 1:
        return 2
    if family is Family.HIERARCHICAL:
        return 2**n
    return 3 * 2 ** (n - 1) - 1


def _check_budget(family: Family, n: int, k: int, max_entries: int) -> None:
    GraphSpec(family, n, k)  # validates n and k
    entries = expected_entries(family, n)
    if entries > max_entries:
        raise BudgetExceededError(
            f"{family.short} spectrum at n={n} needs {entries} entries, budget is {max_entries}"
        )
    if k**n >= 2**63:
        raise BudgetExceededError(f"k**n = {k**n} overflows 64-bit multiplicities")


def _base(family: Family, k: int) -> SpectrumMultiset:
    return SpectrumMultiset(
        family,
        1,
        k,
        np.array([0.0, float(k)]),
        np.array([1, k - 1], dtype=np.int64),
        np.array([Branch.ZERO, Branch.FIXED_K], dtype=np.int8),
        np.array([-1, -1], dtype=np.int64),
    )


def _assemble(
    family: Family,
    n: int,
    k: int,
    fixed: list[tuple[float, int, int]],
    parents: np.ndarray,
    parent_mult: np.ndarray,
    parent_idx: np.ndarray,
    minus: np.ndarray,
    plus: np.ndarray,
) -> SpectrumMultiset:
    fv = np.array([f[0] for f in fixed])
    fm = np.array([f[1] for f in fixed], dtype=np.int64)
    fb = np.array([f[2] for f in fixed], dtype=np.int8)
    values = np.concatenate([fv, minus, plus])
    mult = np.concatenate([fm, parent_mult, parent_mult])
    branch = np.concatenate(
        [fb, np.full(len(minus), Branch.MINUS, np.int8), np.full(len(plus), Branch.PLUS, np.int8)]
    )
    parent = np.concatenate([np.full(len(fixed), -1, np.int64), parent_idx, parent_idx])
    # generation order is already (branch, parent); a stable sort keeps it for ties
    order = np.argsort(values, kind="stable")
    out = SpectrumMultiset(
        family, n, k, values[order], mult[order], branch[order], parent[order]
    )
    for arr in (out.values, out.multiplicities, out.branch, out.parent):
        arr.setflags(write=False)
    return out


def _check_children(parents, minus, plus, child_sum, quantity: str) -> None:
    bad_sum = np.abs(minus + plus - child_sum) > IDENTITY_RTOL * np.abs(child_sum)
    bad_prod = np.abs(minus * plus - parents) > IDENTITY_RTOL * np.abs(parents)
    if np.any(bad_sum) or np.any(bad_prod):
        raise ArithmeticError(f"{quantity}: child sum/product identity violated")


def hierarchical_spectrum(n: int, k: int, max_entries: int = DEFAULT_ENTRY_BUDGET) -> SpectrumMultiset:
    """Laplacian spectrum of H(n, k).

    Generation ``g`` keeps the single zero, adds eigenvalue ``k`` with
    multiplicity ``(k-2) k**(g-1) + 1`` and maps every nonzero parent ``p`` to
    the two roots of ``x**2 - (k + p) x + p = 0``, each inheriting the parent's
    multiplicity.  Minus-branch roots fall below ``k - 2`` and plus-branch roots
    above it; violations beyond ``1e-9`` are logged, not raised.
    """
    family = Family.HIERARCHICAL
    _check_budget(family, n, k, max_entries)
    spec = _base(family, k)
    for g in range(2, n + 1):
        mask = spec.branch != Branch.ZERO
        p = spec.values[mask]
        m = spec.multiplicities[mask]
        idx = np.flatnonzero(mask)
        s = k + p
        plus = 0.5 * (s + np.sqrt(s * s - 4.0 * p))
        minus = p / plus  # Vieta; avoids cancellation for small p
        _check_children(p, minus, plus, s, f"hierarchical n={g}")
        gap = k - 2
        if np.any(minus >= gap + ORDERING_TOL) or np.any(plus <= gap - ORDERING_TOL):
            logger.warning(
                "hierarchical n=%d k=%d: child ordering around k-2 violated "
                "(max minus %.17g, min plus %.17g)",
                g, k, minus.max(), plus.min(),
            )
        fixed = [(0.0, 1, Branch.ZERO), (float(k), (k - 2) * k ** (g - 1) + 1, Branch.FIXED_K)]
        spec = _assemble(family, g, k, fixed, p, m, idx, minus, plus)
    return spec


def sierpinski_spectrum(n: int, k: int, max_entries: int = DEFAULT_ENTRY_BUDGET) -> SpectrumMultiset:
    """Laplacian spectrum of S(n, k).

    For ``g >= 2``: eigenvalue ``k`` with multiplicity ``((k-2) k**(g-1) + k)/2``,
    eigenvalue ``k + 2`` with multiplicity ``(k-2)(k**(g-1) - 1)/2``, and every
    nonzero parent ``p`` yields the roots of ``x**2 - (k+2) x + p = 0``.
    """
    family = Family.SIERPINSKI
    _check_budget(family, n, k, max_entries)
    spec = _base(family, k)
    for g in range(2, n + 1):
        mask = spec.branch != Branch.ZERO
        p = spec.values[mask]
        m = spec.multiplicities[mask]
        idx = np.flatnonzero(mask)
        s = float(k + 2)
        disc = s * s - 4.0 * p
        if np.any(disc < 0):
            raise ArithmeticError(
                f"sierpinski n={g} k={k}: negative discriminant, parent above k+2"
            )
        plus = 0.5 * (s + np.sqrt(disc))
        minus = p / plus
        _check_children(p, minus, plus, np.full_like(p, s), f"sierpinski n={g}")
        fixed = [
            (0.0, 1, Branch.ZERO),
            (float(k), ((k - 2) * k ** (g - 1) + k) // 2, Branch.FIXED_K),
            (float(k + 2), (k - 2) * (k ** (g - 1) - 1) // 2, Branch.FIXED_K2),
        ]
        spec = _assemble(family, g, k, fixed, p, m, idx, minus, plus)
    return spec


def spectrum(family, n: int, k: int, max_entries: int = DEFAULT_ENTRY_BUDGET) -> SpectrumMultiset:
    family = Family.parse(family)
    if family is Family.HIERARCHICAL:
        return hierarchical_spectrum(n, k, max_entries)
    return sierpinski_spectrum(n, k, max_entries)
