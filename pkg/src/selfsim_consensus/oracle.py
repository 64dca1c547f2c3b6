"""Brute-force ground truth for small graphs.

Dense symmetric eigendecomposition of ``L = D - A`` and an independent
Kirchhoff index from pairwise effective resistances.  Only for graphs up to
the dense budget (3000 vertices by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import check_agreement
from .graphs import DEFAULT_DENSE_BUDGET, Graph, GraphSpec, laplacian_dense

__all__ = [
    "ZERO_SNAP",
    "OracleResult",
    "eig_all",
    "kirchhoff_via_pinv",
    "largest",
    "resistance_matrix",
    "second_smallest",
]

# the smallest spectral gap at oracle scale is > 1e-4, so this cannot eat a real eigenvalue
ZERO_SNAP = 1e-9


@dataclass(frozen=True, eq=False)
class OracleResult:
    eigenvalues: np.ndarray
    lambda_sum: float
    lambda_sq_sum: float
    kirchhoff: float
    source_spec: GraphSpec


def eig_all(g: Graph, budget: int = DEFAULT_DENSE_BUDGET) -> OracleResult:
    """Full sorted spectrum of ``L`` with the zero eigenvalue snapped to exactly 0.

    Raises ``ValueError`` for a disconnected graph, whose reciprocal sums
    would be infinite.
    """
    lap = laplacian_dense(g, budget)
    if not np.array_equal(lap, lap.T):
        raise AssertionError("Laplacian is not symmetric")
    ev = np.linalg.eigvalsh(lap)
    ev[np.abs(ev) < ZERO_SNAP] = 0.0
    ev.sort()
    if len(ev) > 1 and ev[1] == 0.0:
        raise ValueError("Laplacian has a repeated zero eigenvalue: graph is disconnected")
    nz = ev[1:]
    lam = math.fsum((1.0 / nz).tolist())
    gam = math.fsum((1.0 / (nz * nz)).tolist())
    ev.setflags(write=False)
    return OracleResult(ev, lam, gam, g.num_vertices * lam, g.spec)


def second_smallest(g: Graph, budget: int = DEFAULT_DENSE_BUDGET) -> float:
    return float(eig_all(g, budget).eigenvalues[1])


def largest(g: Graph, budget: int = DEFAULT_DENSE_BUDGET) -> float:
    return float(eig_all(g, budget).eigenvalues[-1])


def resistance_matrix(g: Graph, budget: int = DEFAULT_DENSE_BUDGET) -> np.ndarray:
    """Effective resistances ``R[u, v] = P[u,u] + P[v,v] - 2 P[u,v]`` with ``P = L^+``.

    The pseudoinverse comes from ``(L + J/N)^{-1} - J/N`` (``J`` all ones), an
    LU solve that never touches an eigensolver.
    """
    lap = laplacian_dense(g, budget)
    N = g.num_vertices
    shift = np.full((N, N), 1.0 / N)
    pinv = np.linalg.inv(lap + shift) - shift
    d = np.diag(pinv)
    return d[:, None] + d[None, :] - 2.0 * pinv


def kirchhoff_via_pinv(g: Graph, budget: int = DEFAULT_DENSE_BUDGET, rel_tol: float = 1e-8) -> float:
    """Sum of effective resistances over unordered vertex pairs.

    Also computed spectrally as ``N * sum(1/lambda)``; the two must agree to
    ``rel_tol`` or :class:`RouteDisagreementError` is raised.
    """
    r = resistance_matrix(g, budget)
    iu = np.triu_indices(g.num_vertices, 1)
    kirch = math.fsum(r[iu].tolist())
    check_agreement("Kirchhoff index", kirch, eig_all(g, budget).kirchhoff, rel_tol)
    return kirch
