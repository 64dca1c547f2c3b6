"""Consensus performance metrics for H(n, k) and S(n, k).

Convergence speed is governed by the smallest nonzero Laplacian eigenvalue
(``epsilon``), delay robustness by the largest (``zeta``), and first/second
order coherence by ``sum 1/lambda`` and ``sum 1/lambda**2`` over the nonzero
spectrum.  Every quantity here is available through up to three routes that
check each other:

* a closed form in ``n`` and ``k``,
* a scalar recursion over generations,
* direct summation over :mod:`selfsim_consensus.spectrum`.

Naming: ``lambda_sum`` / ``lambda_sq_sum`` are the two reciprocal sums for
either family (``Lambda``/``Gamma`` for hierarchical graphs, ``Theta``/``Omega``
for Sierpinski graphs in the usual notation).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import check_agreement
from .graphs import Family, GraphSpec
from .spectrum import DEFAULT_ENTRY_BUDGET, expected_entries, spectrum

__all__ = [
    "GammaVariant",
    "Method",
    "MetricsReport",
    "ANALYTIC_RTOL",
    "SPECTRUM_RTOL",
    "epsilon_asymptotic",
    "epsilon_recursive",
    "full_report",
    "gamma_closed",
    "gamma_recursive",
    "h1_asymptotic",
    "h1_hierarchical",
    "h1_sierpinski",
    "h2_asymptotic",
    "h2_hierarchical",
    "h2_sierpinski",
    "kirchhoff_and_hitting",
    "lambda_sum_closed",
    "lambda_sum_recursive",
    "omega_closed",
    "omega_recursive",
    "reciprocal_sums",
    "tau_max",
    "theta_closed",
    "theta_recursive",
    "zeta",
    "zeta_asymptotic",
]

ANALYTIC_RTOL = 1e-10
SPECTRUM_RTOL = 1e-9
SPECTRUM_SQ_RTOL = 1e-8
ORACLE_RTOL = 1e-7
# spectrum-sum cross-checks in full_report stop here; past it the sums are slow
SPECTRUM_CHECK_MAX_N = 14


class Method(str, enum.Enum):
    RECURSION = "recursion"
    CLOSED_FORM = "closed-form"
    SPECTRUM_SUM = "spectrum-sum"
    ORACLE = "oracle"


def _family(family) -> Family:
    return Family.parse(family)


# -- extreme eigenvalues ---------------------------------------------------------

def _minus_root(b: float, c: float) -> float:
    """Smaller root of ``x**2 - b x + c`` for ``b > 0``, computed without cancellation."""
    return 2.0 * c / (b + math.sqrt(b * b - 4.0 * c))


def epsilon_recursive(family, n: int, k: int) -> float:
    """Second-smallest Laplacian eigenvalue by iterating the minus-branch map from ``k``."""
    family = _family(family)
    GraphSpec(family, n, k)
    eps = float(k)
    for _ in range(n - 1):
        b = k + eps if family is Family.HIERARCHICAL else k + 2.0
        eps = _minus_root(b, eps)
    return eps


def epsilon_asymptotic(family, n: int, k: int) -> float:
    """Large-n approximation: ``k**(2-n)`` (hierarchical) or ``k / (k+2)**(n-1)``."""
    family = _family(family)
    if family is Family.HIERARCHICAL:
        return float(k) ** (2 - n)
    return k / float(k + 2) ** (n - 1)


def zeta(family, n: int, k: int) -> float:
    """Largest Laplacian eigenvalue.

    Sierpinski graphs: ``k`` at ``n = 1`` and exactly ``k + 2`` afterwards.
    Hierarchical graphs: iterate the plus-branch map from ``k``.
    """
    family = _family(family)
    GraphSpec(family, n, k)
    if family is Family.SIERPINSKI:
        return float(k) if n == 1 else float(k + 2)
    z = float(k)
    for _ in range(n - 1):
        b = k + z
        z = 0.5 * (b + math.sqrt(b * b - 4.0 * z))
    return z


def zeta_asymptotic(family, n: int, k: int) -> float:
    family = _family(family)
    if family is Family.HIERARCHICAL:
        return float((k - 1) * n)
    return float(k) if n == 1 else float(k + 2)


def tau_max(zeta_value: float) -> float:
    """Largest uniform delay keeping delayed consensus stable: ``pi / (2 zeta)``."""
    if zeta_value <= 0:
        raise ValueError("zeta must be positive")
    return math.pi / (2.0 * zeta_value)


# -- hierarchical reciprocal sums --------------------------------------------------

def lambda_sum_closed(n: int, k: int) -> float:
    kf = float(k)
    return kf ** (n - 1) * ((2 * n - 1) - 2 * n / kf) + 1.0 / kf


def lambda_sum_recursive(n: int, k: int) -> float:
    lam = (k - 1) / k
    for g in range(2, n + 1):
        lam = k * lam + 2.0 * (k - 1) * float(k) ** (g - 2) - (k - 1) / k
    return lam


class GammaVariant(str, enum.Enum):
    """Forms of the second-order hierarchical recursion.

    ``FULL`` is derived term by term from the child identities and includes
    the fixed eigenvalue ``k`` block, ``(k-2) k**(g-3) + 1/k**2``.
    ``LAMBDA_MIDDLE`` fixes only the middle term (``Lambda`` instead of
    ``Gamma``) and still drops that block; ``PRINTED`` is the form with
    ``Gamma`` in the middle term.  Only ``FULL`` matches the spectrum.
    """

    FULL = "full"
    LAMBDA_MIDDLE = "lambda-middle"
    PRINTED = "printed"


def gamma_recursive(n: int, k: int, variant: GammaVariant = GammaVariant.FULL) -> float:
    variant = GammaVariant(variant)
    lam = (k - 1) / k
    gam = (k - 1) / k**2
    for g in range(2, n + 1):
        kg = float(k) ** (g - 1)
        if variant is GammaVariant.PRINTED:
            new = k * k * gam + (2 * k - 2) * gam + kg - 1.0
        else:
            new = k * k * gam + (2 * k - 2) * lam + kg - 1.0
            if variant is GammaVariant.FULL:
                new += (k - 2) * float(k) ** (g - 3) + 1.0 / k**2
        lam = k * lam + 2.0 * (k - 1) * float(k) ** (g - 2) - (k - 1) / k
        gam = new
    return gam


def _h2_hier_closed(n: int, k: int) -> float:
    kf = float(k)
    kn = kf**n
    poly = kf / kn - kf * kf / kn + (kf * kf - 5 * kf - 6) + kn * (4 * kf + 6)
    return poly / (2 * kf**3 * (1 + kf)) + 2 * n * (1 - kf) / kf**3


def gamma_closed(n: int, k: int) -> float:
    return 2.0 * float(k) ** n * _h2_hier_closed(n, k)


def h1_hierarchical(n: int, k: int) -> float:
    """First-order coherence of H(n, k); closed form checked against the recursion."""
    GraphSpec(Family.HIERARCHICAL, n, k)
    kf = float(k)
    h1 = ((2 * n - 1) - 2 * n / kf + kf ** (-n)) / (2 * kf)
    check_agreement(
        "H1 hierarchical", h1, lambda_sum_recursive(n, k) / (2 * kf**n), ANALYTIC_RTOL
    )
    return h1


def h2_hierarchical(n: int, k: int) -> float:
    """Second-order coherence of H(n, k); closed form checked against the recursion."""
    GraphSpec(Family.HIERARCHICAL, n, k)
    h2 = _h2_hier_closed(n, k)
    check_agreement(
        "H2 hierarchical", h2, gamma_recursive(n, k) / (2 * float(k) ** n), ANALYTIC_RTOL
    )
    return h2


# -- Sierpinski reciprocal sums ----------------------------------------------------

def _theta_fixed(g: int, k: int) -> float:
    return (k - 2) / 2 * (float(k) ** (g - 2) + 1 / (k - 2) + (float(k) ** (g - 1) - 1) / (k + 2))


def _omega_fixed(g: int, k: int) -> float:
    return (k - 2) / 2 * (
        float(k) ** (g - 3) + 1 / (k * (k - 2)) + (float(k) ** (g - 1) - 1) / (k + 2) ** 2
    )


def theta_recursive(n: int, k: int) -> float:
    theta = (k - 1) / k
    for g in range(2, n + 1):
        theta = (k + 2) * theta + _theta_fixed(g, k)
    return theta


def omega_recursive(n: int, k: int) -> float:
    theta = (k - 1) / k
    omega = (k - 1) / k**2
    for g in range(2, n + 1):
        omega = (k + 2) ** 2 * omega - 2 * theta + _omega_fixed(g, k)
        theta = (k + 2) * theta + _theta_fixed(g, k)
    return omega


def _h1_sier_closed(n: int, k: int) -> float:
    kf = float(k)
    r = (kf + 2) / kf
    first = ((kf * kf + kf + 2) * (kf - 1) * r**n - 4 * kf * kf ** (-n)) / (
        4 * kf * (kf + 1) * (kf + 2)
    )
    return first - (kf - 2) * (kf + 1) / (4 * kf * (kf + 2))


def _h2_sier_closed(n: int, k: int) -> float:
    # every power of (k+2) is paired with one of k so nothing overflows
    kf = float(k)
    r = (kf + 2) / kf
    quartic = kf**2 + 3 * kf + 4
    quintic = kf**5 + 7 * kf**4 + 16 * kf**3 + 28 * kf**2 + 26 * kf + 12
    t1 = -(7 * kf**2 + 13 * kf + 2) * kf ** (-n) / (
        2 * kf * (kf + 1) ** 2 * (kf + 2) ** 2 * (kf + 3)
    )
    t2 = -(kf - 2) * (kf**3 + 4 * kf**2 + 4 * kf + 2) / (2 * kf**2 * (kf + 2) ** 2 * quartic)
    t3 = (kf - 1) * (kf**2 + kf + 2) * r**n / (2 * kf * (kf + 1) ** 2 * (kf + 2) ** 2)
    t4 = (
        quintic * (kf - 1) * kf**n * r ** (2 * n)
        / (2 * kf**2 * (kf + 1) ** 2 * (kf + 2) ** 2 * (kf + 3) * quartic)
    )
    return t1 + t2 + t3 + t4


def theta_closed(n: int, k: int) -> float:
    return 2.0 * float(k) ** n * _h1_sier_closed(n, k)


def omega_closed(n: int, k: int) -> float:
    return 2.0 * float(k) ** n * _h2_sier_closed(n, k)


def h1_sierpinski(n: int, k: int) -> float:
    GraphSpec(Family.SIERPINSKI, n, k)
    h1 = _h1_sier_closed(n, k)
    check_agreement("H1 sierpinski", h1, theta_recursive(n, k) / (2 * float(k) ** n), ANALYTIC_RTOL)
    return h1


def h2_sierpinski(n: int, k: int) -> float:
    GraphSpec(Family.SIERPINSKI, n, k)
    h2 = _h2_sier_closed(n, k)
    check_agreement("H2 sierpinski", h2, omega_recursive(n, k) / (2 * float(k) ** n), 1e-9)
    return h2


# -- leading-order scalings -----------------------------------------------------------

def h1_asymptotic(family, n: int, k: int) -> float:
    """Leading large-n term of the first-order coherence."""
    family = _family(family)
    N = float(k) ** n
    if family is Family.HIERARCHICAL:
        return (k - 1) / k**2 * n
    exponent = math.log(k + 2) / math.log(k) - 1
    return (k**3 + k - 2) / (4 * k * (k + 1) * (k + 2)) * N**exponent


def h2_hk(k: int) -> float:
    """Prefactor of the leading Sierpinski second-order coherence term."""
    num = (k**5 + 7 * k**4 + 16 * k**3 + 28 * k**2 + 26 * k + 12) * (k - 1)
    den = 2 * k**2 * (k + 1) ** 2 * (k + 2) ** 2 * (k + 3) * (k**2 + 3 * k + 4)
    return num / den


def h2_asymptotic(family, n: int, k: int) -> float:
    family = _family(family)
    N = float(k) ** n
    if family is Family.HIERARCHICAL:
        return (2 * k + 3) / (k**3 * (k + 1)) * N
    exponent = 2 * math.log(k + 2) / math.log(k) - 1
    return h2_hk(k) * N**exponent


# -- shared helpers --------------------------------------------------------------------

def reciprocal_sums(family, n: int, k: int, method: Method = Method.CLOSED_FORM) -> tuple[float, float]:
    """``(sum 1/lambda, sum 1/lambda**2)`` over the nonzero spectrum by one route."""
    family = _family(family)
    method = Method(method)
    if method is Method.SPECTRUM_SUM:
        return spectrum(family, n, k).reciprocal_sums()
    hier = family is Family.HIERARCHICAL
    if method is Method.RECURSION:
        if hier:
            return lambda_sum_recursive(n, k), gamma_recursive(n, k)
        return theta_recursive(n, k), omega_recursive(n, k)
    if method is Method.CLOSED_FORM:
        if hier:
            return lambda_sum_closed(n, k), gamma_closed(n, k)
        return theta_closed(n, k), omega_closed(n, k)
    raise ValueError(f"no analytic route named {method.value!r}; use dense_oracle for oracles")


def kirchhoff_and_hitting(lambda_sum: float, n: int, k: int) -> tuple[float, float]:
    """Kirchhoff index ``N * lambda_sum`` and mean hitting time ``2 E lambda_sum / (N - 1)``."""
    if lambda_sum <= 0:
        raise ValueError("lambda_sum must be positive")
    N = k**n
    E = (k ** (n + 1) - k) // 2
    return N * lambda_sum, 2 * E * lambda_sum / (N - 1)


@dataclass
class MetricsReport:
    spec: GraphSpec
    epsilon: float
    epsilon_asym: float
    zeta: float
    zeta_asym: float
    tau_max: float
    H1: float
    H2: float
    lambda_sum: float
    lambda_sq_sum: float
    kirchhoff: float
    mean_hitting: float
    method: dict[str, Method] = field(default_factory=dict)
    checks: list[str] = field(default_factory=list)

    CSV_COLUMNS = (
        "family", "n", "k", "N", "E", "epsilon", "epsilon_asym", "zeta", "zeta_asym",
        "tau_max", "H1", "H2", "lambda_sum", "lambda_sq_sum", "kirchhoff", "mean_hitting",
    )

    def row(self) -> dict:
        out = {
            "family": self.spec.family.value,
            "n": self.spec.n,
            "k": self.spec.k,
            "N": self.spec.num_vertices,
            "E": self.spec.num_edges,
        }
        for name in self.CSV_COLUMNS[5:]:
            out[name] = getattr(self, name)
        return out

    def to_dict(self) -> dict:
        out = self.row()
        out["method"] = {key: m.value for key, m in sorted(self.method.items())}
        out["checks"] = list(self.checks)
        return out


def full_report(
    spec: GraphSpec,
    *,
    spectrum_check: bool = True,
    spectrum_budget: int = DEFAULT_ENTRY_BUDGET,
    oracle: bool = False,
    dense_budget: int | None = None,
) -> MetricsReport:
    """Every metric by its cheapest exact route, cross-checked where affordable.

    Closed forms and scalar recursions are always compared.  The recursive
    spectrum is summed as a third route when ``n <= 14`` and within
    ``spectrum_budget``; with ``oracle=True`` and a small enough graph the
    dense eigensolver is consulted as well.  Any disagreement raises
    :class:`~selfsim_consensus.errors.RouteDisagreementError`.
    """
    fam, n, k = spec.family, spec.n, spec.k
    hier = fam is Family.HIERARCHICAL
    method: dict[str, Method] = {}
    checks: list[str] = []

    eps = epsilon_recursive(fam, n, k)
    method["epsilon"] = Method.RECURSION
    z = zeta(fam, n, k)
    method["zeta"] = Method.RECURSION if hier else Method.CLOSED_FORM

    if hier:
        h1, h2 = h1_hierarchical(n, k), h2_hierarchical(n, k)
    else:
        h1, h2 = h1_sierpinski(n, k), h2_sierpinski(n, k)
    checks.append("closed-form vs recursion")
    lam, gam = reciprocal_sums(fam, n, k, Method.CLOSED_FORM)
    for key in ("H1", "H2", "lambda_sum", "lambda_sq_sum", "kirchhoff", "mean_hitting", "tau_max"):
        method[key] = Method.CLOSED_FORM
    method["epsilon_asym"] = method["zeta_asym"] = Method.CLOSED_FORM

    if spectrum_check and n <= SPECTRUM_CHECK_MAX_N and expected_entries(fam, n) <= spectrum_budget:
        s = spectrum(fam, n, k, spectrum_budget)
        v, _ = s.nonzero()
        check_agreement("epsilon", eps, float(v.min()), ANALYTIC_RTOL)
        check_agreement("zeta", z, float(v.max()), ANALYTIC_RTOL)
        s_lam, s_gam = s.reciprocal_sums()
        check_agreement("lambda_sum", lam, s_lam, SPECTRUM_RTOL)
        check_agreement("lambda_sq_sum", gam, s_gam, SPECTRUM_SQ_RTOL)
        checks.append("closed-form vs spectrum-sum")

    if oracle:
        from .graphs import DEFAULT_DENSE_BUDGET, build_graph
        from .oracle import eig_all

        budget = DEFAULT_DENSE_BUDGET if dense_budget is None else dense_budget
        if spec.num_vertices <= budget:
            res = eig_all(build_graph(spec), budget)
            check_agreement("epsilon (oracle)", eps, float(res.eigenvalues[1]), ORACLE_RTOL)
            check_agreement("zeta (oracle)", z, float(res.eigenvalues[-1]), ORACLE_RTOL)
            check_agreement("lambda_sum (oracle)", lam, res.lambda_sum, ORACLE_RTOL)
            check_agreement("lambda_sq_sum (oracle)", gam, res.lambda_sq_sum, ORACLE_RTOL)
            checks.append("closed-form vs dense oracle")

    kirch, hit = kirchhoff_and_hitting(lam, n, k)
    return MetricsReport(
        spec=spec,
        epsilon=eps,
        epsilon_asym=epsilon_asymptotic(fam, n, k),
        zeta=z,
        zeta_asym=zeta_asymptotic(fam, n, k),
        tau_max=tau_max(z),
        H1=h1,
        H2=h2,
        lambda_sum=lam,
        lambda_sq_sum=gam,
        kirchhoff=kirch,
        mean_hitting=hit,
        method=method,
        checks=checks,
    )
