"""Oracle cross-check matrix: recursive results against brute force and simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .dynamics import SimConfig, SimKind, run_delayed, run_noiseless
from .errors import BudgetExceededError, RouteDisagreementError
from .graphs import (
    DEFAULT_DENSE_BUDGET,
    Family,
    Graph,
    GraphSpec,
    build_graph,
    degree_histogram,
    hierarchical_degree_counts,
    is_connected,
)
from .metrics import (
    ORACLE_RTOL,
    epsilon_recursive,
    full_report,
    reciprocal_sums,
    tau_max,
    zeta,
)
from .oracle import eig_all, resistance_matrix
from .spectrum import spectrum

__all__ = [
    "SIM_SMOKE_MAX_N",
    "SPECTRUM_ATOL",
    "CheckResult",
    "NoChecksRan",
    "check_graph",
    "check_simulation",
    "check_spec",
    "format_results",
    "validate_all",
]

SPECTRUM_ATOL = 1e-8
KIRCHHOFF_RTOL = 1e-8
SIM_SMOKE_MAX_N = 81
# delay smoke test: tau_max spans this many Euler steps, so dt * zeta = pi/40
DELAY_STEPS_PER_TAU = 20


class NoChecksRan(RuntimeError):
    """The requested budget admitted no graph at all."""


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _run_check(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    try:
        ok, detail = fn()
    except BudgetExceededError:
        raise
    except (RouteDisagreementError, ArithmeticError, ValueError, AssertionError) as exc:
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, bool(ok), detail)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _expected_degrees(spec: GraphSpec) -> dict[int, int]:
    if spec.family is Family.HIERARCHICAL:
        return hierarchical_degree_counts(spec.n, spec.k)
    k = spec.k
    if spec.n == 1:
        return {k - 1: k}
    return {k - 1: k, k: k**spec.n - k}


def check_graph(g: Graph, dense_budget: int = DEFAULT_DENSE_BUDGET) -> list[CheckResult]:
    """All oracle checks for one constructed graph.

    The graph is taken as given, so a corrupted edge list shows up as
    failures here (the recursive side only ever sees ``g.spec``).
    """
    spec = g.spec
    tag = str(spec)
    fam, n, k = spec.family, spec.n, spec.k
    out: list[CheckResult] = []

    def structure():
        ok = (
            g.num_vertices == spec.num_vertices
            and g.num_edges == spec.num_edges
            and is_connected(g)
            and degree_histogram(g) == _expected_degrees(spec)
        )
        return ok, f"N={g.num_vertices} E={g.num_edges}"

    out.append(_run_check(f"{tag} structure", structure))

    closed_lam, closed_gam = reciprocal_sums(fam, n, k)
    cache: dict = {}

    def oracle():
        # computed once; a failure (e.g. a disconnected graph) fails each dependent check
        if "res" not in cache:
            cache["res"] = eig_all(g, dense_budget)
        return cache["res"]

    def spectrum_match():
        rec = spectrum(fam, n, k).expand()
        ev = oracle().eigenvalues
        if rec.shape != ev.shape:
            return False, f"sizes {rec.shape[0]} vs {ev.shape[0]}"
        err = float(np.max(np.abs(np.sort(rec) - ev)))
        return err <= SPECTRUM_ATOL, f"max abs err {err:.2e}"

    def sums():
        res = oracle()
        e1, e2 = _rel(res.lambda_sum, closed_lam), _rel(res.lambda_sq_sum, closed_gam)
        return max(e1, e2) <= ORACLE_RTOL, f"rel err {e1:.1e}, {e2:.1e}"

    def kirchhoff():
        r = resistance_matrix(g, dense_budget)
        kirch = math.fsum(r[np.triu_indices(g.num_vertices, 1)].tolist())
        err = _rel(kirch, spec.num_vertices * closed_lam)
        return err <= KIRCHHOFF_RTOL, f"pinv {kirch:.10g}, rel err {err:.1e}"

    def extremes():
        ev = oracle().eigenvalues
        e1 = abs(ev[1] - epsilon_recursive(fam, n, k))
        e2 = abs(ev[-1] - zeta(fam, n, k))
        return max(e1, e2) <= SPECTRUM_ATOL, f"abs err {e1:.1e}, {e2:.1e}"

    out.append(_run_check(f"{tag} spectrum match", spectrum_match))
    out.append(_run_check(f"{tag} oracle sums vs closed forms", sums))
    out.append(_run_check(f"{tag} Kirchhoff pseudoinverse", kirchhoff))
    out.append(_run_check(f"{tag} lambda_2 / lambda_max", extremes))
    return out


def check_spec(spec: GraphSpec, dense_budget: int = DEFAULT_DENSE_BUDGET) -> list[CheckResult]:
    """Three-route metric agreement plus :func:`check_graph` on the built graph."""
    out = [
        _run_check(
            f"{spec} three-route agreement",
            lambda: (bool(full_report(spec, spectrum_check=True)), "closed form, recursion, spectrum sum"),
        )
    ]
    return out + check_graph(build_graph(spec), dense_budget)


def check_simulation(g: Graph, seed: int = 0) -> list[CheckResult]:
    """Consensus and delay-threshold smoke tests on a small graph."""
    spec = g.spec
    tag = str(spec)
    fam, n, k = spec.family, spec.n, spec.k
    eps, z = epsilon_recursive(fam, n, k), zeta(fam, n, k)

    def consensus():
        dt = 0.05 / z
        t_end = 20.0 / eps
        stride = max(1, int(round(t_end / dt)) // 200)
        cfg = SimConfig(g, SimKind.NOISELESS, dt=dt, t_end=t_end, seed=seed, stride=stride)
        tr = run_noiseless(cfg)
        means = tr.states.mean(axis=1)
        drift = float(np.max(np.abs(means - means[0])))
        resid = float(np.max(np.abs(tr.states[-1] - means[0])))
        return drift <= 1e-9 and resid < 1e-6, f"mean drift {drift:.1e}, residual {resid:.1e}"

    def delay():
        tm = tau_max(z)
        dt = tm / DELAY_STEPS_PER_TAU
        below, above = 0.9 * DELAY_STEPS_PER_TAU, 1.1 * DELAY_STEPS_PER_TAU
        runs = [
            run_delayed(SimConfig(g, SimKind.DELAYED, dt=dt, t_end=200.0, tau=round(d) * dt,
                                  seed=seed, stride=1000))
            for d in (below, above)
        ]
        ok = not runs[0].diverged and runs[1].diverged
        return ok, f"0.9 tau_max diverged={runs[0].diverged}, 1.1 tau_max diverged={runs[1].diverged}"

    return [
        _run_check(f"{tag} noiseless consensus", consensus),
        _run_check(f"{tag} delay threshold", delay),
    ]


def _specs(k_values: Iterable[int], max_n_per_k: int | None, dense_budget: int) -> list[GraphSpec]:
    specs = []
    for fam in (Family.HIERARCHICAL, Family.SIERPINSKI):
        for k in k_values:
            n = 1
            while k**n <= dense_budget and (max_n_per_k is None or n <= max_n_per_k):
                specs.append(GraphSpec(fam, n, k))
                n += 1
    return specs


def validate_all(
    max_n_per_k: int | None = None,
    k_values: Iterable[int] = (3, 4, 5),
    dense_budget: int = DEFAULT_DENSE_BUDGET,
    simulate: bool = True,
    progress: Callable[[CheckResult], None] | None = None,
) -> list[CheckResult]:
    """Run the whole matrix over every graph within the budgets.

    Raises :class:`NoChecksRan` if the budgets admit no graph.
    """
    specs = _specs(list(k_values), max_n_per_k, dense_budget)
    if not specs:
        raise NoChecksRan("no checks ran: budget admits no graph")
    results: list[CheckResult] = []

    def emit(batch: list[CheckResult]) -> None:
        results.extend(batch)
        if progress is not None:
            for r in batch:
                progress(r)

    for spec in specs:
        emit(check_spec(spec, dense_budget))
        if simulate and spec.num_vertices <= SIM_SMOKE_MAX_N and spec.num_vertices > 1:
            emit(check_simulation(build_graph(spec)))
    return results


def format_results(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines)
