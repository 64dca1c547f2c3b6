"""Direct simulation of the four linear consensus systems.

* noiseless          ``x' = -L x``
* uniform delay      ``x'(t) = -L x(t - tau)``, constant history ``x(0)``
* first-order noisy  ``x' = -L x + w``
* second-order noisy ``x' = v``, ``v' = -L x - L v + w``

Deterministic parts use fixed-step explicit Euler, stochastic parts
Euler-Maruyama.  Monte-Carlo trials draw from independent Philox streams
keyed on ``(seed, trial_index)``, so a trial's noise does not depend on how
many other trials run alongside it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import Family, Graph, laplacian_dense, laplacian_sparse
from .metrics import h1_hierarchical, h1_sierpinski, h2_hierarchical, h2_sierpinski, zeta

__all__ = [
    "SimConfig",
    "SimKind",
    "SimTrace",
    "analytic_coherence",
    "bisect_delay_threshold",
    "decay_rate",
    "run",
    "run_delayed",
    "run_first_order_noisy",
    "run_noiseless",
    "run_second_order_noisy",
    "trial_generator",
]

DT_HEADROOM = 0.1  # dt * zeta must stay below this
NOISE_CHUNK = 1024
DENSE_OPERATOR_MAX_N = 2000


class SimKind(str, enum.Enum):
    NOISELESS = "noiseless"
    DELAYED = "delayed"
    FIRST_ORDER_NOISY = "noisy1"
    SECOND_ORDER_NOISY = "noisy2"


@dataclass
class SimConfig:
    graph: Graph
    kind: SimKind
    dt: float
    t_end: float
    tau: float = 0.0
    noise_intensity: float = 1.0
    seed: int = 0
    initial_state: np.ndarray | None = None
    initial_velocity: np.ndarray | None = None
    stride: int = 1
    blowup_factor: float = 1e6

    def __post_init__(self) -> None:
        self.kind = SimKind(self.kind)

    @property
    def num_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def delay_steps(self) -> int:
        return int(round(self.tau / self.dt))

    def validate(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < self.dt:
            raise ValueError("t_end must be at least one step")
        spec = self.graph.spec
        z = zeta(spec.family, spec.n, spec.k)
        if self.dt * z > DT_HEADROOM * (1 + 1e-12):
            raise ValueError(
                f"dt={self.dt} too large for explicit Euler: need dt <= {DT_HEADROOM}/zeta = "
                f"{DT_HEADROOM / z:.6g}"
            )
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        if abs(self.tau / self.dt - self.delay_steps) > 1e-9 * max(1.0, self.tau / self.dt):
            raise ValueError(f"tau={self.tau} is not an integer multiple of dt={self.dt}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.noise_intensity < 0:
            raise ValueError("noise_intensity must be non-negative")

    def x0(self, noisy: bool) -> np.ndarray:
        N = self.graph.num_vertices
        if self.initial_state is not None:
            x = np.asarray(self.initial_state, dtype=np.float64).copy()
            if x.shape != (N,):
                raise ValueError(f"initial_state must have shape ({N},)")
            return x
        if noisy:
            return np.zeros(N)
        return trial_generator(self.seed, -1).standard_normal(N)

    def v0(self) -> np.ndarray:
        N = self.graph.num_vertices
        if self.initial_velocity is None:
            return np.zeros(N)
        v = np.asarray(self.initial_velocity, dtype=np.float64).copy()
        if v.shape != (N,):
            raise ValueError(f"initial_velocity must have shape ({N},)")
        return v

    def meta(self, **extra) -> dict:
        spec = self.graph.spec
        out = {
            "family": spec.family.value,
            "n": spec.n,
            "k": spec.k,
            "kind": self.kind.value,
            "seed": self.seed,
            "dt": self.dt,
            "t_end": self.t_end,
            "tau": self.tau,
            "noise_intensity": self.noise_intensity,
            "stride": self.stride,
        }
        out.update(extra)
        return out


@dataclass(eq=False)
class SimTrace:
    times: np.ndarray
    states: np.ndarray
    velocities: np.ndarray | None = None
    diverged: bool = False
    divergence_time: float | None = None
    empirical_coherence: float | None = None
    stderr: float | None = None
    meta: dict = field(default_factory=dict)


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; ``trial=-1`` is reserved for initial states."""
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, trial + 1]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _operator(g: Graph):
    if g.num_vertices <= DENSE_OPERATOR_MAX_N:
        return laplacian_dense(g, DENSE_OPERATOR_MAX_N)
    return laplacian_sparse(g)


def _integrate_delayed(cfg: SimConfig) -> SimTrace:
    lap = _operator(cfg.graph)
    x = cfg.x0(noisy=False)
    d = cfg.delay_steps
    dt = cfg.dt
    norm0 = float(np.linalg.norm(x))
    threshold = cfg.blowup_factor * norm0 if norm0 > 0 else cfg.blowup_factor

    ring = np.repeat(x[None, :], d + 1, axis=0)
    times, states = [0.0], [x.copy()]
    diverged, t_div = False, None
    for m in range(cfg.num_steps):
        slot = (m + 1) % (d + 1)
        x = x - dt * (lap @ ring[slot])
        ring[slot] = x
        if (m + 1) % cfg.stride == 0:
            times.append((m + 1) * dt)
            states.append(x.copy())
        if np.max(np.abs(x)) > threshold:
            diverged, t_div = True, (m + 1) * dt
            if (m + 1) % cfg.stride != 0:
                times.append((m + 1) * dt)
                states.append(x.copy())
            break
    return SimTrace(
        np.array(times),
        np.array(states),
        diverged=diverged,
        divergence_time=t_div,
        meta=cfg.meta(),
    )


def run_noiseless(cfg: SimConfig) -> SimTrace:
    """Explicit Euler on ``x' = -L x``; the agent average is conserved."""
    if cfg.kind is not SimKind.NOISELESS:
        raise ValueError("run_noiseless needs kind=noiseless")
    cfg.validate()
    if cfg.delay_steps != 0:
        raise ValueError("noiseless runs have no delay")
    return _integrate_delayed(cfg)


def run_delayed(cfg: SimConfig) -> SimTrace:
    """Method of steps for ``x'(t) = -L x(t - tau)`` with a ring buffer of past states.

    The run stops early, flagged ``diverged``, once any agent exceeds
    ``blowup_factor * ||x(0)||``.  With ``tau = 0`` this is step for step the
    noiseless integrator.
    """
    if cfg.kind is not SimKind.DELAYED:
        raise ValueError("run_delayed needs kind=delayed")
    cfg.validate()
    return _integrate_delayed(cfg)


def _noise_blocks(gens, steps: int, N: int):
    """Yield ``(c, N, M)`` standard-normal blocks, trial ``j`` drawn from ``gens[j]`` only."""
    done = 0
    while done < steps:
        c = min(NOISE_CHUNK, steps - done)
        yield np.stack([g.standard_normal((c, N)) for g in gens], axis=-1)
        done += c


def _deviation_power(x: np.ndarray) -> np.ndarray:
    dev = x - x.mean(axis=0, keepdims=True)
    return np.einsum("ij,ij->j", dev, dev) / x.shape[0]


def _run_noisy(cfg: SimConfig, num_trials: int, second_order: bool):
    cfg.validate()
    if num_trials < 1:
        raise ValueError("num_trials must be >= 1")
    lap = _operator(cfg.graph)
    N, M, dt = cfg.graph.num_vertices, num_trials, cfg.dt
    steps = cfg.num_steps
    scale = math.sqrt(dt * cfg.noise_intensity)
    window_start = steps // 2  # steady-state window [t_end/2, t_end]

    X = np.repeat(cfg.x0(noisy=True)[:, None], M, axis=1)
    V = np.repeat(cfg.v0()[:, None], M, axis=1) if second_order else None
    gens = [trial_generator(cfg.seed, j) for j in range(M)]

    acc = np.zeros(M)
    count = 0
    times, xs, vs = [0.0], [X[:, 0].copy()], [V[:, 0].copy()] if second_order else None
    m = 0
    for block in _noise_blocks(gens, steps, N):
        for xi in block:
            if second_order:
                X, V = X + dt * V, V - dt * (lap @ (X + V)) + scale * xi
            else:
                X = X - dt * (lap @ X) + scale * xi
            m += 1
            if m > window_start:
                acc += _deviation_power(X)
                count += 1
            if m % cfg.stride == 0:
                times.append(m * dt)
                xs.append(X[:, 0].copy())
                if second_order:
                    vs.append(V[:, 0].copy())

    per_trial = acc / count
    est = float(np.mean(per_trial))
    err = float(np.std(per_trial, ddof=1) / math.sqrt(M)) if M > 1 else float("nan")
    trace = SimTrace(
        np.array(times),
        np.array(xs),
        velocities=np.array(vs) if second_order else None,
        empirical_coherence=est,
        stderr=err,
        meta=cfg.meta(num_trials=M, window=[window_start * dt, steps * dt]),
    )
    return trace, est, err


def run_first_order_noisy(cfg: SimConfig, num_trials: int = 1) -> tuple[SimTrace, float, float]:
    """Euler-Maruyama for ``x' = -L x + w`` over ``num_trials`` independent trials.

    Returns the trace of trial 0, the empirical first-order coherence (time
    and trial average of the agent-mean squared deviation from the current
    average over ``[t_end/2, t_end]``) and its standard error across trials.
    """
    if cfg.kind is not SimKind.FIRST_ORDER_NOISY:
        raise ValueError("run_first_order_noisy needs kind=noisy1")
    return _run_noisy(cfg, num_trials, second_order=False)


def run_second_order_noisy(cfg: SimConfig, num_trials: int = 1) -> tuple[SimTrace, float, float]:
    """Euler-Maruyama for the position/velocity system, noise entering velocities only.

    Coherence is measured on positions, as in :func:`run_first_order_noisy`.
    """
    if cfg.kind is not SimKind.SECOND_ORDER_NOISY:
        raise ValueError("run_second_order_noisy needs kind=noisy2")
    return _run_noisy(cfg, num_trials, second_order=True)


def run(cfg: SimConfig, num_trials: int = 1) -> SimTrace:
    if cfg.kind is SimKind.NOISELESS:
        return run_noiseless(cfg)
    if cfg.kind is SimKind.DELAYED:
        return run_delayed(cfg)
    if cfg.kind is SimKind.FIRST_ORDER_NOISY:
        return run_first_order_noisy(cfg, num_trials)[0]
    return run_second_order_noisy(cfg, num_trials)[0]


def analytic_coherence(cfg: SimConfig) -> float | None:
    """Predicted steady-state coherence for noisy kinds (``None`` otherwise)."""
    spec = cfg.graph.spec
    hier = spec.family is Family.HIERARCHICAL
    if cfg.kind is SimKind.FIRST_ORDER_NOISY:
        h = h1_hierarchical(spec.n, spec.k) if hier else h1_sierpinski(spec.n, spec.k)
    elif cfg.kind is SimKind.SECOND_ORDER_NOISY:
        h = h2_hierarchical(spec.n, spec.k) if hier else h2_sierpinski(spec.n, spec.k)
    else:
        return None
    return cfg.noise_intensity * h


def decay_rate(trace: SimTrace, tail: float = 0.5, floor: float = 1e-12) -> float:
    """Exponential decay rate of ``||x - mean(x)||`` from a log-linear fit.

    Uses the last ``tail`` fraction of the trace, dropping samples whose
    disagreement has already fallen below ``floor`` (round-off territory).
    """
    dev = trace.states - trace.states.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(dev, axis=1)
    start = int(len(norms) * (1 - tail))
    t, y = trace.times[start:], norms[start:]
    keep = y > floor
    if keep.sum() < 2:
        raise ValueError("not enough samples above the floor to fit a decay rate")
    slope = np.polyfit(t[keep], np.log(y[keep]), 1)[0]
    return float(-slope)


def bisect_delay_threshold(
    graph: Graph,
    dt: float,
    t_end: float,
    lo: float,
    hi: float,
    *,
    seed: int = 0,
    max_iter: int = 40,
) -> tuple[float, float]:
    """Bracket the delay at which the delayed system starts to diverge.

    Works on integer delay steps, so the returned ``(stable, unstable)`` taus
    are exact multiples of ``dt`` one step apart (or ``max_iter`` halvings).
    ``lo`` must converge and ``hi`` must diverge.
    """

    def diverges(d: int) -> bool:
        cfg = SimConfig(graph, SimKind.DELAYED, dt=dt, t_end=t_end, tau=d * dt, seed=seed)
        return run_delayed(cfg).diverged

    d_lo, d_hi = int(math.floor(lo / dt)), int(math.ceil(hi / dt))
    if diverges(d_lo):
        raise ValueError(f"lower delay {d_lo * dt} already diverges")
    if not diverges(d_hi):
        raise ValueError(f"upper delay {d_hi * dt} does not diverge by t_end={t_end}")
    for _ in range(max_iter):
        if d_hi - d_lo <= 1:
            break
        mid = (d_lo + d_hi) // 2
        if diverges(mid):
            d_hi = mid
        else:
            d_lo = mid
    return d_lo * dt, d_hi * dt
