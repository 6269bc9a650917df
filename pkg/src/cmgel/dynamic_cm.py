"""Dynamical configuration model: per-arm Exp(1) clocks, successive
activations paired in order, no freezing.

Alongside the simulator live the closed-form forecasts for the first time a
size-alpha component appears, the structure of that component, and the state
of the remaining solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _engine
from .graphs import realize_degrees
from .measures import Pmf

__all__ = [
    "Theta",
    "DcmRun",
    "simulate_dcm",
    "activation_time_for_arms",
    "rho_t_pgf",
    "gelation_predictions",
]


@dataclass(frozen=True)
class Theta:
    """Parameter pair (n, mu) for the dynamical configuration model."""

    n: int
    mu: Pmf

    def degrees(self) -> np.ndarray:
        return realize_degrees(self.n, self.mu)


@dataclass
class DcmRun:
    stop_reason: str  # "time" | "arm_count" | "gel" | "exhausted"
    sigma: float | None  # first time a size-alpha component appeared
    gel_component: dict | None  # {"size", "v_kr", "b", "free_arms"}
    solution_after: dict | None  # {"S", "B", "mu_bar"}
    activated_total: int  # number of clock rings processed
    stop_time: float
    raw: _engine.RawRun


def simulate_dcm(
    theta: Theta,
    alpha: int,
    stop: str | tuple,
    rng: np.random.Generator,
    allow_self_loops: bool = True,
    order=None,
    times=None,
) -> DcmRun:
    """Run the dynamical configuration model.

    stop is one of ("t_max", t), ("B_target", b) or "first_gel".  With
    "first_gel" the run halts as soon as a component of size >= alpha forms
    and the run records its time sigma, the component census and the state
    of the rest of the graph.
    """
    if alpha < 2:
        raise ValueError("alpha must be at least 2")
    degrees = theta.degrees()
    total_arms = int(degrees.sum())
    t_max = np.inf
    b_target = 0
    if stop == "first_gel":
        mode = _engine.STOP_FIRST_GEL
    elif isinstance(stop, tuple) and stop[0] == "t_max":
        mode = _engine.STOP_TMAX
        t_max = float(stop[1])
    elif isinstance(stop, tuple) and stop[0] == "B_target":
        mode = _engine.STOP_BTARGET
        b_target = int(stop[1])
        if b_target > total_arms:
            raise ValueError(f"B_target {b_target} exceeds total arms {total_arms}")
    else:
        raise ValueError(f"unknown stop spec {stop!r}")

    raw = _engine.drive(
        degrees,
        alpha=alpha,
        freeze=False,
        rng=rng,
        stop_mode=mode,
        t_max=t_max,
        b_target=b_target,
        allow_self_loops=allow_self_loops,
        order=order,
        times=times,
    )

    sigma = None
    gel_component = None
    solution_after = None
    if len(raw.gel_tau):
        sigma = float(raw.gel_tau[0])
        k_dim = raw.gel_vkr.shape[1]
        v_kr = {
            (k, r): int(raw.gel_vkr[0, k, r])
            for k in range(k_dim)
            for r in range(k_dim)
            if raw.gel_vkr[0, k, r]
        }
        gel_component = {
            "size": int(raw.gel_size[0]),
            "v_kr": v_kr,
            "b": int(raw.gel_bact[0]),
            "free_arms": int(raw.gel_afree[0]),
        }
        # the big component's root is the label of any member vertex; find it
        # via the last bind (the one that crossed alpha)
        big_root = raw.labels[raw.bind_u[-1]]
        in_solution = raw.labels != big_root
        sol_deg = raw.degrees[in_solution]
        s_count = int(in_solution.sum())
        b_count = int(raw.k_act[in_solution].sum())
        if s_count:
            counts = np.bincount(sol_deg)
            mu_bar = Pmf(counts / s_count)
        else:
            mu_bar = Pmf([1.0])
        solution_after = {"S": s_count, "B": b_count, "mu_bar": mu_bar}

    return DcmRun(
        stop_reason=_engine.reason_name(raw.reason),
        sigma=sigma,
        gel_component=gel_component,
        solution_after=solution_after,
        activated_total=int(raw.rings),
        stop_time=float(raw.stop_time),
        raw=raw,
    )


def activation_time_for_arms(theta: Theta, b: int) -> float:
    """Deterministic limit of the first time b arms have been activated.

    Arms ring independently at rate 1, so the activated fraction at time t
    is 1 - e^{-t} of n*m1 arms; inverting gives -log(1 - b/(n*m1)).
    """
    total = theta.n * theta.mu.m1
    if b < 0 or b >= total:
        raise ValueError(f"arm count {b} not reachable (total rate mass {total})")
    return -math.log1p(-b / total)


def rho_t_pgf(mu: Pmf, t: float, x: float) -> float:
    """Generating function of the activated-arm count at time t: G_mu((1-e^{-t})x + e^{-t})."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    if not 0.0 <= x <= 1.0:
        raise ValueError("pgf argument must be in [0, 1]")
    e = math.exp(-t)
    return mu.pgf((1.0 - e) * x + e)


def gelation_predictions(theta: Theta, alpha: int) -> dict:
    """First-order forecasts at and after the first size-alpha component.

    All corrections are O(alpha/n); the returned record contains

    * sigma -- expected first-gel time,
    * gel_arm_count -- activated arms inside the large component (about 2 alpha),
    * gel_degree_gf -- coefficients of the large component's degree census,
      (alpha/m1) * k mu(k),
    * B_after_per_n -- activated arms per vertex left in solution,
    * mu_bar_gf -- degree-law coefficients of the particles left in solution,
    * intergel_gap -- expected spacing to the next gel event.
    """
    mu = theta.mu
    m1, m2, m3 = mu.m1, mu.m2, mu.m3
    if not (m2 > m1 > 0):
        raise ValueError("gelation forecast requires a supercritical degree law")
    if m3 <= 0:
        raise ValueError("gelation forecast requires m3 > 0")
    a_over_n = alpha / theta.n
    k = np.arange(len(mu.weights))
    gel_degree = alpha * k * np.asarray(mu.weights) / m1
    mu_bar = np.asarray(mu.weights) * (1 + a_over_n) - a_over_n * k * np.asarray(mu.weights) / m1
    return {
        "sigma": -math.log1p(-m1 / m2) + a_over_n * m3 / (2 * m2 * (m2 - m1)),
        "gel_arm_count": 2 * alpha,
        "gel_degree_gf": gel_degree,
        "B_after_per_n": m1 ** 2 / m2 + a_over_n * (m1 * m3 / (2 * m2 ** 2) - 2),
        "mu_bar_gf": mu_bar,
        "intergel_gap": a_over_n * m3 / (m2 * (m2 - m1)),
    }
