"""Deterministic limit theory: coagulation ODEs with limited aggregations,
the gelation time, the post-gel tilt Q(t), limit concentrations.

Two truncated infinite ODE systems are integrated over the (free arms a,
mass m) window:

* unmodified:  dc(p)/dt = gain(p)/2 - a c(p) A_t,   A_t = <c_t, a>;
* modified:    dc(p)/dt = gain(p)/(2 A_t) - a c(p),

with gain(a,m) = sum over a', m' of a' (a+2-a') c(a',m') c(a+2-a', m-m').
The modified system is the unmodified one run at unit total ring rate: the
time change s'(t) = A_{s(t)} maps one onto the other.  The loss rate in the
modified system is a c(p): a cluster leaves its state when any one of its a
free arms rings, and rings arrive at unit rate per arm.

Mass pushed beyond the truncation window is routed into an overflow bucket
so that window mass plus overflow is conserved exactly by the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .measures import Pmf

__all__ = [
    "OdeState",
    "OdeTrajectory",
    "LimitState",
    "monodisperse_state",
    "integrate_modified",
    "integrate_unmodified",
    "time_change",
    "t_gel",
    "solve_Q",
    "limit_state",
    "solve_tilt",
    "limiting_concentration",
]

DEFAULT_A_MAX = 64
DEFAULT_M_MAX = 400
A_FLOOR = 1e-12


@dataclass
class OdeState:
    """Concentration window c[a, m], a = free arms, m = mass (column 0 unused)."""

    c: np.ndarray
    t: float = 0.0
    overflow_mass: float = 0.0

    @property
    def a_max(self) -> int:
        return self.c.shape[0] - 1

    @property
    def m_max(self) -> int:
        return self.c.shape[1] - 1

    @property
    def arm_count(self) -> float:
        """A_t = <c, a>."""
        a = np.arange(self.c.shape[0])
        return float(a @ self.c.sum(axis=1))

    @property
    def window_mass(self) -> float:
        m = np.arange(self.c.shape[1])
        return float(self.c.sum(axis=0) @ m)

    @property
    def total_mass(self) -> float:
        return self.window_mass + self.overflow_mass


def monodisperse_state(mu: Pmf, a_max: int = DEFAULT_A_MAX, m_max: int = DEFAULT_M_MAX) -> OdeState:
    """c_0(a, 1) = mu(a): every cluster is a single particle."""
    c = np.zeros((a_max + 1, m_max + 1))
    hi = min(a_max, mu.k_max)
    c[: hi + 1, 1] = mu.weights[: hi + 1]
    return OdeState(c=c)


@dataclass
class OdeTrajectory:
    times: np.ndarray  # recorded states
    states: np.ndarray  # (n_rec, a_max+1, m_max+1)
    overflow: np.ndarray  # per record
    fine_times: np.ndarray  # every integrator step
    fine_A: np.ndarray  # A_t at every step
    halted: bool  # True when A_t hit the positivity floor

    def state_at(self, t: float) -> OdeState:
        """Linear interpolation between recorded states."""
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise ValueError(f"time {t} outside recorded range")
        i = int(np.searchsorted(self.times, t))
        i = min(max(i, 1), len(self.times) - 1)
        t0, t1 = self.times[i - 1], self.times[i]
        w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        c = (1 - w) * self.states[i - 1] + w * self.states[i]
        ov = (1 - w) * self.overflow[i - 1] + w * self.overflow[i]
        return OdeState(c=c, t=t, overflow_mass=float(ov))

    def A_at(self, t: float) -> float:
        return float(np.interp(t, self.fine_times, self.fine_A))


def _rhs(c, modified: bool):
    """Returns (dc, overflow_mass_rate, A)."""
    a_dim, m_dim = c.shape
    a = np.arange(a_dim)[:, None]
    d = a * c
    big_a = float(d.sum())
    conv = fftconvolve(d, d)
    conv = np.maximum(conv, 0.0)  # fft noise
    gain = np.zeros_like(c)
    # new cluster (a, m) comes from total arm index a + 2 in the convolution
    hi = min(a_dim - 1, conv.shape[0] - 3)
    gain[: hi + 1, :] = conv[2 : hi + 3, :m_dim]
    m_conv = np.arange(conv.shape[1])
    total_gain_mass = float((conv @ m_conv).sum())
    inside_gain_mass = float((gain * np.arange(m_dim)).sum())
    spill = total_gain_mass - inside_gain_mass
    if modified:
        dc = gain / (2.0 * big_a) - a * c
        ov_rate = spill / (2.0 * big_a)
    else:
        dc = gain / 2.0 - a * c * big_a
        ov_rate = spill / 2.0
    return dc, ov_rate, big_a


def _integrate(c0: OdeState, t_max: float, dt: float, modified: bool, record_dt: float) -> OdeTrajectory:
    c = c0.c.copy()
    ov = c0.overflow_mass
    t = c0.t
    n_steps = int(round((t_max - t) / dt))
    record_every = max(1, int(round(record_dt / dt)))

    times = [t]
    states = [c.copy()]
    overflow = [ov]
    fine_times = [t]
    fine_A = [OdeState(c=c).arm_count]
    halted = False

    for step in range(n_steps):
        k1, o1, a_now = _rhs(c, modified)
        if a_now < A_FLOOR:
            halted = True
            break
        k2, o2, _ = _rhs(c + 0.5 * dt * k1, modified)
        k3, o3, _ = _rhs(c + 0.5 * dt * k2, modified)
        k4, o4, _ = _rhs(c + dt * k3, modified)
        c = c + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        ov = ov + (dt / 6.0) * (o1 + 2 * o2 + 2 * o3 + o4)
        np.clip(c, 0.0, None, out=c)  # RK4 round-off can graze below zero
        t = c0.t + (step + 1) * dt
        fine_times.append(t)
        fine_A.append(OdeState(c=c).arm_count)
        if (step + 1) % record_every == 0 or step == n_steps - 1:
            times.append(t)
            states.append(c.copy())
            overflow.append(ov)

    return OdeTrajectory(
        times=np.array(times),
        states=np.array(states),
        overflow=np.array(overflow),
        fine_times=np.array(fine_times),
        fine_A=np.array(fine_A),
        halted=halted,
    )


def integrate_modified(c0: OdeState, t_max: float, dt: float = 1e-3, record_dt: float = 5e-3) -> OdeTrajectory:
    """Integrate the unit-ring-rate system with classical fixed-step RK4."""
    if c0.arm_count <= 0:
        raise ValueError("initial state must carry free arms")
    return _integrate(c0, t_max, dt, modified=True, record_dt=record_dt)


def integrate_unmodified(c0: OdeState, t_max: float, dt: float = 1e-3, record_dt: float = 5e-3) -> OdeTrajectory:
    """Integrate the pair-rate system (multiplicative arm kernel)."""
    if c0.arm_count <= 0:
        raise ValueError("initial state must carry free arms")
    return _integrate(c0, t_max, dt, modified=False, record_dt=record_dt)


@dataclass
class TimeChange:
    """Reparameterization t -> s(t) with s'(t) = A_{s(t)} over a modified run."""

    times: np.ndarray
    s: np.ndarray
    source: OdeTrajectory

    def state_at(self, t: float) -> OdeState:
        s_t = float(np.interp(t, self.times, self.s))
        st = self.source.state_at(s_t)
        st.t = t
        return st


def time_change(modified_traj: OdeTrajectory, dt: float = 1e-3) -> TimeChange:
    """Solve s'(t) = A_{s(t)}, s(0) = 0, over the recorded trajectory.

    The result maps the modified solution onto the unmodified one:
    state_at(t) approximates the unmodified solution at time t.
    """
    src = modified_traj

    def a_of(s):
        return src.A_at(min(s, src.fine_times[-1]))

    s = float(src.fine_times[0])
    t = 0.0
    ts = [t]
    ss = [s]
    s_end = float(src.fine_times[-1])
    while s < s_end - 1e-9:
        k1 = a_of(s)
        k2 = a_of(s + 0.5 * dt * k1)
        k3 = a_of(s + 0.5 * dt * k2)
        k4 = a_of(s + dt * k3)
        step = (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if s + step > s_end:
            break
        s += step
        t += dt
        ts.append(t)
        ss.append(s)
    return TimeChange(times=np.array(ts), s=np.array(ss), source=src)


def t_gel(mu: Pmf) -> float:
    """-log(1 - m1/m2) when m2 > m1, else +inf (no gelation)."""
    m1, m2 = mu.m1, mu.m2
    if m1 <= 0:
        raise ValueError("gelation time requires a positive mean degree")
    if m2 <= m1:
        return math.inf
    return -math.log1p(-m1 / m2)


def _bisect(f, lo, hi, tol=1e-12, max_iter=200):
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ArithmeticError(
            f"bisection bracket failure: f({lo}) = {flo:.3e}, f({hi}) = {fhi:.3e}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or hi - lo < tol:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def solve_Q(mu: Pmf, t: float) -> float:
    """Post-gel tilt: the root of (Q - e^{-t}) G'_nu(Q) = G_nu(Q), nu the
    size-biased shift of mu; equals 1 before the gelation time."""
    if mu.m1 <= 0:
        raise ValueError("requires a positive mean degree")
    tg = t_gel(mu)
    if t <= tg:
        return 1.0
    nu = mu.size_biased_shift()
    e = math.exp(-t)

    def f(q):
        return (q - e) * nu.pgf_derivative(q) - nu.pgf(q)

    # f(e) = -G_nu(e) <= 0 and f(1) = (1 - e) m1_nu - 1 > 0 past the gel time
    return _bisect(f, e, 1.0)


@dataclass
class LimitState:
    """Large-N solution state at a fixed time."""

    t: float
    Q: float
    n: float  # fraction of particles still in solution
    psi: np.ndarray  # psi[k, r]: activated-arm count k, degree r, sums to n
    pi: Pmf  # bound-arm (graph degree) law of in-solution particles


def limit_state(mu: Pmf, t: float) -> LimitState:
    """Closed-form state: Q(t), n_t = G_mu(Q), the (k, r) table and pi_t."""
    q = solve_Q(mu, t)
    e = math.exp(-t)
    n = mu.pgf(q)
    r_dim = mu.k_max + 1
    psi = np.zeros((r_dim, r_dim))
    x = q - e
    for r in range(r_dim):
        w = mu(r)
        if w == 0.0:
            continue
        for k in range(r + 1):
            psi[k, r] = w * math.comb(r, k) * x ** k * e ** (r - k)
    pi = Pmf(psi.sum(axis=1) / n)
    return LimitState(t=t, Q=q, n=n, psi=psi, pi=pi)


def solve_tilt(nu: Pmf) -> tuple[float, float]:
    """Solve c G'_nu(c) = G_nu(c) on (0, 1); returns (c, beta = 1/G'_nu(c))."""
    if nu(0) <= 0:
        raise ValueError("tilt equation needs nu(0) > 0")
    if nu.m1 <= 1:
        raise ValueError("tilt equation needs a supercritical branching law (mean > 1)")

    def f(c):
        return c * nu.pgf_derivative(c) - nu.pgf(c)

    c = _bisect(f, 1e-15, 1.0 - 1e-12)
    beta = 1.0 / nu.pgf_derivative(c)
    if beta <= 1.0:
        raise ArithmeticError(f"tilt beta = {beta} should exceed 1")
    return c, beta


def limiting_concentration(mu: Pmf, m: int) -> float:
    """Final concentration of fully bound clusters of mass m >= 2.

    Supercritical degree laws (m2 > m1) carry the extra beta^{m-1} tilt.
    The leading m1 factor converts the unit-mean hitting-time identity to
    concentrations per particle; without it the masses m * c(0, m) of a
    subcritical law would not sum to one.
    """
    if m < 2:
        raise ValueError("defined for m >= 2 (the m = 1 entry is mu(0))")
    nu = mu.size_biased_shift()
    conv = nu.convolve_power(m, support_cap=m)
    base = mu.m1 * conv(m - 2) / (m * (m - 1))
    if base > 0.0 and mu.gamma > 0:
        _, beta = solve_tilt(nu)
        base *= beta ** (m - 1)
    return base
