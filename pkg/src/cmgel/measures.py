"""Finite-support probability mass functions on the naturals.

Everything downstream (degree distributions, activated-arm laws, offspring
laws) is a truncated pmf.  Support is always finite; named constructors
record how much tail mass the truncation discarded.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Pmf",
    "poisson",
    "binomial",
    "point_mass",
    "from_dict",
    "parse_dist",
    "borel_pmf",
]

DEFAULT_KMAX = 256

# switch factorial/power products to log-space above this index
_LOG_SPACE_M = 30


class DegenerateInputError(ValueError):
    """Raised when an operation requires positive mean (e.g. size-bias of delta_0)."""


class Pmf:
    """Probability mass function with finite support {0, ..., k_max}.

    Immutable by convention: no method mutates ``weights`` in place.

    Parameters
    ----------
    weights : array-like of nonnegative reals, index = outcome k.
    normalize : divide by the total mass (default). With ``normalize=False``
        the weights are stored as-is; this is used for convolution powers
        where truncation may have removed mass and renormalizing would
        distort the exact low-order entries.
    truncation_loss : tail mass discarded by the constructor, for reporting.
    """

    __slots__ = ("weights", "truncation_loss")

    def __init__(self, weights, normalize: bool = True, truncation_loss: float = 0.0):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = float(w.sum())
        if normalize:
            if total <= 0:
                raise ValueError("cannot normalize zero mass")
            w = w / total
        # drop trailing zeros but keep at least index 0
        nz = np.nonzero(w)[0]
        k_hi = int(nz[-1]) if nz.size else 0
        self.weights = w[: k_hi + 1].copy()
        self.weights.setflags(write=False)
        self.truncation_loss = float(truncation_loss)

    # -- basic protocol -------------------------------------------------

    @property
    def k_max(self) -> int:
        return len(self.weights) - 1

    def __call__(self, k: int) -> float:
        if 0 <= k <= self.k_max:
            return float(self.weights[k])
        return 0.0

    def __len__(self) -> int:
        return len(self.weights)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pmf):
            return NotImplemented
        n = max(len(self.weights), len(other.weights))
        a = np.zeros(n)
        b = np.zeros(n)
        a[: len(self.weights)] = self.weights
        b[: len(other.weights)] = other.weights
        return bool(np.array_equal(a, b))

    def __repr__(self) -> str:
        head = ", ".join(f"{k}: {w:.4g}" for k, w in enumerate(self.weights[:6]))
        tail = ", ..." if len(self.weights) > 6 else ""
        return f"Pmf({{{head}{tail}}})"

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    # -- generating function and moments --------------------------------

    def pgf(self, x: float) -> float:
        """Evaluate sum_k w(k) x^k for x in [0, 1]."""
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"pgf argument must be in [0, 1], got {x}")
        # Horner; weights are short arrays
        acc = 0.0
        for w in self.weights[::-1]:
            acc = acc * x + w
        return float(acc)

    def pgf_derivative(self, x: float, order: int = 1) -> float:
        """Evaluate the order-th derivative of the pgf at x in [0, 1]."""
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"argument must be in [0, 1], got {x}")
        k = np.arange(len(self.weights), dtype=float)
        coef = self.weights.copy()
        for j in range(order):
            coef = coef * (k - j)
        coef = np.where(coef < 0, 0.0, coef)  # negative factors zeroed with weight 0
        ks = np.maximum(k - order, 0)
        mask = k >= order
        return float(np.sum(coef[mask] * x ** ks[mask]))

    def factorial_moment(self, i: int) -> float:
        """i-th factorial moment sum_k k(k-1)...(k-i+1) w(k); exact finite sum."""
        if i < 0:
            raise ValueError("moment order must be >= 0")
        k = np.arange(len(self.weights), dtype=float)
        prod = np.ones_like(k)
        for j in range(i):
            prod = prod * (k - j)
        prod = np.where(prod < 0, 0.0, prod)
        return float(np.sum(prod * self.weights))

    @property
    def m1(self) -> float:
        return self.factorial_moment(1)

    @property
    def m2(self) -> float:
        return self.factorial_moment(2)

    @property
    def m3(self) -> float:
        return self.factorial_moment(3)

    @property
    def gamma(self) -> float:
        """m2 - m1: the criticality parameter of the configuration model."""
        return self.m2 - self.m1

    # -- transforms ------------------------------------------------------

    def size_biased_shift(self) -> "Pmf":
        """Size-biased, shifted-by-one law: hat(k) = (k+1) w(k+1) / m1."""
        mean = self.m1
        if mean <= 0:
            raise DegenerateInputError("size-biased shift requires positive mean")
        k = np.arange(1, len(self.weights), dtype=float)
        shifted = k * self.weights[1:] / mean
        if shifted.size == 0:
            shifted = np.array([1.0])
        return Pmf(shifted, normalize=False, truncation_loss=self.truncation_loss)

    def convolve_power(self, m: int, support_cap: int | None = None) -> "Pmf":
        """m-fold convolution power, support capped.

        Entries up to the cap are exact provided the base support was not
        itself truncated below the cap.  Mass pushed past the cap is
        reported through ``truncation_loss`` (weights are NOT renormalized).
        """
        if m < 1:
            raise ValueError("convolution power requires m >= 1")
        if support_cap is None:
            support_cap = min(m * self.k_max, 1 << 16)
        cap = support_cap + 1
        result = np.zeros(1)
        result[0] = 1.0
        base = np.asarray(self.weights)
        e = m
        while e > 0:  # binary exponentiation of the convolution
            if e & 1:
                result = np.convolve(result, base)[:cap]
            e >>= 1
            if e:
                base = np.convolve(base, base)[:cap]
        loss = max(0.0, 1.0 - float(result.sum()))
        return Pmf(result, normalize=False, truncation_loss=loss)

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {"weights": [float(w) for w in self.weights]}

    @classmethod
    def from_json(cls, obj: dict) -> "Pmf":
        return cls(obj["weights"])


def gamma_param(pi: Pmf) -> float:
    """m2 - m1 of pi; positive iff the configuration model is supercritical."""
    return pi.gamma


# -- named constructors ---------------------------------------------------


def poisson(lam: float, k_max: int = DEFAULT_KMAX) -> Pmf:
    """Poisson(lam) truncated at k_max, renormalized; tail loss recorded."""
    if lam < 0:
        raise ValueError("rate must be nonnegative")
    k = np.arange(k_max + 1)
    logw = k * math.log(lam) - lam - np.array([math.lgamma(i + 1) for i in k]) if lam > 0 else None
    if lam == 0:
        return Pmf([1.0])
    w = np.exp(logw)
    loss = max(0.0, 1.0 - float(w.sum()))
    return Pmf(w, truncation_loss=loss)


def binomial(n: int, p: float) -> Pmf:
    """Binomial(n, p); exact, support 0..n."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    k = np.arange(n + 1)
    logc = np.array([math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1) for i in k])
    with np.errstate(divide="ignore"):
        w = np.exp(
            logc
            + np.where(k > 0, k * np.log(p if p > 0 else 1.0), 0.0)
            + np.where(n - k > 0, (n - k) * np.log1p(-p if p < 1 else 0.0), 0.0)
        )
    if p == 0:
        w = np.zeros(n + 1)
        w[0] = 1.0
    elif p == 1:
        w = np.zeros(n + 1)
        w[n] = 1.0
    return Pmf(w)


def point_mass(d: int) -> Pmf:
    """delta_d."""
    if d < 0:
        raise ValueError("support point must be >= 0")
    w = np.zeros(d + 1)
    w[d] = 1.0
    return Pmf(w)


def from_dict(entries: dict[int, float]) -> Pmf:
    """Pmf from a {outcome: weight} mapping."""
    k_hi = max(entries)
    w = np.zeros(k_hi + 1)
    for k, v in entries.items():
        w[k] = v
    return Pmf(w)


def parse_dist(spec: str) -> Pmf:
    """Parse a distribution spec string.

    Formats: "poisson:LAM", "delta:D", "binomial:N:P".
    """
    parts = spec.strip().lower().split(":")
    name = parts[0]
    try:
        if name == "poisson":
            return poisson(float(parts[1]))
        if name == "delta":
            return point_mass(int(parts[1]))
        if name == "binomial":
            return binomial(int(parts[1]), float(parts[2]))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed distribution spec {spec!r}") from exc
    raise ValueError(f"unknown distribution {name!r} in spec {spec!r}")


# -- Borel distribution ----------------------------------------------------


def borel_pmf(lam: float, m: int) -> float:
    """Borel(lam) pmf: (lam*m)^(m-1) e^(-lam*m) / m!.

    The total-progeny law of a Poisson(lam) branching process; a probability
    distribution for lam <= 1.  Log-space for large m to avoid overflow.
    """
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"Borel parameter must be in (0, 1], got {lam}")
    if m < 1:
        raise ValueError("mass must be >= 1")
    if m <= _LOG_SPACE_M:
        return (lam * m) ** (m - 1) * math.exp(-lam * m) / math.factorial(m)
    logp = (m - 1) * math.log(lam * m) - lam * m - math.lgamma(m + 1)
    return math.exp(logp)
