"""Power-law stepsizes, bandwidths and averaging weights.

A ``PowerSequence`` is ``value(n) = constant * n**(-exponent)``; such a
sequence is regularly varying with index ``-exponent`` in the sense
``n * (1 - value(n-1)/value(n)) -> -exponent``.

``ScheduleConfig`` bundles the three decay exponents with their constants and
enforces the admissible region

    alpha in (3/4, 1]
    a     in (1 - alpha, (4*alpha - 3)/2)   (nonempty only for alpha > 5/6)
    q     <  min(1 - 2a, (1 + a)/2)

The stepsize sum condition (n * gamma_n must dominate the log of the partial
sums) holds automatically for alpha < 1; at alpha = 1 it is a genuine limit
statement that cannot be checked at finite n and is taken as given here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PowerSequence",
    "ScheduleConfig",
    "Violation",
    "ValidationError",
    "validate_exponents",
]


class ValidationError(ValueError):
    """A configuration violates one of the admissibility constraints."""


@dataclass(frozen=True)
class Violation:
    constraint: str
    actual: float
    bound: str

    @property
    def message(self) -> str:
        return f"{self.constraint}: value {self.actual!r} violates {self.bound}"


@dataclass(frozen=True)
class PowerSequence:
    constant: float
    exponent: float

    def __post_init__(self):
        if self.constant <= 0:
            raise ValueError("constant must be positive")

    def value(self, n):
        n_arr = np.asarray(n)
        if np.any(n_arr < 1):
            raise ValueError("n must be >= 1")
        out = self.constant * np.asarray(n, dtype=float) ** (-self.exponent)
        return out if out.ndim else float(out)

    def partial_sum(self, n: int) -> float:
        """Sum of value(k) for k = 1..n by direct summation."""
        if self.exponent >= 1:
            raise ValueError("partial_sum requires exponent < 1")
        if n < 1:
            raise ValueError("n must be >= 1")
        return float(np.sum(self.value(np.arange(1, n + 1))))


def validate_exponents(alpha: float, a: float, q: float) -> list[Violation]:
    """Check (alpha, a, q) against the admissible region; empty list if ok."""
    violations = []
    if not (0.75 < alpha <= 1.0):
        violations.append(
            Violation("stepsize_exponent", alpha, "alpha in (3/4, 1]")
        )
    else:
        lo, hi = 1.0 - alpha, (4.0 * alpha - 3.0) / 2.0
        if hi <= lo:
            violations.append(
                Violation(
                    "bandwidth_interval_empty",
                    a,
                    f"(1-alpha, (4*alpha-3)/2) = ({lo:g}, {hi:g}) is empty; "
                    "need alpha > 5/6",
                )
            )
        elif not (lo < a < hi):
            violations.append(
                Violation("bandwidth_exponent", a, f"a in ({lo:g}, {hi:g})")
            )
    q_bound = min(1.0 - 2.0 * a, (1.0 + a) / 2.0)
    if not q < q_bound:
        violations.append(
            Violation(
                "weight_exponent",
                q,
                f"q < min(1-2a, (1+a)/2) = {q_bound:g}",
            )
        )
    return violations


@dataclass(frozen=True)
class ScheduleConfig:
    alpha: float = 1.0
    a: float = 0.3
    q: float = 0.1
    c: float = 1.0
    c_prime: float = 1.0
    gamma0: float = 1.0

    @property
    def stepsizes(self) -> PowerSequence:
        return PowerSequence(self.gamma0, self.alpha)

    @property
    def bandwidths(self) -> PowerSequence:
        return PowerSequence(self.c, self.a)

    @property
    def weights(self) -> PowerSequence:
        return PowerSequence(self.c_prime, self.q)

    def stepsize(self, n):
        return self.stepsizes.value(n)

    def bandwidth(self, n):
        return self.bandwidths.value(n)

    def weight(self, n):
        return self.weights.value(n)

    def validate(self) -> list[Violation]:
        violations = validate_exponents(self.alpha, self.a, self.q)
        for label, v in (("c", self.c), ("c_prime", self.c_prime),
                         ("gamma0", self.gamma0)):
            if v <= 0:
                violations.append(Violation(f"positive_{label}", v, f"{label} > 0"))
        return violations

    def ensure_valid(self) -> "ScheduleConfig":
        violations = self.validate()
        if violations:
            raise ValidationError("; ".join(v.message for v in violations))
        return self
