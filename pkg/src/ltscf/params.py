"""Problem parameters and closed-form constants.

The solver works with the interpolation quotient

    ``|gamma|_op^(1-theta) * T(gamma)^theta / ||rho_gamma||_q``

where ``T`` is the kinetic trace of a fermionic density matrix (either the
fractional Dirichlet form or its Hardy-modified version) and
``theta = d(q-1)/(2sq)``.  This module holds the validated parameter tuple
``(d, s, q, theta, regime)`` together with every closed-form constant the
rest of the code needs:

* ``classical_constant``   -- the Thomas-Fermi (semiclassical) kinetic constant,
* ``dual_constant``        -- the potential-side constant obtained by duality,
* ``hardy_constant``       -- the sharp constant of the fractional Hardy
  inequality ``(-Delta)^s >= C_{d,s} |x|^{-2s}``,
* ``seminorm_coefficient`` -- the normalisation ``a_{d,s}`` of the singular
  double-integral representation of the fractional Dirichlet form.

Gamma functions are evaluated with ``math.gamma`` (a Lanczos-type
approximation, relative error well below 1e-13 in double precision).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

__all__ = [
    "Regime",
    "ParameterError",
    "ProblemParams",
    "theta_of",
    "admissible_q_interval",
    "unit_ball_volume",
    "classical_constant",
    "dual_constant",
    "hardy_constant",
    "seminorm_coefficient",
]


class Regime(str, Enum):
    """Which kinetic form the quotient uses."""

    LT = "LT"
    HLT = "HLT"


class ParameterError(ValueError):
    """Raised when a parameter tuple is outside its admissible range.

    ``code`` is a stable machine-readable identifier; endpoint violations get
    their own code (``q-endpoint``) because callers treat "excluded endpoint"
    differently from "out of range".
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _require(condition: bool, code: str, message: str) -> None:
    if not condition:
        raise ParameterError(code, message)


def theta_of(d: int, s: float, q: float) -> float:
    """Interpolation exponent ``theta = d(q-1)/(2sq)``.

    Raises
    ------
    ParameterError
        If ``d < 1``, ``s`` outside ``(0, 1]``, ``s >= d/2`` or ``q <= 1``.
    """
    _require(d >= 1 and int(d) == d, "d-range", f"dimension must be a positive integer, got {d}")
    _require(0.0 < s <= 1.0, "s-range", f"s must lie in (0, 1], got {s}")
    _require(s < d / 2.0, "s-range", f"s < d/2 violated (s={s}, d={d})")
    _require(q > 1.0, "q-range", f"q must exceed 1, got {q}")
    return d * (q - 1.0) / (2.0 * s * q)


def admissible_q_interval(d: int, s: float, regime: Regime | str = Regime.LT) -> tuple[float, float]:
    """Open interval of admissible Lebesgue exponents ``q``.

    The two regimes state the same interval in different forms:
    ``((d+2s)/d, d/(d-2s))`` for the plain kinetic form and
    ``(1+2s/d, 1+2s/(d-2s))`` for the Hardy form; the endpoints agree
    algebraically.  Both are mass-supercritical and energy-subcritical.
    """
    _require(d >= 1 and int(d) == d, "d-range", f"dimension must be a positive integer, got {d}")
    _require(0.0 < s <= 1.0, "s-range", f"s must lie in (0, 1], got {s}")
    _require(s < d / 2.0, "s-range", f"s < d/2 violated (s={s}, d={d})")
    if Regime(regime) is Regime.LT:
        return (d + 2.0 * s) / d, d / (d - 2.0 * s)
    return 1.0 + 2.0 * s / d, 1.0 + 2.0 * s / (d - 2.0 * s)


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in dimension ``d``."""
    _require(d >= 1 and int(d) == d, "d-range", f"dimension must be a positive integer, got {d}")
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def classical_constant(d: int) -> float:
    """Semiclassical kinetic constant ``K_cl(d) = d/(d+2) * (2*pi)^2 / |B_1|^(2/d)``."""
    volume = unit_ball_volume(d)
    return d / (d + 2.0) * (2.0 * math.pi) ** 2 / volume ** (2.0 / d)


def dual_constant(d: int, kinetic_constant: float) -> float:
    """Potential-side constant ``L(d) = (1 + d/2)^(-1) * [(1 + 2/d) K]^(-d/2)``."""
    _require(d >= 1 and int(d) == d, "d-range", f"dimension must be a positive integer, got {d}")
    _require(kinetic_constant > 0.0, "constant-positive", "kinetic constant must be positive")
    return ((1.0 + 2.0 / d) * kinetic_constant) ** (-d / 2.0) / (1.0 + d / 2.0)


def hardy_constant(d: int, s: float) -> float:
    """Sharp Hardy constant ``C_{d,s} = 2^(2s) Gamma^2((d+2s)/4) / Gamma^2((d-2s)/4)``."""
    _require(d >= 1 and int(d) == d, "d-range", f"dimension must be a positive integer, got {d}")
    _require(0.0 < s < d / 2.0, "s-range", f"hardy constant needs 0 < s < d/2 (s={s}, d={d})")
    ratio = math.gamma((d + 2.0 * s) / 4.0) / math.gamma((d - 2.0 * s) / 4.0)
    return 2.0 ** (2.0 * s) * ratio * ratio


def seminorm_coefficient(d: int, s: float) -> float:
    """Coefficient ``a_{d,s}`` of the singular-kernel form of ``(-Delta)^s``.

    ``a_{d,s} = 2^(2s) Gamma((d+2s)/2) / (pi^(d/2) |Gamma(-s)|)``; the
    representation only exists for ``s`` strictly inside ``(0, 1)``, so
    ``s = 1`` is rejected.  ``|Gamma(-s)| = Gamma(1-s)/s`` for ``s`` in (0,1).
    """
    _require(d >= 1 and int(d) == d, "d-range", f"dimension must be a positive integer, got {d}")
    _require(0.0 < s < 1.0, "s-range", f"a_(d,s) is defined for s in (0,1) only, got s={s}")
    abs_gamma_minus_s = math.gamma(1.0 - s) / s
    return 2.0 ** (2.0 * s) * math.gamma((d + 2.0 * s) / 2.0) / (
        math.pi ** (d / 2.0) * abs_gamma_minus_s
    )


# Relative slack used to distinguish "at an excluded endpoint" from merely
# "outside the range" when validating q.
_ENDPOINT_RTOL = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    """Validated tuple ``(d, s, q, theta, regime)``.

    ``theta`` is derived from the other fields; passing an inconsistent value
    raises.  The admissible ``q`` range is the open mass-supercritical /
    energy-subcritical interval; its endpoints are rejected with the distinct
    error code ``q-endpoint`` because the solver's normalisation degenerates
    there (the theorems exclude endpoints even though the closed interval of
    theta values is meaningful).
    """

    d: int
    s: float
    q: float
    regime: Regime = Regime.LT
    theta: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        theta = theta_of(self.d, self.s, self.q)  # validates d, s, q > 1
        lo, hi = admissible_q_interval(self.d, self.s, self.regime)
        for endpoint in (lo, hi):
            _require(
                abs(self.q - endpoint) > _ENDPOINT_RTOL * endpoint,
                "q-endpoint",
                f"q = {self.q} sits at an excluded endpoint of ({lo}, {hi})",
            )
        _require(
            lo < self.q < hi,
            "q-range",
            f"q = {self.q} outside the admissible interval ({lo}, {hi}) "
            f"for d={self.d}, s={self.s}, regime={self.regime.value}",
        )
        if self.theta is None:
            object.__setattr__(self, "theta", theta)
        else:
            _require(
                abs(self.theta - theta) <= 1e-12 * max(1.0, abs(theta)),
                "theta-mismatch",
                f"theta={self.theta} inconsistent with d(q-1)/(2sq)={theta}",
            )

    @property
    def hardy(self) -> bool:
        return self.regime is Regime.HLT

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "s": self.s,
            "q": self.q,
            "theta": self.theta,
            "regime": self.regime.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemParams":
        return cls(
            d=int(data["d"]),
            s=float(data["s"]),
            q=float(data["q"]),
            regime=Regime(data.get("regime", "LT")),
        )
