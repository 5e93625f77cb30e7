"""Physical and control parameters, unit helpers, and drive-frequency protocol.

Internal unit convention: every rate and angular frequency is stored in
rad/ns and every time in ns.  Two conversion helpers cover the ways
laboratory numbers are quoted: ``mhz`` for ordinary frequencies nu (omega =
2*pi*nu) and ``angular_mhz`` for values already given as angular rates in
units of 10^6 rad/s.  The per-scenario display normalization tau is carried
separately by the experiment configs and never enters the dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

TWO_PI = 2.0 * math.pi

#: "much smaller than" cut used for the advisory smallness checks: a control
#: coefficient counts as small when it is at most this fraction of its bound.
SMALLNESS_RATIO = 0.1


def mhz(value: float) -> float:
    """Angular rate in rad/ns for a plain frequency quoted in MHz."""
    return TWO_PI * value * 1e-3


def ghz(value: float) -> float:
    """Angular rate in rad/ns for a plain frequency quoted in GHz."""
    return TWO_PI * value


def angular_mhz(value: float) -> float:
    """Rate in rad/ns for a value quoted directly as 10^6 rad/s."""
    return value * 1e-3


def per_us(value: float) -> float:
    """Rate in rad/ns for a value quoted in rad/us."""
    return value * 1e-3


class ParameterError(ValueError):
    """Raised when a parameter bundle violates a hard validity condition."""


@dataclass(frozen=True)
class PhysicalParams:
    """Oscillator, detection, feedback and (optionally) qubit constants.

    ``omega`` is the effective oscillator angular frequency; in qubit
    scenarios the per-eigenstate branches run at ``delta_od -/+ chi`` via
    :meth:`for_branch`.  All fields are rad/ns.  Instances are immutable
    after :func:`validate_params` and safe to share across threads.
    """

    omega: float
    gamma: float
    eta: float = 1.0
    k0: float = 0.0
    k1: float = 0.0
    k3: float = 0.0
    gamma2: float = 0.0
    chi: float = 0.0
    delta_od: float | None = None
    warnings: tuple[str, ...] = field(default=(), compare=False)
    smallness: tuple[tuple[str, float], ...] = field(default=(), compare=False)

    def for_branch(self, branch: str) -> "PhysicalParams":
        """Parameters of the oscillator conditioned on a qubit eigenstate.

        The ground branch runs at ``delta_od - chi`` and the excited branch
        at ``delta_od + chi``.
        """
        if self.delta_od is None:
            raise ParameterError("branch parameters need delta_od (qubit scenario)")
        if branch not in ("g", "e"):
            raise ParameterError(f"branch must be 'g' or 'e', got {branch!r}")
        sign = -1.0 if branch == "g" else 1.0
        return replace(self, omega=self.delta_od + sign * self.chi)

    @property
    def smallness_ok(self) -> bool:
        return not self.warnings


def _smallness_checks(p: PhysicalParams) -> tuple[tuple[tuple[str, float], ...], tuple[str, ...]]:
    """Advisory ratios k/bound for the branch-separation smallness conditions.

    The bounds require the feedback offset k0 and cubic gain k3 to be small
    against |omega^2 - k1*omega + gamma^2/4| / omega (plain oscillator) and
    against the analogous chi-expressions near the readout protocol point.
    Violations are warnings, never errors: the reference figure parameters
    themselves violate a strict reading.
    """
    checks: list[tuple[str, float]] = []
    warnings: list[str] = []

    def add(name: str, value: float, bound: float) -> None:
        if value == 0.0:
            return
        ratio = math.inf if bound == 0.0 else abs(value) / abs(bound)
        checks.append((name, ratio))
        if ratio > SMALLNESS_RATIO:
            warnings.append(
                f"{name} is not small against its branch-separation bound "
                f"(ratio {ratio:.3g} > {SMALLNESS_RATIO})"
            )

    if p.omega != 0.0:
        bound = (p.omega**2 - p.k1 * p.omega + p.gamma**2 / 4.0) / p.omega
        add("k0", p.k0, bound)
        add("k3", p.k3, bound)

    if p.chi != 0.0 and p.k1 > p.gamma:
        omega_star = bifurcation_threshold(p.k1, p.gamma)
        if omega_star != p.chi:
            bound = (p.chi**2 - 2 * p.chi * omega_star + p.k1 * p.chi) / (omega_star - p.chi)
            add("k0[readout]", p.k0, bound)
        bound = (p.chi**2 + 2 * p.chi * omega_star - p.k1 * p.chi) / (omega_star + p.chi)
        add("k3[readout]", p.k3, bound)

    return tuple(checks), tuple(warnings)


def bifurcation_threshold(k1: float, gamma: float) -> float:
    """omega* = (k1 - sqrt(k1^2 - gamma^2)) / 2; requires k1 >= gamma."""
    if k1 < gamma:
        raise ParameterError(f"k1 ({k1}) must be >= gamma ({gamma}) for a real omega*")
    return 0.5 * (k1 - math.sqrt(k1 * k1 - gamma * gamma))


def validate_params(raw: PhysicalParams | dict, require_bifurcation: bool = True) -> PhysicalParams:
    """Validate a parameter bundle and attach smallness flags.

    Accepts either a :class:`PhysicalParams` or a mapping of field values
    (already in rad/ns).  Hard errors: gamma <= 0, eta outside (0, 1],
    negative feedback coefficients, and k1 <= gamma when bifurcation
    analysis is requested.  Smallness-condition violations only populate
    ``warnings``.
    """
    if isinstance(raw, dict):
        p = PhysicalParams(**raw)
    else:
        p = raw
    if not (p.gamma > 0.0):
        raise ParameterError(f"gamma must be positive, got {p.gamma}")
    if not (0.0 < p.eta <= 1.0):
        raise ParameterError(f"eta must be in (0, 1], got {p.eta}")
    for name in ("k0", "k1", "k3"):
        if getattr(p, name) < 0.0:
            raise ParameterError(f"{name} must be >= 0, got {getattr(p, name)}")
    if p.gamma2 < 0.0:
        raise ParameterError(f"gamma2 must be >= 0, got {p.gamma2}")
    if require_bifurcation and p.k1 <= p.gamma:
        raise ParameterError(
            f"k1 ({p.k1}) must exceed gamma ({p.gamma}): omega* is undefined otherwise"
        )
    checks, warnings = _smallness_checks(p)
    return replace(p, smallness=checks, warnings=warnings)


def dispersive_reduce(omega_q: float, omega_o: float, g: float, omega_d: float) -> tuple[float, float]:
    """Reduce a detuned qubit-oscillator pair to (chi, delta_od).

    chi = g^2 / (omega_q - omega_o) is the qubit-state-dependent frequency
    shift and delta_od = omega_o - omega_d the oscillator-drive detuning.
    """
    detuning = omega_q - omega_o
    if detuning == 0.0:
        raise ParameterError("dispersive reduction undefined at zero qubit-oscillator detuning")
    return g * g / detuning, omega_o - omega_d


def drive_schedule(omega_o: float, omega_star: float, chi: float) -> tuple[float, float]:
    """Drive frequencies for the weak and strong measurement regimes.

    Weak drive omega_o - omega* + 2*chi puts both branch frequencies
    (omega* - 3*chi, omega* - chi) below the bifurcation point; the strong
    drive omega_o - omega* makes them straddle it (omega* -/+ chi).
    """
    return omega_o - omega_star + 2.0 * chi, omega_o - omega_star


@dataclass(frozen=True)
class QubitScenario:
    """Raw qubit-oscillator scenario before dispersive reduction.

    ``omega_d_schedule`` is a sequence of (switch_time, drive frequency)
    pairs; the first entry must start at t = 0.  ``initial_qubit`` is
    ``"ground"``, ``"excited"``, or a (rho_gg, rho_eg) pair describing a
    superposition (rho_eg may be complex).
    """

    omega_q: float
    omega_o: float
    g: float
    omega_d_schedule: tuple[tuple[float, float], ...]
    initial_qubit: str | tuple[float, complex] = "superposition"
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def validate(self) -> "QubitScenario":
        if not self.omega_d_schedule:
            raise ParameterError("omega_d_schedule must contain at least one entry")
        times = [t for t, _ in self.omega_d_schedule]
        if times[0] != 0.0:
            raise ParameterError("first drive-schedule entry must start at t=0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ParameterError("drive-schedule switch times must be strictly increasing")
        if self.omega_q == self.omega_o:
            raise ParameterError("zero qubit-oscillator detuning: dispersive regime undefined")
        if isinstance(self.initial_qubit, str):
            if self.initial_qubit not in ("ground", "excited", "superposition"):
                raise ParameterError(f"unknown initial_qubit {self.initial_qubit!r}")
        else:
            rho_gg, rho_eg = self.initial_qubit
            if not (0.0 <= rho_gg <= 1.0):
                raise ParameterError("rho_gg must lie in [0, 1]")
            if abs(rho_eg) ** 2 > rho_gg * (1.0 - rho_gg) + 1e-12:
                raise ParameterError("rho_eg violates positivity of the qubit state")
        warnings = []
        if abs(self.omega_q - self.omega_o) < 5.0 * abs(self.g):
            warnings.append(
                "dispersive validity is marginal: |omega_q - omega_o| < 5|g|"
            )
        return replace(self, warnings=tuple(warnings))

    @property
    def delta_qo(self) -> float:
        return self.omega_q - self.omega_o

    @property
    def chi(self) -> float:
        return self.g * self.g / self.delta_qo

    def reduced_segments(self) -> tuple[tuple[float, float, float], ...]:
        """Dispersive (start_time, chi, delta_od) for each drive segment."""
        out = []
        for t, omega_d in self.omega_d_schedule:
            chi, delta_od = dispersive_reduce(self.omega_q, self.omega_o, self.g, omega_d)
            out.append((t, chi, delta_od))
        return tuple(out)

    def population(self) -> tuple[float, complex]:
        """(rho_gg, rho_eg) of the initial qubit state."""
        if self.initial_qubit == "ground":
            return 1.0, 0.0 + 0.0j
        if self.initial_qubit == "excited":
            return 0.0, 0.0 + 0.0j
        if self.initial_qubit == "superposition":
            return 0.5, 0.5 + 0.0j
        rho_gg, rho_eg = self.initial_qubit
        return float(rho_gg), complex(rho_eg)
