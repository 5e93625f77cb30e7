"""Fixed points, stability, parameter sweeps, and dephasing-rate analysis.

The mean-field flow of the monitored oscillator under the cubic record
feedback is

    x' = -gamma/2 * x + omega * p
    p' = -(omega - k1) * x - k3 * x**3 - gamma/2 * p + k0

Eliminating p = gamma*x/(2*omega) reduces stationarity to a real cubic in x,
solved here in closed form with a Newton polish.  Stability is read off the
2x2 Jacobian.  A pitchfork opens at omega* = (k1 - sqrt(k1^2 - gamma^2))/2;
for k0 > 0 it is an imperfect pitchfork, so the second stable branch only
appears at a saddle-node slightly above omega*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import ParameterError, PhysicalParams, bifurcation_threshold

#: eigenvalue real parts must be below -STABILITY_MARGIN to count as stable
STABILITY_MARGIN = 1e-9

#: relative residual target for the Newton polish of cubic roots
RESIDUAL_TARGET = 1e-12

#: imaginary parts below this (times max(1, |x|)) are treated as real roots
IMAG_CUT = 1e-9


@dataclass(frozen=True)
class FixedPoint:
    """Equilibrium of the mean-field flow with its stability classification."""

    x: float
    p: float
    stability: str  # "stable" | "unstable"
    branch_label: str  # "central" | "upper" | "lower"
    residual: float
    marginal: bool = False

    @property
    def stable(self) -> bool:
        return self.stability == "stable"


def bifurcation_point(k1: float, gamma: float) -> float:
    """Pitchfork threshold omega* = (k1 - sqrt(k1^2 - gamma^2)) / 2."""
    if k1 <= gamma:
        raise ParameterError(f"bifurcation point needs k1 > gamma (got k1={k1}, gamma={gamma})")
    return bifurcation_threshold(k1, gamma)


def _mean_field_rhs(x: float, p: float, omega: float, gamma: float,
                    k0: float, k1: float, k3: float) -> tuple[float, float]:
    return (
        -0.5 * gamma * x + omega * p,
        -(omega - k1) * x - k3 * x**3 - 0.5 * gamma * p + k0,
    )


def _cubic_roots(c3: float, c1: float, c0: float) -> list[float]:
    """Real roots of c3*x^3 + c1*x + c0 = 0 with c3 > 0, via the depressed form.

    Uses the trigonometric branch for three real roots and Cardano otherwise;
    every root is polished with Newton steps on the original polynomial.
    """
    p = c1 / c3
    q = c0 / c3
    roots: list[float]
    if p == 0.0 and q == 0.0:
        roots = [0.0]
    elif p == 0.0:
        roots = [math.copysign(abs(q) ** (1.0 / 3.0), -q)]
    else:
        disc = -4.0 * p**3 - 27.0 * q**2
        if disc > 0.0:
            # three real roots
            m = 2.0 * math.sqrt(-p / 3.0)
            arg = 3.0 * q / (p * m)
            arg = min(1.0, max(-1.0, arg))
            theta = math.acos(arg) / 3.0
            roots = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
        else:
            half_q = -0.5 * q
            s = math.sqrt(max(q**2 / 4.0 + p**3 / 27.0, 0.0))
            u = half_q + s
            v = half_q - s
            cbrt = lambda z: math.copysign(abs(z) ** (1.0 / 3.0), z)
            roots = [cbrt(u) + cbrt(v)]

    def f(x):
        return c3 * x**3 + c1 * x + c0

    def fprime(x):
        return 3.0 * c3 * x**2 + c1

    polished = []
    for x in roots:
        scale = max(1.0, abs(x))
        for _ in range(50):
            if abs(f(x)) <= RESIDUAL_TARGET * max(abs(c3) * scale**3, abs(c0), 1e-300):
                break
            d = fprime(x)
            if d == 0.0:
                break
            x -= f(x) / d
        polished.append(x)
    return sorted(polished)


def fixed_points(omega: float, gamma: float, k0: float, k1: float, k3: float) -> list[FixedPoint]:
    """All mean-field equilibria, ordered ascending in x, with stability.

    Stationarity with p = gamma*x/(2*omega) gives
    -k3*x^3 + (k1 - omega - gamma^2/(4*omega))*x + k0 = 0; k3 = 0 falls back
    to the linear single root.  Classification uses the Jacobian eigenvalues
    with a conservative margin: marginal points are labeled unstable.
    """
    if omega == 0.0:
        raise ParameterError(
            "omega = 0 makes the p-elimination singular; the flow then has the "
            f"degenerate axis fixed point (x, p) = (0, {2.0 * k0 / gamma!r})"
        )
    if gamma <= 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    c1 = k1 - omega - gamma**2 / (4.0 * omega)
    if k3 == 0.0:
        if c1 == 0.0:
            raise ParameterError("degenerate linear system: k3 = 0 and k1 - omega - gamma^2/(4*omega) = 0")
        xs = [-k0 / c1]
    else:
        # -k3 x^3 + c1 x + k0 = 0  ->  k3 x^3 - c1 x - k0 = 0
        xs = _cubic_roots(k3, -c1, -k0)

    points = []
    for x in xs:
        p = gamma * x / (2.0 * omega)
        jac = np.array([
            [-0.5 * gamma, omega],
            [k1 - omega - 3.0 * k3 * x**2, -0.5 * gamma],
        ])
        eig_real = np.linalg.eigvals(jac).real
        top = float(eig_real.max())
        stable = top < -STABILITY_MARGIN
        marginal = abs(top) <= STABILITY_MARGIN
        fx, fp = _mean_field_rhs(x, p, omega, gamma, k0, k1, k3)
        scale = max(1.0, abs(x), abs(p)) * max(gamma, abs(omega), k1, 1.0)
        residual = math.hypot(fx, fp) / scale
        points.append(FixedPoint(
            x=x, p=p,
            stability="stable" if stable else "unstable",
            branch_label="central",
            residual=residual,
            marginal=marginal,
        ))

    if len(points) == 3:
        points[0] = _relabel(points[0], "lower")
        points[2] = _relabel(points[2], "upper")
    return points


def _relabel(fp: FixedPoint, label: str) -> FixedPoint:
    return FixedPoint(fp.x, fp.p, fp.stability, label, fp.residual, fp.marginal)


@dataclass(frozen=True)
class BifurcationDiagram:
    """Fixed points per swept omega plus the stable-count transition marks."""

    omegas: np.ndarray
    points: tuple[tuple[FixedPoint, ...], ...]
    transitions: tuple[float, ...]  # grid omegas where the stable count changes

    def stable_counts(self) -> np.ndarray:
        return np.array([sum(fp.stable for fp in fps) for fps in self.points])

    def rows(self):
        for omega, fps in zip(self.omegas, self.points):
            for fp in fps:
                yield omega, fp.x, fp.p, fp.stability, fp.branch_label

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("omega,x_fp,p_fp,stability,branch_label\n")
            for omega, x, p, stab, label in self.rows():
                fh.write(f"{omega:.17g},{x:.17g},{p:.17g},{stab},{label}\n")


def sweep_bifurcation(params: PhysicalParams, omega_min: float, omega_max: float,
                      n_points: int) -> BifurcationDiagram:
    """Atlas of fixed points over an omega grid (grid must avoid omega = 0)."""
    if n_points < 2:
        raise ParameterError("sweep needs a grid of at least 2 points")
    omegas = np.linspace(omega_min, omega_max, n_points)
    all_points = []
    for omega in omegas:
        all_points.append(tuple(fixed_points(float(omega), params.gamma,
                                             params.k0, params.k1, params.k3)))
    counts = [sum(fp.stable for fp in fps) for fps in all_points]
    transitions = tuple(
        float(omegas[i + 1]) for i in range(len(counts) - 1) if counts[i] != counts[i + 1]
    )
    return BifurcationDiagram(omegas=omegas, points=tuple(all_points), transitions=transitions)


def dephasing_rate(x_e: float, p_e: float, x_g: float, p_g: float, chi: float) -> float:
    """Measurement-induced dephasing rate chi*(x_e*p_g - p_e*x_g)."""
    return chi * (x_e * p_g - p_e * x_g)


def _quadratic(omega: float, k1: float, gamma: float) -> float:
    return omega * omega - k1 * omega + gamma * gamma / 4.0


def weak_branch_frequencies(params: PhysicalParams) -> tuple[float, float]:
    """(omega_g, omega_e) = (omega* - 3*chi, omega* - chi) under the weak drive."""
    omega_star = bifurcation_point(params.k1, params.gamma)
    return omega_star - 3.0 * params.chi, omega_star - params.chi


def strong_branch_frequencies(params: PhysicalParams) -> tuple[float, float]:
    """(omega_g, omega_e) = (omega* - chi, omega* + chi) under the strong drive."""
    omega_star = bifurcation_point(params.k1, params.gamma)
    return omega_star - params.chi, omega_star + params.chi


def weak_stationary_quadratures(params: PhysicalParams) -> tuple[tuple[float, float], tuple[float, float]]:
    """Stationary ((x_g, p_g), (x_e, p_e)) in the weak regime (both monostable)."""
    out = []
    for omega in weak_branch_frequencies(params):
        x = params.k0 * omega / _quadratic(omega, params.k1, params.gamma)
        out.append((x, params.gamma * x / (2.0 * omega)))
    return tuple(out)


def strong_stationary_quadratures(params: PhysicalParams) -> tuple[tuple[float, float], tuple[float, float]]:
    """Stationary quadratures under the strong drive.

    The ground branch stays monostable; the excited branch sits on the
    positive bifurcated branch with the k0-free amplitude, matching the
    closed-form rate formulas.
    """
    omega_g, omega_e = strong_branch_frequencies(params)
    x_g = params.k0 * omega_g / _quadratic(omega_g, params.k1, params.gamma)
    radicand = -_quadratic(omega_e, params.k1, params.gamma)
    if radicand <= 0.0:
        raise ParameterError(
            "strong regime not bifurcated: -omega_e^2 + k1*omega_e - gamma^2/4 <= 0"
        )
    if params.k3 <= 0.0:
        raise ParameterError("strong-regime amplitude needs k3 > 0")
    x_e = math.sqrt(radicand / (params.k3 * omega_e))
    return (x_g, params.gamma * x_g / (2.0 * omega_g)), (x_e, params.gamma * x_e / (2.0 * omega_e))


def dephasing_weak(params: PhysicalParams) -> float:
    """Closed-form weak-regime rate gamma*k0^2*chi^2 / (D(omega_g)*D(omega_e))."""
    omega_g, omega_e = weak_branch_frequencies(params)
    return (params.gamma * params.k0**2 * params.chi**2
            / (_quadratic(omega_g, params.k1, params.gamma)
               * _quadratic(omega_e, params.k1, params.gamma)))


def dephasing_strong(params: PhysicalParams) -> float:
    """Closed-form strong-regime rate; errors if the excited branch is not bifurcated."""
    omega_g, omega_e = strong_branch_frequencies(params)
    radicand = -_quadratic(omega_e, params.k1, params.gamma)
    if params.chi == 0.0:
        return 0.0
    if radicand <= 0.0:
        raise ParameterError(
            "strong regime not bifurcated: -omega_e^2 + k1*omega_e - gamma^2/4 <= 0"
        )
    if params.k3 <= 0.0:
        raise ParameterError("dephasing_strong needs k3 > 0")
    return (params.k0 * params.gamma * params.chi**2 / math.sqrt(params.k3 * omega_e**3)
            * math.sqrt(radicand) / _quadratic(omega_g, params.k1, params.gamma))


def fit_slope(t: np.ndarray, values: np.ndarray, window: tuple[float, float],
              gamma: float) -> float:
    """Least-squares slope over the final 50% of a regime window.

    An additional 5/gamma transient after the window start is discarded, per
    the stationarity assumption behind the closed-form rates.
    """
    t0, t1 = window
    start = max(t0 + 0.5 * (t1 - t0), t0 + 5.0 / gamma)
    mask = (t >= start) & (t <= t1)
    if mask.sum() < 2:
        raise ValueError(f"fit window [{start}, {t1}] contains fewer than 2 samples")
    coeffs = np.polyfit(t[mask], values[mask], 1)
    return float(coeffs[0])


@dataclass(frozen=True)
class DephasingReport:
    """Analytic vs measured dephasing rates plus the coherence-factor series."""

    times: np.ndarray
    gamma_weak: float
    gamma_strong: float
    gamma_measured_weak: float
    gamma_measured_strong: float
    coherence_magnitude: np.ndarray  # |rho_eg(t)| / |rho_eg(0)| (expansion coefficient)
    reduced_coherence: np.ndarray    # exp(-gamma2*t - Sigma), the traced-out factor
    overlap_magnitude: np.ndarray    # |<psi_g | psi_e>| from the branch centroids
    phase: np.ndarray                # omega_q * t + Theta(t)


def coherence_factor(record, gamma2: float, omega_q: float,
                     switch_time: float | None = None) -> DephasingReport:
    """Assemble the dephasing report from a shared-record branch history.

    ``record`` must expose arrays t, x_g, p_g, x_e, p_e, sigma, theta and its
    parameter snapshot (for chi, gamma and the rate formulas).  The
    coefficient magnitude follows exp(-(gamma2*t + Sigma)) divided by the
    coherent-state overlap of the branch centroids; the overlap uses
    exp(-[(x_e-x_g)^2 + (p_e-p_g)^2]/4).
    """
    t = np.asarray(record.t, dtype=float)
    if t.size == 0:
        raise ValueError("empty branch history")
    if getattr(record, "noise_mode", "shared") != "shared":
        raise ValueError("coherence factor requires a shared-record branch run")
    params = record.params
    sigma = np.asarray(record.sigma, dtype=float)
    theta = np.asarray(record.theta, dtype=float)
    dx = np.asarray(record.x_e) - np.asarray(record.x_g)
    dp = np.asarray(record.p_e) - np.asarray(record.p_g)
    overlap = np.exp(-(dx**2 + dp**2) / 4.0)
    magnitude = np.exp(-(gamma2 * t + sigma)) / overlap
    reduced = np.exp(-(gamma2 * t + sigma))
    phase = omega_q * t + theta

    try:
        g_weak = dephasing_weak(params)
    except ParameterError:
        g_weak = math.nan
    try:
        g_strong = dephasing_strong(params)
    except ParameterError:
        g_strong = math.nan

    t_end = float(t[-1])
    if switch_time is None:
        measured_weak = fit_slope(t, sigma, (float(t[0]), t_end), params.gamma)
        measured_strong = math.nan
    else:
        measured_weak = fit_slope(t, sigma, (float(t[0]), switch_time), params.gamma)
        measured_strong = fit_slope(t, sigma, (switch_time, t_end), params.gamma)

    return DephasingReport(
        times=t,
        gamma_weak=g_weak,
        gamma_strong=g_strong,
        gamma_measured_weak=measured_weak,
        gamma_measured_strong=measured_strong,
        coherence_magnitude=magnitude,
        reduced_coherence=reduced,
        overlap_magnitude=overlap,
        phase=phase,
    )


__all__ = [
    "FixedPoint", "BifurcationDiagram", "DephasingReport",
    "bifurcation_point", "fixed_points", "sweep_bifurcation",
    "dephasing_rate", "dephasing_weak", "dephasing_strong",
    "weak_branch_frequencies", "strong_branch_frequencies",
    "weak_stationary_quadratures", "strong_stationary_quadratures",
    "fit_slope", "coherence_factor",
]
