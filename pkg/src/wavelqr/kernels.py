"""Spatial kernels: the two-point cost kernel, the gain profile, and the
residual fields of the kernel Riccati PDE.

All series use the plain eigenfunction bases sin(n pi x) (Dirichlet) and
cos(n pi x) (Neumann, n >= 0).  Derivative and boundary traces of the
truncated series are evaluated analytically, term by term, never by
numerical differentiation of sampled kernels.
"""

from dataclasses import dataclass, field

import numpy as np

from .model import (
    Boundary,
    ModalWeight,
    PowerLawWeights,
    WaveConfig,
    WeightFamily,
    gain_expansion_sign,
    mode_range,
    weight_of,
)
from .riccati import ModalRiccati, modal_gain, solve_closed_form

QUAD_WARNING = "series not absolutely summable"


@dataclass(frozen=True)
class KernelField:
    """2x2 matrix-valued two-point kernel sampled on a grid pair."""

    grid_x1: np.ndarray
    grid_x2: np.ndarray
    values: np.ndarray  # (len(grid_x1), len(grid_x2), 2, 2)
    boundary: Boundary
    n_used: int
    warnings: tuple[str, ...] = ()

    def component(self, i: int, j: int) -> np.ndarray:
        return self.values[:, :, i, j]


@dataclass(frozen=True)
class GainProfile:
    """Row-vector gain kernel K(x) sampled on a grid."""

    grid_x: np.ndarray
    values: np.ndarray  # (len(grid_x), 2)
    boundary: Boundary
    n_used: int


@dataclass(frozen=True)
class ResidualFields:
    """Pointwise defect of the four kernel Riccati PDE components."""

    grid: np.ndarray
    r11: np.ndarray
    r12: np.ndarray
    r21: np.ndarray
    r22: np.ndarray
    modes: tuple[int, ...]

    def max_abs(self) -> float:
        return float(
            max(np.abs(self.r11).max(), np.abs(self.r12).max(),
                np.abs(self.r21).max(), np.abs(self.r22).max())
        )


def basis_matrix(boundary: Boundary, modes, grid) -> np.ndarray:
    """phi_n(x) sampled as a (len(modes), len(grid)) array."""
    modes = np.asarray(list(modes), dtype=float)
    grid = np.asarray(grid, dtype=float)
    arg = np.outer(modes, np.pi * grid)
    return np.sin(arg) if Boundary(boundary) == Boundary.DIRICHLET else np.cos(arg)


def assemble_P(sols: list[ModalRiccati], grid, boundary: Boundary, grid_x2=None) -> KernelField:
    """Truncated series P(x1, x2) = sum_n P^n phi_n(x1) phi_n(x2)."""
    boundary = Boundary(boundary)
    grid_x1 = np.asarray(grid, dtype=float)
    grid_x2 = grid_x1 if grid_x2 is None else np.asarray(grid_x2, dtype=float)
    if not sols:
        values = np.zeros((len(grid_x1), len(grid_x2), 2, 2))
        return KernelField(grid_x1, grid_x2, values, boundary, 0)
    modes = [s.n for s in sols]
    coeff = np.array([s.matrix for s in sols])  # (k, 2, 2)
    phi1 = basis_matrix(boundary, modes, grid_x1)
    phi2 = basis_matrix(boundary, modes, grid_x2)
    values = np.einsum("kab,ki,kj->ijab", coeff, phi1, phi2, optimize=True)
    return KernelField(grid_x1, grid_x2, values, boundary, max(modes))


def assemble_K(sols: list[ModalRiccati], cfg: WaveConfig, grid) -> GainProfile:
    """Gain kernel from the boundary trace of the cost kernel.

    Dirichlet: K(x) = -R^-1 beta sum_n n pi [P21^n, P22^n] sin(n pi x).
    Neumann:   K(x) = -R^-1 beta sum_n (-1)^n [P21^n, P22^n] cos(n pi x),
    the (-1)^n being cos(n pi) from evaluating the kernel at x1 = 1.
    """
    grid = np.asarray(grid, dtype=float)
    if not sols:
        return GainProfile(grid, np.zeros((len(grid), 2)), cfg.boundary, 0)
    modes = [s.n for s in sols]
    coeff = np.array(
        [gain_expansion_sign(cfg.boundary, s.n) * modal_gain(cfg, s).row for s in sols]
    )  # (k, 2)
    phi = basis_matrix(cfg.boundary, modes, grid)
    values = phi.T @ coeff
    return GainProfile(grid, values, cfg.boundary, max(modes))


def assemble_Q(family: WeightFamily, grid, boundary: Boundary, N: int) -> KernelField:
    """Truncated series of the state-cost kernel, with a summability flag."""
    boundary = Boundary(boundary)
    grid = np.asarray(grid, dtype=float)
    modes = list(mode_range(boundary, N))
    warnings = ()
    if isinstance(family, PowerLawWeights) and family.r <= 1.0:
        warnings = (QUAD_WARNING,)
    if not modes:
        values = np.zeros((len(grid), len(grid), 2, 2))
        return KernelField(grid, grid, values, boundary, 0, warnings)
    coeff = np.array([weight_of(family, n, boundary).matrix for n in modes])
    phi = basis_matrix(boundary, modes, grid)
    values = np.einsum("kab,ki,kj->ijab", coeff, phi, phi, optimize=True)
    return KernelField(grid, grid, values, boundary, max(modes), warnings)


def residual_coefficient_matrices(cfg: WaveConfig, sols: list[ModalRiccati], family: WeightFamily):
    """Double-basis coefficients of the four PDE residual fields.

    Entry (i, j) multiplies phi_{m_i}(x1) phi_{n_j}(x2).  Diagonals carry the
    modal ARE residuals (zero at a solution); off-diagonals are minus the
    cross-frequency products of the completed-square right-hand sides, e.g.
    -gamma^2 m n pi^2 P12^m P21^n for the first equation under Dirichlet
    actuation.
    """
    modes = np.array([s.n for s in sols])
    if len(set(modes.tolist())) != len(modes):
        raise ValueError("solutions list indexes some mode more than once")
    p11 = np.array([s.p11 for s in sols])
    p12 = np.array([s.p12 for s in sols])
    p22 = np.array([s.p22 for s in sols])
    q11 = np.array([weight_of(family, int(n), cfg.boundary).q11 for n in modes])
    q12 = np.array([weight_of(family, int(n), cfg.boundary).q12 for n in modes])
    q22 = np.array([weight_of(family, int(n), cfg.boundary).q22 for n in modes])
    w2 = (modes * np.pi) ** 2
    g2 = cfg.gamma_sq

    if cfg.boundary == Boundary.DIRICHLET:
        t12 = modes * np.pi * p12
        t21 = t12
        t22 = modes * np.pi * p22
    else:
        sign = np.where(modes % 2 == 1, -1.0, 1.0)
        t12 = sign * p12
        t21 = t12
        t22 = sign * p22

    lhs11 = -2.0 * w2 * p12 + q11
    lhs12 = p11 - cfg.alpha * p12 - w2 * p22 + q12
    lhs21 = lhs12.copy()
    lhs22 = 2.0 * p12 - 2.0 * cfg.alpha * p22 + q22

    m11 = np.diag(lhs11) - g2 * np.outer(t12, t21)
    m12 = np.diag(lhs12) - g2 * np.outer(t12, t22)
    m21 = np.diag(lhs21) - g2 * np.outer(t22, t21)
    m22 = np.diag(lhs22) - g2 * np.outer(t22, t22)
    return modes, (m11, m12, m21, m22)


def pde_residual(cfg: WaveConfig, sols: list[ModalRiccati], family: WeightFamily, grid) -> ResidualFields:
    """Defect fields of the kernel Riccati PDE for the truncated diagonal solution.

    With a single active mode every field vanishes; with several, the
    surviving residual is exactly the cross-frequency part of the quadratic
    right-hand side.
    """
    grid = np.asarray(grid, dtype=float)
    modes, mats = residual_coefficient_matrices(cfg, sols, family)
    phi = basis_matrix(cfg.boundary, modes, grid)
    fields = [phi.T @ m @ phi for m in mats]
    return ResidualFields(grid, *fields, modes=tuple(int(n) for n in modes))


def decay_fit(ns, values) -> float:
    """Least-squares slope of log(values) against log(n)."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        raise ValueError("decay_fit needs strictly positive values")
    if np.any(ns <= 0):
        raise ValueError("decay_fit needs strictly positive indices")
    slope, _ = np.polyfit(np.log(ns), np.log(values), 1)
    return float(slope)


@dataclass(frozen=True)
class SeriesReport:
    name: str
    threshold: float
    fitted_exponent: float
    verdict: str
    cauchy_diffs: tuple[float, ...]
    cauchy_decreasing: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "threshold": self.threshold,
            "fitted_exponent": self.fitted_exponent,
            "verdict": self.verdict,
            "cauchy_diffs": list(self.cauchy_diffs),
            "cauchy_decreasing": self.cauchy_decreasing,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    boundary: Boundary
    r: float
    series: tuple[SeriesReport, ...] = field(default_factory=tuple)

    def __getitem__(self, name: str) -> SeriesReport:
        for s in self.series:
            if s.name == name:
                return s
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "boundary": self.boundary.value,
            "r": self.r,
            "series": [s.as_dict() for s in self.series],
        }


def series_thresholds(boundary: Boundary) -> dict[str, float]:
    """Exponent r must exceed these for each series to be summable."""
    p11 = 4.0 if Boundary(boundary) == Boundary.DIRICHLET else 6.0
    return {"Q": 1.0, "K": 2.0, "P11": p11}


def convergence_report(
    cfg: WaveConfig,
    family: PowerLawWeights,
    N_list,
    fit_window: tuple[int, int] = (50, 500),
    cauchy_grid_points: int = 101,
) -> ConvergenceReport:
    """Summability verdicts for the Q, K and P11 series of a power-law family.

    The verdict compares r against the series threshold; the fitted decay
    exponent of the coefficient sequence and the sup-grid differences of
    successive partial sums are reported as empirical evidence.  The fit
    ignores the family cutoff: the question concerns the tail of the family,
    not of its truncation.
    """
    if not isinstance(family, PowerLawWeights):
        raise TypeError("convergence analysis is defined for power-law families")
    thresholds = series_thresholds(cfg.boundary)
    lo, hi = fit_window
    ns = np.arange(max(lo, 1), hi + 1)

    amp = family.q / ns.astype(float) ** family.r
    p11 = np.empty(len(ns))
    kmag = np.empty(len(ns))
    for i, n in enumerate(ns):
        sol = solve_closed_form(cfg, ModalWeight(int(n), amp[i], 0.0, amp[i]))
        p11[i] = sol.p11
        kmag[i] = np.max(np.abs(modal_gain(cfg, sol).row))

    fitted = {
        "Q": decay_fit(ns, amp),
        "K": decay_fit(ns, kmag),
        "P11": decay_fit(ns, p11),
    }

    N_list = sorted(int(N) for N in N_list)
    grid = np.linspace(0.0, 1.0, cauchy_grid_points)
    diffs: dict[str, list[float]] = {"Q": [], "K": [], "P11": []}
    prev = None
    for N in N_list:
        nofcut = PowerLawWeights(q=family.q, r=family.r, cutoff=N)
        sols = [solve_closed_form(cfg, weight_of(nofcut, n, cfg.boundary)) for n in mode_range(cfg.boundary, N)]
        qf = assemble_Q(nofcut, grid, cfg.boundary, N).component(0, 0)
        kf = np.abs(assemble_K(sols, cfg, grid).values).max(axis=1)
        pf = assemble_P(sols, grid, cfg.boundary).component(0, 0)
        cur = (qf, kf, pf)
        if prev is not None:
            diffs["Q"].append(float(np.abs(cur[0] - prev[0]).max()))
            diffs["K"].append(float(np.abs(cur[1] - prev[1]).max()))
            diffs["P11"].append(float(np.abs(cur[2] - prev[2]).max()))
        prev = cur

    reports = []
    for name in ("Q", "K", "P11"):
        d = diffs[name]
        decreasing = all(b < a for a, b in zip(d, d[1:])) if len(d) > 1 else False
        reports.append(
            SeriesReport(
                name=name,
                threshold=thresholds[name],
                fitted_exponent=fitted[name],
                verdict="convergent" if family.r > thresholds[name] else "divergent",
                cauchy_diffs=tuple(d),
                cauchy_decreasing=decreasing,
            )
        )
    return ConvergenceReport(cfg.boundary, family.r, tuple(reports))
