"""
Numerical spectral checks on Dirichlet boxes.

Hamiltonians −½∂² + v are discretized with second-order central differences and
solved for their lowest levels with a symmetric tridiagonal eigensolver. The
supercharge acts on grid vectors through its first-order factors with fourth-order
central differences; 2N points at each edge of the image are dropped before norms.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import eigh_tridiagonal

from susy.analytics import performance_monitor
from susy.conf import setting
from susy.exceptions import DiscretizationError
from susy.kernels import kernel_basis
from susy.models import (
    FamilySpec,
    GridProblem,
    KernelState,
    MotherPolynomial,
    MotherRow,
    NormalizabilityFlag,
    PairingRow,
    SpectralReport,
)
from susy.operators import DifferentialOperator
from susy.typea import build_hamiltonians, extract_mother_polynomial, supercharge_factors
from utils.grids import apply_factor_chain, tridiagonal, tridiagonal_matvec

logger = logging.getLogger(__name__)

IMAGINARY_TOL = 1e-12
PROBE_DOUBLINGS = 3
PROBE_MARGIN = 0.1


@dataclass(frozen=True)
class Discretization:
    points: np.ndarray
    spacing: float
    potential: np.ndarray
    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def matvec(self, vector: np.ndarray) -> np.ndarray:
        return tridiagonal_matvec(self.diagonal, self.off_diagonal, vector)


def _potential_of(H: DifferentialOperator):
    if H.order != 2:
        raise DiscretizationError(f"expected a second-order Hamiltonian, got order {H.order}")
    leading = H.coefficient(2)
    if not leading.is_constant or complex(leading.evaluate(0.0)) != -0.5:
        raise DiscretizationError(f"leading coefficient must be -1/2, got {leading}")
    if not H.coefficient(1).is_syntactic_zero:
        raise DiscretizationError(f"first-order term {H.coefficient(1)} present")
    return H.coefficient(0)


def discretize(H: Optional[DifferentialOperator], problem: GridProblem,
               poles: Sequence[float] = (), bindings=None) -> Discretization:
    """Tridiagonal form of H = −½∂² + v; without H the problem's potential is used."""
    if H is not None:
        potential = _potential_of(H)
    elif problem.potential is not None:
        potential = problem.potential
    else:
        raise DiscretizationError("no Hamiltonian and no potential to discretize")

    inside = [p for p in poles if problem.a <= p <= problem.b]
    if inside:
        raise DiscretizationError(f"pole at q={inside[0]} inside [{problem.a}, {problem.b}]")

    points = problem.points
    values = potential.evaluate_array(points, bindings)
    if not np.all(np.isfinite(values)):
        bad = float(points[~np.isfinite(values)][0])
        raise DiscretizationError(f"potential {potential} is singular near q={bad}")
    scale = 1.0 + float(np.max(np.abs(values.real)))
    if float(np.max(np.abs(values.imag))) > IMAGINARY_TOL * scale:
        raise DiscretizationError(f"potential {potential} is not real on [{problem.a}, {problem.b}]")

    h = problem.spacing
    diagonal, off_diagonal = tridiagonal(values.real, h)
    return Discretization(points, h, values.real, diagonal, off_diagonal)


def eigen_low(matrix: Union[Discretization, Tuple[np.ndarray, np.ndarray]], k: int):
    """The k smallest eigenvalues and their eigenvectors (as columns)."""
    if isinstance(matrix, Discretization):
        diagonal, off_diagonal = matrix.diagonal, matrix.off_diagonal
    else:
        diagonal, off_diagonal = (np.asarray(m, dtype=float) for m in matrix)
    n = diagonal.size
    if k < 1 or k > n:
        raise DiscretizationError(f"cannot take {k} eigenpairs of a {n}x{n} matrix")
    return eigh_tridiagonal(diagonal, off_diagonal, select='i', select_range=(0, k - 1))


def apply_supercharge(spec: FamilySpec, discretization: Discretization, vector: np.ndarray) -> np.ndarray:
    """A_N ψ on the grid, applied factor by factor."""
    points = discretization.points
    shifts = [factor.coefficient(0).evaluate_array(points, spec.bindings)
              for factor in supercharge_factors(spec)]
    return apply_factor_chain(vector, discretization.spacing, shifts)


def _trimmed(vector: np.ndarray, trim: int) -> np.ndarray:
    return vector[trim:-trim] if trim else vector


def _prepare(spec: FamilySpec, problem: GridProblem):
    H_plus, H_minus = build_hamiltonians(spec)
    minus = discretize(H_minus, problem, spec.poles)
    plus = discretize(H_plus, problem, spec.poles)
    return minus, plus


def pairing_check(spec: FamilySpec, problem: GridProblem, levels: int,
                  kernel_tol: Optional[float] = None, pair_tol: Optional[float] = None,
                  discretizations=None, eigenpairs=None) -> List[PairingRow]:
    """Map the lowest H₋ levels through A_N and measure how far they are from H₊ eigenvectors."""
    kernel_tol = setting('KERNEL_TOL') if kernel_tol is None else kernel_tol
    pair_tol = setting('PAIR_TOL') if pair_tol is None else pair_tol
    minus, plus = discretizations or _prepare(spec, problem)
    energies, vectors = eigenpairs or eigen_low(minus, levels)
    scale = 2 ** spec.N
    trim = 2 * spec.N

    rows = []
    for level, energy in enumerate(energies):
        psi = vectors[:, level]
        image = apply_supercharge(spec, minus, psi)
        image[:trim] = 0
        image[-trim:] = 0
        ratio = float(np.linalg.norm(image) / np.linalg.norm(psi))
        if ratio ** 2 <= kernel_tol * scale:
            rows.append(PairingRow(level, float(energy), True, ratio, None, True))
            continue
        defect = plus.matvec(image) - energy * image
        residual = float(np.linalg.norm(_trimmed(defect, trim + 1))
                         / np.linalg.norm(_trimmed(image, trim + 1)))
        rows.append(PairingRow(level, float(energy), False, ratio, residual, residual <= pair_tol * scale))
    return rows


def mother_spectral_check(spec: FamilySpec, problem: GridProblem, levels: int,
                          polynomial: Optional[MotherPolynomial] = None,
                          mother_tol: Optional[float] = None,
                          discretizations=None, eigenpairs=None) -> List[MotherRow]:
    """Rayleigh value of ½A†A on H₋ eigenvectors against 𝒫(E)."""
    mother_tol = setting('MOTHER_TOL') if mother_tol is None else mother_tol
    polynomial = polynomial or extract_mother_polynomial(spec)
    minus, _ = discretizations or _prepare(spec, problem)
    energies, vectors = eigenpairs or eigen_low(minus, levels)
    trim = 2 * spec.N

    rows = []
    for level, energy in enumerate(energies):
        psi = vectors[:, level]
        image = _trimmed(apply_supercharge(spec, minus, psi), trim)
        rayleigh = 0.5 * float(np.vdot(image, image).real) / float(np.vdot(psi, psi).real)
        expected = complex(polynomial(energy))
        expected = expected.real if abs(expected.imag) <= 1e-12 * (1 + abs(expected)) else expected
        difference = rayleigh - expected
        rows.append(MotherRow(
            level=level,
            energy=float(energy),
            rayleigh=rayleigh,
            polynomial=float(np.real(expected)),
            difference=float(np.abs(difference)),
            passed=bool(np.abs(difference) <= mother_tol * (1 + abs(expected))),
        ))
    return rows


def _grown_windows(problem: GridProblem, grow: bool) -> List[Tuple[float, float]]:
    windows = [(problem.a, problem.b)]
    if grow:
        center = 0.5 * (problem.a + problem.b)
        half = 0.5 * (problem.b - problem.a)
        for _ in range(PROBE_DOUBLINGS):
            half *= 2
            windows.append((center - half, center + half))
    return windows


def normalizability_probe(state: KernelState, problem: GridProblem, spec: Optional[FamilySpec] = None,
                          grow: bool = True) -> NormalizabilityFlag:
    """Compare |χ| at the box edges with its interior maximum on growing boxes.

    A window is divergent when the edge value exceeds the interior maximum, the
    interior being the window less a 10% margin at each end. The state is flagged
    non-normalizable when the last window or two consecutive windows diverge.
    """
    bindings = spec.bindings if spec is not None else None
    windows = _grown_windows(problem, grow)
    ratios, divergent = [], []
    norm_squared = float('nan')
    for a, b in windows:
        grid = np.linspace(a, b, problem.n + 2)
        with np.errstate(all='ignore'):
            magnitude = np.abs(state.values(grid, bindings))
        margin = PROBE_MARGIN * (b - a)
        interior = magnitude[(grid >= a + margin) & (grid <= b - margin)]
        edge = max(magnitude[0], magnitude[-1])
        with np.errstate(all='ignore'):
            ratio = float(edge / np.max(interior))
        ratios.append(ratio)
        divergent.append(not np.isfinite(ratio) or ratio > 1.0)
        if (a, b) == windows[0]:
            with np.errstate(all='ignore'):
                norm_squared = float(simpson(magnitude ** 2, x=grid))

    consecutive = any(first and second for first, second in zip(divergent, divergent[1:]))
    normalizable = not (divergent[-1] or consecutive)
    logger.debug(f"Kernel state {state.index}: edge ratios {ratios}, normalizable={normalizable}")
    return NormalizabilityFlag(state.index, normalizable, norm_squared, tuple(windows), tuple(ratios))


def default_problem(spec: FamilySpec, n: Optional[int] = None,
                    interval: Optional[Tuple[float, float]] = None) -> GridProblem:
    a, b = interval or spec.window or tuple(setting('SPECTRAL_INTERVAL'))
    return GridProblem(float(a), float(b), int(n or setting('SPECTRAL_POINTS')))


@performance_monitor('susy.run_spectrum')
def run_spectrum(spec: FamilySpec, problem: Optional[GridProblem] = None, levels: Optional[int] = None,
                 kernel_tol: Optional[float] = None, pair_tol: Optional[float] = None,
                 mother_tol: Optional[float] = None, mother: bool = True,
                 kernels: bool = True) -> SpectralReport:
    """Eigenvalues of both partners, the pairing table, the mother check and kernel probes."""
    problem = problem or default_problem(spec)
    levels = levels or setting('SPECTRAL_LEVELS')
    notes = []
    if spec.window is not None and (problem.a, problem.b) == tuple(spec.window):
        notes.append(f"box [{problem.a}, {problem.b}] is the default window of {spec.label}")

    minus, plus = _prepare(spec, problem)
    eigenpairs = eigen_low(minus, levels)
    plus_energies, _ = eigen_low(plus, levels)
    shared = {'discretizations': (minus, plus), 'eigenpairs': eigenpairs}

    pairing = pairing_check(spec, problem, levels, kernel_tol, pair_tol, **shared)
    mother_rows = mother_spectral_check(spec, problem, levels, mother_tol=mother_tol, **shared) if mother else []

    flags = []
    if kernels:
        grow = spec.window is None
        for state in kernel_basis(spec):
            flags.append(normalizability_probe(state, problem, spec, grow=grow))
        if any(not flag.normalizable for flag in flags):
            notes.append("kernel states are not normalizable; their levels are absent from the box spectrum")

    report = SpectralReport(
        problem=problem,
        eigenvalues_minus=tuple(float(e) for e in eigenpairs[0]),
        eigenvalues_plus=tuple(float(e) for e in plus_energies),
        pairing=tuple(pairing),
        mother=tuple(mother_rows),
        kernels=tuple(flags),
        notes=tuple(notes),
    )
    logger.info(f"Spectrum {spec.label} N={spec.N} on [{problem.a}, {problem.b}] n={problem.n}: "
                f"kernel levels {report.kernel_levels}, passed={report.passed}")
    return report
