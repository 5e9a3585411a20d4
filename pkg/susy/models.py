"""
Domain objects: family descriptions and the reports produced by checks.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from susy.exceptions import SpecError
from susy.expressions import Bindings, Expression, SamplingPolicy, ZeroVerdict, exact
from susy.operators import DifferentialOperator
from susy.parsing import Q


@dataclass(frozen=True)
class FamilySpec:
    """Fold N, prepotential W and offset function E, with parameter values.

    ``poles`` are the declared singular points, kept out of every sampling and
    grid. ``domain`` overrides the default sampling interval and ``window`` the
    default spectral box.
    """

    N: int
    W: Expression
    E: Expression
    bindings: Mapping[str, complex] = field(default_factory=dict)
    poles: Tuple[float, ...] = ()
    label: str = "custom"
    domain: Optional[Tuple[float, float]] = None
    window: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise SpecError(f"fold N must be a positive integer, got {self.N!r}")
        if any(not math.isfinite(p) for p in self.poles):
            raise SpecError("declared poles must be finite")
        if self.domain is not None and not self.domain[0] < self.domain[1]:
            raise SpecError(f"empty domain {self.domain}")
        if self.window is not None and not self.window[0] < self.window[1]:
            raise SpecError(f"empty spectral window {self.window}")
        object.__setattr__(self, 'poles', tuple(sorted(float(p) for p in self.poles)))
        object.__setattr__(self, 'bindings', dict(self.bindings))

    @property
    def parameters(self) -> frozenset:
        return self.W.parameters | self.E.parameters

    @property
    def prepotential(self) -> Expression:
        """W with the bound parameters substituted exactly."""
        return self.W.substitute(self.bindings).expanded()

    @property
    def offset(self) -> Expression:
        return self.E.substitute(self.bindings).expanded()

    @property
    def symmetric_prepotential(self) -> Expression:
        """W̃ = W − (N−1)E/2."""
        return (self.prepotential - exact(self.N - 1) / 2 * self.offset.tree).expanded()

    def with_fold(self, N: int) -> 'FamilySpec':
        return replace(self, N=N)

    def policy(self, base: Optional[SamplingPolicy] = None) -> SamplingPolicy:
        base = base or SamplingPolicy.from_settings()
        if self.domain is not None:
            base = replace(base, intervals=(tuple(self.domain),))
        return base.with_poles(self.poles)

    def describe(self) -> Dict[str, object]:
        return {
            'label': self.label,
            'N': self.N,
            'W': str(self.W),
            'E': str(self.E),
            'bindings': {name: _json_number(value) for name, value in sorted(self.bindings.items())},
            'poles': list(self.poles),
        }


def _json_number(value):
    value = complex(value) if not isinstance(value, str) else value
    if isinstance(value, complex):
        return value.real if value.imag == 0 else [value.real, value.imag]
    return value


@dataclass(frozen=True)
class ConditionReport:
    """Verdicts of the two type A conditions; None where not applicable."""

    e_condition: Optional[ZeroVerdict]
    w_condition: Optional[ZeroVerdict]
    e_expression: Expression
    w_expression: Expression

    @property
    def passed(self) -> bool:
        return all(v.passed for v in (self.e_condition, self.w_condition) if v is not None)


@dataclass(frozen=True)
class ResidualReport:
    """Coefficient-wise verdicts of A H₋ − H₊ A."""

    residual: DifferentialOperator
    coefficients: Tuple[ZeroVerdict, ...]
    overall: ZeroVerdict

    @property
    def passed(self) -> bool:
        return self.overall.passed


@dataclass(frozen=True)
class MotherPolynomial:
    """𝒫(E) = Σ a_j E^j with ½A†A = 𝒫(H₋); ``coefficients[j]`` is a_j."""

    coefficients: Tuple[complex, ...]
    exact: Tuple[bool, ...]
    remainder: ZeroVerdict
    side_consistency: ZeroVerdict

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def passed(self) -> bool:
        return self.remainder.passed and self.side_consistency.passed

    def __call__(self, energy):
        return np.polyval(list(reversed(self.coefficients)), energy)

    def as_expression(self) -> Expression:
        """The polynomial in q, for exact comparison of two extractions."""
        return Expression(sum(exact(complex(a)) * Q ** j for j, a in enumerate(self.coefficients)))


@dataclass(frozen=True)
class RecursionReport:
    """Quantities relating fold N to fold N+1 at fixed W and E."""

    h_plus: Expression
    h_minus: Expression
    potential_step_plus: ZeroVerdict
    potential_step_minus: ZeroVerdict
    sum_rule: ZeroVerdict
    step_condition: ZeroVerdict

    @property
    def identities_hold(self) -> bool:
        return all(v.passed for v in (self.potential_step_plus, self.potential_step_minus, self.sum_rule))


@dataclass(frozen=True)
class ChainStep:
    """One first-order SUSY link L^(k) with its Hamiltonian pair."""

    index: int
    factor: DifferentialOperator
    upper: DifferentialOperator
    lower: DifferentialOperator
    residual: ZeroVerdict
    offset: Expression


@dataclass(frozen=True)
class ChainReport:
    steps: Tuple[ChainStep, ...]
    mismatches: Tuple[Expression, ...]
    mismatch_verdicts: Tuple[ZeroVerdict, ...]
    product_matches: ZeroVerdict
    chain_residual: ZeroVerdict
    end_to_end: ResidualReport

    @property
    def consistent(self) -> bool:
        return all(v.passed for v in self.mismatch_verdicts)


class KernelMethod(str, Enum):
    SYMBOLIC = 'symbolic'
    QUADRATURE = 'quadrature'


@dataclass(frozen=True)
class KernelState:
    """A solution of A_N χ = 0: χ_j = η^j e^{−∫W}."""

    index: int
    method: KernelMethod
    expression: Optional[Expression] = None
    residual: Optional[ZeroVerdict] = None
    solver: Optional[object] = field(default=None, repr=False, compare=False)

    def values(self, grid, bindings: Optional[Bindings] = None) -> np.ndarray:
        if self.expression is not None:
            return self.expression.evaluate_array(grid, bindings)
        return self.solver(np.asarray(grid, dtype=float), self.index)


@dataclass(frozen=True)
class GridProblem:
    """Dirichlet grid of n interior points on [a, b]."""

    a: float
    b: float
    n: int
    potential: Optional[Expression] = None

    def __post_init__(self):
        if not self.a < self.b:
            raise SpecError(f"grid interval [{self.a}, {self.b}] is empty")
        if self.n < 16:
            raise SpecError(f"grid needs at least 16 interior points, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    @property
    def points(self) -> np.ndarray:
        return self.a + self.spacing * np.arange(1, self.n + 1)


@dataclass(frozen=True)
class PairingRow:
    level: int
    energy: float
    kernel: bool
    ratio: float
    residual: Optional[float]
    passed: bool


@dataclass(frozen=True)
class MotherRow:
    level: int
    energy: float
    rayleigh: float
    polynomial: float
    difference: float
    passed: bool


@dataclass(frozen=True)
class NormalizabilityFlag:
    index: int
    normalizable: bool
    norm_squared: float
    windows: Tuple[Tuple[float, float], ...]
    boundary_ratios: Tuple[float, ...]


@dataclass(frozen=True)
class SpectralReport:
    problem: GridProblem
    eigenvalues_minus: Tuple[float, ...]
    eigenvalues_plus: Tuple[float, ...]
    pairing: Tuple[PairingRow, ...]
    mother: Tuple[MotherRow, ...] = ()
    kernels: Tuple[NormalizabilityFlag, ...] = ()
    notes: Tuple[str, ...] = ()

    @property
    def kernel_levels(self) -> List[int]:
        return [row.level for row in self.pairing if row.kernel]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.pairing) and all(row.passed for row in self.mother)
