"""
Solutions of A_N χ = 0.

Gauging by e^{∫W} turns A_N into (∂ − (N−1)E)···(∂ − E)∂, whose kernel is spanned
by 1, η, …, η^{N−1} with η′ = e^{∫E}. Hence χ_j = η^j e^{−∫W}, j = 0..N−1.
Closed forms come from sympy's integrator; when a primitive leaves the expression
vocabulary the primitives are integrated numerically instead.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
import sympy
from scipy.integrate import solve_ivp

from susy.exceptions import SpecError
from susy.expressions import (
    Expression,
    SamplingPolicy,
    VerdictKind,
    Witness,
    ZeroVerdict,
    is_zero,
)
from susy.models import FamilySpec, KernelMethod, KernelState
from susy.parsing import FUNCTIONS, Q
from susy.typea import build_supercharge, supercharge_factors
from utils.grids import apply_factor_chain

logger = logging.getLogger(__name__)

KERNEL_GRID_POINTS = 4000
GRID_TOL = 1e-6


def _in_vocabulary(tree: sympy.Expr) -> bool:
    allowed = tuple(FUNCTIONS.values())
    for node in sympy.preorder_traversal(tree):
        if isinstance(node, (sympy.Integral, sympy.Piecewise)):
            return False
        if node.is_Pow and not node.exp.is_Integer:
            return False
        if isinstance(node, sympy.Function) and not isinstance(node, allowed):
            return False
    return True


def _primitive(expression: Expression) -> Optional[sympy.Expr]:
    """∫ expression dq in closed form, or None."""
    if expression.is_syntactic_zero:
        return sympy.Integer(0)
    try:
        result = sympy.integrate(expression.tree, Q)
    except (NotImplementedError, ValueError, TypeError) as exc:
        logger.debug(f"No closed-form primitive of {expression}: {exc}")
        return None
    return result if _in_vocabulary(result) else None


def symbolic_kernel(spec: FamilySpec) -> Optional[List[Expression]]:
    """χ_0..χ_{N−1} in closed form, or None when a primitive is not expressible."""
    W, E = spec.prepotential, spec.offset
    if W.parameters or E.parameters:
        return None
    W_primitive = _primitive(W)
    if W_primitive is None:
        return None
    if spec.N > 1:
        E_primitive = _primitive(E)
        if E_primitive is None:
            return None
        eta = _primitive(Expression(sympy.exp(E_primitive)))
        if eta is None:
            return None
    else:
        eta = sympy.Integer(0)

    ground = sympy.exp(-W_primitive)
    kernel = []
    for j in range(spec.N):
        chi = (eta ** j) * ground if j else ground
        if not _in_vocabulary(chi):
            return None
        kernel.append(Expression(chi))
    return kernel


class QuadratureKernel:
    """Kernel states from numerically integrated primitives.

    The system F′ = W, G′ = E, η′ = e^G is integrated from an anchor point in both
    directions, then χ_j = η^j e^{−F}.
    """

    def __init__(self, spec: FamilySpec, anchor: Optional[float] = None,
                 rtol: float = 1e-12, atol: float = 1e-14):
        self.spec = spec
        self.anchor = anchor
        self.rtol = rtol
        self.atol = atol
        self._cache: dict = {}

    def _rhs(self, q, y):
        point = np.array([q])
        W = self.spec.prepotential.evaluate_array(point, self.spec.bindings)[0]
        E = self.spec.offset.evaluate_array(point, self.spec.bindings)[0]
        return np.array([W, E, np.exp(y[1])], dtype=complex)

    def _integrate(self, start: float, points: np.ndarray) -> np.ndarray:
        if points.size == 0:
            return np.empty((3, 0), dtype=complex)
        y0 = np.zeros(3, dtype=complex)
        solution = solve_ivp(self._rhs, (start, float(points[-1])), y0, method='DOP853',
                             t_eval=points, rtol=self.rtol, atol=self.atol)
        if not solution.success:
            raise SpecError(f"kernel quadrature failed for {self.spec.label}: {solution.message}")
        return solution.y

    def primitives(self, grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(F, η) on an increasing grid."""
        key = (grid.size, float(grid[0]), float(grid[-1]))
        if key in self._cache:
            return self._cache[key]
        anchor = self.anchor if self.anchor is not None else float(grid[grid.size // 2])
        upper = grid[grid >= anchor]
        lower = grid[grid < anchor][::-1]
        forward = self._integrate(anchor, upper)
        backward = self._integrate(anchor, lower)[:, ::-1]
        values = np.concatenate([backward, forward], axis=1)
        result = (values[0], values[2])
        self._cache[key] = result
        return result

    def __call__(self, grid, index: int) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        F, eta = self.primitives(grid)
        with np.errstate(over='ignore', invalid='ignore'):
            return eta ** index * np.exp(-F)


def kernel_grid(spec: FamilySpec, n: int = KERNEL_GRID_POINTS) -> np.ndarray:
    low, high = spec.policy().intervals[0]
    return np.linspace(low, high, n)


def kernel_residual(spec: FamilySpec, state: KernelState, grid: Optional[np.ndarray] = None,
                    tolerance: float = GRID_TOL) -> ZeroVerdict:
    """Relative grid residual max|A_N χ| / max|χ| over the points unaffected by edge stencils."""
    grid = kernel_grid(spec) if grid is None else np.asarray(grid, dtype=float)
    h = float(grid[1] - grid[0])
    shifts = [factor.coefficient(0).evaluate_array(grid, spec.bindings)
              for factor in supercharge_factors(spec)]
    chi = state.values(grid, spec.bindings)
    image = apply_factor_chain(chi, h, shifts)
    trim = 2 * spec.N
    magnitude = np.abs(image[trim:-trim])
    scale = float(np.max(np.abs(chi))) or 1.0
    residual = float(np.max(magnitude)) / scale
    if residual <= tolerance:
        return ZeroVerdict(VerdictKind.NUMERICALLY_ZERO, residual, None, int(magnitude.size))
    worst = int(np.argmax(magnitude)) + trim
    return ZeroVerdict(VerdictKind.NON_ZERO, residual,
                       Witness(float(grid[worst]), complex(image[worst])), int(magnitude.size))


def kernel_basis(spec: FamilySpec, method: str = 'auto',
                 policy: Optional[SamplingPolicy] = None) -> List[KernelState]:
    """N kernel states, each tagged symbolic or quadrature and checked against A_N.

    ``method`` is 'auto' (closed forms where available), 'symbolic' or 'quadrature'.
    """
    if method not in ('auto', 'symbolic', 'quadrature'):
        raise SpecError(f"unknown kernel method '{method}'")
    policy = spec.policy(policy)

    closed = None if method == 'quadrature' else symbolic_kernel(spec)
    if closed is None and method == 'symbolic':
        raise SpecError(f"no closed-form kernel for {spec.label} N={spec.N}")

    if closed is not None:
        A = build_supercharge(spec)
        states = [
            KernelState(j, KernelMethod.SYMBOLIC, chi, is_zero(A.apply(chi), policy))
            for j, chi in enumerate(closed)
        ]
    else:
        solver = QuadratureKernel(spec)
        states = []
        for j in range(spec.N):
            state = KernelState(j, KernelMethod.QUADRATURE, solver=solver)
            states.append(KernelState(j, KernelMethod.QUADRATURE, None,
                                      kernel_residual(spec, state), solver))

    logger.info(f"Kernel basis {spec.label} N={spec.N}: "
                f"{states[0].method.value}, all annihilated={all(s.residual.passed for s in states)}")
    return states
