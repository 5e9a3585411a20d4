"""
Factorization of the type A supercharge into a chain of ordinary SUSY steps.

Step k uses the factor L^(k) = ∂ + U_k with U_k = W − (k−1)E and the pair

    2H>^(k)   = −∂² + U_k² + U_k′ + 2C(k)
    2H<^(k−1) = −∂² + U_k² − U_k′ + 2C(k)

The chain closes into N-fold supersymmetry of its end Hamiltonians when every
mismatch Δ_k = H>^(k) − H<^(k) vanishes.
"""
import logging
from typing import List, Optional, Sequence, Tuple

from susy.conf import setting
from susy.exceptions import SpecError
from susy.expressions import Expression, SamplingPolicy, ZeroVerdict, is_zero
from susy.models import ChainReport, ChainStep, FamilySpec
from susy.operators import DifferentialOperator, compose, product
from susy.typea import HALF, _numeric_constant, build_supercharge, verify_intertwining

logger = logging.getLogger(__name__)


def _constant_of(expression: Expression, spec: FamilySpec, q_ref: float) -> Expression:
    expression = expression.expanded()
    if expression.is_constant:
        return expression
    return Expression(_numeric_constant(expression.evaluate(q_ref, spec.bindings)))


def chain_constants(spec: FamilySpec, q_ref: Optional[float] = None) -> Tuple[Expression, Expression]:
    """(c₁, c) from c₁ = (W − E/2)′ + E(W − E/2) and c = E′ + E².

    Exact when the expressions are constant, otherwise read off at q_ref.
    """
    q_ref = setting('REFERENCE_POINT') if q_ref is None else q_ref
    W, E = spec.prepotential, spec.offset
    shifted = W - HALF * E.tree
    c1 = shifted.derivative() + E * shifted
    c = E.derivative() + E * E
    return _constant_of(c1, spec, q_ref), _constant_of(c, spec, q_ref)


def matching_offsets(N: int, c1, c) -> List[Expression]:
    """C(1) = 0 and C(k+1) = C(k) + c₁ − (k−1)c."""
    c1, c = Expression.constant(c1) if not isinstance(c1, Expression) else c1, \
        Expression.constant(c) if not isinstance(c, Expression) else c
    offsets = [Expression.constant(0)]
    for k in range(1, N):
        offsets.append((offsets[-1] + c1 - (k - 1) * c.tree).expanded())
    return offsets


def check_chain_conditions(spec: FamilySpec, c1, c,
                           policy: Optional[SamplingPolicy] = None) -> List[ZeroVerdict]:
    """(W − E/2)′ + E(W − E/2) − c₁ − (k−1)(E′ + E² − c) = 0 for k = 1..N−1."""
    policy = spec.policy(policy)
    W, E = spec.prepotential, spec.offset
    c1 = c1 if isinstance(c1, Expression) else Expression.constant(c1)
    c = c if isinstance(c, Expression) else Expression.constant(c)
    shifted = W - HALF * E.tree
    base = shifted.derivative() + E * shifted - c1
    drift = E.derivative() + E * E - c
    return [
        is_zero((base - (k - 1) * drift.tree).expanded(), policy, spec.bindings)
        for k in range(1, spec.N)
    ]


def check_generalized_chain_condition(spec: FamilySpec, c1,
                                      policy: Optional[SamplingPolicy] = None) -> ZeroVerdict:
    """c₁″ − E c₁′ = 0, the condition allowing a q-dependent c₁."""
    c1 = Expression.parse(c1) if isinstance(c1, str) else (
        c1 if isinstance(c1, Expression) else Expression.constant(c1))
    E = spec.offset
    expression = (c1.derivative(2) - E * c1.derivative()).expanded()
    return is_zero(expression, spec.policy(policy), spec.bindings)


def _step_pair(U: Expression, offset: Expression) -> Tuple[DifferentialOperator, DifferentialOperator]:
    square = U.tree ** 2 + 2 * offset.tree
    derivative = U.derivative().tree
    upper = DifferentialOperator((HALF * (square + derivative), 0, -HALF))
    lower = DifferentialOperator((HALF * (square - derivative), 0, -HALF))
    return upper, lower


def _operator_verdict(operator: DifferentialOperator, policy, bindings) -> ZeroVerdict:
    return ZeroVerdict.combine([is_zero(c, policy, bindings) for c in operator.coefficients])


def build_chain(spec: FamilySpec, offsets: Optional[Sequence] = None,
                policy: Optional[SamplingPolicy] = None) -> ChainReport:
    """Build the N-step chain; without offsets the matching constants are used."""
    policy = spec.policy(policy)
    N = spec.N
    if offsets is None:
        offsets = matching_offsets(N, *chain_constants(spec))
    offsets = [o if isinstance(o, Expression) else Expression.constant(o) for o in offsets]
    if len(offsets) != N:
        raise SpecError(f"chain of fold {N} needs {N} offsets, got {len(offsets)}")

    W, E = spec.prepotential, spec.offset
    steps = []
    for k in range(1, N + 1):
        U = (W - (k - 1) * E.tree).expanded()
        factor = DifferentialOperator.first_order(U)
        upper, lower = _step_pair(U, offsets[k - 1])
        residual = compose(upper, factor) - compose(factor, lower)
        steps.append(ChainStep(k, factor, upper, lower,
                               _operator_verdict(residual, policy, spec.bindings), offsets[k - 1]))

    mismatches = tuple(
        (steps[k - 1].upper.coefficient(0) - steps[k].lower.coefficient(0).tree).expanded()
        for k in range(1, N)
    )
    mismatch_verdicts = tuple(is_zero(m, policy, spec.bindings) for m in mismatches)

    chained = product([step.factor for step in reversed(steps)])
    product_matches = _operator_verdict(chained - build_supercharge(spec), policy, spec.bindings)
    chain_residual = _operator_verdict(
        compose(steps[-1].upper, chained) - compose(chained, steps[0].lower), policy, spec.bindings)

    report = ChainReport(
        steps=tuple(steps),
        mismatches=mismatches,
        mismatch_verdicts=mismatch_verdicts,
        product_matches=product_matches,
        chain_residual=chain_residual,
        end_to_end=verify_intertwining(spec, policy),
    )
    logger.info(f"Chain {spec.label} N={N}: consistent={report.consistent}, "
                f"end-to-end {report.end_to_end.overall.kind.value}")
    return report
