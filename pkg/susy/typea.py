"""
Type A N-fold supersymmetry built from (N, W, E).

The supercharge is A_N = (∂ + W − (N−1)E) ··· (∂ + W − E)(∂ + W); the physical
supercharge differs by the phase (−i)^N. Hamiltonians are H± = ½(−∂² + W² + V±).
All verdicts come from :func:`susy.expressions.is_zero`; nothing here assumes the
type A conditions hold.
"""
import logging
from typing import List, Optional, Tuple

import sympy

from susy.analytics import performance_monitor
from susy.conf import setting
from susy.exceptions import SpecError
from susy.expressions import Expression, SamplingPolicy, ZeroVerdict, is_zero, tidy
from susy.models import (
    ConditionReport,
    FamilySpec,
    MotherPolynomial,
    RecursionReport,
    ResidualReport,
)
from susy.operators import (
    DifferentialOperator,
    commutator,
    compose,
    formal_adjoint,
    product,
)
from susy.parsing import Q

logger = logging.getLogger(__name__)

HALF = sympy.Rational(1, 2)

HamiltonianPair = Tuple[DifferentialOperator, DifferentialOperator]


def _rational(numerator: int, denominator: int) -> sympy.Rational:
    return sympy.Rational(numerator, denominator)


def _hamiltonian(scalar: Expression) -> DifferentialOperator:
    """½(−∂² + scalar)."""
    return DifferentialOperator((HALF * scalar.tree, 0, -HALF))


# Supercharge

def supercharge_factors(spec: FamilySpec) -> List[DifferentialOperator]:
    """First-order factors ∂ + W − kE for k = 0..N−1, in order of application."""
    W, E = spec.prepotential, spec.offset
    return [DifferentialOperator.first_order(W - k * E.tree) for k in range(spec.N)]


def build_supercharge(spec: FamilySpec) -> DifferentialOperator:
    return product(list(reversed(supercharge_factors(spec))))


def supercharge_phase(N: int) -> sympy.Expr:
    return (-sympy.I) ** N


def build_physical_supercharge(spec: FamilySpec) -> DifferentialOperator:
    """P_N = (−i)^N A_N, the product of the factors p − iW + ikE."""
    return build_supercharge(spec).scale(supercharge_phase(spec.N))


def symmetric_supercharge(spec: FamilySpec) -> DifferentialOperator:
    """The same supercharge written around W̃: ∏ (∂ + W̃ − jE), j = (N−1)/2 down to −(N−1)/2."""
    W_tilde, E = spec.symmetric_prepotential, spec.offset
    half_span = _rational(spec.N - 1, 2)
    factors = [
        DifferentialOperator.first_order(W_tilde - (half_span - k) * E.tree)
        for k in range(spec.N)
    ]
    return product(factors)


# Potentials and Hamiltonians

def build_potentials(spec: FamilySpec) -> Tuple[Expression, Expression]:
    N = spec.N
    W, E = spec.prepotential, spec.offset
    W1, E1 = W.derivative(), E.derivative()
    common = (
        -(N - 1) * E.tree * W.tree
        + _rational((N - 1) * (2 * N - 1), 6) * E.tree ** 2
        - _rational(N * N - 1, 6) * E1.tree
    )
    split = N * (W1.tree - _rational(N - 1, 2) * E1.tree)
    return Expression(tidy(common + split)), Expression(tidy(common - split))


def build_hamiltonians(spec: FamilySpec) -> HamiltonianPair:
    """(H₊, H₋) with H± = ½(−∂² + W² + V±)."""
    W = spec.prepotential
    V_plus, V_minus = build_potentials(spec)
    W2 = W.tree ** 2
    return _hamiltonian(Expression(W2 + V_plus.tree)), _hamiltonian(Expression(W2 + V_minus.tree))


def build_hamiltonians_tilde(spec: FamilySpec, A_const=None) -> HamiltonianPair:
    """Hamiltonians in terms of W̃ only.

    Without ``A_const`` the E-dependent term is (N²−1)/12·(E² − 2E′); with it the
    term is rewritten through W̃ as (N²−1)/12·(2W̃″/W̃ − W̃′²/W̃² + A/W̃²).
    """
    N = spec.N
    W_tilde, E = spec.symmetric_prepotential, spec.offset
    W1 = W_tilde.derivative()
    weight = _rational(N * N - 1, 12)
    if A_const is None:
        extra = weight * (E.tree ** 2 - 2 * E.derivative().tree)
    else:
        if W_tilde.is_syntactic_zero:
            raise SpecError("the W̃-only Hamiltonian form needs W̃ not identically zero")
        w, w1, w2 = W_tilde.tree, W1.tree, W_tilde.derivative(2).tree
        extra = weight * (2 * w2 / w - w1 ** 2 / w ** 2 + Expression.constant(A_const).tree / w ** 2)
    base = W_tilde.tree ** 2 + extra
    split = N * W1.tree
    return _hamiltonian(Expression(base + split)), _hamiltonian(Expression(base - split))


def matching_constant(spec: FamilySpec, q_ref: Optional[float] = None) -> complex:
    """A = W̃²(E² − 2E′) − 2W̃W̃″ + W̃′² read off at q_ref."""
    q_ref = setting('REFERENCE_POINT') if q_ref is None else q_ref
    W_tilde, E = spec.symmetric_prepotential, spec.offset
    value = (
        W_tilde * W_tilde * (E * E - 2 * E.derivative())
        - 2 * W_tilde * W_tilde.derivative(2)
        + W_tilde.derivative() * W_tilde.derivative()
    ).evaluate(q_ref, spec.bindings)
    return value.real if abs(value.imag) <= 1e-14 * (1 + abs(value)) else value


def compare_hamiltonians(first: HamiltonianPair, second: HamiltonianPair, spec: FamilySpec,
                         q_ref: Optional[float] = None,
                         policy: Optional[SamplingPolicy] = None) -> ZeroVerdict:
    """Compare two Hamiltonian pairs after removing the constant offset matched at q_ref."""
    q_ref = setting('REFERENCE_POINT') if q_ref is None else q_ref
    policy = spec.policy(policy)
    verdicts = []
    for one, other in zip(first, second):
        difference = one - other
        for k, coefficient in enumerate(difference.coefficients):
            if k == 0 and coefficient.is_constant:
                continue
            if k == 0:
                constant = coefficient.evaluate(q_ref, spec.bindings)
                coefficient = coefficient - _numeric_constant(constant)
            verdicts.append(is_zero(coefficient, policy, spec.bindings))
    return ZeroVerdict.combine(verdicts)


# Conditions

def e_condition_expression(E: Expression) -> Expression:
    """E‴ + E E″ + 2E′² − 2E²E′."""
    E1, E2, E3 = E.derivative(), E.derivative(2), E.derivative(3)
    return (E3 + E * E2 + 2 * E1 * E1 - 2 * E * E * E1).expanded()


def w_condition_expression(W_tilde: Expression, E: Expression) -> Expression:
    """(W̃′ + E W̃)″ − E (W̃′ + E W̃)′."""
    u = W_tilde.derivative() + E * W_tilde
    return (u.derivative(2) - E * u.derivative()).expanded()


def check_conditions(spec: FamilySpec, policy: Optional[SamplingPolicy] = None) -> ConditionReport:
    policy = spec.policy(policy)
    E = spec.offset
    e_expression = e_condition_expression(E)
    w_expression = w_condition_expression(spec.symmetric_prepotential, E)
    e_verdict = is_zero(e_expression, policy, spec.bindings) if spec.N >= 3 else None
    w_verdict = is_zero(w_expression, policy, spec.bindings) if spec.N >= 2 else None
    report = ConditionReport(e_verdict, w_verdict, e_expression, w_expression)
    logger.debug(f"Conditions for {spec.label} N={spec.N}: passed={report.passed}")
    return report


def stepwise_conditions(spec: FamilySpec, policy: Optional[SamplingPolicy] = None) -> List[ZeroVerdict]:
    """Per-step conditions of the factor-by-factor construction, steps k = 1..N−1.

    Step k uses W_k = W − (4k−1)/6·E in place of W̃ in the W-condition.
    """
    policy = spec.policy(policy)
    W, E = spec.prepotential, spec.offset
    verdicts = []
    for k in range(1, spec.N):
        W_k = W - _rational(4 * k - 1, 6) * E.tree
        verdicts.append(is_zero(w_condition_expression(W_k, E), policy, spec.bindings))
    return verdicts


def check_w_tilde_identity(spec: FamilySpec, policy: Optional[SamplingPolicy] = None) -> ZeroVerdict:
    """[W̃²(E² − 2E′)]′ − 2W̃W̃‴, which vanishes whenever the W-condition holds."""
    W_tilde, E = spec.symmetric_prepotential, spec.offset
    expression = (W_tilde * W_tilde * (E * E - 2 * E.derivative())).derivative() \
        - 2 * W_tilde * W_tilde.derivative(3)
    return is_zero(expression.expanded(), spec.policy(policy), spec.bindings)


def recursion_step(spec: FamilySpec, policy: Optional[SamplingPolicy] = None) -> RecursionReport:
    """Relate fold N to fold N+1 at fixed W and E through h±."""
    policy = spec.policy(policy)
    N = spec.N
    W, E = spec.prepotential, spec.offset
    W1, E1 = W.derivative(), E.derivative()
    shared = (
        -E.tree * W.tree
        + _rational(4 * N - 1, 6) * E.tree ** 2
        - _rational(2 * N + 1, 6) * E1.tree
    )
    split = W1.tree - N * E1.tree
    h_plus = Expression(tidy(HALF * (shared + split)))
    h_minus = Expression(tidy(-HALF * (shared - split)))

    V_plus, V_minus = build_potentials(spec)
    V_plus_next, V_minus_next = build_potentials(spec.with_fold(N + 1))

    def verdict(expression: Expression) -> ZeroVerdict:
        return is_zero(expression.expanded(), policy, spec.bindings)

    return RecursionReport(
        h_plus=h_plus,
        h_minus=h_minus,
        potential_step_plus=verdict(V_plus_next - V_plus.tree - 2 * h_plus.tree),
        potential_step_minus=verdict(V_minus_next - V_minus.tree + 2 * h_minus.tree),
        sum_rule=verdict(h_plus + h_minus.tree - split),
        step_condition=verdict(h_minus.derivative(2) - E * h_minus.derivative()),
    )


# Intertwining and the mother Hamiltonian

@performance_monitor('susy.verify_intertwining')
def verify_intertwining(spec: FamilySpec, policy: Optional[SamplingPolicy] = None) -> ResidualReport:
    """Coefficient-wise zero test of A H₋ − H₊ A."""
    policy = spec.policy(policy)
    A = build_supercharge(spec)
    H_plus, H_minus = build_hamiltonians(spec)
    residual = compose(A, H_minus) - compose(H_plus, A)
    verdicts = tuple(is_zero(c, policy, spec.bindings) for c in residual.coefficients)
    overall = ZeroVerdict.combine(verdicts)
    logger.info(f"Intertwining {spec.label} N={spec.N}: {overall.kind.value} "
                f"(max residual {overall.max_residual:.3e})")
    return ResidualReport(residual, verdicts, overall)


def _numeric_constant(value: complex) -> sympy.Expr:
    """Inexact constant; Floats keep the remainder out of exact canonicalization."""
    real = sympy.Float(value.real, 17)
    if value.imag == 0:
        return real
    return real + sympy.I * sympy.Float(value.imag, 17)


def _peel(mother: DifferentialOperator, hamiltonian: DifferentialOperator, spec: FamilySpec,
          policy: SamplingPolicy, q_ref: float):
    N = spec.N
    powers = [DifferentialOperator.identity()]
    for _ in range(N):
        powers.append(compose(hamiltonian, powers[-1]))

    remaining = mother
    values: List[sympy.Expr] = [sympy.Integer(0)] * (N + 1)
    exact_flags = [True] * (N + 1)
    for j in range(N, -1, -1):
        leading = powers[j].coefficient(2 * j).tree
        ratio = tidy(remaining.coefficient(2 * j).tree / leading)
        if ratio.free_symbols:
            value = Expression(ratio).evaluate(q_ref, spec.bindings)
            ratio = _numeric_constant(value)
            exact_flags[j] = False
            logger.debug(f"Mother coefficient a_{j} for {spec.label} N={N} taken at q={q_ref}")
        values[j] = ratio
        remaining = remaining - powers[j].scale(ratio)

    remainder = ZeroVerdict.combine([is_zero(c, policy, spec.bindings) for c in remaining.coefficients])
    return values, exact_flags, remainder


@performance_monitor('susy.extract_mother_polynomial')
def extract_mother_polynomial(spec: FamilySpec, policy: Optional[SamplingPolicy] = None,
                              q_ref: Optional[float] = None) -> MotherPolynomial:
    """Peel ½A†A against powers of H₋, and ½AA† against powers of H₊."""
    policy = spec.policy(policy)
    q_ref = setting('REFERENCE_POINT') if q_ref is None else q_ref
    A = build_supercharge(spec)
    A_dagger = formal_adjoint(A)
    H_plus, H_minus = build_hamiltonians(spec)

    minus_values, exact_flags, remainder = _peel(
        compose(A_dagger, A).scale(HALF), H_minus, spec, policy, q_ref)
    plus_values, _, plus_remainder = _peel(
        compose(A, A_dagger).scale(HALF), H_plus, spec, policy, q_ref)

    difference = Expression(sum((a - b) * Q ** j for j, (a, b) in enumerate(zip(minus_values, plus_values))))
    side = ZeroVerdict.combine([is_zero(difference.expanded(), policy), plus_remainder])

    coefficients = tuple(complex(sympy.N(a, 17)) for a in minus_values)
    logger.info(f"Mother polynomial {spec.label} N={spec.N}: "
                f"remainder {remainder.kind.value}, side {side.kind.value}")
    return MotherPolynomial(coefficients, tuple(exact_flags), remainder, side)


def check_mother_commutes(spec: FamilySpec, policy: Optional[SamplingPolicy] = None) -> ZeroVerdict:
    """[½A†A, H₋] = 0 and [½AA†, H₊] = 0, coefficient by coefficient."""
    policy = spec.policy(policy)
    A = build_supercharge(spec)
    A_dagger = formal_adjoint(A)
    H_plus, H_minus = build_hamiltonians(spec)
    verdicts = []
    for mother, hamiltonian in ((compose(A_dagger, A), H_minus), (compose(A, A_dagger), H_plus)):
        for c in commutator(mother, hamiltonian).coefficients:
            verdicts.append(is_zero(c, policy, spec.bindings))
    return ZeroVerdict.combine(verdicts)
