"""
Per-fold jobs behind the CLI.

Each fold runs the requested commands on its own FamilySpec and returns a plain
dict of checks and tables; folds never share verdict state, so they can run in a
process pool. Report assembly happens in the caller.
"""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from typing import Any, Dict, Iterable, List

from susy.analytics import performance_monitor
from susy.chains import build_chain, chain_constants
from susy.config import RunConfig
from susy.exceptions import NFoldSusyError
from susy.expressions import ZeroVerdict, is_zero
from susy.kernels import kernel_basis
from susy.models import FamilySpec
from susy.reports import check_failed, numeric_check, verdict_check
from susy.spectral import normalizability_probe, run_spectrum
from susy.typea import (
    build_supercharge,
    check_conditions,
    check_mother_commutes,
    check_w_tilde_identity,
    extract_mother_polynomial,
    recursion_step,
    stepwise_conditions,
    symmetric_supercharge,
    verify_intertwining,
)

logger = logging.getLogger(__name__)

COMMANDS = ('check', 'intertwine', 'mother', 'chain', 'spectrum', 'kernels')


def _check_command(spec: FamilySpec, policy) -> Dict[str, Any]:
    report = check_conditions(spec, policy)
    checks = [
        verdict_check('e_condition', "E''' + E E'' + 2E'^2 - 2E^2 E' = 0 (N >= 3)",
                      report.e_condition, {'expression': str(report.e_expression)}),
        verdict_check('w_condition', "(W~' + E W~)'' - E (W~' + E W~)' = 0 (N >= 2)",
                      report.w_condition, {'expression': str(report.w_expression)}),
    ]
    for k, verdict in enumerate(stepwise_conditions(spec, policy), start=1):
        checks.append(verdict_check(f'step_condition[{k}]',
                                    "w_condition with W_k = W - (4k-1)/6 E in place of W~",
                                    verdict, {'k': k}))
    identity = check_w_tilde_identity(spec, policy) if report.w_condition and report.w_condition.passed else None
    checks.append(verdict_check('w_tilde_identity', "[W~^2 (E^2 - 2E')]' = 2 W~ W~'''", identity))

    recursion = recursion_step(spec, policy)
    checks.extend([
        verdict_check('recursion_plus', "V+(N+1) - V+(N) = 2 h+", recursion.potential_step_plus),
        verdict_check('recursion_minus', "V-(N+1) - V-(N) = -2 h-", recursion.potential_step_minus),
        verdict_check('recursion_sum', "h+ + h- = W' - N E'", recursion.sum_rule),
        # W is held fixed at N+1, so this only says whether the same W extends a fold
        verdict_check('recursion_step_condition', "h-'' - E h-' = 0", recursion.step_condition,
                      required=False),
    ])
    return {'checks': checks, 'tables': {}}


def _intertwine_command(spec: FamilySpec, policy) -> Dict[str, Any]:
    report = verify_intertwining(spec, policy)
    checks = [verdict_check(
        'intertwining', "A H- - H+ A = 0", report.overall,
        {'coefficients': [verdict.kind.value for verdict in report.coefficients]},
    )]
    difference = symmetric_supercharge(spec) - build_supercharge(spec)
    symmetric = ZeroVerdict.combine([is_zero(c, policy, spec.bindings) for c in difference.coefficients])
    checks.append(verdict_check('symmetric_supercharge',
                                "prod (d + W~ - jE), |j| <= (N-1)/2, equals A", symmetric))
    return {'checks': checks, 'tables': {'supercharge': str(build_supercharge(spec))}}


def _mother_command(spec: FamilySpec, policy) -> Dict[str, Any]:
    polynomial = extract_mother_polynomial(spec, policy)
    checks = [
        verdict_check('mother_remainder', "1/2 A^dag A - sum a_j H-^j = 0", polynomial.remainder),
        verdict_check('mother_side_consistency', "1/2 A A^dag - sum a_j H+^j = 0", polynomial.side_consistency),
        verdict_check('mother_commutes', "[1/2 A^dag A, H-] = 0 = [1/2 A A^dag, H+]",
                      check_mother_commutes(spec, policy)),
    ]
    table = [
        {'j': j, 'a_j': coefficient, 'exact': flag}
        for j, (coefficient, flag) in enumerate(zip(polynomial.coefficients, polynomial.exact))
    ]
    return {'checks': checks, 'tables': {'mother_polynomial': table}}


def _chain_command(spec: FamilySpec, policy) -> Dict[str, Any]:
    c1, c = chain_constants(spec)
    report = build_chain(spec, policy=policy)
    checks = [
        verdict_check(f'chain_step[{step.index}]', "H>^(k) L^(k) - L^(k) H<^(k-1) = 0",
                      step.residual, {'offset': str(step.offset)})
        for step in report.steps
    ]
    checks.extend(
        verdict_check(f'chain_mismatch[{k}]', "H>^(k) - H<^(k) = 0", verdict,
                      {'mismatch': str(mismatch)}, required=False)
        for k, (mismatch, verdict) in enumerate(zip(report.mismatches, report.mismatch_verdicts), start=1)
    )
    checks.extend([
        verdict_check('chain_product', "L^(N) ... L^(1) = A", report.product_matches),
        verdict_check('chain_ends', "H>^(N) L - L H<^(0) = 0", report.chain_residual, required=False),
        verdict_check('chain_end_to_end', "A H- - H+ A = 0", report.end_to_end.overall),
    ])
    return {'checks': checks, 'tables': {'chain_constants': {'c1': str(c1), 'c': str(c)}}}


def _spectrum_command(spec: FamilySpec, config: RunConfig) -> Dict[str, Any]:
    spectral = config.spectral
    problem = spectral.problem(spec)
    report = run_spectrum(spec, problem, spectral.levels, spectral.kernel_tol,
                          spectral.pair_tol, spectral.mother_tol)
    scale = 2 ** spec.N
    paired = [row for row in report.pairing if not row.kernel]
    checks = [
        numeric_check('spectral_pairing', "(H+ - E) A psi = 0 for H- eigenpairs (E, psi)",
                      all(row.passed for row in report.pairing),
                      max((row.residual for row in paired), default=0.0),
                      {'threshold': spectral.pair_tol * scale, 'kernel_levels': report.kernel_levels}),
        numeric_check('spectral_mother', "<psi|1/2 A^dag A|psi> = P(E)",
                      all(row.passed for row in report.mother),
                      max((row.difference for row in report.mother), default=0.0),
                      {'tolerance': spectral.mother_tol}),
        numeric_check('kernel_normalizable', "integral |chi_j|^2 < infinity",
                      all(flag.normalizable for flag in report.kernels),
                      max((max(flag.boundary_ratios) for flag in report.kernels), default=0.0),
                      required=False),
    ]
    tables = {
        'problem': {'a': problem.a, 'b': problem.b, 'n': problem.n},
        'eigenvalues_minus': list(report.eigenvalues_minus),
        'eigenvalues_plus': list(report.eigenvalues_plus),
        'pairing': [asdict(row) for row in report.pairing],
        'mother': [asdict(row) for row in report.mother],
        'kernels': [
            {'index': flag.index, 'normalizable': flag.normalizable, 'norm_squared': flag.norm_squared,
             'boundary_ratios': list(flag.boundary_ratios)}
            for flag in report.kernels
        ],
        'notes': list(report.notes),
    }
    return {'checks': checks, 'tables': tables}


def _kernels_command(spec: FamilySpec, config: RunConfig, policy) -> Dict[str, Any]:
    states = kernel_basis(spec, policy=policy)
    problem = config.spectral.problem(spec)
    checks, table = [], []
    for state in states:
        checks.append(verdict_check(f'kernel[{state.index}]', "A chi_j = 0", state.residual,
                                    {'method': state.method.value}))
        flag = normalizability_probe(state, problem, spec, grow=spec.window is None)
        table.append({
            'index': state.index,
            'method': state.method.value,
            'expression': str(state.expression) if state.expression is not None else None,
            'normalizable': flag.normalizable,
            'norm_squared': flag.norm_squared,
        })
    return {'checks': checks, 'tables': {'kernels': table}}


@performance_monitor('susy.run_fold')
def run_fold(config: RunConfig, N: int, commands: Iterable[str]) -> Dict[str, Any]:
    """Run the commands for one fold; domain errors are captured in the result."""
    result: Dict[str, Any] = {'N': N, 'checks': [], 'tables': {}}
    try:
        spec = config.spec(N)
        result['family'] = spec.describe()
        policy = spec.policy(config.verify.policy())
        for command in commands:
            if command == 'check':
                part = _check_command(spec, policy)
            elif command == 'intertwine':
                part = _intertwine_command(spec, policy)
            elif command == 'mother':
                part = _mother_command(spec, policy)
            elif command == 'chain':
                part = _chain_command(spec, policy)
            elif command == 'spectrum':
                part = _spectrum_command(spec, config)
            elif command == 'kernels':
                part = _kernels_command(spec, config, policy)
            else:
                raise ValueError(f"unknown command '{command}'")
            result['checks'].extend(part['checks'])
            result['tables'].update(part['tables'])
        failed = [check["name"] for check in result["checks"] if check_failed(check)]
        logger.info(f"Fold N={N} finished: {len(result['checks'])} checks, {len(failed)} failed")
    except NFoldSusyError as e:
        logger.error(f"Fold N={N} failed: {e}")
        result['error'] = str(e)
        result['error_type'] = type(e).__name__
    return result


def _init_worker():
    if os.environ.get('DJANGO_SETTINGS_MODULE'):
        import django
        django.setup()


def run_folds(config: RunConfig, commands: Iterable[str], jobs: int = 1) -> List[Dict[str, Any]]:
    """Run every fold of the config, sequentially or in a process pool."""
    commands = list(commands)
    folds = config.fold.folds
    if jobs <= 1 or len(folds) == 1:
        return [run_fold(config, N, commands) for N in folds]

    logger.info(f"Running {len(folds)} folds on {jobs} worker processes")
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker) as pool:
        futures = [pool.submit(run_fold, config, N, commands) for N in folds]
        return [future.result() for future in futures]
