"""
Machine-readable run reports and their human summary.

A report is a plain dict:

    {
      "schema_version": 1,
      "header": {"generated_at": ..., "tool": "nfoldsusy", "version": ...},
      "run": {"commands": [...], "family": {...}, "verify": {...}, "spectral": {...}},
      "folds": [{"N": 1, "family": {...}, "checks": [...], "tables": {...}}, ...],
      "passed": true
    }

Each check is {name, relation, verdict, max_residual, witness?, params, required}.
Everything except the header is a deterministic function of the config and seed.
"""
import json
import math
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd

from nfoldsusy import __version__
from susy.conf import setting
from susy.expressions import ZeroVerdict

NOT_APPLICABLE = 'not_applicable'
PASSED = 'passed'
FAILED = 'failed'


def clean(value: Any) -> Any:
    """JSON-safe copy: complex numbers become [re, im], non-finite floats become None."""
    if isinstance(value, dict):
        return {str(key): clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(item) for item in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, complex):
        if value.imag == 0:
            return clean(value.real)
        return [clean(value.real), clean(value.imag)]
    if isinstance(value, int):
        return value
    if hasattr(value, 'item'):
        return clean(value.item())
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    return str(value)


def verdict_check(name: str, relation: str, verdict: Optional[ZeroVerdict],
                  params: Optional[Dict[str, Any]] = None, required: bool = True) -> Dict[str, Any]:
    """Check entry for a symbolic zero test; None means the check does not apply."""
    if verdict is None:
        return {
            'name': name,
            'relation': relation,
            'verdict': NOT_APPLICABLE,
            'max_residual': None,
            'params': clean(params or {}),
            'required': required,
        }
    entry = {
        'name': name,
        'relation': relation,
        'verdict': verdict.kind.value,
        'max_residual': clean(verdict.max_residual),
        'params': clean(dict(params or {}, samples=verdict.samples_used)),
        'required': required,
    }
    if verdict.witness is not None:
        entry['witness'] = verdict.witness.to_dict()
    return entry


def numeric_check(name: str, relation: str, passed: bool, max_residual: float,
                  params: Optional[Dict[str, Any]] = None, required: bool = True) -> Dict[str, Any]:
    return {
        'name': name,
        'relation': relation,
        'verdict': PASSED if passed else FAILED,
        'max_residual': clean(max_residual),
        'params': clean(params or {}),
        'required': required,
    }


def check_failed(check: Dict[str, Any]) -> bool:
    return check['required'] and check['verdict'] in ('non_zero', FAILED)


def build_report(commands: Iterable[str], run: Dict[str, Any], folds: List[Dict[str, Any]]) -> Dict[str, Any]:
    folds = sorted(folds, key=lambda fold: fold['N'])
    return {
        'schema_version': setting('REPORT_SCHEMA_VERSION'),
        'header': {
            'generated_at': datetime.now(timezone.utc).isoformat(),
            'tool': 'nfoldsusy',
            'version': __version__,
        },
        'run': clean(dict(run, commands=list(commands))),
        'folds': clean(folds),
        'passed': report_passed(folds),
    }


def report_passed(folds: List[Dict[str, Any]]) -> bool:
    return not any(fold.get('error') for fold in folds) and not any(
        check_failed(check) for fold in folds for check in fold['checks']
    )


def dumps(report: Dict[str, Any], include_header: bool = True) -> str:
    """Deterministic JSON text; without the header two runs of one config compare equal."""
    body = report if include_header else {k: v for k, v in report.items() if k != 'header'}
    return json.dumps(body, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_report(report: Dict[str, Any], path: str) -> None:
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(dumps(report))


def checks_frame(report: Dict[str, Any]) -> pd.DataFrame:
    rows = [
        {
            'N': fold['N'],
            'check': check['name'],
            'verdict': check['verdict'],
            'max_residual': check['max_residual'],
            'required': check['required'],
        }
        for fold in report['folds']
        for check in fold['checks']
    ]
    return pd.DataFrame(rows, columns=['N', 'check', 'verdict', 'max_residual', 'required'])


def table_frame(report: Dict[str, Any], table: str) -> pd.DataFrame:
    """One of the per-fold tables (pairing, mother, kernels, ...) stacked over folds."""
    frames = [
        pd.DataFrame(fold['tables'][table]).assign(N=fold['N'])
        for fold in report['folds']
        if fold.get('tables', {}).get(table)
    ]
    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, ignore_index=True)


def format_summary(report: Dict[str, Any]) -> str:
    frame = checks_frame(report)
    lines = []
    if frame.empty:
        lines.append("No checks were run.")
    else:
        counts = frame.groupby('verdict').size().to_dict()
        lines.append(frame.to_string(index=False, float_format=lambda x: f"{x:.3e}"))
        lines.append("")
        lines.append(", ".join(f"{verdict}: {count}" for verdict, count in sorted(counts.items())))
    for fold in report['folds']:
        if fold.get('error'):
            lines.append(f"N={fold['N']}: {fold['error']}")
    return "\n".join(lines)
