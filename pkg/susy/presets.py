"""
Named type A families and their special parameter choices.

Each family formula gives the symmetric prepotential W̃; the FamilySpec carries
W = W̃ + (N−1)E/2, so both factorizations of the cubic family and every fold of the
periodic family share real Hamiltonians.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

import sympy

from susy.exceptions import PresetError
from susy.expressions import Expression, exact
from susy.models import FamilySpec
from susy.operators import DifferentialOperator
from susy.parsing import Q
from susy.typea import build_supercharge

logger = logging.getLogger(__name__)

CUBIC_WINDOW = (0.2, 12.0)


class Family(Enum):
    QUADRATIC = "quadratic"
    QUARTIC_BREAKING = "quartic_breaking"
    EXPONENTIAL = "exponential"
    PERIODIC = "periodic"
    CUBIC = "cubic"


@dataclass(frozen=True)
class PresetInfo:
    parameters: Tuple[str, ...]
    defaults: Dict[str, object]
    formula: str
    provenance: str
    constraints: str = ""


PRESETS: Dict[Family, PresetInfo] = {
    Family.QUADRATIC: PresetInfo(
        parameters=('C1', 'C2', 'C3'),
        defaults={'C1': -0.1, 'C2': 1, 'C3': 0},
        formula="W~ = C1*q^2 + C2*q + C3, E = 0",
        provenance="quadratic prepotential with vanishing E; 2H = p^2 + W^2 +- N W'",
    ),
    Family.QUARTIC_BREAKING: PresetInfo(
        parameters=('g',),
        defaults={'g': 0.1},
        formula="W = -g*q^2 + q, E = 0",
        provenance="quadratic family at C1 = -g, C2 = 1, C3 = 0; the perturbed "
                   "harmonic well with non-normalizable kernel states",
    ),
    Family.EXPONENTIAL: PresetInfo(
        parameters=('E0', 'C1', 'C2', 'C3'),
        defaults={'E0': 1, 'C1': 0, 'C2': 1, 'C3': 0},
        formula="W~ = C1*exp(E0*q) + C2*exp(-E0*q) + C3, E = E0",
        provenance="constant E; Morse-type wells",
    ),
    Family.PERIODIC: PresetInfo(
        parameters=('g',),
        defaults={'g': 0.1},
        formula="W~ = sin(g*q)/g, E = 1i*g",
        provenance="exponential family at E0 = ig, C1 = 1/(2ig), C2 = -1/(2ig), C3 = 0, "
                   "written in real form; potentials have period 2pi/g",
        constraints="g != 0",
    ),
    Family.CUBIC: PresetInfo(
        parameters=('nu', 'C1', 'C2', 'C3'),
        defaults={'nu': 2, 'C1': 1, 'C2': 0, 'C3': 0},
        formula="W~ = C1*q^3 + C2*q + C3/q, E = (nu-1)/q",
        provenance="E = (nu-1)/q with a centrifugal term (N^2-1)/(4q^2); "
                   "nu = 2 and nu = -2 factorize the same Hamiltonians differently",
        constraints="nu in {+2, -2}; pole at q = 0",
    ),
}


@dataclass(frozen=True)
class PresetId:
    """A family with its parameter values; missing parameters take the defaults."""

    family: Family
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        family = self.family if isinstance(self.family, Family) else _family(self.family)
        object.__setattr__(self, 'family', family)
        info = PRESETS[family]
        unknown = set(self.params) - set(info.parameters)
        if unknown:
            raise PresetError(f"{family.value} has no parameter(s) {', '.join(sorted(unknown))}")
        values = dict(info.defaults)
        values.update(self.params)
        object.__setattr__(self, 'params', values)
        self._validate()

    def _validate(self):
        if self.family is Family.CUBIC:
            nu = _numeric(self.params['nu'])
            if nu not in (2, -2):
                raise PresetError(f"cubic family requires nu = +2 or -2, got {self.params['nu']!r}")
        if self.family in (Family.PERIODIC, Family.QUARTIC_BREAKING):
            if _numeric(self.params['g']) == 0:
                raise PresetError(f"{self.family.value} requires g != 0")

    @property
    def name(self) -> str:
        return self.family.value

    @classmethod
    def quadratic(cls, C1=-0.1, C2=1, C3=0) -> 'PresetId':
        return cls(Family.QUADRATIC, {'C1': C1, 'C2': C2, 'C3': C3})

    @classmethod
    def quartic_breaking(cls, g=0.1) -> 'PresetId':
        return cls(Family.QUARTIC_BREAKING, {'g': g})

    @classmethod
    def exponential(cls, E0=1, C1=0, C2=1, C3=0) -> 'PresetId':
        return cls(Family.EXPONENTIAL, {'E0': E0, 'C1': C1, 'C2': C2, 'C3': C3})

    @classmethod
    def periodic(cls, g=0.1) -> 'PresetId':
        return cls(Family.PERIODIC, {'g': g})

    @classmethod
    def cubic(cls, nu=2, C1=1, C2=0, C3=0) -> 'PresetId':
        return cls(Family.CUBIC, {'nu': nu, 'C1': C1, 'C2': C2, 'C3': C3})


def _family(name) -> Family:
    try:
        return Family(str(name))
    except ValueError:
        raise PresetError(f"unknown preset '{name}'; choose from "
                          f"{', '.join(f.value for f in Family)}") from None


def _numeric(value) -> complex:
    value = complex(sympy.N(exact(value), 17))
    return value.real if value.imag == 0 else value


def _spec(label: str, N: int, W_tilde: Expression, E: Expression, bindings: Mapping[str, object],
          poles=(), window=None) -> FamilySpec:
    W = W_tilde + exact(N - 1) / 2 * E.tree
    logger.debug(f"Preset {label} N={N}: W = {W}")
    return FamilySpec(N=N, W=W, E=E, bindings=bindings, poles=poles, label=label, window=window)


def make(preset: PresetId, N: int) -> FamilySpec:
    """FamilySpec for ``preset`` at fold N; parameters stay symbolic with bound values."""
    family, params = preset.family, preset.params

    if family is Family.QUADRATIC:
        W_tilde = Expression.parse("C1*q^2 + C2*q + C3")
        return _spec(family.value, N, W_tilde, Expression.constant(0), params)

    if family is Family.QUARTIC_BREAKING:
        W_tilde = Expression.parse("-g*q^2 + q")
        return _spec(family.value, N, W_tilde, Expression.constant(0), params)

    if family is Family.EXPONENTIAL:
        W_tilde = Expression.parse("C1*exp(E0*q) + C2*exp(-E0*q) + C3")
        return _spec(family.value, N, W_tilde, Expression.parameter('E0'), params)

    if family is Family.PERIODIC:
        g = _numeric(params['g'])
        W_tilde = Expression.parse("sin(g*q)/g")
        window = (-math.pi / abs(g), math.pi / abs(g)) if isinstance(g, float) else None
        return _spec(family.value, N, W_tilde, Expression.parse("1i*g"), params, window=window)

    # Cubic: nu is discrete and enters E exactly
    nu = int(_numeric(params['nu']))
    W_tilde = Expression.parse("C1*q^3 + C2*q + C3/q")
    E = Expression(sympy.Integer(nu - 1) / Q)
    bindings = {name: value for name, value in params.items() if name != 'nu'}
    return _spec(f"cubic(nu={nu:+d})", N, W_tilde, E, bindings, poles=(0.0,), window=CUBIC_WINDOW)


def from_config(name: str, params: Optional[Mapping[str, object]] = None) -> PresetId:
    return PresetId(_family(name), dict(params or {}))


def supercharge_variants(preset: PresetId, N: int) -> List[DifferentialOperator]:
    """Both factorized supercharges of a cubic family, nu = +2 first."""
    if preset.family is not Family.CUBIC:
        raise PresetError(f"supercharge variants exist only for the cubic family, not {preset.name}")
    variants = []
    for nu in (2, -2):
        params = dict(preset.params, nu=nu)
        variants.append(build_supercharge(make(PresetId(Family.CUBIC, params), N)))
    return variants


def list_presets() -> str:
    lines = []
    for family, info in PRESETS.items():
        defaults = ", ".join(f"{name}={info.defaults[name]}" for name in info.parameters)
        lines.append(f"{family.value}({', '.join(info.parameters)})")
        lines.append(f"    {info.formula}")
        lines.append(f"    defaults: {defaults}")
        if info.constraints:
            lines.append(f"    constraints: {info.constraints}")
        lines.append(f"    {info.provenance}")
    return "\n".join(lines)
