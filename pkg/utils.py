"""
Shared utilities for the toolkit: the error hierarchy, provenance tags,
report containers and JSON encoding.
"""

import json
import hashlib
import dataclasses
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np


# ============== Errors ==============

class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class CompositionNonzero(ToolkitError):
    """Two consecutive boundary maps do not compose to zero."""


class ResolutionNotExact(ToolkitError):
    """A constructed resolution failed its exactness check."""


class PresentationSyntaxError(ToolkitError, ValueError):
    """A ring presentation or polynomial could not be parsed."""


class InconsistentPresentation(ToolkitError):
    """A presentation collapses (1 = 0) or its squares do not respect the relations."""


class DegreeOverflow(ToolkitError):
    """A product or operation lands above the top degree of a ring."""


class SingularPairing(ToolkitError):
    """The Poincaré duality pairing is degenerate."""


class SymmetryNotInduced(ToolkitError):
    """A claimed symmetry does not normalize the group action."""


class NonUnitQuaternion(ToolkitError, ValueError):
    """A rotation was requested by a quaternion that is not of unit length."""

    def __init__(self, message: str, norm: float):
        super().__init__(message)
        self.norm = norm


class ClosedFormMismatch(ToolkitError):
    """Quaternion arithmetic and a closed form disagree."""

    def __init__(self, message: str, witness: Any = None, deviation: float = 0.0):
        super().__init__(message)
        self.witness = witness
        self.deviation = deviation


class OrderFailed(ToolkitError):
    """A map raised to its claimed order is not the identity."""

    def __init__(self, message: str, witness: Any = None, deviation: float = 0.0):
        super().__init__(message)
        self.witness = witness
        self.deviation = deviation


class FixedPointFound(ToolkitError):
    """A nontrivial group element fixes (or nearly fixes) a point."""

    def __init__(self, message: str, witness: Any = None, power: int = 1, displacement: float = 0.0):
        super().__init__(message)
        self.witness = witness
        self.power = power
        self.displacement = displacement


class IdentityViolated(ToolkitError):
    """A sampled identity of the covering map failed."""

    def __init__(self, message: str, witness: Any = None, deviation: float = 0.0):
        super().__init__(message)
        self.witness = witness
        self.deviation = deviation


class NonTransverseDoublePoint(ToolkitError):
    """The coincidence map is rank deficient at a double point."""

    def __init__(self, message: str, witness: Any = None, singular_values: Any = None):
        super().__init__(message)
        self.witness = witness
        self.singular_values = singular_values


class SolverDiverged(ToolkitError):
    """Newton refinement did not converge from any seed near a candidate."""

    def __init__(self, message: str, witness: Any = None, residual: float = float('nan')):
        super().__init__(message)
        self.witness = witness
        self.residual = residual


class UnsupportedImmersion(ToolkitError, ValueError):
    """The requested (quotient, class) pair has no catalog representative."""


# ============== Provenance ==============

class Provenance:
    """Provenance tags carried by every numeric claim in a report."""
    EXPECTED = 'paper-expected'
    COMPUTED = 'computed'
    ASSUMPTION = 'assumption'

    ALL = [EXPECTED, COMPUTED, ASSUMPTION]


def claim(value: Any, provenance: str = Provenance.COMPUTED, note: str = '') -> Dict[str, Any]:
    """Wrap a value with its provenance tag."""
    if provenance not in Provenance.ALL:
        raise ValueError(f"Unknown provenance: {provenance}")
    out = {'value': value, 'provenance': provenance}
    if note:
        out['note'] = note
    return out


# ============== JSON ==============

class ToolkitEncoder(json.JSONEncoder):
    """JSON encoder for numpy scalars/arrays, fractions, tuples-of-ints and dataclasses."""
    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, Fraction):
            return int(obj) if obj.denominator == 1 else float(obj)
        if isinstance(obj, (set, frozenset)):
            return sorted(obj)
        if hasattr(obj, 'to_dict'):
            return obj.to_dict()
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return dataclasses.asdict(obj)
        return super().default(obj)


def dumps(payload: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed separators."""
    return json.dumps(payload, cls=ToolkitEncoder, sort_keys=True, indent=2, ensure_ascii=False)


def round_float(x: float, digits: int = 12) -> float:
    """Round floats so reports do not depend on the last ulp."""
    return float(f"{float(x):.{digits}g}")


# ============== Reports ==============

@dataclasses.dataclass
class Report:
    """One CLI report: inputs echo, section tag, payload and metadata."""
    command: str
    inputs: Dict[str, Any]
    section: str
    results: Dict[str, Any]
    metadata: Dict[str, Any] = dataclasses.field(default_factory=dict)
    checks: List[Dict[str, Any]] = dataclasses.field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'command': self.command,
            'inputs': self.inputs,
            'paper_section': self.section,
            'results': self.results,
            'metadata': self.metadata,
            'checks': self.checks,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def digest(self) -> str:
        """Deterministic digest of the JSON rendering."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    def to_text(self) -> str:
        lines = [f"{self.command}  [{self.section}]"]
        for key, value in self.inputs.items():
            lines.append(f"  input {key} = {_text_value(value)}")
        lines.extend(_text_lines(self.results, indent=2))
        for check in self.checks:
            mark = '✓' if check.get('ok') else '✗'
            lines.append(f"{mark} {check.get('name')}: {_text_value(check.get('computed'))}"
                         f" (expected {_text_value(check.get('expected'))})")
        if self.metadata:
            meta = ', '.join(f"{k}={_text_value(v)}" for k, v in sorted(self.metadata.items()))
            lines.append(f"  defaults: {meta}")
        return '\n'.join(lines)

    @property
    def ok(self) -> bool:
        return all(check.get('ok') for check in self.checks)


def _text_value(value: Any) -> str:
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, cls=ToolkitEncoder, sort_keys=True, ensure_ascii=False)
    return str(value)


def _text_lines(payload: Any, indent: int) -> List[str]:
    pad = ' ' * indent
    lines = []
    if isinstance(payload, dict):
        for key in sorted(payload):
            value = payload[key]
            if isinstance(value, dict) and 'provenance' not in value:
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(value, indent + 2))
            else:
                lines.append(f"{pad}{key}: {_text_value(value)}")
    else:
        lines.append(f"{pad}{_text_value(payload)}")
    return lines


def write_report(report: Report, fmt: str = 'text', out: Optional[str] = None) -> str:
    """Render a report and write it to a file or return it for stdout."""
    text = report.to_json() if fmt == 'json' else report.to_text()
    if out:
        with open(out, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
    return text
