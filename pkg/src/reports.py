"""
Experiment records and their serialization.

A `Report` holds the inputs of a run, the computed quantities, a list of
`Assertion` rows (named inequalities or identities with both sides) and
free-form warnings. A report passes iff every assertion passes.

Output bytes depend only on the report contents: keys are sorted and
every float is rounded to 12 significant digits before emission.
"""

from typing import Any, Dict, List, Optional
from dataclasses import dataclass, field
import json
import math
import os
import logging

import numpy as np
import pandas as pd
import jsonschema


logger = logging.getLogger(__name__)


SCHEMA_VERSION = "1"
FLOAT_DIGITS = 12
# Bounds 2^t with |t| above this are compared in log2.
MAX_PLAIN_LOG2 = 1000.0
SCHEMA_PATH = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), os.pardir, 'schemas', 'report.schema.json')


@dataclass
class Assertion:
    name: str
    lhs: float
    rhs: float
    relation: str
    passed: bool
    tol: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'relation': self.relation,
            'pass': bool(self.passed),
            'tol': self.tol,
        }


@dataclass
class Report:
    command: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    quantities: Dict[str, Any] = field(default_factory=dict)
    assertions: List[Assertion] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    trace: Optional[List[Dict[str, Any]]] = None
    schema_version: str = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def failed_assertions(self) -> List[Assertion]:
        return [a for a in self.assertions if not a.passed]

    def assertion(self, name: str) -> Assertion:
        for a in self.assertions:
            if a.name == name:
                return a
        raise KeyError(name)

    def check_le(self, name: str, lhs: float, rhs: float, tol: float = 0.0) -> bool:
        """Records lhs <= rhs + tol."""
        lhs, rhs = float(lhs), float(rhs)
        ok = lhs <= rhs + tol
        self.assertions.append(Assertion(name, lhs, rhs, '<=', ok, tol))
        if not ok:
            logger.warning(f"{self.command}: {name} failed: {lhs!r} > {rhs!r}")
        return ok

    def check_ge(self, name: str, lhs: float, rhs: float, tol: float = 0.0) -> bool:
        """Records lhs >= rhs - tol."""
        lhs, rhs = float(lhs), float(rhs)
        ok = lhs >= rhs - tol
        self.assertions.append(Assertion(name, lhs, rhs, '>=', ok, tol))
        if not ok:
            logger.warning(f"{self.command}: {name} failed: {lhs!r} < {rhs!r}")
        return ok

    def check_close(self, name: str, lhs: float, rhs: float, tol: float) -> bool:
        """Records |lhs - rhs| <= tol."""
        lhs, rhs = float(lhs), float(rhs)
        ok = abs(lhs - rhs) <= tol
        self.assertions.append(Assertion(name, lhs, rhs, '==', ok, tol))
        if not ok:
            logger.warning(f"{self.command}: {name} failed: |{lhs!r} - {rhs!r}| > {tol}")
        return ok

    def check_true(self, name: str, ok: bool) -> bool:
        """Records a boolean fact as 1 == 1 or 0 == 1."""
        ok = bool(ok)
        self.assertions.append(Assertion(name, float(ok), 1.0, '==', ok, 0.0))
        if not ok:
            logger.warning(f"{self.command}: {name} failed")
        return ok

    def check_le_pow2(self, name: str, lhs: float, rhs_log2: float) -> bool:
        """
        lhs <= 2^rhs_log2. Compared as log2(lhs) <= rhs_log2, under the
        name `<name>.log2`, when 2^rhs_log2 does not fit in a double.
        """
        if abs(rhs_log2) < MAX_PLAIN_LOG2:
            return self.check_le(name, lhs, 2.0 ** rhs_log2)
        return self.check_le(name + '.log2', safe_log2(lhs), rhs_log2)

    def check_ge_pow2(self, name: str, lhs: float, rhs_log2: float) -> bool:
        """lhs >= 2^rhs_log2, with the same log2 fallback."""
        if abs(rhs_log2) < MAX_PLAIN_LOG2:
            return self.check_ge(name, lhs, 2.0 ** rhs_log2)
        return self.check_ge(name + '.log2', safe_log2(lhs), rhs_log2)

    def skip(self, name: str, reason: str) -> None:
        self.quantities[f"{name}.skipped"] = True
        self.warn(f"{name} skipped: {reason}")

    def warn(self, message: str) -> None:
        logger.warning(f"{self.command}: {message}")
        self.warnings.append(message)

    def add_trace(self, entry: Dict[str, Any]) -> None:
        if self.trace is None:
            self.trace = []
        self.trace.append(entry)

    def merge(self, other: 'Report', prefix: str = "") -> None:
        """
        Appends the quantities, assertions and warnings of `other`, with
        every name prefixed by `prefix`.
        """
        for key, value in other.quantities.items():
            self.quantities[prefix + key] = value
        for a in other.assertions:
            self.assertions.append(
                Assertion(prefix + a.name, a.lhs, a.rhs, a.relation, a.passed, a.tol))
        self.warnings.extend(prefix + w for w in other.warnings)
        if other.trace:
            for entry in other.trace:
                self.add_trace({'source': prefix.rstrip('.'), **entry})

    def to_dict(self) -> Dict[str, Any]:
        d = {
            'schema_version': self.schema_version,
            'command': self.command,
            'inputs': self.inputs,
            'quantities': self.quantities,
            'assertions': [a.to_dict() for a in self.assertions],
            'warnings': list(self.warnings),
            'pass': self.passed,
        }
        if self.trace is not None:
            d['trace'] = self.trace
        return to_jsonable(d)

    def to_json(self) -> str:
        return dumps(self.to_dict())


def safe_log2(x: float) -> float:
    return math.log2(x) if x > 0 else -math.inf


def round_float(x: float) -> Any:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{FLOAT_DIGITS}g}")


def to_jsonable(obj: Any) -> Any:
    """
    Converts numpy scalars and arrays, tuples, sets and complex numbers to
    plain JSON values and rounds every float.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(obj)]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {'re': round_float(obj.real), 'im': round_float(obj.imag)}
    return obj


def dumps(d: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(d), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_json(report: Report, path: Optional[str]) -> str:
    text = report.to_json()
    if path is not None:
        _ensure_parent(path)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    return text


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        rounded = round_float(float(value))
        return rounded if isinstance(rounded, str) else f"{rounded:.{FLOAT_DIGITS}g}"
    return str(value)


def table_to_csv(rows: List[Dict[str, Any]], columns: List[str],
                 path: Optional[str] = None) -> str:
    """
    Writes rows as CSV with the given column order, LF line endings and
    12 significant digits. Returns the CSV text.
    """
    df = pd.DataFrame([[format_cell(row[c]) for c in columns] for row in rows],
                      columns=columns, dtype=str)
    text = df.to_csv(index=False, lineterminator='\n')
    if path is not None:
        _ensure_parent(path)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    return text


def load_schema(schema_path: str = SCHEMA_PATH) -> Dict[str, Any]:
    with open(schema_path, 'r') as f:
        return json.load(f)


def validate_report(report_dict: Dict[str, Any],
                    schema: Optional[Dict[str, Any]] = None) -> None:
    """Raises jsonschema.ValidationError if the report does not match."""
    if schema is None:
        schema = load_schema()
    jsonschema.validate(instance=report_dict, schema=schema)
