"""Line-oriented circuit text format.

::

    # action 3 of the umbrella problem
    qubits 2
    ry q[0], tau0
    cnot q[0], q[1]
    ry q[0], tau - tau0

The ``qubits`` header comes first. Gate lines are ``h``, ``x``, ``y``, ``z``,
``i`` with one ``q[<i>]`` operand, ``ry q[<i>], <angle>`` and
``cnot q[<control>], q[<target>]``. Angles are expressions over parameters
and constants, evaluated in radians when the circuit is parsed. ``#`` starts
a comment.
"""

from __future__ import annotations

import math
import re
from typing import Mapping

from .errors import ParseDiagnostic
from .reward_lang import evaluate, parse_expression
from .statevector import MAX_QUBITS, SINGLE_QUBIT_GATES, Circuit, Gate

_WORD_RE = re.compile(r"\s*(\S+)")
_HEADER_RE = re.compile(r"qubits\s+(\d+)\s*$")
_QUBIT_RE = re.compile(r"\s*q\s*\[\s*(\d+)\s*\]\s*")


def _statements(text: str):
    """Yield (line number, code without comment) for non-blank lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("#", 1)[0]
        if code.strip():
            yield lineno, code


def _qubit(code: str, pos: int, n_qubits: int, lineno: int) -> tuple[int, int]:
    m = _QUBIT_RE.match(code, pos)
    if m is None:
        raise ParseDiagnostic("syntax", "expected a qubit operand q[<index>]", lineno, _col(code, pos))
    index = int(m.group(1))
    if index >= n_qubits:
        raise ParseDiagnostic(
            "bad-index", f"q[{index}] out of range for {n_qubits} qubit(s)", lineno, m.start(1) + 1
        )
    return index, m.end()


def _col(code: str, pos: int) -> int:
    """1-based column of the first non-blank character at or after ``pos``."""
    while pos < len(code) and code[pos].isspace():
        pos += 1
    return pos + 1


def _comma(code: str, pos: int, lineno: int) -> int:
    if pos >= len(code) or code[pos] != ",":
        raise ParseDiagnostic("syntax", "expected ','", lineno, _col(code, pos))
    return pos + 1


def _end(code: str, pos: int, lineno: int):
    if code[pos:].strip():
        raise ParseDiagnostic("syntax", f"unexpected {code[pos:].strip()!r}", lineno, _col(code, pos))


def parse_circuit(
    text: str, params: Mapping[str, float] | None = None, *, n_qubits: int | None = None
) -> Circuit:
    """Parse circuit text, raising the first :class:`ParseDiagnostic` found.

    When ``n_qubits`` is given the ``qubits`` header may be omitted; if it is
    present it must agree.
    """
    params = dict(params or {})
    statements = list(_statements(text))
    ops: list[Gate] = []
    if n_qubits is None or (statements and statements[0][1].split()[0] == "qubits"):
        if not statements:
            raise ParseDiagnostic("syntax", "missing 'qubits <n>' header", 1, 1)
        lineno, code = statements.pop(0)
        m = _HEADER_RE.match(code.strip())
        if m is None:
            raise ParseDiagnostic("syntax", "expected 'qubits <n>' header first", lineno, _col(code, 0))
        declared = int(m.group(1))
        if not 1 <= declared <= MAX_QUBITS:
            raise ParseDiagnostic(
                "bad-index", f"qubit count must be between 1 and {MAX_QUBITS}", lineno, code.index(m.group(1)) + 1
            )
        if n_qubits is not None and declared != n_qubits:
            raise ParseDiagnostic(
                "bad-index", f"header declares {declared} qubits, expected {n_qubits}", lineno, code.index(m.group(1)) + 1
            )
        n_qubits = declared

    for lineno, code in statements:
        m = _WORD_RE.match(code)
        name = m.group(1)
        name_end = m.end(1)
        # A gate name may be glued to its operand, e.g. "xq[0]" is not allowed.
        word = re.match(r"[A-Za-z_]\w*", name)
        if word is None or word.group(0) != name:
            raise ParseDiagnostic("syntax", f"expected a gate name, found {name!r}", lineno, m.start(1) + 1)
        if name == "qubits":
            raise ParseDiagnostic("syntax", "duplicate 'qubits' header", lineno, m.start(1) + 1)
        if name not in SINGLE_QUBIT_GATES and name != "cnot":
            raise ParseDiagnostic("unknown-gate", f"unknown gate {name!r}", lineno, m.start(1) + 1)
        if name_end < len(code) and not code[name_end].isspace():
            raise ParseDiagnostic("syntax", "expected whitespace after gate name", lineno, name_end + 1)

        first, pos = _qubit(code, name_end, n_qubits, lineno)
        if name == "cnot":
            pos = _comma(code, pos, lineno)
            qubit_col = _col(code, pos)
            second, pos = _qubit(code, pos, n_qubits, lineno)
            _end(code, pos, lineno)
            if first == second:
                raise ParseDiagnostic("bad-index", f"cnot control and target are both q[{first}]", lineno, qubit_col)
            ops.append(Gate.cnot(first, second))
        elif name == "ry":
            pos = _comma(code, pos, lineno)
            angle_text = code[pos:]
            if not angle_text.strip():
                raise ParseDiagnostic("bad-angle", "missing angle expression", lineno, len(code.rstrip()) + 1)
            expr = parse_expression(
                angle_text, allow_bits=False, allow_division=True, line=lineno, column=pos + 1, forbidden_kind="bad-angle"
            )
            angle = evaluate(expr, params)
            if not math.isfinite(angle):
                raise ParseDiagnostic("bad-angle", f"angle evaluates to {angle}", lineno, _col(code, pos))
            ops.append(Gate.ry(first, angle))
        else:
            _end(code, pos, lineno)
            ops.append(Gate(name, (first,)))
    return Circuit(n_qubits, ops)


def format_circuit(circuit: Circuit) -> str:
    """Canonical text: header, one gate per line, angles to 17 significant digits."""
    lines = [f"qubits {circuit.n_qubits}"]
    for gate in circuit.ops:
        if gate.name == "cnot":
            lines.append(f"cnot q[{gate.qubits[0]}], q[{gate.qubits[1]}]")
        elif gate.name == "ry":
            lines.append(f"ry q[{gate.qubits[0]}], {gate.angle:.17g}")
        else:
            lines.append(f"{gate.name} q[{gate.qubits[0]}]")
    return "\n".join(lines) + "\n"


def validate_circuit(circuit: Circuit) -> ParseDiagnostic | None:
    """First violation in an already-built circuit, or None.

    Line numbers refer to the canonical listing from :func:`format_circuit`.
    """
    if not 1 <= circuit.n_qubits <= MAX_QUBITS:
        return ParseDiagnostic("bad-index", f"qubit count must be between 1 and {MAX_QUBITS}", 1, 8)
    for lineno, gate in enumerate(circuit.ops, start=2):
        for q in gate.qubits:
            if not 0 <= q < circuit.n_qubits:
                return ParseDiagnostic("bad-index", f"q[{q}] out of range for {circuit.n_qubits} qubit(s)", lineno, 1)
        if gate.name == "cnot" and gate.qubits[0] == gate.qubits[1]:
            return ParseDiagnostic("bad-index", f"cnot control and target are both q[{gate.qubits[0]}]", lineno, 1)
        if gate.angle is not None and not math.isfinite(gate.angle):
            return ParseDiagnostic("bad-angle", f"angle is {gate.angle}", lineno, 1)
    return None


def check_circuit(circuit: Circuit) -> Circuit:
    diagnostic = validate_circuit(circuit)
    if diagnostic is not None:
        raise diagnostic
    return circuit

