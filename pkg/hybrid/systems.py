"""
Data model for linear hybrid systems.

A hybrid control system carries, per node, the continuous dynamics
x' = A x + B u with a safe box and an optional input box, and per signal the
reset x+ = A x + B u. A hybrid algebraic system is what remains after the
inputs have been projected out: E x' = C x per node and E x+ = C x per signal.

All types are frozen and their arrays are read-only, so a system can be shared
between threads without copying.
"""
import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional, Tuple

import numpy as np

from hybrid.exceptions import NonFiniteMatrixError


def as_matrix(value, rows=None, cols=None, name="matrix"):
    """
    Turn nested lists into a read-only float matrix.

    Empty input (``[]`` or ``None``) becomes a ``rows x cols`` zero-size matrix,
    which is how zero-row C/E and zero-column B are written in system files.
    """
    if value is None:
        value = []
    array = np.array(value, dtype=float)
    if array.size == 0:
        array = np.zeros((rows or 0, cols or 0))
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise NonFiniteMatrixError(f"{name} has non-finite entries")
    array.setflags(write=False)
    return array


def _as_vector(value, name):
    array = np.array(value, dtype=float).ravel()
    if not np.all(np.isfinite(array)):
        raise NonFiniteMatrixError(f"{name} has non-finite entries")
    array.setflags(write=False)
    return array


def _same_array(a, b):
    return a.shape == b.shape and np.array_equal(a, b)


def _same_box(a, b):
    if a is None or b is None:
        return a is b
    return a == b


@dataclass(frozen=True, eq=False)
class Box:
    """
    Axis-aligned box {x : lower <= x <= upper}.

    - support(y) is the support function, evaluated in closed form
    - vertices() enumerates the 2^n corners (used by tests and the plots)
    """
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _as_vector(self.lower, "box lower bound")
        upper = _as_vector(self.upper, "box upper bound")
        if lower.shape != upper.shape:
            raise ValueError("box bounds have different lengths")
        if lower.size == 0:
            raise ValueError("a box needs at least one dimension")
        if np.any(lower > upper):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def symmetric(cls, radius):
        radius = np.asarray(radius, dtype=float)
        return cls(-radius, radius)

    @property
    def dim(self):
        return self.lower.size

    def support(self, y):
        y = np.asarray(y, dtype=float)
        return np.maximum(self.upper * y, self.lower * y).sum(axis=-1)

    def vertices(self):
        corners = itertools.product(*zip(self.lower, self.upper))
        return np.array(list(corners), dtype=float)

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def product(self, other):
        return Box(np.concatenate([self.lower, other.lower]), np.concatenate([self.upper, other.upper]))

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return _same_array(self.lower, other.lower) and _same_array(self.upper, other.upper)

    __hash__ = object.__hash__

    def __repr__(self):
        return f"Box(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


@dataclass(frozen=True)
class Transition:
    source: str
    signal: str
    target: str

    def __str__(self):
        return f"{self.source} -{self.signal}-> {self.target}"


@dataclass(frozen=True)
class Automaton:
    """
    The discrete part of a hybrid system.

    Identifiers are kept as tuples in declaration order so that everything
    built from an automaton (programs, reports, files) comes out in a stable order.
    """
    nodes: Tuple[str, ...]
    signals: Tuple[str, ...]
    transitions: Tuple[Transition, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "signals", tuple(self.signals))
        object.__setattr__(self, "transitions", tuple(self.transitions))

    def outgoing(self, node):
        return [t for t in self.transitions if t.source == node]


@dataclass(frozen=True, eq=False)
class ControlNode:
    A: np.ndarray
    B: np.ndarray
    safe_set: Box
    input_set: Optional[Box] = None

    def __post_init__(self):
        A = as_matrix(self.A, name="A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", as_matrix(self.B, rows=A.shape[0], cols=0, name="B"))

    @property
    def state_dim(self):
        return self.A.shape[0]

    @property
    def input_dim(self):
        return self.B.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ControlNode):
            return NotImplemented
        return (_same_array(self.A, other.A) and _same_array(self.B, other.B)
                and self.safe_set == other.safe_set and _same_box(self.input_set, other.input_set))

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class ControlReset:
    A: np.ndarray
    B: np.ndarray
    input_set: Optional[Box] = None

    def __post_init__(self):
        A = as_matrix(self.A, name="A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", as_matrix(self.B, rows=A.shape[0], cols=0, name="B"))

    @property
    def input_dim(self):
        return self.B.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ControlReset):
            return NotImplemented
        return (_same_array(self.A, other.A) and _same_array(self.B, other.B)
                and _same_box(self.input_set, other.input_set))

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class AlgebraicNode:
    C: np.ndarray
    E: np.ndarray
    safe_set: Box

    def __post_init__(self):
        n = self.safe_set.dim
        object.__setattr__(self, "C", as_matrix(self.C, rows=0, cols=n, name="C"))
        object.__setattr__(self, "E", as_matrix(self.E, rows=0, cols=n, name="E"))

    @property
    def state_dim(self):
        return self.safe_set.dim

    @property
    def algebraic_dim(self):
        return self.C.shape[0]

    def __eq__(self, other):
        if not isinstance(other, AlgebraicNode):
            return NotImplemented
        return (_same_array(self.C, other.C) and _same_array(self.E, other.E)
                and self.safe_set == other.safe_set)

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class AlgebraicReset:
    C: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", as_matrix(self.C, name="C"))
        object.__setattr__(self, "E", as_matrix(self.E, name="E"))

    @property
    def algebraic_dim(self):
        return self.C.shape[0]

    def __eq__(self, other):
        if not isinstance(other, AlgebraicReset):
            return NotImplemented
        return _same_array(self.C, other.C) and _same_array(self.E, other.E)

    __hash__ = object.__hash__


class _HybridSystem:
    """Shared behaviour of both system kinds: frozen mappings and structural equality."""

    def __post_init__(self):
        object.__setattr__(self, "nodes", MappingProxyType(dict(self.nodes)))
        object.__setattr__(self, "signals", MappingProxyType(dict(self.signals)))

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (self.automaton == other.automaton
                and dict(self.nodes) == dict(other.nodes)
                and dict(self.signals) == dict(other.signals))

    __hash__ = object.__hash__

    def node(self, node_id):
        return self.nodes[node_id]

    def signal(self, signal_id):
        return self.signals[signal_id]

    def node_dimension(self, node_id):
        return self.nodes[node_id].state_dim

    def transitions_from(self, node_id):
        return self.automaton.outgoing(node_id)


@dataclass(frozen=True, eq=False)
class HybridControlSystem(_HybridSystem):
    automaton: Automaton
    nodes: Mapping[str, ControlNode] = field(default_factory=dict)
    signals: Mapping[str, ControlReset] = field(default_factory=dict)

    kind = "control"

    def state_dim(self, node_id):
        return self.nodes[node_id].state_dim

    @property
    def has_constrained_inputs(self):
        return (any(node.input_set is not None for node in self.nodes.values())
                or any(reset.input_set is not None for reset in self.signals.values()))


@dataclass(frozen=True, eq=False)
class HybridAlgebraicSystem(_HybridSystem):
    automaton: Automaton
    nodes: Mapping[str, AlgebraicNode] = field(default_factory=dict)
    signals: Mapping[str, AlgebraicReset] = field(default_factory=dict)

    kind = "algebraic"

    def state_dim(self, node_id):
        return self.nodes[node_id].state_dim


@dataclass(frozen=True)
class Violation:
    subject: str
    message: str

    def __str__(self):
        return f"{self.subject}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self):
        return not self.violations

    def messages(self):
        return [str(v) for v in self.violations]

    def as_dict(self):
        return {"ok": self.ok, "violations": [{"subject": v.subject, "message": v.message} for v in self.violations]}


def _check_automaton(system, violations):
    automaton = system.automaton
    for kind, ids, declared in (("node", automaton.nodes, system.nodes), ("signal", automaton.signals, system.signals)):
        seen = set()
        for identifier in ids:
            if identifier in seen:
                violations.append(Violation(f"{kind} '{identifier}'", "duplicate identifier"))
            seen.add(identifier)
            if identifier not in declared:
                violations.append(Violation(f"{kind} '{identifier}'", "declared in the automaton without data"))
        for identifier in declared:
            if identifier not in seen:
                violations.append(Violation(f"{kind} '{identifier}'", "has data but is missing from the automaton"))

    known = []
    for transition in automaton.transitions:
        subject = f"transition {transition}"
        if transition.source not in system.nodes or transition.target not in system.nodes:
            violations.append(Violation(subject, "references an unknown node"))
        elif transition.signal not in system.signals:
            violations.append(Violation(subject, "references an unknown signal"))
        else:
            known.append(transition)
    return known


def validate_hcs(system):
    """Check the dimension invariants of a hybrid control system; violations are returned, not raised."""
    violations = []
    transitions = _check_automaton(system, violations)

    for node_id, node in system.nodes.items():
        subject = f"node '{node_id}'"
        n = node.A.shape[0]
        if node.A.shape[1] != n:
            violations.append(Violation(subject, f"A must be square, got {node.A.shape}"))
        if node.B.shape[0] != n:
            violations.append(Violation(subject, f"B has {node.B.shape[0]} rows, expected {n}"))
        if node.safe_set.dim != n:
            violations.append(Violation(subject, f"safe-set dimension mismatch: {node.safe_set.dim} != {n}"))
        if node.input_set is not None and node.input_set.dim != node.B.shape[1]:
            violations.append(Violation(subject, f"input-set dimension mismatch: {node.input_set.dim} != {node.B.shape[1]}"))

    for transition in transitions:
        subject = f"transition {transition}"
        reset = system.signals[transition.signal]
        n_source = system.nodes[transition.source].A.shape[0]
        n_target = system.nodes[transition.target].A.shape[0]
        if reset.A.shape != (n_target, n_source):
            violations.append(Violation(subject, f"A has shape {reset.A.shape}, expected {(n_target, n_source)}"))
        if reset.B.shape[0] != n_target:
            violations.append(Violation(subject, f"B has {reset.B.shape[0]} rows, expected {n_target}"))
        if reset.input_set is not None and reset.input_set.dim != reset.B.shape[1]:
            violations.append(Violation(subject, f"input-set dimension mismatch: {reset.input_set.dim} != {reset.B.shape[1]}"))

    return ValidationReport(tuple(violations))


def validate_has(system):
    """Check the dimension invariants of a hybrid algebraic system; violations are returned, not raised."""
    violations = []
    transitions = _check_automaton(system, violations)

    for node_id, node in system.nodes.items():
        subject = f"node '{node_id}'"
        n = node.safe_set.dim
        if node.C.shape[0] != node.E.shape[0]:
            violations.append(Violation(subject, f"row count mismatch: C has {node.C.shape[0]}, E has {node.E.shape[0]}"))
        for name, matrix in (("C", node.C), ("E", node.E)):
            if matrix.shape[1] != n:
                violations.append(Violation(subject, f"{name} has {matrix.shape[1]} columns, expected {n}"))

    for transition in transitions:
        subject = f"transition {transition}"
        reset = system.signals[transition.signal]
        if reset.C.shape[0] != reset.E.shape[0]:
            violations.append(Violation(subject, f"row count mismatch: C has {reset.C.shape[0]}, E has {reset.E.shape[0]}"))
        n_source = system.nodes[transition.source].state_dim
        n_target = system.nodes[transition.target].state_dim
        if reset.C.shape[1] != n_source:
            violations.append(Violation(subject, f"C has {reset.C.shape[1]} columns, expected {n_source}"))
        if reset.E.shape[1] != n_target:
            violations.append(Violation(subject, f"E has {reset.E.shape[1]} columns, expected {n_target}"))

    return ValidationReport(tuple(violations))
