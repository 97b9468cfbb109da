"""
From hybrid control systems to hybrid algebraic systems.

An unconstrained input u enters x' = A x + B u only through Image(B), so a set
is invariant for the control system exactly when it is weakly invariant for
Pi x' = Pi A x, where the rows of Pi span the orthogonal complement of Image(B).
Box-constrained inputs are first turned into states (lift_box_inputs) so that
the remaining inputs are all unconstrained.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
from scipy import linalg

from hybrid.exceptions import ConstrainedInputError, NonFiniteMatrixError, UnsupportedInputSetError
from hybrid.systems import (
    AlgebraicNode,
    AlgebraicReset,
    Automaton,
    Box,
    ControlNode,
    ControlReset,
    HybridAlgebraicSystem,
    HybridControlSystem,
    Transition,
)

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Projector:
    """
    Orthogonal projector onto ker(B^T).

    - matrix: (n - rank) x n with orthonormal rows, Pi B = 0
    - kernel: n x rank orthonormal basis of Image(B)
    """
    matrix: np.ndarray
    kernel: np.ndarray
    rank: int

    @property
    def rows(self):
        return self.matrix.shape[0]

    def apply(self, A):
        return self.matrix @ np.asarray(A, dtype=float)


def _pivoted_basis(projector, size):
    # Gram-Schmidt over the columns of the projector, largest residual first.
    # Coordinate-aligned complements come out as exact unit rows.
    n = projector.shape[0]
    basis = np.zeros((size, n))
    residual = projector.copy()
    for k in range(size):
        norms = np.linalg.norm(residual, axis=0)
        j = int(np.argmax(norms))
        vector = residual[:, j] / norms[j]
        basis[k] = vector
        residual = residual - np.outer(vector, vector @ residual)
    return basis


def orth_complement_projector(B, rank_tol=DEFAULT_RANK_TOL):
    B = np.asarray(B, dtype=float)
    if B.ndim != 2:
        raise ValueError(f"B must be two-dimensional, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise NonFiniteMatrixError("B has non-finite entries")

    n, m = B.shape
    if m == 0:
        return Projector(np.eye(n), np.zeros((n, 0)), 0)

    U, s, _ = linalg.svd(B, full_matrices=True)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    kernel = U[:, :rank]
    complement = U[:, rank:]
    matrix = _pivoted_basis(complement @ complement.T, n - rank) if rank < n else np.zeros((0, n))
    matrix.setflags(write=False)
    kernel.setflags(write=False)
    return Projector(matrix, kernel, rank)


def hcs_to_has(system, rank_tol=DEFAULT_RANK_TOL):
    """
    Project the unconstrained inputs out of a control system.

    Each node becomes (C, E) = (Pi A, Pi) with Pi the projector of its B, each
    signal likewise; safe sets and the automaton are kept as they are.
    """
    for node_id, node in system.nodes.items():
        if node.input_set is not None:
            raise ConstrainedInputError(f"node '{node_id}'")
    for signal_id, reset in system.signals.items():
        if reset.input_set is not None:
            raise ConstrainedInputError(f"signal '{signal_id}'")

    nodes = {}
    for node_id, node in system.nodes.items():
        projector = orth_complement_projector(node.B, rank_tol)
        nodes[node_id] = AlgebraicNode(C=projector.apply(node.A), E=projector.matrix, safe_set=node.safe_set)
        logger.debug("node=%s state_dim=%d algebraic_dim=%d", node_id, node.state_dim, projector.rows)

    signals = {}
    for signal_id, reset in system.signals.items():
        projector = orth_complement_projector(reset.B, rank_tol)
        signals[signal_id] = AlgebraicReset(C=projector.apply(reset.A), E=projector.matrix)

    return HybridAlgebraicSystem(automaton=system.automaton, nodes=nodes, signals=signals)


@dataclass(frozen=True)
class NodeLift:
    """Where the original state and the lifted input live in a lifted node."""
    origin: str
    state: Tuple[int, ...]
    inputs: Tuple[int, ...] = ()
    transition: Transition = None

    @property
    def temporary(self):
        return self.transition is not None

    def as_dict(self):
        data = {"origin": self.origin, "state": list(self.state), "inputs": list(self.inputs)}
        if self.transition is not None:
            data["transition"] = {"from": self.transition.source, "signal": self.transition.signal,
                                  "to": self.transition.target}
        return data

    @classmethod
    def from_dict(cls, data):
        transition = data.get("transition")
        if transition is not None:
            transition = Transition(transition["from"], transition["signal"], transition["to"])
        return cls(data["origin"], tuple(data["state"]), tuple(data.get("inputs", ())), transition)


@dataclass(frozen=True)
class LiftingMap:
    """
    Records how a lifted system relates to the one it was built from.

    project() maps lifted states of a node back to the original coordinates,
    which is how solutions are plotted in the coordinates the user wrote down.
    """
    nodes: Dict[str, NodeLift] = field(default_factory=dict)

    @classmethod
    def identity(cls, system):
        return cls({node_id: NodeLift(node_id, tuple(range(system.state_dim(node_id))))
                    for node_id in system.automaton.nodes})

    @property
    def is_identity(self):
        return all(not lift.inputs and not lift.temporary for lift in self.nodes.values())

    def state_coordinates(self, node_id):
        return self.nodes[node_id].state

    def project(self, node_id, points):
        points = np.asarray(points, dtype=float)
        return points[..., list(self.nodes[node_id].state)]

    def as_dict(self):
        return {"nodes": {node_id: lift.as_dict() for node_id, lift in self.nodes.items()}}

    @classmethod
    def from_dict(cls, data):
        return cls({node_id: NodeLift.from_dict(lift) for node_id, lift in data["nodes"].items()})


def _check_box(input_set, subject):
    if input_set is not None and not isinstance(input_set, Box):
        raise UnsupportedInputSetError(f"{subject} has an input set that is not a box")


def lift_box_inputs(system):
    """
    Turn box-constrained inputs into states.

    A node input u in U becomes extra coordinates with u' = v, v free, and U
    joins the safe set. A transition input u in U goes through a temporary node
    of state (x, u): the first jump copies x and picks u freely, the second
    applies the original reset reading u from the state.
    """
    for node_id, node in system.nodes.items():
        _check_box(node.input_set, f"node '{node_id}'")
    for signal_id, reset in system.signals.items():
        _check_box(reset.input_set, f"signal '{signal_id}'")

    if not system.has_constrained_inputs:
        return system, LiftingMap.identity(system)

    automaton = system.automaton
    nodes, lifts = {}, {}
    lifted_inputs = {}
    for node_id in automaton.nodes:
        node = system.nodes[node_id]
        n, m = node.state_dim, node.input_dim
        if node.input_set is None:
            nodes[node_id] = node
            lifted_inputs[node_id] = 0
            lifts[node_id] = NodeLift(node_id, tuple(range(n)))
            continue
        A = np.block([[node.A, node.B], [np.zeros((m, n + m))]])
        B = np.vstack([np.zeros((n, m)), np.eye(m)])
        nodes[node_id] = ControlNode(A=A, B=B, safe_set=node.safe_set.product(node.input_set))
        lifted_inputs[node_id] = m
        lifts[node_id] = NodeLift(node_id, tuple(range(n)), tuple(range(n, n + m)))

    signal_use = {}
    for transition in automaton.transitions:
        signal_use[transition.signal] = signal_use.get(transition.signal, 0) + 1

    signals, transitions, signal_order = {}, [], []
    for transition in automaton.transitions:
        source, target = system.nodes[transition.source], system.nodes[transition.target]
        reset = system.signals[transition.signal]
        n, n_target = source.state_dim, target.state_dim
        m_source, m_target = lifted_inputs[transition.source], lifted_inputs[transition.target]
        label = f"{transition.signal}@{transition.source}->{transition.target}"

        if reset.input_set is None:
            A = np.zeros((n_target + m_target, n + m_source))
            A[:n_target, :n] = reset.A
            B = np.zeros((n_target + m_target, reset.input_dim + m_target))
            B[:n_target, :reset.input_dim] = reset.B
            B[n_target:, reset.input_dim:] = np.eye(m_target)
            signal_id = transition.signal if signal_use[transition.signal] == 1 else label
            signals[signal_id] = ControlReset(A=A, B=B)
            signal_order.append(signal_id)
            transitions.append(Transition(transition.source, signal_id, transition.target))
            continue

        m_signal = reset.input_dim
        temporary = label
        nodes[temporary] = ControlNode(
            A=np.zeros((n + m_signal, n + m_signal)),
            B=np.eye(n + m_signal),
            safe_set=source.safe_set.product(reset.input_set),
        )
        lifts[temporary] = NodeLift(transition.source, tuple(range(n)), tuple(range(n, n + m_signal)), transition)

        copy_A = np.zeros((n + m_signal, n + m_source))
        copy_A[:n, :n] = np.eye(n)
        copy_B = np.vstack([np.zeros((n, m_signal)), np.eye(m_signal)])
        reset_A = np.zeros((n_target + m_target, n + m_signal))
        reset_A[:n_target, :n] = reset.A
        reset_A[:n_target, n:] = reset.B
        reset_B = np.vstack([np.zeros((n_target, m_target)), np.eye(m_target)])

        copy_id, reset_id = f"{temporary}/copy", f"{temporary}/reset"
        signals[copy_id] = ControlReset(A=copy_A, B=copy_B)
        signals[reset_id] = ControlReset(A=reset_A, B=reset_B)
        signal_order.extend([copy_id, reset_id])
        transitions.append(Transition(transition.source, copy_id, temporary))
        transitions.append(Transition(temporary, reset_id, transition.target))

    node_order = list(automaton.nodes) + [node_id for node_id in nodes if node_id not in automaton.nodes]
    lifted = HybridControlSystem(
        automaton=Automaton(nodes=node_order, signals=signal_order, transitions=transitions),
        nodes={node_id: nodes[node_id] for node_id in node_order},
        signals=signals,
    )
    logger.info("lifted nodes=%d temporary=%d transitions=%d",
                len(node_order), len(node_order) - len(automaton.nodes), len(transitions))
    return lifted, LiftingMap({node_id: lifts[node_id] for node_id in node_order})
