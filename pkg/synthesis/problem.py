"""
What a synthesis run is asked to do: a hybrid algebraic system, a template
family for the invariant sets, and the polytope D whose scaling gamma * D has
to fit in the projection of the set of one node.
"""
import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

import numpy as np

from geometry.fans import ConicPartition
from geometry.serializers import PartitionSerializer, load_partition
from hybrid.reduction import DEFAULT_RANK_TOL, LiftingMap, hcs_to_has, lift_box_inputs
from hybrid.systems import HybridAlgebraicSystem, HybridControlSystem, validate_has
from polysos.certificates import CERTIFICATE_FORMS, HREP
from polysos.exceptions import OddDegreeError
from synthesis.exceptions import ObjectiveError, PartitionMismatchError, SynthesisError, TemplateError

logger = logging.getLogger(__name__)

ELLIPSOID = "ellipsoid"
POLYSET = "polyset"
PIECEWISE = "piecewise"
TEMPLATE_KINDS = (ELLIPSOID, POLYSET, PIECEWISE)


@dataclass(frozen=True)
class EllipsoidTemplate:
    kind = ELLIPSOID

    def describe(self):
        return "ellipsoid"

    def as_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class PolysetTemplate:
    """Polysets of degree 2d: h(y) = p(y)^(1/2d) with p SOS and SOS-convex."""
    degree: int
    kind = POLYSET

    def __post_init__(self):
        if self.degree % 2:
            raise OddDegreeError(self.degree)
        if self.degree < 2:
            raise TemplateError(f"polyset degree must be at least 2, got {self.degree}")

    def describe(self):
        return f"polyset degree {self.degree}"

    def as_dict(self):
        return {"kind": self.kind, "degree": self.degree}


@dataclass(frozen=True, eq=False)
class PiecewiseTemplate:
    """
    Piecewise semi-ellipsoids over a conic partition.

    `partition` is used for every node unless `partitions` names one for the
    node. tie_pieces forces all pieces of a node to share one matrix.
    """
    partition: Optional[ConicPartition] = None
    partitions: Mapping[str, ConicPartition] = field(default_factory=dict)
    tie_pieces: bool = False
    certificate_form: str = HREP
    kind = PIECEWISE

    def __post_init__(self):
        if self.partition is None and not self.partitions:
            raise TemplateError("a piecewise template needs a partition")
        if self.certificate_form not in CERTIFICATE_FORMS:
            raise TemplateError(f"certificate form must be one of {CERTIFICATE_FORMS}, got {self.certificate_form!r}")

    def partition_for(self, node_id, state_dim):
        partition = self.partitions.get(node_id, self.partition)
        if partition is None:
            raise TemplateError(f"no partition given for node '{node_id}'")
        if partition.dim != state_dim:
            raise PartitionMismatchError(node_id, partition.dim, state_dim)
        return partition

    def describe(self):
        label = self.partition.label if self.partition is not None else "per-node"
        return f"piecewise {label}" + (" tied" if self.tie_pieces else "")

    def as_dict(self):
        data = {"kind": self.kind, "tie_pieces": self.tie_pieces, "certificate_form": self.certificate_form}
        if self.partition is not None:
            data["partition"] = dict(PartitionSerializer(self.partition).data)
        if self.partitions:
            data["partitions"] = {node_id: dict(PartitionSerializer(p).data) for node_id, p in self.partitions.items()}
        return data


def template_from_dict(data):
    kind = data.get("kind")
    if kind == ELLIPSOID:
        return EllipsoidTemplate()
    if kind == POLYSET:
        return PolysetTemplate(int(data["degree"]))
    if kind == PIECEWISE:
        partition = load_partition(data["partition"]) if data.get("partition") else None
        partitions = {node_id: load_partition(p) for node_id, p in data.get("partitions", {}).items()}
        return PiecewiseTemplate(partition, partitions, bool(data.get("tie_pieces", False)),
                                 data.get("certificate_form", HREP))
    raise TemplateError(f"unknown template kind {kind!r}, expected one of {TEMPLATE_KINDS}")


@dataclass(frozen=True, eq=False)
class Objective:
    """
    gamma * conv(vertices) must lie in the projection of S_node onto `coordinates`.

    Vertices are rows, one column per projection coordinate.
    """
    vertices: np.ndarray
    node: str
    coordinates: Tuple[int, ...]

    def __post_init__(self):
        vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        coordinates = tuple(int(c) for c in self.coordinates)
        if vertices.size == 0:
            raise ObjectiveError("the objective polytope needs at least one vertex")
        if not np.all(np.isfinite(vertices)):
            raise ObjectiveError("objective vertices must be finite")
        if vertices.shape[1] != len(coordinates):
            raise ObjectiveError(
                f"vertices have {vertices.shape[1]} coordinates but {len(coordinates)} projection indices were given"
            )
        if len(set(coordinates)) != len(coordinates):
            raise ObjectiveError(f"projection indices repeat: {list(coordinates)}")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "coordinates", coordinates)

    @property
    def dim(self):
        return len(self.coordinates)

    def lift_matrix(self, state_dim):
        """L of shape (state_dim, k) with L y putting y on the projection coordinates."""
        if max(self.coordinates) >= state_dim or min(self.coordinates) < 0:
            raise ObjectiveError(f"projection indices {list(self.coordinates)} do not fit R^{state_dim}")
        L = np.zeros((state_dim, self.dim))
        L[list(self.coordinates), np.arange(self.dim)] = 1.0
        return L

    def as_tuple(self, gamma):
        """The (node, vertices, gamma, coordinates) form the verifier takes."""
        return self.node, self.vertices, gamma, self.coordinates

    def as_dict(self):
        return {"node": self.node, "coordinates": list(self.coordinates), "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["vertices"], data["node"], data["coordinates"])


@dataclass(frozen=True, eq=False)
class SynthesisProblem:
    system: HybridAlgebraicSystem
    template: object
    objective: Objective
    lifting: Optional[LiftingMap] = None
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.system, HybridAlgebraicSystem):
            raise SynthesisError("synthesis runs on a hybrid algebraic system, reduce the control system first")
        report = validate_has(self.system)
        if not report.ok:
            raise SynthesisError("invalid system: " + "; ".join(report.messages()))
        if self.objective.node not in self.system.nodes:
            raise ObjectiveError(f"objective node '{self.objective.node}' is not a node of the system")
        self.objective.lift_matrix(self.system.node_dimension(self.objective.node))
        if self.lifting is None:
            object.__setattr__(self, "lifting", LiftingMap.identity(self.system))

    @property
    def root_dim(self):
        return self.system.node_dimension(self.objective.node)

    @classmethod
    def from_control_system(cls, system, template, vertices, node=None, coordinates=None, label="",
                            rank_tol=DEFAULT_RANK_TOL):
        """Lift box inputs, project the free inputs out and set the objective in original coordinates."""
        if not isinstance(system, HybridControlSystem):
            raise SynthesisError(f"expected a hybrid control system, got {type(system).__name__}")
        lifted, lifting = lift_box_inputs(system)
        algebraic = hcs_to_has(lifted, rank_tol)
        node = node or system.automaton.nodes[0]
        if node not in lifting.nodes:
            raise ObjectiveError(f"objective node '{node}' is not a node of the system")
        if coordinates is None:
            coordinates = lifting.state_coordinates(node)
        logger.info("reduced label=%s nodes=%d transitions=%d objective_node=%s",
                    label, len(algebraic.automaton.nodes), len(algebraic.automaton.transitions), node)
        return cls(algebraic, template, Objective(vertices, node, coordinates), lifting, label)

    @classmethod
    def from_system(cls, system, template, vertices, node=None, coordinates=None, label="",
                    rank_tol=DEFAULT_RANK_TOL):
        if isinstance(system, HybridControlSystem):
            return cls.from_control_system(system, template, vertices, node, coordinates, label, rank_tol)
        node = node or system.automaton.nodes[0]
        if node not in system.nodes:
            raise ObjectiveError(f"objective node '{node}' is not a node of the system")
        if coordinates is None:
            coordinates = range(system.node_dimension(node))
        return cls(system, template, Objective(vertices, node, coordinates), label=label)
