"""
Template compilers.

Each compiler turns a SynthesisProblem into a single ConicProgram. Decision
variables parameterize the polar side of the sets (P = Q^-1 for ellipsoids and
semi-ellipsoids, the coefficients of p for polysets), which keeps every
invariance condition linear. After solving, the same compiler reads gamma and
the per-node support-function models back out of the solution.

Conditions, for a transition q -s-> q' with (C, E) and a node q with (C_q, E_q):

- transition: h_q(C^T y) <= h_q'(E^T y) for all y
- node: <z, C_q grad h_q(E_q^T z)> <= 0 for all z
- safe box: h_q(e_i) <= u_i and h_q(-e_i) <= -l_i
- objective: gamma <v, y> <= h_root(L y) for every vertex v of D
"""
import logging
import time

import numpy as np

from conic.program import NONNEG, ProgramBuilder
from geometry.cones import PolyhedralCone, intersect_cones, preimage_cone
from polysos.certificates import emit_cone_quadratic, emit_sos, emit_sos_convexity
from polysos.polynomials import HomogeneousPoly, compose_linear, lie_polynomial, monomials
from synthesis.exceptions import TemplateError
from synthesis.problem import ELLIPSOID, PIECEWISE, POLYSET
from verify.support import EllipsoidModel, PiecewiseModel, PolysetModel

logger = logging.getLogger(__name__)


def signed_power(bound, power):
    """sign(b) |b|^power, the bound on h^power implied by h <= b."""
    return float(np.sign(bound) * abs(bound) ** power)


def _unit(n, i, sign=1.0):
    e = np.zeros(n)
    e[i] = sign
    return e


def _box_bound(box, i, power):
    return min(signed_power(box.upper[i], power), signed_power(-box.lower[i], power))


class TemplateCompiler:
    kind = None
    objective_variable = "s"

    def __init__(self, problem):
        if problem.template.kind != self.kind:
            raise TemplateError(f"{type(self).__name__} cannot compile a {problem.template.kind} template")
        self.problem = problem
        self.system = problem.system
        self.builder = ProgramBuilder()
        self.certificates = []
        self._program = None

    def compile(self):
        if self._program is not None:
            return self._program
        started = time.perf_counter()
        automaton = self.system.automaton
        self.declare()
        for index, transition in enumerate(automaton.transitions):
            reset = self.system.signals[transition.signal]
            if reset.algebraic_dim:
                self.emit_transition(index, transition, reset)
        for node_id in automaton.nodes:
            node = self.system.nodes[node_id]
            if node.algebraic_dim:
                self.emit_node(node_id, node)
            self.emit_safe_set(node_id, node.safe_set)
        self.emit_objective(self.problem.objective)
        self.builder.set_objective(self._objective)
        self._program = self.builder.build()
        logger.info("compiled template=%s nodes=%d transitions=%d variables=%d blocks=%d seconds=%.3f",
                    self.kind, len(automaton.nodes), len(automaton.transitions), self._program.num_vars,
                    len(self._program.blocks), time.perf_counter() - started)
        return self._program

    @property
    def program(self):
        return self.compile()

    def declare(self):
        raise NotImplementedError

    def emit_transition(self, index, transition, reset):
        raise NotImplementedError

    def emit_node(self, node_id, node):
        raise NotImplementedError

    def emit_safe_set(self, node_id, box):
        raise NotImplementedError

    def emit_objective(self, objective):
        raise NotImplementedError

    def gamma(self, values):
        raise NotImplementedError

    def models(self, values):
        raise NotImplementedError

    def certificate_violation(self, x, samples=500, seed=2021):
        """
        Largest z^T M z over sampled directions z inside the cones of the
        cone-quadratic certificates; 0.0 when the template uses none.
        """
        rng = np.random.default_rng(seed)
        worst = 0.0
        for certificate, cone in self.certificates:
            rays, lineality = cone.generators()
            weights = rng.uniform(size=(samples, rays.shape[1]))
            Z = weights @ rays.T + rng.normal(size=(samples, lineality.shape[1])) @ lineality.T
            Z = np.vstack([Z, rays.T])
            norms = np.linalg.norm(Z, axis=1)
            Z = Z[norms > 1e-12] / norms[norms > 1e-12, None]
            if len(Z):
                worst = max(worst, float(np.max(certificate.quadratic_value(x, Z))))
        return worst


class EllipsoidCompiler(TemplateCompiler):
    """h_q(y) = sqrt(y^T P_q y) with one PSD matrix per node."""
    kind = ELLIPSOID

    def declare(self):
        self.P = {node_id: self.builder.add_psd_matrix(f"P[{node_id}]", self.system.node_dimension(node_id))
                  for node_id in self.system.automaton.nodes}

    def emit_transition(self, index, transition, reset):
        P_from, P_to = self.P[transition.source], self.P[transition.target]
        self.builder.add_psd(P_to.congruence(reset.E) - P_from.congruence(reset.C), name=f"transition[{index}]")

    def emit_node(self, node_id, node):
        P = self.P[node_id]
        self.builder.add_psd(-(P.left_right(node.C, node.E.T) + P.left_right(node.E, node.C.T)),
                             name=f"node[{node_id}]")

    def emit_safe_set(self, node_id, box):
        P = self.P[node_id]
        for i in range(box.dim):
            self.builder.add_le(P.entry(i, i), _box_bound(box, i, 2), name=f"safe[{node_id}][{i}]")

    def emit_objective(self, objective):
        s = self.builder.add_scalar("s", lower=0)
        L = objective.lift_matrix(self.problem.root_dim)
        projected = self.P[objective.node].congruence(L.T)
        for k, v in enumerate(objective.vertices):
            self.builder.add_psd(projected - s * np.outer(v, v), name=f"objective[{k}]")
        self._objective = s

    def gamma(self, values):
        return float(np.sqrt(max(float(values["s"]), 0.0)))

    def models(self, values):
        return {node_id: EllipsoidModel(values[f"P[{node_id}]"]) for node_id in self.system.automaton.nodes}


class PolysetCompiler(TemplateCompiler):
    """h_q(y) = p_q(y)^(1/2d), p_q SOS and SOS-convex, coefficients on the graded lex monomial basis."""
    kind = POLYSET
    objective_variable = "t"

    @property
    def degree(self):
        return self.problem.template.degree

    def declare(self):
        self.basis, self.p = {}, {}
        for node_id in self.system.automaton.nodes:
            n = self.system.node_dimension(node_id)
            basis = monomials(n, self.degree)
            coefficients = self.builder.add_vector(f"p[{node_id}]", len(basis))
            p = HomogeneousPoly(n, self.degree, dict(zip(basis, coefficients)))
            emit_sos(self.builder, p, name=f"sos[{node_id}]")
            emit_sos_convexity(self.builder, p, name=f"sosconvex[{node_id}]")
            self.basis[node_id], self.p[node_id] = basis, p

    def emit_transition(self, index, transition, reset):
        gap = compose_linear(self.p[transition.target], reset.E) - compose_linear(self.p[transition.source], reset.C)
        emit_sos(self.builder, gap, name=f"transition[{index}]")

    def emit_node(self, node_id, node):
        emit_sos(self.builder, -lie_polynomial(self.p[node_id], node.C, node.E), name=f"node[{node_id}]")

    def emit_safe_set(self, node_id, box):
        # p is even, so p(e_i) = p(-e_i) and one constraint covers both facets
        p = self.p[node_id]
        for i in range(box.dim):
            self.builder.add_le(p.value_at(_unit(box.dim, i)), _box_bound(box, i, self.degree),
                                name=f"safe[{node_id}][{i}]")

    def emit_objective(self, objective):
        t = self.builder.add_scalar("t", lower=0)
        L = objective.lift_matrix(self.problem.root_dim)
        projected = compose_linear(self.p[objective.node], L.T)
        for k, v in enumerate(objective.vertices):
            ray = HomogeneousPoly.linear_form(v).power(self.degree)
            emit_sos(self.builder, projected - ray * t, name=f"objective[{k}]")
        self._objective = t

    def gamma(self, values):
        return float(max(float(values["t"]), 0.0) ** (1.0 / self.degree))

    def models(self, values):
        return {
            node_id: PolysetModel(HomogeneousPoly(self.system.node_dimension(node_id), self.degree,
                                                  dict(zip(self.basis[node_id], values[f"p[{node_id}]"]))))
            for node_id in self.system.automaton.nodes
        }


class PiecewiseCompiler(TemplateCompiler):
    """
    h_q(y) = sqrt(y^T P_{q,i} y) on the i-th cone of the node's partition.

    Pieces are glued by equality on every shared facet and by a nonnegative
    gradient jump across it, which together make h continuous and convex.
    Conditions restricted to a cone go through emit_cone_quadratic.
    """
    kind = PIECEWISE

    def __init__(self, problem):
        super().__init__(problem)
        self.form = problem.template.certificate_form
        self._preimage_cache = {}

    def declare(self):
        template = self.problem.template
        self.partitions, self.P = {}, {}
        for node_id in self.system.automaton.nodes:
            n = self.system.node_dimension(node_id)
            partition = template.partition_for(node_id, n)
            pieces = [self.builder.add_psd_matrix(f"P[{node_id}][{i}]", n) for i in range(len(partition))]
            self.partitions[node_id], self.P[node_id] = partition, pieces
            if template.tie_pieces:
                for i, piece in enumerate(pieces[1:], start=1):
                    self.builder.add_matrix_equal(piece, pieces[0], name=f"tie[{node_id}][{i}]")
            else:
                self._glue(node_id, partition, pieces)

    def _glue(self, node_id, partition, pieces):
        for adjacency in partition.adjacency:
            name = f"[{node_id}][{adjacency.i},{adjacency.j}]"
            jump = pieces[adjacency.j] - pieces[adjacency.i]
            self.builder.add_matrix_equal(jump.congruence(adjacency.basis.T), 0, name=f"continuity{name}")
            rays = adjacency.rays
            if rays is None or not rays.size:
                continue
            outward = jump.left_right(adjacency.normal[None, :], rays)
            self.builder.add_linear([outward.entry(0, k) for k in range(rays.shape[1])], NONNEG,
                                    name=f"convexity{name}")

    def _preimages(self, node_id, M):
        """Preimages {y : M^T y in cone_i} of the node's cones other than {0}, keyed by piece index."""
        M = np.atleast_2d(np.asarray(M, dtype=float))
        key = (node_id, M.shape, M.tobytes())
        if key not in self._preimage_cache:
            found = {}
            for i, cone in enumerate(self.partitions[node_id].cones):
                image = preimage_cone(cone, M)
                if not image.is_origin_only:
                    found[i] = image
            self._preimage_cache[key] = found
        return self._preimage_cache[key]

    def _certify(self, M, cone, name):
        cone = cone.irredundant()
        certificate = emit_cone_quadratic(self.builder, M.symmetrized(), cone, name=name, form=self.form)
        self.certificates.append((certificate, cone))

    def emit_transition(self, index, transition, reset):
        sources = self._preimages(transition.source, reset.C)
        targets = self._preimages(transition.target, reset.E)
        lifted_from = {i: self.P[transition.source][i].congruence(reset.C) for i in sources}
        lifted_to = {j: self.P[transition.target][j].congruence(reset.E) for j in targets}
        pairs = 0
        for i, a in sources.items():
            for j, b in targets.items():
                cone = intersect_cones(a, b)
                # flat intersections are certified too, only {0} is vacuous
                if cone.is_origin_only:
                    continue
                self._certify(lifted_from[i] - lifted_to[j], cone, f"transition[{index}][{i},{j}]")
                pairs += 1
        logger.debug("transition=%s sources=%d targets=%d pairs=%d", transition, len(sources), len(targets), pairs)

    def emit_node(self, node_id, node):
        for i, cone in self._preimages(node_id, node.E).items():
            P = self.P[node_id][i]
            self._certify(P.left_right(node.C, node.E.T) + P.left_right(node.E, node.C.T), cone,
                          f"node[{node_id}][{i}]")

    def emit_safe_set(self, node_id, box):
        partition = self.partitions[node_id]
        for i in range(box.dim):
            for sign, bound in ((1.0, box.upper[i]), (-1.0, -box.lower[i])):
                pieces = partition.containing(_unit(box.dim, i, sign))
                if not pieces:
                    raise TemplateError(f"the partition of node '{node_id}' does not cover the direction "
                                        f"{'+' if sign > 0 else '-'}e_{i}")
                for j in pieces:
                    self.builder.add_le(self.P[node_id][j].entry(i, i), signed_power(bound, 2),
                                        name=f"safe[{node_id}][{'+' if sign > 0 else '-'}{i}][{j}]")

    def emit_objective(self, objective):
        s = self.builder.add_scalar("s", lower=0)
        L = objective.lift_matrix(self.problem.root_dim)
        pieces = self._preimages(objective.node, L.T)
        root = self.P[objective.node]
        projected = {j: root[j].congruence(L.T) for j in pieces}
        for k, v in enumerate(objective.vertices):
            if not np.any(v):
                continue
            # only directions with <v, y> >= 0 constrain gamma <v, y> <= h
            facing = PolyhedralCone.halfspace(-v)
            for j, image in pieces.items():
                cone = intersect_cones(image, facing)
                if cone.is_origin_only:
                    continue
                self._certify(s * np.outer(v, v) - projected[j], cone, f"objective[{k}][{j}]")
        self._objective = s

    def gamma(self, values):
        return float(np.sqrt(max(float(values["s"]), 0.0)))

    def models(self, values):
        return {
            node_id: PiecewiseModel(self.partitions[node_id],
                                    [values[f"P[{node_id}][{i}]"] for i in range(len(self.partitions[node_id]))])
            for node_id in self.system.automaton.nodes
        }


COMPILERS = {
    ELLIPSOID: EllipsoidCompiler,
    POLYSET: PolysetCompiler,
    PIECEWISE: PiecewiseCompiler,
}


def compiler_for(problem):
    compiler = COMPILERS.get(problem.template.kind)
    if compiler is None:
        raise TemplateError(f"no compiler for template kind {problem.template.kind!r}")
    return compiler(problem)


def compile_ellipsoid(problem):
    return EllipsoidCompiler(problem).compile()


def compile_polyset(problem):
    return PolysetCompiler(problem).compile()


def compile_piecewise(problem):
    return PiecewiseCompiler(problem).compile()
