import json
import tempfile
from dataclasses import replace
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings, tag

from geometry.fans import face_fan, partition_from_rays
from hybrid import DATA_DIR as SYSTEM_DATA_DIR
from hybrid.reduction import LiftingMap
from hybrid.serializers import read_system_file
from hybrid.systems import AlgebraicNode, AlgebraicReset, Automaton, Box, HybridAlgebraicSystem, Transition
from polysos.exceptions import OddDegreeError
from polysos.polynomials import HomogeneousPoly
from synthesis.compilers import compile_ellipsoid, compile_piecewise, compile_polyset, compiler_for
from synthesis.conf import solver_options, synthesis_setting
from synthesis.config import BUNDLED_RUNS, DATA_DIR, bundled_configs, load_run_config, parse_run_config
from synthesis.exceptions import (
    ObjectiveError,
    PartitionMismatchError,
    RunConfigError,
    SynthesisError,
    TemplateError,
)
from synthesis.models import SynthesisRun
from synthesis.plots import direction_grid, kink_angles, plot_solution, read_reference, scale_bound
from synthesis.problem import (
    EllipsoidTemplate,
    Objective,
    PiecewiseTemplate,
    PolysetTemplate,
    SynthesisProblem,
    template_from_dict,
)
from synthesis.runner import SynthesisSolution, solve_synthesis
from verify.support import EllipsoidModel, PiecewiseModel, PolysetModel

DIAMOND = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])

OBJECTIVE = [
    [0.7320508075688772, 0.7320508075688772],
    [-0.5, 1.0],
    [-1.0, 0.75],
    [-0.7320508075688772, -0.7320508075688772],
    [0.5, -1.0],
    [1.0, -0.75],
]

QUADRANTS = [
    [[1.0, 0.0], [0.0, 1.0]],
    [[0.0, 1.0], [-1.0, 0.0]],
    [[-1.0, 0.0], [0.0, -1.0]],
    [[0.0, -1.0], [1.0, 0.0]],
]

FAST_VERIFY = dict(seed=7, directions=2000)

# jump symmetry forces P12 = 0 on the ellipsoid, so (-1, 3/4) caps gamma at 1 / 1.25
ELLIPSOID_GAMMA = 0.8


def static_system(C=None, E=None, lower=(-1.0, -1.0), upper=(1.0, 1.0)):
    """One node, no transitions; without C and E the node has no dynamics left."""
    C = np.zeros((0, 2)) if C is None else C
    E = np.zeros((0, 2)) if E is None else E
    return HybridAlgebraicSystem(Automaton(("q",), ()), {"q": AlgebraicNode(C, E, Box(lower, upper))}, {})


def self_jump_system(box=Box.symmetric([1.0, 1.0])):
    """One node without dynamics and an identity jump onto itself."""
    return HybridAlgebraicSystem(
        Automaton(("q",), ("s",), (Transition("q", "s", "q"),)),
        {"q": AlgebraicNode(np.zeros((0, 2)), np.zeros((0, 2)), box)},
        {"s": AlgebraicReset(np.eye(2), np.eye(2))},
    )


def static_problem(template, system=None, vertices=DIAMOND):
    return SynthesisProblem.from_system(system or static_system(), template, vertices, label="static")


def double_integrator(template, label="double-integrator"):
    system = read_system_file(SYSTEM_DATA_DIR / "double_integrator.json")
    return SynthesisProblem.from_system(system, template, OBJECTIVE, label=label)


def solved(model, gamma=0.5, vertices=DIAMOND, label="plot"):
    return SynthesisSolution(
        label=label,
        template={"kind": model.kind},
        status="optimal",
        gamma=gamma,
        models={"q": model},
        report={},
        fingerprint="",
        stats={},
        lifting=LiftingMap({}),
        objective=Objective(vertices, "q", (0, 1)),
    )


def write_json(path, data):
    path = Path(path)
    path.write_text(json.dumps(data))
    return path


class TemplateTests(SimpleTestCase):

    def test_polyset_degree_must_be_even(self):
        with self.assertRaises(OddDegreeError):
            PolysetTemplate(3)
        with self.assertRaises(TemplateError):
            PolysetTemplate(0)

    def test_piecewise_needs_a_partition(self):
        with self.assertRaises(TemplateError):
            PiecewiseTemplate()

    def test_partition_dimension_is_checked(self):
        problem = static_problem(PiecewiseTemplate(face_fan(4, 3)))
        with self.assertRaises(PartitionMismatchError):
            compile_piecewise(problem)

    def test_template_round_trip(self):
        template = PiecewiseTemplate(face_fan(4, 3), tie_pieces=True)
        again = template_from_dict(template.as_dict())
        self.assertEqual(len(again.partition), 8)
        self.assertTrue(again.tie_pieces)
        self.assertEqual(template_from_dict({"kind": "polyset", "degree": 6}).degree, 6)
        with self.assertRaises(TemplateError):
            template_from_dict({"kind": "zonotope"})

    def test_objective_validation(self):
        with self.assertRaises(ObjectiveError):
            Objective([[1.0, 0.0]], "q", (0,))
        with self.assertRaises(ObjectiveError):
            Objective([[1.0, 0.0]], "q", (1, 1))
        with self.assertRaises(ObjectiveError):
            static_problem(EllipsoidTemplate(), vertices=[[1.0, 0.0, 0.0]])

    def test_lift_matrix(self):
        L = Objective(DIAMOND, "q", (2, 0)).lift_matrix(3)
        np.testing.assert_array_equal(L @ np.array([5.0, 7.0]), [7.0, 0.0, 5.0])

    def test_control_system_is_reduced(self):
        problem = double_integrator(EllipsoidTemplate())
        self.assertEqual(problem.objective.node, "mode")
        self.assertEqual(problem.objective.coordinates, (0, 1))
        self.assertEqual(problem.root_dim, 3)
        self.assertFalse(problem.lifting.is_identity)


class CompilerTests(SimpleTestCase):

    def test_compiler_dispatch(self):
        self.assertEqual(compiler_for(static_problem(PolysetTemplate(4))).kind, "polyset")
        with self.assertRaises(TemplateError):
            compile_polyset(static_problem(EllipsoidTemplate()))

    def test_compilation_is_deterministic(self):
        first = compile_ellipsoid(double_integrator(EllipsoidTemplate()))
        second = compile_ellipsoid(double_integrator(EllipsoidTemplate()))
        self.assertEqual(first.fingerprint, second.fingerprint)

    def test_static_node_fits_the_box(self):
        templates = [
            EllipsoidTemplate(),
            PolysetTemplate(4),
            PiecewiseTemplate(partition_from_rays(QUADRANTS)),
        ]
        for template in templates:
            with self.subTest(template=template.describe()):
                solution = solve_synthesis(static_problem(template), **FAST_VERIFY)
                self.assertEqual(solution.status, "optimal")
                self.assertAlmostEqual(solution.gamma, 1.0, delta=1e-4)

    def test_stable_isotropic_flow(self):
        system = static_system(C=-np.eye(2), E=np.eye(2))
        solution = solve_synthesis(static_problem(EllipsoidTemplate(), system), **FAST_VERIFY)
        self.assertTrue(solution.verified)
        self.assertAlmostEqual(solution.gamma, 1.0, delta=1e-4)

    def test_piecewise_jump_certifies_flat_intersections(self):
        compiler = compiler_for(static_problem(PiecewiseTemplate(partition_from_rays(QUADRANTS)), self_jump_system()))
        compiler.compile()
        cones = [cone for certificate, cone in compiler.certificates if certificate.name.startswith("transition")]
        # 4 quadrant pairs meeting in full, 8 adjacent pairs meeting on a ray, opposite pairs only at 0
        self.assertEqual(len(cones), 12)
        flat = [cone for cone in cones if cone.empty_interior]
        self.assertEqual(len(flat), 8)
        self.assertTrue(all(cone.span_dimension() == 1 for cone in flat))

        solution = solve_synthesis(compiler.problem, **FAST_VERIFY)
        self.assertTrue(solution.verified, solution.report)
        self.assertAlmostEqual(solution.gamma, 1.0, delta=1e-4)

    def test_box_shrunk_to_origin_is_infeasible(self):
        system = static_system(lower=(0.0, 0.0), upper=(0.0, 0.0))
        for template in (EllipsoidTemplate(), PolysetTemplate(4)):
            with self.subTest(template=template.describe()):
                solution = solve_synthesis(static_problem(template, system), **FAST_VERIFY)
                self.assertEqual(solution.status, "infeasible")
                self.assertEqual(solution.exit_code, 3)

    def test_box_not_containing_the_origin(self):
        system = static_system(lower=(0.5, -1.0), upper=(1.0, 1.0))
        solution = solve_synthesis(static_problem(EllipsoidTemplate(), system), **FAST_VERIFY)
        self.assertEqual(solution.status, "infeasible")

    def test_ellipsoid_double_integrator(self):
        solution = solve_synthesis(double_integrator(EllipsoidTemplate()), **FAST_VERIFY)
        self.assertTrue(solution.verified, solution.report)
        self.assertAlmostEqual(solution.gamma, ELLIPSOID_GAMMA, delta=2e-3)
        self.assertEqual(set(solution.models), {"mode", "jump@mode->mode"})
        self.assertIsInstance(solution.root_model, EllipsoidModel)

    def test_quadratic_polyset_matches_ellipsoid(self):
        ellipsoid = solve_synthesis(double_integrator(EllipsoidTemplate()), **FAST_VERIFY)
        polyset = solve_synthesis(double_integrator(PolysetTemplate(2)), **FAST_VERIFY)
        self.assertIsInstance(polyset.root_model, PolysetModel)
        self.assertAlmostEqual(polyset.gamma, ellipsoid.gamma, delta=1e-3)

    def test_scaling_boxes_and_objective_keeps_gamma(self):
        system = read_system_file(SYSTEM_DATA_DIR / "double_integrator.algebraic.json")
        scaled = HybridAlgebraicSystem(
            system.automaton,
            {node_id: replace(node, safe_set=Box(2 * node.safe_set.lower, 2 * node.safe_set.upper))
             for node_id, node in system.nodes.items()},
            system.signals,
        )
        base = SynthesisProblem.from_system(system, EllipsoidTemplate(), OBJECTIVE, coordinates=(0, 1))
        bigger = SynthesisProblem.from_system(scaled, EllipsoidTemplate(), 2 * np.array(OBJECTIVE),
                                              coordinates=(0, 1))
        self.assertAlmostEqual(solve_synthesis(base, **FAST_VERIFY).gamma,
                               solve_synthesis(bigger, **FAST_VERIFY).gamma, delta=1e-4)

    def test_solution_file_round_trip(self):
        solution = solve_synthesis(static_problem(PolysetTemplate(4)), **FAST_VERIFY)
        with tempfile.TemporaryDirectory() as tmp:
            paths = solution.write(tmp)
            self.assertEqual([path.name for path in paths], ["solution.json", "report.json", "program.sha256"])
            again = SynthesisSolution.read(Path(tmp) / "solution.json")
        self.assertEqual(again.gamma, solution.gamma)
        self.assertEqual(again.status, "optimal")
        y = np.array([[0.3, -0.8]])
        np.testing.assert_allclose(again.root_model.value(y), solution.root_model.value(y))


class PlotTests(SimpleTestCase):

    def test_scale_bound(self):
        square = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
        self.assertAlmostEqual(scale_bound(square, DIAMOND), 1.0)
        self.assertAlmostEqual(scale_bound(square, 0.5 * square), 2.0)
        # the jump from (-1, 3/4) lands on the maximal set boundary at gamma near 0.84
        maximal = read_reference(DATA_DIR / "maximal_set.csv")
        self.assertAlmostEqual(scale_bound(maximal, OBJECTIVE), 0.84, delta=1e-3)

    def test_unit_ball_is_self_polar(self):
        plot = plot_solution(solved(EllipsoidModel(np.eye(2))), directions=360)
        for curve_id in ("primal", "polar"):
            points = plot.curve(curve_id).points
            self.assertEqual(len(points), 360)
            np.testing.assert_allclose(np.linalg.norm(points, axis=1), 1.0, atol=1e-12)

    def test_points_satisfy_the_defining_equations(self):
        P = np.array([[2.0, 0.3], [0.3, 0.5]])
        model = EllipsoidModel(P)
        plot = plot_solution(solved(model), directions=720)
        polar = plot.curve("polar").points
        np.testing.assert_allclose(model.value(polar), 1.0, atol=1e-8)
        primal = plot.curve("primal").points
        np.testing.assert_allclose(np.einsum("ij,jk,ik->i", primal, np.linalg.inv(P), primal), 1.0, atol=1e-8)

    def test_exposed_points_touch_their_support_line(self):
        model = PolysetModel(HomogeneousPoly(2, 4, {(4, 0): 1.0, (2, 2): 0.5, (0, 4): 2.0}))
        curve = plot_solution(solved(model), directions=180).curve("primal")
        Y = np.column_stack([np.cos(curve.theta), np.sin(curve.theta)])
        np.testing.assert_allclose(np.sum(curve.points * Y, axis=1), model.value(Y), atol=1e-8)

    def test_piecewise_polar_curve_is_continuous(self):
        matrices = [np.diag([1.0, 4.0]), np.diag([2.0, 4.0]), np.diag([2.0, 9.0]), np.diag([1.0, 9.0])]
        model = PiecewiseModel(partition_from_rays(QUADRANTS), matrices)
        plot = plot_solution(solved(model), directions=720)
        polar = plot.curve("polar").points
        np.testing.assert_allclose(model.value(polar), 1.0, atol=1e-8)
        steps = np.linalg.norm(np.diff(np.vstack([polar, polar[:1]]), axis=0), axis=1)
        self.assertLess(steps.max(), 0.02)

    def test_kinks_of_the_octahedral_fan(self):
        model = PiecewiseModel(face_fan(4, 3), [np.eye(3)] * 8)
        L = Objective(DIAMOND, "q", (0, 1)).lift_matrix(3)
        np.testing.assert_allclose(kink_angles(model, L), [0.0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-12)
        self.assertEqual(len(direction_grid(8, [0.1])), 9)

    def test_degenerate_directions_break_the_curve(self):
        with self.assertLogs("synthesis.plots", level="WARNING"):
            plot = plot_solution(solved(EllipsoidModel(np.diag([1.0, 0.0]))), directions=4)
        polar = plot.curve("polar").points
        self.assertTrue(np.all(np.isnan(polar[[1, 3]])))
        self.assertEqual(len(plot.curve("polar").segments()), 2)

    def test_overlays_and_files(self):
        plot = plot_solution(solved(EllipsoidModel(np.eye(2)), gamma=0.5), safe_box=Box.symmetric([1.0, 1.0]),
                             directions=90, reference=DATA_DIR / "maximal_set.csv")
        np.testing.assert_allclose(np.abs(plot.curve("safe_box").points), 1.0)
        np.testing.assert_allclose(np.max(np.abs(plot.curve("objective").points)), 0.5)
        self.assertEqual(len(plot.curve("reference").points), len(read_reference(DATA_DIR / "maximal_set.csv")))
        with tempfile.TemporaryDirectory() as tmp:
            csv_path, svg_path = plot.write(tmp)
            lines = csv_path.read_text().splitlines()
            self.assertEqual(lines[0], "curve_id,theta,x,y")
            self.assertEqual(len(lines) - 1, sum(len(curve.points) for curve in plot.curves))
            self.assertIn("<svg", svg_path.read_text())

    def test_nothing_to_plot_without_a_solution(self):
        empty = replace(solved(EllipsoidModel(np.eye(2))), models={}, gamma=None, status="infeasible")
        with self.assertRaises(SynthesisError):
            plot_solution(empty)


class ConfigTests(SimpleTestCase):

    def test_bundled_configs(self):
        configs = [load_run_config(path) for path in bundled_configs()]
        self.assertEqual([config.label for config in configs], list(BUNDLED_RUNS))
        for config in configs:
            self.assertTrue(config.system_path.exists())
            self.assertTrue(config.reference.exists())
            self.assertIsNotNone(config.expected_gamma)

    def test_missing_degree_names_the_field(self):
        data = json.loads(bundled_configs()[1].read_text())
        del data["template"]["degree"]
        with self.assertRaises(RunConfigError) as cm:
            parse_run_config(data, SYSTEM_DATA_DIR)
        self.assertIn("template.degree", str(cm.exception))

    def test_bad_partition_names_the_field(self):
        data = json.loads(bundled_configs()[4].read_text())
        data["template"]["partition"] = {"face_fan": [4, 4]}
        with self.assertRaises(RunConfigError) as cm:
            parse_run_config(data, SYSTEM_DATA_DIR)
        self.assertIn("template.partition", str(cm.exception))

    def test_certificate_form_defaults_from_settings(self):
        config = load_run_config(bundled_configs()[4])
        problem = config.build_problem()
        self.assertEqual(problem.template.certificate_form, synthesis_setting("CERTIFICATE_FORM"))

    @override_settings(HYBRID_INVARIANCE={"SOLVER": "SCS", "SOLVER_OPTIONS": {"max_iters": 2000}})
    def test_solver_options_from_settings(self):
        options = solver_options({"feas_tol": 1e-5})
        self.assertEqual(options.solver, "SCS")
        self.assertEqual(options.max_iters, 2000)
        self.assertEqual(options.feas_tol, 1e-5)


class CommandTests(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def config(self, name="ellipsoid", **changes):
        data = json.loads((bundled_configs()[BUNDLED_RUNS.index(name)]).read_text())
        data.update(changes)
        return write_json(self.out / f"{name}.json", data)

    def call(self, *args, **kwargs):
        stdout = StringIO()
        call_command(*args, stdout=stdout, **kwargs)
        return stdout.getvalue()

    def test_missing_degree_exits_2(self):
        config = self.config("polyset-4", template={"kind": "polyset"})
        with self.assertRaises(CommandError) as cm:
            self.call("solve", config=str(config))
        self.assertEqual(cm.exception.returncode, 2)
        self.assertIn("degree", str(cm.exception))

    def test_bad_solver_option_exits_2(self):
        with self.assertRaises(CommandError) as cm:
            self.call("solve", config=str(self.config()), solver_opt=["max_iters"])
        self.assertEqual(cm.exception.returncode, 2)

    def test_unknown_solver_option_exits_2(self):
        with self.assertRaises(CommandError) as cm:
            self.call("solve", config=str(self.config()), solver_opt=["feas_tl=1e-3"])
        self.assertEqual(cm.exception.returncode, 2)
        self.assertIn("feas_tl", str(cm.exception))

    def test_shrunk_box_exits_3(self):
        system = {
            "kind": "algebraic",
            "nodes": [{"id": "q", "C": [], "E": [], "safe_set": [[0.0, 0.0], [0.0, 0.0]]}],
        }
        write_json(self.out / "point.json", system)
        config = self.config(system="point.json", objective={"vertices": DIAMOND.tolist()})
        with self.assertRaises(CommandError) as cm:
            self.call("solve", config=str(config), output_dir=str(self.out / "run"), no_plots=True)
        self.assertEqual(cm.exception.returncode, 3)
        self.assertEqual(SynthesisRun.objects.get().status, "infeasible")

    def test_solve_verify_and_plot(self):
        config = str(self.config())
        run = self.out / "run"
        output = self.call("solve", config=config, output_dir=str(run), dirs=2000, no_plots=True)
        self.assertIn("verified", output)

        data = json.loads((run / "solution.json").read_text())
        self.assertEqual(data["status"], "optimal")
        self.assertAlmostEqual(data["gamma"], ELLIPSOID_GAMMA, delta=2e-3)
        self.assertEqual((run / "program.sha256").read_text().strip(), data["fingerprint"])
        self.assertTrue(json.loads((run / "report.json").read_text())["passed"])

        record = SynthesisRun.objects.get()
        self.assertEqual(record.template, "ellipsoid")
        self.assertTrue(record.verified)
        self.assertEqual(record.fingerprint, data["fingerprint"])

        self.call("verify", config=config, output_dir=str(run), dirs=1000)
        self.call("plot", config=config, output_dir=str(run), dirs=90, format="csv")
        self.assertTrue((run / "plot.csv").exists())
        self.assertFalse((run / "plot.svg").exists())

    def test_reruns_write_identical_files(self):
        config = str(self.config())
        for name in ("first", "second"):
            self.call("solve", config=config, output_dir=str(self.out / name), dirs=500)
        for name in ("solution.json", "program.sha256", "plot.csv"):
            self.assertEqual((self.out / "first" / name).read_bytes(), (self.out / "second" / name).read_bytes())

    def test_verify_catches_a_tampered_solution(self):
        config = str(self.config())
        run = self.out / "run"
        self.call("solve", config=config, output_dir=str(run), dirs=500, no_plots=True)
        data = json.loads((run / "solution.json").read_text())
        for model in data["models"].values():
            model["P"] = (4 * np.array(model["P"])).tolist()
        write_json(run / "solution.json", data)
        with self.assertRaises(CommandError) as cm:
            self.call("verify", config=config, output_dir=str(run), dirs=500)
        self.assertEqual(cm.exception.returncode, 5)
        report = json.loads((run / "report.json").read_text())
        self.assertFalse(report["passed"])
        failed = {result["condition"] for result in report["conditions"] if not result["passed"]}
        self.assertIn("safe-set", failed)

    def test_verify_without_a_solution_file(self):
        with self.assertRaises(CommandError) as cm:
            self.call("verify", config=str(self.config()), output_dir=str(self.out / "nothing"))
        self.assertEqual(cm.exception.returncode, 2)

    def test_reproduce_single_row(self):
        output = self.call("reproduce_paper", only=["ellipsoid"], jobs=1, no_plots=True, output_dir=str(self.out),
                           dirs=1000)
        rows = [line for line in output.splitlines() if line.startswith("ellipsoid")]
        self.assertEqual(len(rows), 1)
        self.assertIn("0.8000", rows[0])
        self.assertIn("0.894", rows[0])
        self.assertIn("0.8400", rows[0])
        self.assertIn("0 of 1 runs within 0.005 of the target gamma", output)
        self.assertNotIn("migrate", output)
        self.assertIn("1 runs verified", output)
        self.assertEqual(SynthesisRun.objects.count(), 1)
        self.assertTrue((self.out / "ellipsoid" / "solution.json").exists())

    @mock.patch("synthesis.management.commands.reproduce_paper.record_run", return_value=None)
    def test_reproduce_without_a_ledger(self, record_run):
        output = self.call("reproduce_paper", only=["ellipsoid"], jobs=1, no_plots=True, output_dir=str(self.out),
                           dirs=1000)
        record_run.assert_called_once()
        self.assertIn("0 of 1 runs written to the run ledger", output)
        self.assertIn("migrate", output)
        self.assertIn("1 runs verified", output)

    def test_reproduce_with_nothing_selected(self):
        with self.assertRaises(CommandError) as cm:
            self.call("reproduce_paper", only=["zonotope"])
        self.assertEqual(cm.exception.returncode, 2)


class RunLedgerApiTests(TestCase):

    def setUp(self):
        for index, (template, status) in enumerate([("ellipsoid", "optimal"), ("polyset", "optimal"),
                                                    ("piecewise", "solved-unverified")]):
            SynthesisRun.objects.create(label=f"run-{index}", template=template, status=status,
                                        verified=status == "optimal", gamma=0.9, fingerprint="0" * 64,
                                        solution={"gamma": 0.9})

    def test_list(self):
        response = self.client.get("/runs/")
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()["count"], 3)
        self.assertEqual(response.json()["results"][0]["label"], "run-2")
        self.assertNotIn("solution", response.json()["results"][0])

    def test_filters(self):
        self.assertEqual(self.client.get("/runs/", {"template": "polyset"}).json()["count"], 1)
        self.assertEqual(self.client.get("/runs/", {"status": "optimal"}).json()["count"], 2)

    def test_detail(self):
        run = SynthesisRun.objects.get(label="run-0")
        response = self.client.get(f"/runs/{run.pk}/")
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()["solution"], {"gamma": 0.9})
        self.assertEqual(self.client.get("/runs/999/").status_code, 404)

    def test_read_only(self):
        self.assertEqual(self.client.post("/runs/", {"label": "x"}).status_code, 405)

    def test_str(self):
        self.assertEqual(str(SynthesisRun.objects.get(label="run-0")), "run-0 [optimal] gamma=0.9000")


@tag("slow")
class ReproductionTests(SimpleTestCase):
    """The seven bundled runs, held between the ellipsoid gamma and the maximal set bound."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.solutions = {}
        for path in bundled_configs():
            config = load_run_config(path)
            cls.solutions[config.label] = solve_synthesis(config.build_problem())

    def test_every_run_is_verified(self):
        for label, solution in self.solutions.items():
            with self.subTest(run=label):
                self.assertTrue(solution.verified, solution.report)
                self.assertGreater(solution.gamma, 0.0)
                self.assertLessEqual(solution.gamma, 1.0 + 1e-6)

    def test_ellipsoid_gamma(self):
        self.assertAlmostEqual(self.solutions["ellipsoid"].gamma, ELLIPSOID_GAMMA, delta=2e-3)

    def test_no_run_exceeds_the_maximal_set(self):
        bound = scale_bound(read_reference(DATA_DIR / "maximal_set.csv"), OBJECTIVE)
        for label, solution in self.solutions.items():
            with self.subTest(run=label):
                self.assertGreaterEqual(solution.gamma, ELLIPSOID_GAMMA - 2e-3)
                self.assertLessEqual(solution.gamma, bound + 1e-3)

    def test_templates_are_monotone(self):
        gamma = {label: solution.gamma for label, solution in self.solutions.items()}
        for label in ("polyset-4", "polyset-6", "polyset-8", "piecewise-4-3", "piecewise-8-5", "piecewise-16-7"):
            with self.subTest(run=label):
                self.assertGreaterEqual(gamma[label], gamma["ellipsoid"] - 1e-3)
        self.assertGreaterEqual(gamma["polyset-8"], gamma["polyset-4"] - 1e-3)

    def test_certificates_hold_inside_their_cones(self):
        for label in ("piecewise-4-3", "piecewise-8-5", "piecewise-16-7"):
            with self.subTest(run=label):
                certificate = [r for r in self.solutions[label].report["conditions"] if r["condition"] == "certificate"]
                self.assertEqual(len(certificate), 1)
                self.assertLessEqual(certificate[0]["max_violation"], 1e-6)

    def test_tied_pieces_match_the_ellipsoid(self):
        tied = solve_synthesis(double_integrator(PiecewiseTemplate(face_fan(4, 3), tie_pieces=True)), **FAST_VERIFY)
        self.assertAlmostEqual(tied.gamma, self.solutions["ellipsoid"].gamma, delta=1e-3)

    def test_loose_solver_tolerance(self):
        options = solver_options({"feas_tol": 1e-3, "gap_tol": 1e-3})
        loose = solve_synthesis(double_integrator(EllipsoidTemplate()), options, **FAST_VERIFY)
        self.assertAlmostEqual(loose.gamma, self.solutions["ellipsoid"].gamma, delta=5e-3)
