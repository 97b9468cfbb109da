"""
Plot data of a solved set, projected onto the two objective coordinates.

Left panel (primal): the boundary of the projected set, traced by the exposed
points grad h(L y) for unit y on a theta grid, with the safe box, gamma * D
and an optional reference polygon. Right panel (polar): y / h(L y), with the
polars of the safe box and of gamma * D.

CSV rows are (curve_id, theta, x, y). A direction where h vanishes gives a
NaN row, which breaks the curve.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.figure import Figure

from hybrid.systems import Box
from synthesis.conf import synthesis_setting
from synthesis.exceptions import SynthesisError
from verify.support import PiecewiseModel

logger = logging.getLogger(__name__)

PRIMAL = "primal"
POLAR = "polar"
CSV_FILE = "plot.csv"
SVG_FILE = "plot.svg"
CSV_HEADER = ("curve_id", "theta", "x", "y")

DEGENERATE_TOL = 1e-12
KINK_STEP = 1e-7
TWO_PI = 2 * np.pi

STYLES = {
    "primal": {"color": "C0", "linewidth": 1.5, "label": "invariant set"},
    "polar": {"color": "C0", "linewidth": 1.5, "label": "polar set"},
    "safe_box": {"color": "black", "linestyle": "--", "linewidth": 1.0, "label": "safe set"},
    "safe_box_polar": {"color": "black", "linestyle": "--", "linewidth": 1.0, "label": "polar of safe set"},
    "objective": {"color": "C3", "linewidth": 1.0, "label": "gamma D"},
    "objective_polar": {"color": "C3", "linewidth": 1.0, "label": "polar of gamma D"},
    "reference": {"color": "C2", "linestyle": ":", "linewidth": 1.5, "label": "maximal set"},
}


@dataclass(frozen=True, eq=False)
class Curve:
    curve_id: str
    theta: np.ndarray
    points: np.ndarray
    panel: str = PRIMAL

    def rows(self):
        for theta, (x, y) in zip(self.theta, self.points):
            yield self.curve_id, float(theta), float(x), float(y)

    def segments(self):
        """Closed runs of finite points, split at NaN rows."""
        finite = np.all(np.isfinite(self.points), axis=1)
        if finite.all():
            return [np.vstack([self.points, self.points[:1]])]
        segments, start = [], None
        for index, ok in enumerate(finite):
            if ok and start is None:
                start = index
            if not ok and start is not None:
                segments.append(self.points[start:index])
                start = None
        if start is not None:
            segments.append(self.points[start:])
        return segments


@dataclass(frozen=True, eq=False)
class PlotData:
    label: str
    curves: Tuple[Curve, ...]

    def curve(self, curve_id):
        for curve in self.curves:
            if curve.curve_id == curve_id:
                return curve
        raise KeyError(curve_id)

    def write_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for curve in self.curves:
                for curve_id, theta, x, y in curve.rows():
                    writer.writerow((curve_id, repr(theta), repr(x), repr(y)))
        return path

    def write_svg(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        figure = Figure(figsize=(10, 5))
        primal, polar = figure.subplots(1, 2)
        for axes, panel, title in ((primal, PRIMAL, "primal"), (polar, POLAR, "polar")):
            for curve in self.curves:
                if curve.panel != panel:
                    continue
                style = dict(STYLES.get(curve.curve_id, {"label": curve.curve_id}))
                for index, segment in enumerate(curve.segments()):
                    if index:
                        style.pop("label", None)
                    axes.plot(segment[:, 0], segment[:, 1], **style)
            axes.set_aspect("equal", adjustable="datalim")
            axes.set_title(f"{self.label} ({title})" if self.label else title)
            axes.grid(True, linewidth=0.3)
            axes.legend(loc="upper right", fontsize="small")
        with matplotlib.rc_context({"svg.hashsalt": self.label or "plot"}):
            figure.savefig(path, format="svg", metadata={"Date": None})
        return path

    def write(self, output_dir, fmt="both"):
        output_dir = Path(output_dir)
        paths = []
        if fmt in ("csv", "both"):
            paths.append(self.write_csv(output_dir / CSV_FILE))
        if fmt in ("svg", "both"):
            paths.append(self.write_svg(output_dir / SVG_FILE))
        return paths


def direction_grid(count, extra=()):
    """count equally spaced angles in [0, 2 pi) merged with the extra angles."""
    thetas = TWO_PI * np.arange(count) / count
    extra = np.mod(np.asarray(extra, dtype=float), TWO_PI)
    if extra.size:
        thetas = np.unique(np.concatenate([thetas, extra]))
    return thetas


def unit_directions(thetas):
    return np.column_stack([np.cos(thetas), np.sin(thetas)])


def kink_angles(model, L):
    """Angles where the plane of L crosses a facet shared by two pieces of a piecewise model."""
    if not isinstance(model, PiecewiseModel):
        return np.zeros(0)
    cones = model.partition.cones
    angles = []
    for adjacency in model.partition.adjacency:
        w = L.T @ adjacency.normal
        norm = np.linalg.norm(w)
        if norm < DEGENERATE_TOL:
            continue
        d = np.array([-w[1], w[0]]) / norm
        for direction in (d, -d):
            lifted = L @ direction
            if cones[adjacency.i].contains(lifted) and cones[adjacency.j].contains(lifted):
                angles.append(np.arctan2(direction[1], direction[0]))
    return np.unique(np.mod(angles, TWO_PI))


def _break_degenerate(curve_id, h, points):
    degenerate = ~(h > DEGENERATE_TOL)
    if np.any(degenerate):
        logger.warning("curve=%s degenerate_directions=%d h vanishes, curve broken", curve_id, int(degenerate.sum()))
        points = points.copy()
        points[degenerate] = np.nan
    return points


def _piecewise_exposed_points(model, L, thetas):
    """
    Exposed points on either side of each direction.

    A direction on a kink exposes a whole face; the pieces met just before and
    just after it give the two endpoints, in that order.
    """
    Y = unit_directions(thetas)
    lifted = Y @ L.T
    sides = []
    for step in (-KINK_STEP, KINK_STEP):
        found = model.partition.locate(unit_directions(thetas + step) @ L.T)
        if np.any(found < 0):
            raise SynthesisError(f"{int(np.sum(found < 0))} plot directions lie in no cone of the partition")
        grads = np.empty_like(lifted)
        for index in np.unique(found):
            rows = found == index
            grads[rows] = model.piece_gradient(index, lifted[rows])
        sides.append(grads @ L)
    before, after = sides
    theta_out, points = [], []
    for theta, a, b in zip(thetas, before, after):
        theta_out.append(theta)
        points.append(a)
        if np.all(np.isfinite(a)) and np.linalg.norm(a - b) > 1e-9:
            theta_out.append(theta)
            points.append(b)
    return np.array(theta_out), np.array(points)


def primal_curve(model, L, thetas):
    with np.errstate(divide="ignore", invalid="ignore"):
        if isinstance(model, PiecewiseModel):
            thetas, points = _piecewise_exposed_points(model, L, thetas)
        else:
            points = np.atleast_2d(model.gradient(unit_directions(thetas) @ L.T)) @ L
    h = np.atleast_1d(model.value(unit_directions(thetas) @ L.T))
    return Curve(PRIMAL, thetas, _break_degenerate(PRIMAL, h, points), PRIMAL)


def polar_curve(model, L, thetas):
    Y = unit_directions(thetas)
    h = np.atleast_1d(model.value(Y @ L.T))
    with np.errstate(divide="ignore", invalid="ignore"):
        points = Y / h[:, None]
    return Curve(POLAR, thetas, _break_degenerate(POLAR, h, points), POLAR)


def gauge_curve(curve_id, support, thetas):
    """Polar boundary y / support(y) of a set given by its support function."""
    Y = unit_directions(thetas)
    h = np.atleast_1d(support(Y))
    with np.errstate(divide="ignore", invalid="ignore"):
        points = Y / h[:, None]
    return Curve(curve_id, thetas, _break_degenerate(curve_id, h, points), POLAR)


def polygon_curve(curve_id, vertices):
    """Vertices ordered by angle around their centroid."""
    vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
    center = vertices.mean(axis=0)
    order = np.argsort(np.arctan2(vertices[:, 1] - center[1], vertices[:, 0] - center[0]), kind="stable")
    vertices = vertices[order]
    thetas = np.mod(np.arctan2(vertices[:, 1], vertices[:, 0]), TWO_PI)
    return Curve(curve_id, thetas, vertices, PRIMAL)


def read_reference(path):
    """A vertex file: CSV with an "x,y" header and one polygon vertex per row."""
    points = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if points.shape[1] != 2:
        raise SynthesisError(f"{path}: expected two columns x,y, got {points.shape[1]}")
    return points


def scale_bound(polygon, vertices):
    """
    Largest t with t * conv(vertices) inside the convex polygon.

    The polygon must contain the origin. For the maximal invariant set this
    bounds the gamma of every template.
    """
    ordered = polygon_curve("bound", polygon).points
    edges = np.roll(ordered, -1, axis=0) - ordered
    normals = np.column_stack([edges[:, 1], -edges[:, 0]])
    offsets = np.einsum("ij,ij->i", normals, ordered)
    outward = np.where(offsets < 0, -1.0, 1.0)
    normals, offsets = normals * outward[:, None], offsets * outward
    reach = np.atleast_2d(np.asarray(vertices, dtype=float)) @ normals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(reach > DEGENERATE_TOL, offsets / reach, np.inf)
    return float(np.min(ratios))


def plot_solution(solution, safe_box=None, directions=None, reference=None):
    """
    Curves of a solved set on the objective coordinates.

    safe_box is the Box of the objective node; reference is a vertex file.
    """
    model = solution.root_model
    objective = solution.objective
    if model is None or solution.gamma is None:
        raise SynthesisError(f"run '{solution.label}' has no solved set to plot (status {solution.status})")
    if objective.dim != 2:
        raise SynthesisError(f"plots need two objective coordinates, got {objective.dim}")
    if directions is None:
        directions = synthesis_setting("PLOT_DIRECTIONS")

    L = objective.lift_matrix(model.dim)
    thetas = direction_grid(directions, kink_angles(model, L))
    gamma_vertices = solution.gamma * objective.vertices

    curves = [primal_curve(model, L, thetas), polar_curve(model, L, thetas)]
    if safe_box is not None:
        coordinates = list(objective.coordinates)
        box = Box(safe_box.lower[coordinates], safe_box.upper[coordinates])
        curves.append(polygon_curve("safe_box", box.vertices()))
        curves.append(gauge_curve("safe_box_polar", box.support, thetas))
    curves.append(polygon_curve("objective", gamma_vertices))
    curves.append(gauge_curve("objective_polar", lambda Y: np.max(Y @ gamma_vertices.T, axis=1), thetas))
    if reference is not None:
        points = read_reference(reference)
        curves.append(Curve("reference", np.mod(np.arctan2(points[:, 1], points[:, 0]), TWO_PI), points, PRIMAL))

    logger.info("plot label=%s directions=%d kinks=%d curves=%d", solution.label, directions,
                len(thetas) - directions, len(curves))
    return PlotData(solution.label, tuple(curves))
