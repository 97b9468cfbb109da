"""
Run configuration files.

    {
      "label": "ellipsoid",
      "system": "double_integrator.json",
      "template": {"kind": "polyset", "degree": 4},
      "objective": {"vertices": [[...], ...], "node": "mode", "coordinates": [0, 1]},
      "solver": {"max_iters": 500},
      "output_dir": "out/ellipsoid",
      "plot": {"directions": 720, "format": "both", "reference": "maximal_set.csv"},
      "expected_gamma": 0.894
    }

Relative paths (system, reference, output_dir) are resolved against the
directory of the config file; system and reference files that are not
found there are looked up in the bundled data directories.
"""
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from rest_framework import serializers

from hybrid import DATA_DIR as SYSTEM_DATA_DIR
from hybrid.serializers import read_system_file
from synthesis.conf import synthesis_setting
from synthesis.exceptions import RunConfigError
from synthesis.problem import SynthesisProblem, template_from_dict
from synthesis.serializers import RunConfigSerializer

DATA_DIR = Path(__file__).resolve().parent / "data"


def flatten_errors(detail, prefix=""):
    """ValidationError detail as "template.degree: message" lines."""
    if isinstance(detail, dict):
        lines = []
        for key, value in detail.items():
            name = prefix if key == "non_field_errors" else (f"{prefix}.{key}" if prefix else str(key))
            lines.extend(flatten_errors(value, name))
        return lines
    if isinstance(detail, list):
        if all(isinstance(item, str) for item in detail):
            return [f"{prefix}: {item}" if prefix else str(item) for item in detail]
        lines = []
        for index, item in enumerate(detail):
            if item:
                lines.extend(flatten_errors(item, f"{prefix}[{index}]" if prefix else f"[{index}]"))
        return lines
    return [f"{prefix}: {detail}" if prefix else str(detail)]


def resolve_path(value, base_dir, *fallbacks):
    path = Path(value)
    if path.is_absolute():
        return path
    for directory in (base_dir, *fallbacks):
        candidate = Path(directory) / path
        if candidate.exists():
            return candidate
    return Path(base_dir) / path


@dataclass(frozen=True)
class RunConfig:
    label: str
    system_path: Path
    template: dict
    objective: dict
    solver: dict = field(default_factory=dict)
    output_dir: Optional[Path] = None
    plot_directions: Optional[int] = None
    plot_format: str = "both"
    reference: Optional[Path] = None
    expected_gamma: Optional[float] = None
    source: Optional[Path] = None

    def build_problem(self):
        """Read the system file and set up the synthesis problem; raises RunConfigError on bad input."""
        try:
            system = read_system_file(self.system_path)
        except FileNotFoundError:
            raise RunConfigError(self.source, [f"system: file {self.system_path} does not exist"])
        except json.JSONDecodeError as exc:
            raise RunConfigError(self.system_path, [f"invalid JSON: {exc}"])
        except serializers.ValidationError as exc:
            raise RunConfigError(self.system_path, flatten_errors(exc.detail))

        template = dict(self.template)
        template.setdefault("certificate_form", synthesis_setting("CERTIFICATE_FORM"))
        template = template_from_dict(template)
        return SynthesisProblem.from_system(
            system,
            template,
            self.objective["vertices"],
            node=self.objective.get("node"),
            coordinates=self.objective.get("coordinates"),
            label=self.label,
            rank_tol=synthesis_setting("RANK_TOL"),
        )

    def with_overrides(self, output_dir=None, solver=None):
        config = self
        if output_dir is not None:
            config = replace(config, output_dir=Path(output_dir))
        if solver:
            config = replace(config, solver={**self.solver, **solver})
        return config


def parse_run_config(data, base_dir, source=None):
    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        raise RunConfigError(source or "config", flatten_errors(serializer.errors))
    values = serializer.validated_data
    base_dir = Path(base_dir)
    label = values["label"] or (Path(source).stem if source else "run")
    plot = values.get("plot") or {}
    reference = plot.get("reference")
    return RunConfig(
        label=label,
        system_path=resolve_path(values["system"], base_dir, SYSTEM_DATA_DIR, DATA_DIR),
        template={key: value for key, value in values["template"].items()},
        objective=dict(values["objective"]),
        solver=dict(values["solver"]),
        output_dir=resolve_path(values["output_dir"], base_dir) if values["output_dir"] else None,
        plot_directions=plot.get("directions"),
        plot_format=plot.get("format", "both"),
        reference=resolve_path(reference, base_dir, DATA_DIR) if reference else None,
        expected_gamma=values["expected_gamma"],
        source=Path(source) if source else None,
    )


def load_run_config(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise RunConfigError(path, ["file does not exist"])
    except json.JSONDecodeError as exc:
        raise RunConfigError(path, [f"invalid JSON: {exc}"])
    return parse_run_config(data, path.resolve().parent, path)


BUNDLED_RUNS = (
    "ellipsoid",
    "polyset-4",
    "polyset-6",
    "polyset-8",
    "piecewise-4-3",
    "piecewise-8-5",
    "piecewise-16-7",
)


def bundled_configs():
    """The run configs shipped in synthesis/data, in table order."""
    return [DATA_DIR / f"run_{name}.json" for name in BUNDLED_RUNS]
