"""Config-driven experiments: parse, validate, run, write diagrams and series.

A config is a YAML (or JSON) document checked against
``schemas/experiment.schema.json``.  Shared fields sit at the top level; an
optional ``runs`` list repeats the experiment with per-run overrides of
``initial``, ``program`` and ``steps``.  Every output file of a run is
prefixed with its label.
"""
from __future__ import annotations

import hashlib
import json
import platform
import re
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import jsonschema
import numpy as np
import yaml

from . import channels, metrics, pulses, rules, sequences
from .state import KET0, PureState, State, _TOKENS, from_tokens, init_product

OUTPUT_KINDS = ("p1-diagram", "entropy-diagram", "R-series", "mixedness-series",
                "tangle-series", "schmidt-histogram", "schedule")
PURE_ONLY = ("R-series", "schmidt-histogram")
FIGURES = ("fig1", "fig2", "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig8")


class ConfigError(ValueError):
    """Invalid experiment config; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message

    def to_dict(self) -> dict:
        return {"error": "config", "path": self.path, "message": self.message}


def _schema() -> dict:
    text = resources.files("bqca").joinpath("schemas/experiment.schema.json").read_text()
    return json.loads(text)


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def load_config(source: Union[str, Path, dict]) -> dict:
    """Read and schema-check a config (path or already-parsed mapping)."""
    if isinstance(source, dict):
        cfg = source
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError("<file>", f"cannot read {source}: {exc.strerror}") from None
        try:
            cfg = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError("<file>", f"not valid YAML/JSON: {exc}") from None
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigError(_path(err.absolute_path), err.message)
    return cfg


# -- resolution of config pieces --------------------------------------------


def _complex(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def _boundary(cfg) -> rules.BoundaryConditions:
    b = cfg["boundary"]
    if b == "periodic":
        return rules.PERIODIC
    return rules.BoundaryConditions.fixed(*b["fixed"])


def _rule(spec: dict, path: str) -> rules.Rule:
    if "preset" in spec:
        return rules.preset(spec["preset"])
    try:
        return rules.Rule.from_rotations(*[tuple(r) for r in spec["rotations"]])
    except ValueError as exc:
        raise ConfigError(path + ".rotations", str(exc)) from None


_PRESET_RE = re.compile(r"^(rule110|rule108|mixed)(?:\(([0-9]*\.?[0-9]+)\))?$")


def _channel(spec: dict, path: str) -> channels.NeighborhoodChannel:
    if "preset" in spec:
        name, arg = _PRESET_RE.match(spec["preset"]).groups()
        p = float(arg) if arg is not None else spec.get("p")
        if name == "mixed":
            if p is None:
                raise ConfigError(path + ".preset", "mixed needs p, as mixed(p) or a p field")
            if not 0 <= p <= 1:
                raise ConfigError(path + ".preset", f"p must lie in [0, 1], got {p}")
            return channels.mixed_rule(p)
        if p is not None:
            raise ConfigError(path + ".p", f"{name} takes no parameter")
        return channels.rule110_channel() if name == "rule110" else channels.rule108()
    effects = {}
    for key, mats in spec["effects"].items():
        effects[(int(key[0]), int(key[1]))] = [
            np.array([[_complex(x) for x in row] for row in m]) for m in mats]
    pre = _rule(spec["pre_unitary"], path + ".pre_unitary") if "pre_unitary" in spec else None
    try:
        return channels.NeighborhoodChannel(effects, pre, name="explicit")
    except ValueError as exc:
        raise ConfigError(path + ".effects", str(exc)) from None


def resolve_preset(name: str):
    """Any documented preset name: rules, sequences (as builders) or channels."""
    if name in rules.PRESETS:
        return rules.PRESETS[name]
    if name in sequences.PROGRAMS:
        return sequences.PROGRAMS[name]
    m = _PRESET_RE.match(name)
    if m:
        return _channel({"preset": name}, "preset")
    raise KeyError(f"unknown preset {name!r}")


@dataclass
class Run:
    label: str
    n: int
    bc: rules.BoundaryConditions
    engine: str
    g: float
    kind: str  # rule | channel | sequence
    program: Any
    initial: State
    steps: int


def _initial(spec, n: int, seq: Optional[sequences.SequenceProgram], path: str) -> PureState:
    if spec is None:
        if seq is not None:
            return seq.initial_state()
        return init_product(n, [KET0] * n)
    if isinstance(spec, str):
        if len(spec) != n:
            raise ConfigError(path, f"{len(spec)} site tokens for n={n}")
        return from_tokens(spec)
    site = spec.get("seed_site", seq.seed_site if seq is not None else None)
    if site is None:
        raise ConfigError(path + ".seed_site", "required when the program has no default seed site")
    if site >= n:
        raise ConfigError(path + ".seed_site", f"site {site} out of range for n={n}")
    raw = spec.get("seed_state", "+")
    if isinstance(raw, str):
        vec = _TOKENS[raw]
    else:
        vec = np.array([_complex(x) for x in raw])
        norm = np.linalg.norm(vec)
        if abs(norm - 1) > 1e-10:
            raise ConfigError(path + ".seed_state", f"amplitudes have norm {norm:.6g}, not 1")
    sites = [KET0] * n
    sites[site] = vec
    return init_product(n, sites)


def build_runs(cfg: dict) -> List[Run]:
    """Resolve every run up front, so a bad config never produces partial output."""
    n = cfg["n"]
    if n % 2:
        raise ConfigError("n", f"BQCA needs an even number of sites, got {n}")
    bc = _boundary(cfg)
    engine = cfg.get("engine", "pure")
    g = float(cfg.get("g", 1.0))
    outputs = cfg.get("outputs", ["p1-diagram", "entropy-diagram"])
    if engine == "density":
        if n > channels.MAX_DENSITY_N:
            raise ConfigError("n", f"density engine is capped at n={channels.MAX_DENSITY_N}")
        for k in PURE_ONLY:
            if k in outputs:
                raise ConfigError("outputs", f"{k} needs the pure engine")
    overrides = cfg.get("runs") or [{"label": cfg["name"]}]
    labels = [r["label"] for r in overrides]
    if len(set(labels)) != len(labels):
        raise ConfigError("runs", "run labels must be distinct")
    out = []
    for i, ov in enumerate(overrides):
        base = f"runs[{i}]." if "runs" in cfg else ""
        prog_path = base + "program" if "program" in ov else "program"
        prog = ov.get("program", cfg["program"])
        kind = next(iter(prog))
        seq = None
        if kind == "rule":
            obj = _rule(prog["rule"], prog_path + ".rule")
        elif kind == "channel":
            if engine != "density":
                raise ConfigError(prog_path + ".channel", "channel programs need engine: density")
            obj = _channel(prog["channel"], prog_path + ".channel")
        else:
            name = prog["sequence"]["preset"]
            try:
                seq = sequences.PROGRAMS[name](n, g=g)
            except ValueError as exc:
                raise ConfigError(prog_path + ".sequence", str(exc)) from None
            seq.bc = bc
            obj = seq
        if "schedule" in outputs and kind == "channel":
            raise ConfigError("outputs", "channels have no pulse schedule")
        init_path = base + "initial" if "initial" in ov else "initial"
        init = _initial(ov.get("initial", cfg.get("initial")), n, seq, init_path)
        steps_path = base + "steps" if "steps" in ov else "steps"
        steps = ov.get("steps", cfg.get("steps"))
        if kind == "sequence":
            steps = len(seq.steps) if steps is None else steps
            if steps > len(seq.steps):
                raise ConfigError(steps_path, f"{name} for n={n} has only {len(seq.steps)} steps")
        elif steps is None:
            raise ConfigError(steps_path, "required for rule and channel programs")
        out.append(Run(ov["label"], n, bc, engine, g, kind, obj, init, steps))
    return out


# -- execution ----------------------------------------------------------------


def trajectory(run: Run) -> List[State]:
    state: State = run.initial
    if run.engine == "density":
        state = state.to_density()
    if run.kind == "rule":
        return rules.evolve(state, run.program, run.bc, run.steps)
    if run.kind == "channel":
        return channels.channel_evolve(state, run.program, run.bc, run.steps)
    prog = run.program
    history = [state]
    for st in prog.steps[:run.steps]:
        state = sequences.apply_step(state, st, run.bc)
        history.append(state)
    return history


def schedule_for(run: Run) -> pulses.PulseSchedule:
    if run.kind == "sequence":
        prog = run.program
        if run.steps == len(prog.steps):
            return prog.schedule
        part = sequences.SequenceProgram(prog.name, prog.n, prog.steps[:run.steps], bc=run.bc, g=run.g)
        return part.schedule
    sched = pulses.PulseSchedule([], run.g, run.bc)
    step_sched = pulses.compile_step(run.program, run.g, run.bc)
    for _ in range(run.steps):
        sched = sched + step_sched
    return sched


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_diagram_csv(matrix: np.ndarray, path: Path) -> None:
    T, n = matrix.shape
    lines = [",".join(str(j) for j in range(n))]
    lines += [",".join(_fmt(v) for v in row) for row in matrix]
    path.write_text("\n".join(lines) + "\n")


def read_diagram_csv(path: Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_diagram_pgm(matrix: np.ndarray, path: Path) -> None:
    """Plain P2, time downward; black (0) is value 1."""
    T, n = matrix.shape
    pix = 255 - np.rint(255 * np.clip(matrix, 0, 1)).astype(int)
    lines = ["P2", f"{n} {T}", "255"] + [" ".join(str(p) for p in row) for row in pix]
    path.write_text("\n".join(lines) + "\n")


def emit_diagram(diagram: metrics.SpaceTimeDiagram, fmt: str, path, which: str = "p1") -> Path:
    path = Path(path)
    matrix = diagram.p1 if which == "p1" else diagram.entropy
    if fmt == "csv":
        write_diagram_csv(matrix, path)
    elif fmt == "pgm":
        write_diagram_pgm(matrix, path)
    else:
        raise ValueError(f"unknown diagram format {fmt!r}")
    return path


def write_series(values, path: Path) -> None:
    lines = ["step,value"] + [f"{t},{_fmt(v)}" for t, v in enumerate(values)]
    path.write_text("\n".join(lines) + "\n")


def write_histogram(states, path: Path) -> None:
    n = states[0].n
    max_rank = 2 ** (n // 2)
    lines = ["step," + ",".join(f"rank{r}" for r in range(1, max_rank + 1))]
    for t, s in enumerate(states):
        h = metrics.schmidt_rank_histogram(s)
        lines.append(f"{t}," + ",".join(str(h.get(r, 0)) for r in range(1, max_rank + 1)))
    path.write_text("\n".join(lines) + "\n")


def execute(run: Run, outputs, formats, outdir: Path) -> List[Path]:
    written = []
    states = trajectory(run)
    stem = outdir / run.label
    if "p1-diagram" in outputs or "entropy-diagram" in outputs:
        diagram = metrics.space_time(states)
        for kind, which in (("p1-diagram", "p1"), ("entropy-diagram", "entropy")):
            if kind in outputs:
                for fmt in formats:
                    written.append(emit_diagram(diagram, fmt, f"{stem}.{which}.{fmt}", which))
    series = {
        "R-series": ("R", metrics.measure_R),
        "mixedness-series": ("mixedness", metrics.mixedness),
        "tangle-series": ("tangle", metrics.average_tangle),
    }
    for kind, (suffix, fn) in series.items():
        if kind in outputs:
            p = Path(f"{stem}.{suffix}.csv")
            write_series([fn(s) for s in states], p)
            written.append(p)
    if "schmidt-histogram" in outputs:
        p = Path(f"{stem}.schmidt.csv")
        write_histogram(states, p)
        written.append(p)
    if "schedule" in outputs:
        p = Path(f"{stem}.schedule.json")
        p.write_text(schedule_for(run).to_json() + "\n")
        written.append(p)
    return written


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _versions() -> Dict[str, str]:
    from importlib.metadata import PackageNotFoundError, version
    out = {"python": platform.python_version(), "numpy": np.__version__}
    for pkg in ("artifact", "jsonschema", "pyyaml"):
        try:
            out[pkg] = version(pkg)
        except PackageNotFoundError:
            out[pkg] = "unknown"
    return out


def run(config, out: Union[str, Path] = "results", emit_schedule: bool = False) -> List[Path]:
    """Validate, execute every run and write outputs plus ``manifest.json``.

    Outputs go to ``out/<name>/``.  Everything except the manifest (which
    records wall time) is bit-identical across reruns.
    """
    cfg = load_config(config)
    runs = build_runs(cfg)
    outputs = list(cfg.get("outputs", ["p1-diagram", "entropy-diagram"]))
    if emit_schedule and "schedule" not in outputs:
        outputs.append("schedule")
    formats = cfg.get("formats", ["csv", "pgm"])
    outdir = Path(out) / cfg["name"]
    t0 = time.perf_counter()
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc.strerror}") from None
    written = []
    for r in runs:
        # --emit-schedule applies where a pulse schedule exists
        wanted = [o for o in outputs if not (o == "schedule" and r.kind == "channel")]
        written += execute(r, wanted, formats, outdir)
    manifest = {
        "name": cfg["name"],
        "config_sha256": config_hash(cfg),
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - t0,
        "files": sorted(p.name for p in written),
    }
    mpath = outdir / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2) + "\n")
    return written + [mpath]


def figure_config_text(name: str) -> str:
    return resources.files("bqca").joinpath(f"configs/{name}.yaml").read_text()


def seed_figures(dest: Union[str, Path]) -> List[Path]:
    """Copy the bundled figure configs into ``dest``."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    out = []
    for name in FIGURES:
        p = dest / f"{name}.yaml"
        p.write_text(figure_config_text(name))
        out.append(p)
    return out
