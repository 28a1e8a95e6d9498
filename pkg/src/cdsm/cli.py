"""Command-line driver: ``cdsm explore | build | evaluate | fourrooms``.

Exit codes: 0 success, 2 configuration or parse error, 3 numerical failure,
4 degenerate result.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import evaluate as ev
from .errors import ConvergenceFailure, StreamFormatError, UnknownObservation
from .formats import MODEL_NAME, STREAM_NAME, read_model, read_stream, write_model
from .gridworld import ENVIRONMENTS, run_exploration
from .hierarchy import LevelSpec, build_hierarchy

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_DEGENERATE = 0, 2, 3, 4
DEFAULT_STEPS = 2_000_000
FOUR_ROOMS_STEPS = 100_000
DEFAULT_LEVELS = tuple(range(20, 1, -2))


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    env: str = "sy_rooms"
    steps: int = DEFAULT_STEPS
    seed: int = 0
    levels: list[int] = field(default_factory=lambda: list(DEFAULT_LEVELS))
    embed_dim: list[int] | int = 3
    collapse: bool = True
    out: str = "out"
    steps_per_room: int = ev.DEFAULT_STEPS_PER_ROOM

    def validate(self) -> "PipelineConfig":
        if self.env not in ENVIRONMENTS:
            raise ConfigError(f"unknown environment {self.env!r}; expected one of {', '.join(ENVIRONMENTS)}")
        for name in ("steps", "steps_per_room"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not self.levels:
            raise ConfigError("levels must list at least one cluster count")
        if any(not isinstance(n, int) or n < 2 for n in self.levels):
            raise ConfigError(f"every cluster count must be an integer >= 2, got {self.levels}")
        if any(a <= b for a, b in zip(self.levels, self.levels[1:])):
            raise ConfigError(f"cluster counts must strictly decrease, got {self.levels}")
        dims = self.embed_dims
        if len(dims) != len(self.levels):
            raise ConfigError(f"{len(dims)} embedding dimensions given for {len(self.levels)} levels")
        if any(not isinstance(k, int) or k < 1 for k in dims):
            raise ConfigError(f"embedding dimensions must be integers >= 1, got {dims}")
        return self

    @property
    def embed_dims(self) -> list[int]:
        if isinstance(self.embed_dim, int):
            return [self.embed_dim] * len(self.levels)
        return list(self.embed_dim)

    def specs(self) -> list[LevelSpec]:
        return [LevelSpec(n, k) for n, k in zip(self.levels, self.embed_dims)]


_FILE_KEYS = {"env", "steps", "seed", "levels", "embed_dim", "collapse", "out", "steps_per_room"}


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from None


def load_config(args: argparse.Namespace, default_steps: int = DEFAULT_STEPS) -> PipelineConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    values: dict = {"steps": default_steps}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - _FILE_KEYS - {"no_collapse"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "no_collapse" in data:
            data["collapse"] = not data.pop("no_collapse")
        if isinstance(data.get("levels"), str):
            data["levels"] = _parse_int_list(data["levels"])
        values.update(data)
    for key in ("env", "steps", "seed", "out", "steps_per_room"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "levels", None) is not None:
        values["levels"] = _parse_int_list(args.levels)
    if getattr(args, "embed_dim", None) is not None:
        dims = _parse_int_list(args.embed_dim)
        values["embed_dim"] = dims[0] if len(dims) == 1 else dims
    if getattr(args, "no_collapse", False):
        values["collapse"] = False
    cfg = PipelineConfig(**values)
    if isinstance(cfg.levels, tuple):
        cfg.levels = list(cfg.levels)
    return cfg.validate()


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_explore(cfg: PipelineConfig, args) -> int:
    path = _out_dir(cfg) / STREAM_NAME
    exp = run_exploration(cfg.env, cfg.steps, cfg.seed, path)
    print(f"wrote {path}: {exp.steps} steps, {len(exp.alphabet)} distinct observations")
    return EXIT_OK


def _spectrum(lam) -> str:
    return " ".join(f"{x:.4f}" for x in lam)


def cmd_build(cfg: PipelineConfig, args) -> int:
    stream_path = Path(args.stream) if args.stream else Path(cfg.out) / STREAM_NAME
    exp = read_stream(stream_path)
    try:
        model = build_hierarchy(exp.symbols, cfg.specs(), seed=cfg.seed, alphabet=exp.alphabet,
                                collapse=cfg.collapse)
    except ConvergenceFailure as exc:
        print(f"error: eigensolve failed at {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for ell, lv in enumerate(model.levels):
        print(f"level {ell}: {lv.n_pairs} unique transitions, {lv.n_clusters} clusters, "
              f"top eigenvalues {_spectrum(lv.embedding.eigenvalues)}")
    if model.stop_level is not None:
        print(f"stopped early at level {model.stop_level}: {model.stop_reason}")
    path = write_model(model, _out_dir(cfg) / MODEL_NAME, env=exp.env,
                       include_embeddings=not args.omit_embeddings)
    print(f"wrote {path}: {model.depth} levels")
    return EXIT_OK


def cmd_evaluate(cfg: PipelineConfig, args) -> int:
    model_path = Path(args.model) if args.model else Path(cfg.out) / MODEL_NAME
    model, env = read_model(model_path)
    if env and env != "sy_rooms":
        raise ConfigError(f"evaluation needs a model built on sy_rooms, not {env}")
    out = _out_dir(cfg)
    tests = ev.run_test_rooms(model, cfg.seed, cfg.steps_per_room)
    ev.export_all(model, tests, out / "heatmaps")
    report = ev.separation_report(tests, shuffle_seed=cfg.seed)
    report.extra["steps_per_room"] = cfg.steps_per_room
    report.extra["seed"] = cfg.seed
    path = report.to_json(out / "report.json")
    for u in report.units:
        print(f"unit {u.unit}: S {u.s_share:.3f}  Y {u.y_share:.3f}  corridor {u.corridor_share:.3f}  -> {u.room_type}")
    if report.accuracy is None:
        print(f"error: {report.error} (report written to {path})", file=sys.stderr)
        return EXIT_DEGENERATE
    print(f"accuracy {report.accuracy:.4f} (shuffled control {report.shuffle_accuracy:.4f})")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_fourrooms(cfg: PipelineConfig, args) -> int:
    out = _out_dir(cfg)
    res = ev.four_rooms_experiment(args.mode, cfg.steps, cfg.seed)
    emb_path = out / f"fourrooms_{args.mode}_embedding.csv"
    res.embedding.write_csv(emb_path)
    cl_path = out / f"fourrooms_{args.mode}_clusters.csv"
    res.clusters.write_csv(cl_path, ids=res.embedding.included)
    print(f"{len(res.embedding.included)} embedded points, eigenvalues {_spectrum(res.embedding.eigenvalues)}")
    print(f"room purity over non-doorway cells {res.purity:.4f}")
    print(f"wrote {emb_path} and {cl_path}")
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--env", choices=ENVIRONMENTS)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="flat JSON file; flags override its values")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--levels", help="comma list of cluster counts, e.g. 20,18,16")
    p.add_argument("--embed-dim", dest="embed_dim", help="one dimension, or a comma list per level")
    p.add_argument("--no-collapse", dest="no_collapse", action="store_true",
                   help="keep repeated cluster ids between levels")
    p.add_argument("--steps-per-room", dest="steps_per_room", type=int)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdsm", description="Context discovery pipeline with a four-room demo.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("explore", help="simulate an exploration run and write a stream file")
    _common(p)
    p = sub.add_parser("build", help="build a hierarchical model from a stream file")
    _common(p)
    p.add_argument("stream", nargs="?", help=f"stream file (default: <out>/{STREAM_NAME})")
    p.add_argument("--omit-embeddings", action="store_true", help="leave spectral coordinates out of the model file")
    p = sub.add_parser("evaluate", help="decode test rooms, write heat-maps and a separation report")
    _common(p)
    p.add_argument("model", nargs="?", help=f"model file (default: <out>/{MODEL_NAME})")
    p = sub.add_parser("fourrooms", help="spectral embedding and clustering of the four-room world")
    _common(p)
    p.add_argument("mode", choices=("full", "partial"))
    return parser


_COMMANDS = {"explore": cmd_explore, "build": cmd_build, "evaluate": cmd_evaluate,
             "fourrooms": cmd_fourrooms}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    default_steps = FOUR_ROOMS_STEPS if args.command == "fourrooms" else DEFAULT_STEPS
    try:
        cfg = load_config(args, default_steps)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StreamFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnknownObservation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
