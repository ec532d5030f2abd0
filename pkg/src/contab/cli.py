"""Command-line entry points.

Subcommands: prove, loop, harvest, analyze, check, make-vector.  Every
flag has a default; a key=value config file can override defaults, and
explicit flags override the file.  All outputs land under --out next to
a manifest listing the resolved configuration, and per-problem seeds
derive from the global seed and the problem name alone, so the worker
count never changes any result.
"""

from __future__ import annotations

import argparse
import glob as globmod
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import __version__
from .analysis import (AGREEMENT_COLUMNS, agreement_rows, compare, harvest_states,
                       load_bank, report_csv, save_bank)
from .clausify import ClausifyError, clausify
from .corpus import corpus_dir
from .learn import (LoopConfig, TrainConfig, prove_problems, run_loop,
                    write_stats_csv)
from .policy import (FixedEntropyPredictor, LinearPredictor, Predictor,
                     UniformPredictor, load_model, make_fixed_entropy_vector,
                     apply_order_preserving)
from .search import SearchLimits, format_result_line
from .tableau import Engine, read_trace, write_trace
from .tptp import ParseError, parse_problem_file

CORPUS_ENV = "CONTAB_CORPUS_DIR"

# key -> (default, converter); the converter also parses config-file strings
_COMMON = {
    "inference_limit": (20000, int),
    "bigstep_frequency": (200, int),
    "cp": (1.0, float),
    "wall_clock": (300.0, float),
    "path_limit": (100, int),
    "no_paramodulation": (False, None),
    "seed": (0, int),
    "workers": (os.cpu_count() or 1, int),
    "out": ("contab-out", str),
    "corpus": (None, str),
    "temperature": (None, float),
}
_PREDICTOR = {
    "predictor": ("uniform", str),
    "policy_model": (None, str),
    "value_model": (None, str),
    "hstar": (0.8, float),
    "entropy_seed": (0, int),
}
_LOOP = {
    "iterations": (3, int),
    "alpha": (0.7, float),
    "alpha_sweep": (None, str),
    "learning_rate": (0.1, float),
    "epochs": (10, int),
    "batch_size": (8, int),
    "resume": (False, None),
}


def _read_config_file(path: str) -> Dict[str, str]:
    cfg: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise ValueError(f"{path}: expected key=value, got {ln!r}")
            key, _, val = ln.partition("=")
            cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


class Config:
    """Resolved configuration: flags beat the config file, the config
    file beats defaults."""

    def __init__(self, args: argparse.Namespace, defaults: Dict[str, Tuple]):
        file_cfg = _read_config_file(args.config) if getattr(args, "config", None) else {}
        self._values: Dict[str, object] = {}
        for key, (default, conv) in defaults.items():
            val = getattr(args, key, None)
            if val is None and key in file_cfg:
                raw = file_cfg[key]
                if conv is None:
                    val = raw.lower() in ("1", "true", "yes", "on")
                else:
                    val = conv(raw)
            if val is None:
                val = default
            self._values[key] = val

    def __getattr__(self, key):
        try:
            return self._values[key]
        except KeyError:
            raise AttributeError(key) from None

    def items(self):
        return sorted(self._values.items())


def _limits(cfg: Config) -> SearchLimits:
    return SearchLimits(inference_limit=cfg.inference_limit,
                        bigstep_frequency=cfg.bigstep_frequency,
                        cp=cfg.cp, wall_clock=cfg.wall_clock)


def _problem_paths(cfg: Config, positional: List[str]) -> List[Path]:
    if positional:
        paths: List[Path] = []
        for p in positional:
            path = Path(p)
            if path.is_dir():
                paths.extend(sorted(path.glob("*.p")))
            elif path.exists():
                paths.append(path)
            else:
                matched = sorted(Path(q) for q in globmod.glob(p))
                if not matched:
                    raise FileNotFoundError(f"no problem matches {p!r}")
                paths.extend(matched)
        return paths
    base = cfg.corpus or os.environ.get(CORPUS_ENV) or str(corpus_dir())
    paths = sorted(Path(base).glob("*.p"))
    if not paths:
        raise FileNotFoundError(f"no *.p problems under {base!r}")
    return paths


def _build_engines(paths: List[Path], cfg: Config) -> Tuple[List[Tuple[str, Engine]], List[Tuple[str, str]]]:
    """Returns (name, engine) pairs plus (name, error) records for the
    problems that failed to parse or clausify."""
    engines: List[Tuple[str, Engine]] = []
    errors: List[Tuple[str, str]] = []
    seen = set()
    for path in paths:
        name = path.stem
        if name in seen:
            raise ValueError(f"duplicate problem name {name!r}; names must be unique")
        seen.add(name)
        try:
            matrix = clausify(parse_problem_file(path))
        except (ParseError, ClausifyError, OSError) as e:
            errors.append((name, str(e)))
            continue
        engines.append((name, Engine(matrix, path_limit=cfg.path_limit,
                                     paramodulation=not cfg.no_paramodulation)))
    return engines, errors


def _build_predictor(kind: str, policy_model: Optional[str], value_model: Optional[str],
                     temperature: Optional[float], hstar: float,
                     entropy_seed: int) -> Predictor:
    model_temp = None
    pw = vw = None
    if policy_model:
        mkind, pw, model_temp, _ = load_model(policy_model)
        if mkind != "policy":
            raise ValueError(f"{policy_model}: expected a policy model, found {mkind}")
    if value_model:
        mkind, vw, _, _ = load_model(value_model)
        if mkind != "value":
            raise ValueError(f"{value_model}: expected a value model, found {mkind}")
    temp = temperature if temperature is not None else (model_temp if model_temp is not None else 1.0)
    if kind == "uniform":
        return UniformPredictor(temperature=temp)
    if kind == "linear":
        return LinearPredictor(pw, vw, temperature=temp)
    if kind == "fixed-entropy":
        base: Predictor = (LinearPredictor(pw, vw, temperature=temp)
                           if pw is not None or vw is not None
                           else UniformPredictor(temperature=temp))
        return FixedEntropyPredictor(base, hstar, entropy_seed)
    raise ValueError(f"unknown predictor kind {kind!r}")


def parse_predictor_spec(spec: str) -> Predictor:
    """Builds a predictor from a compact spec: a kind followed by
    colon-separated key=value options, e.g.
    ``linear:policy=run/policy.model:value=run/value.model:temperature=2``
    or ``fixed-entropy:hstar=0.8:seed=7:policy=run/policy.model``."""
    parts = spec.split(":")
    kind = parts[0]
    opts: Dict[str, str] = {}
    for part in parts[1:]:
        if "=" not in part:
            raise ValueError(f"bad predictor option {part!r} in {spec!r}")
        k, _, v = part.partition("=")
        opts[k] = v
    known = {"policy", "value", "temperature", "hstar", "seed"}
    unknown = set(opts) - known
    if unknown:
        raise ValueError(f"unknown predictor options {sorted(unknown)} in {spec!r}")
    return _build_predictor(
        kind, opts.get("policy"), opts.get("value"),
        float(opts["temperature"]) if "temperature" in opts else None,
        float(opts.get("hstar", 0.8)), int(opts.get("seed", 0)))


def _write_manifest(out: Path, command: str, cfg: Config) -> None:
    with open(out / "manifest.txt", "w", encoding="utf-8") as fh:
        fh.write(f"contab {__version__}\n")
        fh.write(f"command {command}\n")
        for key, val in cfg.items():
            fh.write(f"{key}={val}\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_prove(args) -> int:
    cfg = Config(args, {**_COMMON, **_PREDICTOR})
    try:
        paths = _problem_paths(cfg, args.problems)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    engines, errors = _build_engines(paths, cfg)
    predictor = _build_predictor(cfg.predictor, cfg.policy_model, cfg.value_model,
                                 cfg.temperature, cfg.hstar, cfg.entropy_seed)
    out = Path(cfg.out)
    traces = out / "traces"
    traces.mkdir(parents=True, exist_ok=True)
    pairs = prove_problems(engines, predictor, _limits(cfg), cfg.seed,
                           workers=cfg.workers)
    solved = 0
    with open(out / "results.txt", "w", encoding="utf-8") as fh:
        for name, err in errors:
            fh.write(f"problem={name} status=error detail={err!r}\n")
        for (name, _), (result, _) in zip(engines, pairs):
            trace_ref = "-"
            if result.solved:
                solved += 1
                trace_ref = f"traces/{name}.trace"
                write_trace(traces / f"{name}.trace", name, result.proof)
            fh.write(format_result_line(result, trace_ref) + "\n")
    _write_manifest(out, "prove", cfg)
    print(f"prove: {solved}/{len(engines)} solved "
          f"({len(errors)} errors), results in {out}")
    return 0


def cmd_loop(args) -> int:
    cfg = Config(args, {**_COMMON, **_LOOP})
    try:
        paths = _problem_paths(cfg, args.problems)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    engines, errors = _build_engines(paths, cfg)
    for name, err in errors:
        print(f"warning: skipping {name}: {err}", file=sys.stderr)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    alphas = ([float(a) for a in cfg.alpha_sweep.split(",")]
              if cfg.alpha_sweep else [cfg.alpha])
    temp = cfg.temperature if cfg.temperature is not None else 1.0
    sweep_rows = []
    for alpha in alphas:
        loop_cfg = LoopConfig(
            alpha=alpha, limits=_limits(cfg),
            train=TrainConfig(alpha=alpha, learning_rate=cfg.learning_rate,
                              epochs=cfg.epochs, batch_size=cfg.batch_size,
                              seed=cfg.seed),
            temperature=temp, seed=cfg.seed)
        sub = out / f"alpha_{alpha:g}" if len(alphas) > 1 else out
        result = run_loop(engines, cfg.iterations, loop_cfg, out_dir=str(sub),
                          resume=cfg.resume, workers=cfg.workers)
        for row in result.stats:
            sweep_rows.append([f"{alpha:g}"] + row.row())
    if len(alphas) > 1:
        report_csv(out / "sweep.csv",
                   ["alpha", "iteration", "solved", "mean_entropy",
                    "mean_normalized_entropy", "inferences_total"], sweep_rows)
    _write_manifest(out, "loop", cfg)
    print(f"loop: {len(alphas)} alpha value(s), {cfg.iterations + 1} iterations each, "
          f"outputs in {out}")
    return 0


def cmd_harvest(args) -> int:
    cfg = Config(args, _COMMON)
    try:
        paths = _problem_paths(cfg, args.problems)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    engines, errors = _build_engines(paths, cfg)
    for name, err in errors:
        print(f"warning: skipping {name}: {err}", file=sys.stderr)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    bank = harvest_states(engines, _limits(cfg))
    save_bank(out / "bank.txt", bank)
    _write_manifest(out, "harvest", cfg)
    print(f"harvest: {len(bank)} states from {len(engines)} problems into {out / 'bank.txt'}")
    return 0


def cmd_analyze(args) -> int:
    cfg = Config(args, _COMMON)
    bank_path = Path(args.bank)
    if not bank_path.exists():
        print(f"error: state bank {bank_path} not found; "
              f"run `contab harvest` first to create one", file=sys.stderr)
        return 2
    try:
        paths = _problem_paths(cfg, args.problems)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    engines, errors = _build_engines(paths, cfg)
    for name, err in errors:
        print(f"warning: skipping {name}: {err}", file=sys.stderr)
    bank = load_bank(bank_path)
    engine_map = dict(engines)
    missing = sorted({e.problem for e in bank.entries} - set(engine_map))
    if missing:
        print(f"error: bank references problems not in the problem set: {missing}",
              file=sys.stderr)
        return 2
    pred_a = parse_predictor_spec(args.predictor_a)
    pred_b = parse_predictor_spec(args.predictor_b)
    report = compare(pred_a, pred_b, bank, engine_map)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    label = args.label or f"{args.predictor_a} vs {args.predictor_b}"
    report_csv(out / "agreement.csv", AGREEMENT_COLUMNS,
               agreement_rows([(label, report)]))
    _write_manifest(out, "analyze", cfg)
    print(f"analyze: {report.states} states, best={report.best:.2f} "
          f"order={report.order:.2f} kl_ab={report.kl_ab:.2f} kl_ba={report.kl_ba:.2f}; "
          f"report in {out / 'agreement.csv'}")
    return 0


def cmd_check(args) -> int:
    try:
        matrix = clausify(parse_problem_file(args.problem))
        name, actions = read_trace(args.trace)
    except (ParseError, ClausifyError, ValueError, OSError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    engine = Engine(matrix, paramodulation=True)
    check = engine.check_proof(actions)
    if check:
        print(f"ok: {name}: {len(actions)} actions close the tableau")
        return 0
    print(f"invalid proof: {check.reason}", file=sys.stderr)
    return 1


def cmd_make_vector(args) -> int:
    vec = make_fixed_entropy_vector(args.length, args.hstar, args.seed)
    if args.reference:
        ref = [float(x) for x in args.reference.split(",")]
        if len(ref) != args.length:
            print(f"error: reference has {len(ref)} entries, expected {args.length}",
                  file=sys.stderr)
            return 2
        vec = apply_order_preserving(vec, ref)
    lines = "\n".join(repr(float(x)) for x in vec)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(lines + "\n")
    else:
        print(lines)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser, predictor: bool = False) -> None:
    p.add_argument("problems", nargs="*",
                   help="problem files, directories, or globs; defaults to the "
                        f"bundled corpus (override with --corpus or ${CORPUS_ENV})")
    p.add_argument("--corpus", help="directory of *.p problems used when no "
                                    "problems are listed")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--inference-limit", type=int, dest="inference_limit",
                   help="total action applications per problem (default 20000)")
    p.add_argument("--bigstep-frequency", type=int, dest="bigstep_frequency",
                   help="playouts between root advances (default 200)")
    p.add_argument("--cp", type=float, help="UCT exploration constant (default 1.0)")
    p.add_argument("--wall-clock", type=float, dest="wall_clock",
                   help="per-problem time limit in seconds (default 300)")
    p.add_argument("--path-limit", type=int, dest="path_limit",
                   help="maximum tableau depth (default 100)")
    p.add_argument("--no-paramodulation", action="store_const", const=True,
                   dest="no_paramodulation", help="disable equality rewriting steps")
    p.add_argument("--temperature", type=float, help="softmax temperature "
                                                     "(default: model file, else 1)")
    p.add_argument("--seed", type=int, help="global seed (default 0)")
    p.add_argument("--workers", type=int, help="parallel prover processes "
                                               "(default: CPU count)")
    p.add_argument("--out", help="output directory (default contab-out)")
    if predictor:
        p.add_argument("--predictor", choices=["uniform", "linear", "fixed-entropy"],
                       help="guidance mode (default uniform)")
        p.add_argument("--policy-model", dest="policy_model",
                       help="trained policy weights file")
        p.add_argument("--value-model", dest="value_model",
                       help="trained value weights file")
        p.add_argument("--hstar", type=float,
                       help="target normalized entropy for fixed-entropy mode "
                            "(default 0.8)")
        p.add_argument("--entropy-seed", type=int, dest="entropy_seed",
                       help="seed for fixed-entropy vectors (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contab",
        description="Connection tableau prover with MCTS guidance and "
                    "entropy-shaped predictors.")
    parser.add_argument("--version", action="version", version=f"contab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="prove problems with a configured predictor")
    _add_common(p, predictor=True)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("loop", help="alternate proving and training for several iterations")
    _add_common(p)
    p.add_argument("--iterations", type=int,
                   help="guided iterations after the unguided pass (default 3)")
    p.add_argument("--alpha", type=float, help="entropy coefficient (default 0.7)")
    p.add_argument("--alpha-sweep", dest="alpha_sweep",
                   help="comma-separated alphas; runs one loop per value")
    p.add_argument("--learning-rate", type=float, dest="learning_rate",
                   help="SGD step size (default 0.1)")
    p.add_argument("--epochs", type=int, help="training epochs per iteration (default 10)")
    p.add_argument("--batch-size", type=int, dest="batch_size",
                   help="SGD batch size (default 8)")
    p.add_argument("--resume", action="store_const", const=True,
                   help="continue after the last completed iteration in --out")
    p.set_defaults(func=cmd_loop)

    p = sub.add_parser("harvest", help="collect search states into a comparison bank")
    _add_common(p)
    p.set_defaults(func=cmd_harvest)

    p = sub.add_parser("analyze", help="compare two predictors over a state bank")
    _add_common(p)
    p.add_argument("--bank", required=True, help="state bank from `contab harvest`")
    p.add_argument("--predictor-a", required=True, dest="predictor_a",
                   help="predictor spec, e.g. uniform or "
                        "linear:policy=F:value=F:temperature=2")
    p.add_argument("--predictor-b", required=True, dest="predictor_b",
                   help="second predictor spec")
    p.add_argument("--label", help="row label in the report CSV")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check", help="replay a proof trace against a problem")
    p.add_argument("problem", help="TPTP problem file")
    p.add_argument("trace", help="proof trace file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("make-vector", help="emit a fixed normalized-entropy distribution")
    p.add_argument("--length", type=int, required=True, help="number of entries")
    p.add_argument("--hstar", type=float, required=True,
                   help="target normalized entropy in (0, 1]")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p.add_argument("--reference", help="comma-separated probabilities whose "
                                       "ordering the output must preserve")
    p.add_argument("--out", help="write the vector here instead of stdout")
    p.set_defaults(func=cmd_make_vector)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ClausifyError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
