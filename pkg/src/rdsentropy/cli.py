"""Command-line experiment runner.

Subcommands: list-systems | estimate-top | estimate-fiber | varprin | audit.

A run is fully determined by (config, seed): tables are assembled in fixed
key order and floats are serialized with repr, so two runs with the same
inputs produce byte-identical CSV regardless of --workers.

Config files are flat ``key = value`` text; '#' starts a comment. Keys:

    system          = random-expansion
    param.<name>    = <value>          (system parameter, repeatable)
    n               = 2,3,4,5          (window sizes)
    eps             = 0.25,0.0625      (scales, decreasing)
    omega_samples   = 100
    seed            = 42
    method          = greedy | exact
    partitions      = half,trivial     (estimate-fiber / varprin)
    out             = table.csv
    workers         = 1

Command-line flags override file values. Exit codes: 0 success, 1 config
error, 2 resource-cap error, 3 property failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .entropy import (
    CSV_HEADER,
    EntropyTable,
    estimate_h_fiber,
    estimate_h_top,
    variational_report,
)
from .errors import ConfigError, ResourceCapError
from .systems import (
    make_full_shift,
    make_random_expansion,
    make_toral_automorphism,
    oracle_entropy,
)
from .validation import (
    check_epsilons,
    check_method,
    check_omega_samples,
    check_seed,
    check_window_sizes,
    check_workers,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RESOURCE = 2
EXIT_PROPERTY = 3


def _build_full_shift(params):
    return make_full_shift(
        k=int(params.pop("k", 2)),
        m=int(params.pop("m", 1)),
        n_max=int(params.pop("n_max", 8)),
    )


def _parse_multiplier_law(params):
    multipliers = [int(v) for v in str(params.pop("multipliers", "2")).split(",")]
    weights_raw = params.pop("weights", None)
    if weights_raw is None:
        weights = [1] * len(multipliers)
    else:
        weights = [int(v) for v in str(weights_raw).split(",")]
    if len(weights) != len(multipliers):
        raise ConfigError("param weights must match param multipliers in length")
    return list(zip(multipliers, weights))


def _build_random_expansion(params):
    law = _parse_multiplier_law(params)
    return make_random_expansion(law, int(params.pop("grid_exponent", 16)))


def _build_doubling(params):
    params.setdefault("multipliers", "2")
    return _build_random_expansion(params)


def _build_toral(params):
    flat = [int(v) for v in str(params.pop("matrix", "2,1,1,1")).split(",")]
    if len(flat) != 4:
        raise ConfigError("param matrix must be four comma-separated integers a,b,c,d")
    matrix = [[flat[0], flat[1]], [flat[2], flat[3]]]
    return make_toral_automorphism(matrix, int(params.pop("grid_exponent", 8)))


SYSTEM_BUILDERS = {
    "full-shift": (_build_full_shift, "k, m, n_max"),
    "random-expansion": (_build_random_expansion, "multipliers, weights, grid_exponent"),
    "doubling": (_build_doubling, "grid_exponent"),
    "toral-automorphism": (_build_toral, "matrix (a,b,c,d), grid_exponent"),
}


def build_system(name: str, params: dict):
    if name not in SYSTEM_BUILDERS:
        known = ", ".join(sorted(SYSTEM_BUILDERS))
        raise ConfigError(f"unknown system {name!r}; known systems: {known}")
    builder, _ = SYSTEM_BUILDERS[name]
    params = dict(params)
    system = builder(params)
    if params:
        raise ConfigError(f"unknown parameters for system {name!r}: {sorted(params)}")
    return system


def load_config_file(path: str) -> dict:
    values: dict[str, str] = {}
    params: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("param."):
            params[key[len("param."):]] = value
        else:
            values[key] = value
    if params:
        values["_params"] = params
    return values


def _merge_config(args) -> dict:
    cfg: dict = {"_params": {}}
    if args.config:
        file_cfg = load_config_file(args.config)
        cfg.update({k: v for k, v in file_cfg.items() if k != "_params"})
        cfg["_params"].update(file_cfg.get("_params", {}))
    if getattr(args, "system", None):
        cfg["system"] = args.system
    for raw in getattr(args, "param", None) or []:
        if "=" not in raw:
            raise ConfigError(f"--param expects key=value, got {raw!r}")
        key, value = raw.split("=", 1)
        cfg["_params"][key.strip()] = value.strip()
    if getattr(args, "n", None):
        cfg["n"] = ",".join(str(v) for v in args.n)
    if getattr(args, "eps", None):
        cfg["eps"] = ",".join(repr(v) for v in args.eps)
    for flag in ("omega_samples", "seed", "method", "out", "partitions", "workers"):
        value = getattr(args, flag, None)
        if value is not None:
            cfg[flag] = str(value)
    return cfg


def _require_key(cfg: dict, key: str) -> str:
    if key not in cfg:
        raise ConfigError(f"missing required config key {key!r}")
    return cfg[key]


def _estimation_inputs(cfg: dict, need_eps: bool = True):
    system = build_system(_require_key(cfg, "system"), cfg.get("_params", {}))
    n_list = check_window_sizes(_require_key(cfg, "n").split(","))
    eps_list = None
    if need_eps:
        eps_list = check_epsilons(_require_key(cfg, "eps").split(","), system.resolution)
    omega_samples = check_omega_samples(cfg.get("omega_samples", "1"))
    seed = check_seed(cfg.get("seed", "0"))
    method = check_method(cfg.get("method", "greedy"))
    workers = check_workers(cfg.get("workers", "1"))
    return system, n_list, eps_list, omega_samples, seed, method, workers


def _write_table(table: EntropyTable, out: str | None) -> None:
    text = table.to_csv()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_list_systems(args) -> int:
    for name, (_, params) in sorted(SYSTEM_BUILDERS.items()):
        defaults = build_system(name, {})
        value, note = oracle_entropy(defaults)
        print(f"{name:20s} params: {params:40s} oracle: {value:.6f} nats ({note})")
    return EXIT_OK


def cmd_estimate_top(args) -> int:
    cfg = _merge_config(args)
    system, n_list, eps_list, omega_samples, seed, method, workers = _estimation_inputs(cfg)
    estimate, table = estimate_h_top(
        system, n_list, eps_list, omega_samples, seed, method, workers=workers
    )
    _write_table(table, cfg.get("out"))
    print(
        f"h_top estimate: {estimate.value!r} nats "
        f"(ci {estimate.ci_halfwidth!r}, eps {estimate.epsilon_used!r}, "
        f"extrapolation {estimate.extrapolation}, fit n {list(estimate.fit_window_sizes)})"
    )
    return EXIT_OK


def cmd_estimate_fiber(args) -> int:
    cfg = _merge_config(args)
    system, n_list, _, omega_samples, seed, _, workers = _estimation_inputs(cfg, need_eps=False)
    names = [s for s in cfg.get("partitions", "").split(",") if s]
    partitions = [system.partition(n) for n in names] if names else list(system.canonical_partitions())
    rows = []
    for part in partitions:
        _, table = estimate_h_fiber(system, part, n_list, omega_samples, seed, workers=workers)
        rows.extend(table.rows)
    _write_table(EntropyTable(tuple(rows)), cfg.get("out"))
    return EXIT_OK


def cmd_varprin(args) -> int:
    cfg = _merge_config(args)
    system, n_list, eps_list, omega_samples, seed, method, workers = _estimation_inputs(cfg)
    names = [s for s in cfg.get("partitions", "").split(",") if s]
    partitions = [system.partition(n) for n in names] if names else None
    report = variational_report(
        system, n_list, eps_list, omega_samples, seed, method, partitions, workers=workers
    )
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_PROPERTY


def cmd_audit(args) -> int:
    from .audit import run_audit

    ok = run_audit(seed=check_seed(args.seed), stream=sys.stdout)
    return EXIT_OK if ok else EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdsentropy",
        description="Entropy experiments on random dynamical systems over amenable groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list-systems", help="print the model system zoo with oracle values")

    def common(p, eps=True):
        p.add_argument("--system", help="system name (see list-systems)")
        p.add_argument("--param", action="append", metavar="KEY=VALUE",
                       help="system parameter (repeatable)")
        p.add_argument("--n", action="append", type=int, metavar="N",
                       help="window size (repeatable, increasing)")
        if eps:
            p.add_argument("--eps", action="append", type=float, metavar="EPS",
                           help="separation scale (repeatable, decreasing)")
        p.add_argument("--omega-samples", dest="omega_samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--method", choices=("exact", "greedy"))
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--partitions", help="comma-separated canonical partition names")
        p.add_argument("--workers", type=int)
        p.add_argument("--config", help="flat key = value config file")

    p_top = sub.add_parser("estimate-top", help="separated-set entropy over an (n, eps) grid")
    common(p_top)
    p_fiber = sub.add_parser("estimate-fiber", help="partition entropy rates per (partition, n)")
    common(p_fiber, eps=False)
    p_var = sub.add_parser("varprin", help="variational audit: fiber entropy vs topological entropy")
    common(p_var)
    p_audit = sub.add_parser("audit", help="run every invariant suite")
    p_audit.add_argument("--seed", type=int, default=0)
    return parser


COMMANDS = {
    "list-systems": cmd_list_systems,
    "estimate-top": cmd_estimate_top,
    "estimate-fiber": cmd_estimate_fiber,
    "varprin": cmd_varprin,
    "audit": cmd_audit,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
