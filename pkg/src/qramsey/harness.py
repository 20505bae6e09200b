"""Command line entry point, experiment configs and JSON run reports.

Every report has a ``payload`` section that depends only on the config; it
is serialized with sorted keys and rationals as ``"p/q"`` strings so two runs
of the same config produce byte-identical payloads.  Timings live outside it.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from . import __version__
from .coloring import ColoringContext
from .errors import BudgetExhausted, InvalidInput, QRamseyError
from .ground import FinIndexSet, make_ground
from .setmap import SetMapping, VerificationReport, check_bounded, verify_free_set_property
from .space import (IndexFilter, Space, extract_omega_copy, format_point,
                    is_dense_in_itself, parse_rational, recheck_certificate)

TASKS = ("verify-setmap", "color", "witness", "extract", "dense-check", "mod-colors")
SPACE_KINDS = ("dyadic", "integer-grid", "custom-list")

VERIFY_CARRIER = 10
COLORING_CARRIER = 2**40
DEFAULT_BUDGETS = {"extract": 10**6, "dense-check": 10**5, "color": 10**5}
WITNESS_BUDGET = 10**9


@dataclass
class ExperimentConfig:
    task: str
    n: int = 0
    ground_sizes: list[int] | None = None
    injection_rule: str = "identity"
    seed: int | None = None
    space: str = "dyadic"
    interval: list[str] = field(default_factory=lambda: ["0", "1"])
    points: list[str] | None = None
    K: int = 8
    l: int | None = None
    budget: int | None = None
    filter: str = "all"
    tuple: list[int] | None = None
    tuple_points: list[str] | None = None
    samples: int | None = None
    prefix: int = 50
    eps: list[str] = field(default_factory=lambda: ["1/10", "1/100"])
    jobs: int = 1
    out: str | None = None
    trace: str | None = None

    def sizes(self) -> list[int]:
        if self.ground_sizes is not None:
            return list(self.ground_sizes)
        carrier = VERIFY_CARRIER if self.task == "verify-setmap" else COLORING_CARRIER
        return [carrier] * (self.n + 1)

    def search_budget(self) -> int:
        if self.budget is not None:
            return self.budget
        return DEFAULT_BUDGETS.get(self.task, WITNESS_BUDGET)

    def space_descriptor(self) -> dict:
        d = {"kind": self.space, "dimension": 1}
        if self.space == "dyadic":
            d["interval"] = list(self.interval)
        if self.space == "custom-list":
            pts = self.points or []
            d["points"] = list(pts)
            d["dimension"] = len(str(pts[0]).split(",")) if pts else 1
        return d

    def ground_descriptor(self) -> dict:
        return {"level": self.n, "sizes": self.sizes(), "rule": self.injection_rule,
                "seed": self.seed if self.injection_rule == "random" else None}

    def validate(self) -> None:
        def bad(name, reason):
            raise InvalidInput(f"invalid config field {name!r}: {reason}")

        if self.task not in TASKS:
            bad("task", f"must be one of {', '.join(TASKS)}")
        if self.n < 0:
            bad("n", "must be nonnegative")
        if len(self.sizes()) != self.n + 1:
            bad("ground_sizes", f"need n+1 = {self.n + 1} sizes, got {len(self.sizes())}")
        if self.space not in SPACE_KINDS:
            bad("space", f"must be one of {', '.join(SPACE_KINDS)}")
        if self.task == "mod-colors" and (self.l is None or self.l < 1):
            bad("l", "mod-colors needs l >= 1")
        if self.l is not None and self.l < 1:
            bad("l", "must be at least 1")
        if self.K < 0:
            bad("K", "must be nonnegative")
        if self.task == "extract" and self.K < 2:
            bad("K", "extraction needs K >= 2")
        if self.budget is not None and self.budget < 1:
            bad("budget", "must be positive")
        if self.jobs < 1:
            bad("jobs", "must be positive")
        if self.task == "color" and not (self.tuple or self.tuple_points):
            bad("tuple", "color needs --tuple or --points")
        if self.space == "custom-list" and not self.points:
            bad("points", "custom-list space needs --custom-points")
        IndexFilter.parse(self.filter)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("trace")
        return d


@dataclass
class RunReport:
    config: dict
    payload: dict
    ok: bool
    timings: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def exit_status(self) -> int:
        return 0 if self.ok else 1

    def payload_json(self) -> str:
        return json.dumps(self.payload, sort_keys=True, separators=(",", ":"))

    def to_dict(self) -> dict:
        return {"config": self.config, "payload": self.payload, "ok": self.ok,
                "exit_status": self.exit_status, "timings": self.timings, "version": self.version}

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")


def _verify_partition(args):
    descriptor, jobs, part = args
    g = make_ground(descriptor["level"], descriptor["sizes"], descriptor["rule"], descriptor["seed"])
    mapping = SetMapping(g)
    subsets = (t for t in combinations(range(g.size), g.level + 2) if t[0] % jobs == part)
    rep = verify_free_set_property(mapping, subsets=subsets, clause1=False)
    return rep.checked, [tuple(t) for t in rep.violations], {tuple(t): a for t, a in rep.witnesses.items()}


def _run_verify(cfg: ExperimentConfig) -> tuple[dict, bool]:
    g = make_ground(cfg.n, cfg.sizes(), cfg.injection_rule, cfg.seed)
    mapping = SetMapping(g)
    if cfg.samples is not None:
        rep = verify_free_set_property(mapping, "sample", cfg.samples, cfg.seed or 0)
    elif cfg.jobs > 1:
        rep = VerificationReport(g.level, g.size, g.rule, g.seed, "exhaustive")
        parts = [(g.descriptor(), cfg.jobs, j) for j in range(cfg.jobs)]
        with ProcessPoolExecutor(cfg.jobs) as pool:
            for checked, bad, wit in pool.map(_verify_partition, parts):
                rep.checked += checked
                rep.violations.extend(FinIndexSet(t) for t in bad)
                rep.witnesses.update((FinIndexSet(t), a) for t, a in wit.items())
        rep.violations.sort(key=tuple)
        rep.clause1_checked, rep.clause1_violations = check_bounded(mapping)
    else:
        rep = verify_free_set_property(mapping)
    return rep.to_dict(), rep.ok


def _context(cfg: ExperimentConfig) -> ColoringContext:
    space = Space.from_descriptor(cfg.space_descriptor())
    g = make_ground(cfg.n, cfg.sizes(), cfg.injection_rule, cfg.seed)
    return ColoringContext(space, SetMapping(g))


def _emit_trace(cfg: ExperimentConfig, records: list[dict]) -> None:
    if cfg.trace is None:
        return
    lines = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if cfg.trace == "-":
        sys.stdout.write(lines)
    else:
        Path(cfg.trace).write_text(lines)


def _run_color(cfg: ExperimentConfig) -> tuple[dict, bool]:
    ctx = _context(cfg)
    if cfg.tuple_points:
        t = ctx.resolve(cfg.tuple_points, limit=cfg.search_budget())
    else:
        t = FinIndexSet(cfg.tuple)
        if len(t) != len(cfg.tuple):
            raise InvalidInput("tuple repeats a position")
    if len(t) != cfg.n + 2:
        raise InvalidInput(f"color needs {cfg.n + 2} points for n={cfg.n}, got {len(t)}")
    trace: list[dict] = []
    k = ctx.color(t, trace)
    _emit_trace(cfg, trace)
    payload = {"indices": list(t), "points": [format_point(ctx.space.point(i)) for i in t],
               "color": k, "steps": len(trace)}
    if cfg.l is not None:
        payload["l"] = cfg.l
        payload["color_mod"] = k % cfg.l
    return payload, True


def _chain(cfg: ExperimentConfig, K: int) -> tuple[ColoringContext, list]:
    ctx = _context(cfg)
    return ctx, ctx.realize_colors(IndexFilter.parse(cfg.filter), K, cfg.search_budget())


def _chain_payload(cfg, ctx, chain, K) -> dict:
    trace: list[dict] = []
    if cfg.trace is not None:
        checker = ctx.fresh()
        for w in chain:
            steps: list[dict] = []
            checker.color(w.t, steps)
            trace.extend(dict(r, witness=w.k) for r in steps)
        _emit_trace(cfg, trace)
    return {"n": cfg.n, "space": ctx.space.descriptor(), "ground": cfg.ground_descriptor(),
            "K": K, "filter": str(IndexFilter.parse(cfg.filter)),
            "witnesses": [w.to_dict(ctx.space) for w in chain],
            "all_verified": all(w.verified for w in chain)}


def _run_witness(cfg: ExperimentConfig) -> tuple[dict, bool]:
    ctx, chain = _chain(cfg, cfg.K)
    payload = _chain_payload(cfg, ctx, chain, cfg.K)
    return payload, payload["all_verified"]


def _run_mod_colors(cfg: ExperimentConfig) -> tuple[dict, bool]:
    K = cfg.l - 1
    ctx, chain = _chain(cfg, K)
    payload = _chain_payload(cfg, ctx, chain, K)
    residues = sorted({w.k % cfg.l for w in chain if w.verified})
    payload.update(l=cfg.l, residues=residues, all_residues=residues == list(range(cfg.l)))
    return payload, payload["all_verified"] and payload["all_residues"]


def _run_extract(cfg: ExperimentConfig) -> tuple[dict, bool]:
    space = Space.from_descriptor(cfg.space_descriptor())
    cert = extract_omega_copy(space, cfg.K, IndexFilter.parse(cfg.filter), cfg.search_budget())
    failures = recheck_certificate(space, cert)
    return {"space": space.descriptor(), "K": cfg.K, "certificate": cert.to_dict(space),
            "recheck_failures": failures}, not failures


def _run_dense(cfg: ExperimentConfig) -> tuple[dict, bool]:
    space = Space.from_descriptor(cfg.space_descriptor())
    rep = is_dense_in_itself(space, cfg.prefix, cfg.eps, cfg.search_budget())
    return {"space": space.descriptor(), **rep.to_dict()}, rep.ok


RUNNERS = {
    "verify-setmap": _run_verify,
    "color": _run_color,
    "witness": _run_witness,
    "extract": _run_extract,
    "dense-check": _run_dense,
    "mod-colors": _run_mod_colors,
}


def run(cfg: ExperimentConfig) -> RunReport:
    cfg.validate()
    start = time.perf_counter()
    try:
        payload, ok = RUNNERS[cfg.task](cfg)
    except BudgetExhausted as exc:
        payload, ok = {"error": "budget-exhausted", "message": str(exc), "step": exc.step}, False
    report = RunReport(cfg.to_dict(), payload, ok, {"seconds": round(time.perf_counter() - start, 6)})
    if cfg.out:
        report.write(cfg.out)
    return report


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _interval(text: str) -> list[str]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected a,b, got {text!r}")
    try:
        return [str(parse_rational(p)) for p in parts]
    except InvalidInput as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _points(text: str) -> list[str]:
    # points split on ';' or whitespace, coordinates on ','
    return [p for p in text.replace(";", " ").split() if p]


def _rationals(text: str) -> list[str]:
    out = []
    for tok in text.split(","):
        try:
            parse_rational(tok)
        except InvalidInput as exc:
            raise argparse.ArgumentTypeError(str(exc))
        out.append(tok.strip())
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML file of config fields; flags override it")
    common.add_argument("--n", type=int, help="dimension parameter: colors (n+2)-sets")
    common.add_argument("--ground-sizes", type=_int_list, help="carrier sizes for levels 0..n")
    common.add_argument("--injection-rule", choices=("identity", "reverse", "random"))
    common.add_argument("--seed", type=int)
    common.add_argument("--space", choices=SPACE_KINDS)
    common.add_argument("--interval", type=_interval, help="dyadic interval a,b")
    common.add_argument("--custom-points", dest="points", type=_points,
                        help="points for custom-list, e.g. '1/2;1/3' or '1/2,0;0,1/3'")
    common.add_argument("--K", type=int)
    common.add_argument("--l", type=int)
    common.add_argument("--budget", type=int, help="search budget in positions")
    common.add_argument("--filter", help="index filter: all, even, odd or mod:M:R")
    common.add_argument("--tuple", type=_int_list, help="positions to color")
    common.add_argument("--points", dest="tuple_points", type=_points, help="points to color")
    common.add_argument("--samples", type=int, help="verify a seeded sample instead of all subsets")
    common.add_argument("--prefix", type=int)
    common.add_argument("--eps", type=_rationals, help="comma-separated epsilon grid")
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("--trace", help="write JSONL step traces here ('-' for stdout)")

    parser = argparse.ArgumentParser(prog="qramsey", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        sub.add_parser(task, parents=[common])
    return parser


def load_config_file(path) -> dict:
    text = Path(path).read_text()
    if str(path).endswith((".yaml", ".yml")):
        import yaml
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise InvalidInput(f"config file {path} must hold a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_cli(argv=None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    if args.config:
        values = load_config_file(args.config)
        unknown = set(values) - fields
        if unknown:
            raise InvalidInput(f"unknown config field(s): {', '.join(sorted(unknown))}")
    values.update({k: v for k, v in vars(args).items() if k in fields and v is not None})
    values["task"] = args.task
    if "interval" in values:
        values["interval"] = [str(parse_rational(x)) for x in values["interval"]]
    return ExperimentConfig(**values)


def _summary(report: RunReport) -> str:
    p, task = report.payload, report.config["task"]
    status = "ok" if report.ok else "FAIL"
    if "error" in p:
        return f"{task}: {status} ({p['error']}: {p['message']})"
    if task == "verify-setmap":
        return (f"{task}: {status} checked={p['checked']} violations={len(p['violations'])} "
                f"clause1_checked={p['clause1_checked']} clause1_violations={len(p['clause1_violations'])}")
    if task == "color":
        extra = f" mod {p['l']} = {p['color_mod']}" if "l" in p else ""
        return f"{task}: color of {p['indices']} is {p['color']}{extra}"
    if task in ("witness", "mod-colors"):
        lines = [f"{task}: {status} n={p['n']} K={p['K']} filter={p['filter']}"]
        lines += [f"  k={w['k']} t={w['indices']} verified={w['verified']}" for w in p["witnesses"]]
        if task == "mod-colors":
            lines.append(f"  residues mod {p['l']}: {p['residues']}")
        return "\n".join(lines)
    if task == "extract":
        return (f"{task}: {status} indices={len(p['certificate']['indices'])} "
                f"last={p['certificate']['indices'][-1]} recheck_failures={len(p['recheck_failures'])}")
    return f"{task}: {status} checked={p['checked']} failures={len(p['failures'])}"


def main(argv=None) -> int:
    try:
        cfg = parse_cli(argv)
        report = run(cfg)
    except QRamseyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(_summary(report))
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
