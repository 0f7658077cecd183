"""Command-line entry point: ``sl2free <command> [options]``.

Exit status: 0 success, 1 usage or input error, 2 a checked property failed.
Every run writes a manifest (argv, resolved options, seed, version, output
checksum).  It goes next to ``--out`` as ``<out>.manifest.json``, to
``--manifest``, or else to stderr.  ``sl2free replay MANIFEST`` re-runs a
manifest and checks the checksum.

Options may also come from ``--config FILE`` (``key = value`` lines, keys
spelled like the long flags without dashes); flags override the file, and
the file overrides the SL2FREE_SEED / SL2FREE_THREADS environment variables.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .enumeration import BallSpec, Norm, count, sample_uniform, SampleSeed
from .exact_arith import DomainError
from .experiments import (
    census_pairs,
    fit_exponent,
    fr_disproof,
    gamma0_size_check,
    nonfree_rate,
    phi3_lower_bound,
)
from .mat2 import Mat2, SubgroupSpec, format_matrix, parse_matrix
from .pingpong import certify_tuple
from .relations import find_relation, format_word

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 1, 2


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    """Raised after output is written when an experiment's asserted property fails."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_matrix_line(text: str) -> Mat2:
    return parse_matrix(text)


def read_matrices(path: str | None) -> list[Mat2]:
    text = sys.stdin.read() if path in (None, "-") else Path(path).read_text()
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(parse_matrix_line(line))
    if not out:
        raise DomainError("no matrices in input")
    return out


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def _table(args, header: list[str], rows: list[list], extra: dict | None = None) -> str:
    if args.json:
        recs = []
        for r in rows:
            recs.append({k: (round(v, 6) if isinstance(v, float) else v) for k, v in zip(header, r)})
        payload = {"rows": recs}
        if extra:
            payload.update(extra)
        return _json(payload)
    return _csv(header, rows)


def _grid(args) -> list[int]:
    if getattr(args, "X_grid", None):
        return args.X_grid
    if getattr(args, "X", None) is not None:
        return [args.X]
    raise UsageError("need --X or --X-grid")


# ---------------------------------------------------------------------------
# commands


def cmd_certify(args) -> str:
    rep = certify_tuple(read_matrices(args.input))
    return _json(rep.to_dict())


def cmd_relate(args) -> str:
    tup = read_matrices(args.input)
    res = find_relation(tup, args.max_len)
    out = {"found": res.found, "checked_words": res.checked_words, "max_len": args.max_len}
    if res.found:
        out["word"] = format_word(res.word, len(tup))
        out["length"] = res.length
    else:
        out["word"] = None
    return _json(out)


def _ball_spec(args, X: int) -> BallSpec:
    sub = SubgroupSpec(args.subgroup, args.Q)
    return BallSpec(X, sub, Norm(args.norm), args.c_nonzero)


def cmd_count(args) -> str:
    rows = []
    for X in _grid(args):
        spec = _ball_spec(args, X)
        rows.append([X, spec.Q, args.norm, args.subgroup, count(spec)])
    return _table(args, ["X", "Q", "norm", "subgroup", "count"], rows)


def cmd_sample(args) -> str:
    X = _grid(args)[0]
    mats = sample_uniform(_ball_spec(args, X), args.samples, SampleSeed(args.seed, args.stream))
    return "".join(format_matrix(A) + "\n" for A in mats)


def cmd_census(args) -> str:
    rows = []
    dyadic = {}
    fields = ["X", "Q", "mode", "total_pairs", "nonpingpong_pairs", "fraction", "trace_fail",
              "overlap_DD", "overlap_DinvDinv", "overlap_DDinv", "population_pairs"]
    for X in _grid(args):
        r = census_pairs(args.Q, X, args.mode, samples=args.samples, seed=args.seed, threads=args.threads)
        rows.append([r.X, r.Q, r.mode, r.total_pairs, r.nonpingpong_pairs, r.fraction, r.trace_fail,
                     r.overlap_DD, r.overlap_DinvDinv, r.overlap_DDinv, r.population_pairs])
        dyadic[str(X)] = {str(k): v for k, v in r.dyadic.items()}
    return _table(args, fields, rows, {"dyadic_nonpingpong": dyadic})


def cmd_rate(args) -> str:
    rows = []
    logs = {}
    for X in _grid(args):
        rec = nonfree_rate(args.s, X, args.samples, args.max_len, args.seed, threads=args.threads)
        if rec.certified + rec.relation + rec.inconclusive != rec.n:
            raise CheckFailed("rate outcomes do not partition the sample")
        rows.append([rec.s, X, rec.n, rec.L, rec.certified, rec.relation, rec.inconclusive,
                     float(rec.certified_frac), float(rec.relation_frac), float(rec.inconclusive_frac)])
        logs[str(X)] = {"inconclusive": rec.inconclusive_log,
                        "witness_lengths": {str(k): v for k, v in rec.witness_lengths.items()}}
    header = ["s", "X", "n", "L", "certified", "relation", "inconclusive",
              "certified_frac", "relation_frac", "inconclusive_frac"]
    return _table(args, header, rows, {"details": logs})


def cmd_fr(args) -> str:
    rows = []
    for X in _grid(args):
        f = fr_disproof(X, args.r, args.samples, args.seed)
        rows.append([f.X, str(f.r), f.sample_size, f.prob_overlap, f.sigma_overlap, f.prob_ac_le_1,
                     f.sigma_ac, f.overlap_hits, f.overlap_eligible, f.ac_hits, f.singles])
    header = ["X", "r", "sample_size", "prob_overlap", "sigma_overlap", "prob_ac_le_1", "sigma_ac",
              "overlap_hits", "overlap_eligible", "ac_hits", "singles"]
    return _table(args, header, rows)


def cmd_gamma0(args) -> str:
    Qs = args.Q_grid or [args.Q]
    res = gamma0_size_check(Qs, _grid(args))
    rows = [[r.Q, r.X, r.count, r.ratio, r.phi_lower_bound, int(r.ok)] for r in res]
    text = _table(args, ["Q", "X", "count", "ratio", "phi_lower_bound", "ok"], rows)
    if not all(r.ok for r in res):
        raise CheckFailed(text)
    return text


def cmd_phi3(args) -> str:
    recs = [phi3_lower_bound(args.s, X) for X in _grid(args)]
    rows = [[p.s, p.X, p.trace_minus1_count, p.total_count, p.implied_lower_bound, int(p.all_cube_to_identity)]
            for p in recs]
    extra = {}
    if len(recs) >= 3:
        extra["slope"] = round(fit_exponent([(p.X, p.trace_minus1_count) for p in recs]).slope, 6)
    text = _table(args, ["s", "X", "trace_minus1_count", "total_count", "implied_lower_bound", "cube_ok"],
                  rows, extra)
    if not all(p.all_cube_to_identity for p in recs):
        raise CheckFailed(text)
    return text


def cmd_fit(args) -> str:
    text = sys.stdin.read() if args.input in (None, "-") else Path(args.input).read_text()
    reader = csv.DictReader(io.StringIO(text))
    try:
        pts = [(float(row[args.x_col]), float(row[args.y_col])) for row in reader]
    except KeyError as exc:
        raise DomainError(f"column {exc} not in input") from None
    fit = fit_exponent(pts)
    return _table(args, ["slope", "intercept", "residual", "points"],
                  [[fit.slope, fit.intercept, fit.residual, len(fit.points)]])


COMMANDS = {
    "certify": cmd_certify,
    "relate": cmd_relate,
    "count": cmd_count,
    "sample": cmd_sample,
    "census": cmd_census,
    "rate": cmd_rate,
    "fr": cmd_fr,
    "gamma0": cmd_gamma0,
    "phi3": cmd_phi3,
    "fit": cmd_fit,
}


# ---------------------------------------------------------------------------
# parser


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}")


def build_parser() -> _Parser:
    p = _Parser(
        prog="sl2free",
        description="Ping-pong certificates and counting experiments for tuples in SL2(Z).",
        epilog="Environment: SL2FREE_SEED sets the default --seed, SL2FREE_THREADS the default --threads.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="command")

    def common(sp):
        sp.add_argument("--out", help="write primary output here instead of stdout")
        sp.add_argument("--manifest", help="manifest path (default <out>.manifest.json, else stderr)")
        sp.add_argument("--json", action="store_true", help="JSON instead of CSV")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--config", help="key = value option file")

    def ball(sp):
        sp.add_argument("--X", type=int)
        sp.add_argument("--X-grid", type=_int_list, dest="X_grid")
        sp.add_argument("--Q", type=int, default=1)
        sp.add_argument("--norm", choices=["height", "op"], default="height")
        sp.add_argument("--subgroup", choices=["full", "gamma0", "gamma1", "gamma"], default="gamma0")
        sp.add_argument("--c-nonzero", action="store_true", dest="c_nonzero")

    sp = sub.add_parser("certify", help="ping-pong certificate for matrices read one per line")
    sp.add_argument("input", nargs="?", help="file of 'a b c d' lines (default stdin)")
    common(sp)

    sp = sub.add_parser("relate", help="search for an identity relation")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--max-len", "--max-word-len", type=int, default=12, dest="max_len")
    common(sp)

    sp = sub.add_parser("count", help="exact size of a ball")
    ball(sp)
    common(sp)

    sp = sub.add_parser("sample", help="uniform sample from a ball, one matrix per line")
    ball(sp)
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--stream", type=int, default=0)
    common(sp)

    sp = sub.add_parser("census", help="ping-pong failure census over pairs in Gamma0*(Q, X)")
    sp.add_argument("--X", type=int)
    sp.add_argument("--X-grid", type=_int_list, dest="X_grid")
    sp.add_argument("--Q", type=int, default=1)
    sp.add_argument("--mode", choices=["exact", "mc"], default="exact")
    sp.add_argument("--samples", type=int, default=10**5)
    common(sp)

    sp = sub.add_parser("rate", help="certified / relation / inconclusive rates for random tuples")
    sp.add_argument("--s", type=int, default=2)
    sp.add_argument("--X", type=int)
    sp.add_argument("--X-grid", type=_int_list, dest="X_grid")
    sp.add_argument("--samples", type=int, default=10**4)
    sp.add_argument("--max-word-len", "--max-len", type=int, default=12, dest="max_len")
    common(sp)

    sp = sub.add_parser("fr", help="overlap probabilities in the operator-norm ball")
    sp.add_argument("--X", type=int)
    sp.add_argument("--X-grid", type=_int_list, dest="X_grid")
    sp.add_argument("--r", type=Fraction, default=Fraction(1, 2))
    sp.add_argument("--samples", type=int, default=10**5)
    common(sp)

    sp = sub.add_parser("gamma0", help="#Gamma0(Q, X) against the totient lower bound")
    sp.add_argument("--X", type=int)
    sp.add_argument("--X-grid", type=_int_list, dest="X_grid")
    sp.add_argument("--Q", type=int, default=1)
    sp.add_argument("--Q-grid", type=_int_list, dest="Q_grid")
    common(sp)

    sp = sub.add_parser("phi3", help="count order-3 (trace -1) matrices")
    sp.add_argument("--s", type=int, default=2)
    sp.add_argument("--X", type=int)
    sp.add_argument("--X-grid", type=_int_list, dest="X_grid")
    common(sp)

    sp = sub.add_parser("fit", help="log-log slope of two CSV columns")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--x-col", default="X")
    sp.add_argument("--y-col", default="nonpingpong_pairs")
    common(sp)

    sp = sub.add_parser("replay", help="re-run a manifest and verify its checksum")
    sp.add_argument("manifest_path")
    sp.add_argument("--out")
    sp.add_argument("--threads", type=int, default=None, help="override the recorded worker count")
    return p


def _read_config(path: str) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        k, v = (t.strip() for t in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_config(sp: argparse.ArgumentParser, conf: dict[str, str]) -> None:
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, raw in conf.items():
        act = actions.get(key)
        if act is None:
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif act.type is not None:
            defaults[key] = act.type(raw)
        else:
            defaults[key] = raw
    sp.set_defaults(**defaults)


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction) and name in act.choices:
            return act.choices[name]
    raise UsageError(f"unknown command {name!r}")


def _resolve(argv: list[str]):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        raise UsageError("no command given")
    if args.command != "replay" and args.config:
        _apply_config(_subparser(parser, args.command), _read_config(args.config))
        args = parser.parse_args(argv)
    if args.command != "replay":
        if args.seed is None:
            args.seed = _env_int("SL2FREE_SEED", 0)
        if args.threads is None:
            args.threads = _env_int("SL2FREE_THREADS", 1)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
    return args


def _options(args) -> dict:
    skip = {"out", "manifest", "config"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = str(v) if isinstance(v, Fraction) else v
    return out


def _run(args) -> tuple[str, bool]:
    try:
        return COMMANDS[args.command](args), True
    except CheckFailed as exc:
        return str(exc), False


def _emit(text: str, args, argv: list[str]) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    manifest = {
        "command_line": argv,
        "config": _options(args),
        "seed": args.seed,
        "code_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "output_sha256": hashlib.sha256(text.encode()).hexdigest(),
    }
    if args.config:
        manifest["config_file"] = str(args.config)
    body = _json(manifest)
    if args.manifest:
        Path(args.manifest).write_text(body)
    elif args.out:
        Path(str(args.out) + ".manifest.json").write_text(body)
    else:
        sys.stderr.write(body)


def _replay(args) -> int:
    man = json.loads(Path(args.manifest_path).read_text())
    ns = argparse.Namespace(**man["config"])
    if "r" in man["config"]:
        ns.r = Fraction(man["config"]["r"])
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        ns.threads = args.threads
    if ns.command not in COMMANDS:
        raise UsageError(f"manifest names unknown command {ns.command!r}")
    text, ok = _run(ns)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    same = hashlib.sha256(text.encode()).hexdigest() == man["output_sha256"]
    sys.stderr.write(f"replay checksum {'matches' if same else 'DIFFERS'}\n")
    return EXIT_OK if same and ok else EXIT_CHECK


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _resolve(argv)
        if args.command == "replay":
            return _replay(args)
        text, ok = _run(args)
        _emit(text, args, argv)
        return EXIT_OK if ok else EXIT_CHECK
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (DomainError, OSError, argparse.ArgumentTypeError) as exc:
        sys.stderr.write(f"sl2free: error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())
