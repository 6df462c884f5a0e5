"""Command-line front end.

Subcommands: gen, gcr, certify, complete, sample, report. Reports default to
JSON on stdout. Exit codes: 0 success, 1 usage or I/O error, 2 mathematical
failure (infeasible completion, invalid certificate), 3 randomized-decision
disagreement.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import complete as completion
from . import pattern as patterns
from . import typical
from .ffmat import DEFAULT_PRIME
from .gcr import (
    CertificateMismatchError,
    GcrReport,
    SeedDisagreementError,
    build_circulant_certificate,
    gcr as compute_gcr,
    sgcr as compute_sgcr,
    verify_partition_certificate,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for math failures
        raise UsageError(message)


@dataclass
class RunConfig:
    seed: int = 20240601
    prime: int = DEFAULT_PRIME
    votes: int = 3
    threads: int = 1
    trials: int = 1000
    restarts: int = 20
    tol: float = 1e-6
    fmt: str = "json"

    def engine_seeds(self) -> tuple[int, ...]:
        state = np.random.SeedSequence(self.seed).generate_state(self.votes)
        return tuple(int(s) for s in state)


def _is_probable_prime(p: int, rounds: int = 16) -> bool:
    if p < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if p % small == 0:
            return p == small
    d, s = p - 1, 0
    while d % 2 == 0:
        d, s = d // 2, s + 1
    rng = np.random.default_rng(0xC0FFEE)
    for _ in range(rounds):
        a = int(rng.integers(2, p - 1))
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = (x * x) % p
            if x == p - 1:
                break
        else:
            return False
    return True


def _load_config_file(path: str) -> dict:
    import tomli

    with open(path, "rb") as fh:
        return tomli.load(fh)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    file_conf = _load_config_file(args.config) if getattr(args, "config", None) else {}
    env_seed = os.environ.get("GCRLAB_SEED")
    env_prime = os.environ.get("GCRLAB_PRIME")

    def pick(flag, env, conf_key, default):
        if flag is not None:
            return flag
        if env is not None:
            return env
        if conf_key in file_conf:
            return file_conf[conf_key]
        return default

    cfg.seed = int(pick(getattr(args, "seed", None), env_seed, "seed", cfg.seed))
    cfg.prime = int(pick(getattr(args, "prime", None), env_prime, "prime", cfg.prime))
    cfg.votes = int(pick(getattr(args, "votes", None), None, "votes", cfg.votes))
    cfg.threads = int(pick(getattr(args, "threads", None), None, "threads", cfg.threads))
    cfg.trials = int(pick(getattr(args, "trials", None), None, "trials", cfg.trials))
    cfg.restarts = int(pick(getattr(args, "restarts", None), None, "restarts", cfg.restarts))
    cfg.tol = float(pick(getattr(args, "tol", None), None, "tol", cfg.tol))
    cfg.fmt = str(pick(getattr(args, "format", None), None, "format", cfg.fmt))
    for name in ("votes", "threads", "trials", "restarts"):
        if getattr(cfg, name) < 1:
            raise UsageError(f"--{name} must be positive")
    if cfg.tol <= 0:
        raise UsageError("--tol must be positive")
    if not _is_probable_prime(cfg.prime):
        raise UsageError(f"{cfg.prime} does not look prime")
    return cfg


def _emit(doc: dict, cfg: RunConfig, out: str | None = None) -> None:
    if cfg.fmt == "text":
        lines = [f"{k}: {json.dumps(v)}" for k, v in doc.items()]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(doc, indent=1) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args, cfg: RunConfig) -> int:
    pat = patterns.generate(args.family, args.params, seed=cfg.seed)
    if args.out:
        patterns.save_pattern(pat, args.out)
    else:
        _emit(patterns.pattern_to_json(pat), cfg)
    return 0


def _run_rank(pat, cfg: RunConfig) -> GcrReport:
    seeds = cfg.engine_seeds()
    if isinstance(pat, patterns.SymmetricPattern):
        return compute_sgcr(pat, seeds=seeds, prime=cfg.prime)
    return compute_gcr(pat, seeds=seeds, prime=cfg.prime)


def _cmd_gcr(args, cfg: RunConfig) -> int:
    pat = patterns.load_pattern(args.pattern)
    report = _run_rank(pat, cfg)
    _emit(report.to_json(), cfg, args.out)
    return 0


def _cmd_certify(args, cfg: RunConfig) -> int:
    seeds = cfg.engine_seeds()
    if args.circulant:
        n, k = args.circulant
        l, p_blocks, q_blocks = build_circulant_certificate(n, k)
        pat = patterns.generate("circulant", [n, l])
        r = n - k
    else:
        if args.pattern is None or args.rank is None or args.partition_file is None:
            raise UsageError("certify needs PATTERN -r R --partition-file PF, or --circulant N K")
        pat = patterns.load_pattern(args.pattern)
        with open(args.partition_file, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        r = args.rank
        p_blocks = [[v + 1 for v in blk] for blk in doc["rows"]]
        q_blocks = [[v + 1 for v in blk] for blk in doc["cols"]]
    valid, violations = verify_partition_certificate(
        pat, r, p_blocks, q_blocks, seeds=seeds, prime=cfg.prime)
    _emit({"valid": valid, "rank": r,
           "violations": [list(v) for v in violations]}, cfg, args.out)
    return 0 if valid else 2


def _cmd_complete(args, cfg: RunConfig) -> int:
    x = completion.load_partial(args.partial)
    if args.chordal:
        result = completion.chordal_complete(x, seed=cfg.seed)
        doc = result.to_json()
        ok = True
    else:
        if args.rank is None:
            raise UsageError("complete needs --chordal or --rank R")
        opts = completion.FitOptions(restarts=cfg.restarts, tol_residual=cfg.tol,
                                     seed=cfg.seed)
        if isinstance(x.pattern, patterns.SymmetricPattern):
            fit = completion.sym_lowrank_fit(x, args.rank, opts)
        else:
            fit = completion.lowrank_fit(x, args.rank, opts)
        doc = fit.to_json()
        ok = fit.completable
    _emit(doc, cfg, args.out)
    return 0 if ok else 2


def _emit_sample(report, cfg: RunConfig, out: str | None) -> None:
    if cfg.fmt == "csv":
        rows = report.csv_rows()
        text = "\n".join(",".join(str(v) for v in row) for row in rows) + "\n"
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return
    _emit(report.to_json(), cfg, out)


def _cmd_sample(args, cfg: RunConfig) -> int:
    per_trial = cfg.fmt == "csv"
    if args.cube:
        report = typical.cube_typical_sample(cfg.trials, seed=cfg.seed,
                                             keep_per_trial=per_trial)
        _emit_sample(report, cfg, args.out)
        return 0
    if args.knk1 is not None:
        report = typical.knk1_typical_sample(args.knk1, cfg.trials, seed=cfg.seed,
                                             optimizer_subsample=args.crosscheck)
        _emit_sample(report, cfg, args.out)
        return 0
    if args.gn is not None:
        report = typical.gn_report(args.gn, seeds=cfg.engine_seeds(), seed=cfg.seed)
        _emit(report.to_json(), cfg, args.out)
        return 0
    if args.pattern is None or args.rank is None:
        raise UsageError("sample needs --cube, --knk1 N, --gn N, or PATTERN --rank R")
    pat = patterns.load_pattern(args.pattern)
    if not isinstance(pat, patterns.BipartitePattern):
        raise UsageError("rank scans run on bipartite patterns")
    report = typical.typical_scan(pat, args.rank, cfg.trials, seed=cfg.seed,
                                  engine_seeds=cfg.engine_seeds())
    _emit_sample(report, cfg, args.out)
    return 0


def _family_rows(cfg: RunConfig) -> list[tuple]:
    """(family, params, closed-form value, engine value) for every family with
    a known formula."""
    jobs: list[tuple[str, str, int, object]] = []

    def add(family, params, expected, pat):
        jobs.append((family, params, expected, pat))

    rng = np.random.default_rng(cfg.seed)
    for t in range(20):
        m = int(rng.integers(2, 9))
        n = int(rng.integers(2, 17 - m))
        add("tree-random", f"{m},{n}", 1,
            patterns.generate("tree-random", [m, n], seed=int(rng.integers(2**31))))
    add("cycle", "3", 2, patterns.generate("cycle", [3]))
    for m in range(1, 7):
        for n in range(1, 7):
            add("complete", f"{m},{n}", min(m, n), patterns.generate("complete", [m, n]))
    for n in range(2, 11):
        add("triangular", str(n), (n + 1) // 2, patterns.generate("triangular", [n]))
    add("circulant", "4,3", 2, patterns.generate("circulant", [4, 3]))
    add("circulant", "8,6", 4, patterns.generate("circulant", [8, 6]))
    for n in range(2, 26):
        add("crown", str(n), n - int(np.sqrt(n)), patterns.generate("crown", [n]))
    for n, k in ((4, 2), (8, 4), (9, 3), (16, 4), (16, 8), (18, 6)):
        l = n - k * k // n
        add("circulant", f"{n},{l}", n - k, patterns.generate("circulant", [n, l]))
    for n in range(1, 16):
        k = typical._triangular_floor(n)
        add("sym-join-family", str(n), 2 * n - k,
            patterns.generate("sym-join-family", [n]))
    for k in range(1, 5):
        n = (k * k + k) // 2
        add("sym-join-family", f"{n}", k * k, patterns.generate("sym-join-family", [n]))

    def run(job):
        family, params, expected, pat = job
        got = _run_rank(pat, cfg).gcr
        return (family, params, expected, got, expected == got)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(run, jobs))
    return [run(job) for job in jobs]


def _cmd_report(args, cfg: RunConfig) -> int:
    if args.families == "":
        rows = []
    else:
        rows = _family_rows(cfg)
        if args.families != "all":
            wanted = {name.strip() for name in args.families.split(",") if name.strip()}
            rows = [r for r in rows if r[0] in wanted]
    os.makedirs(args.out or ".", exist_ok=True)
    path = os.path.join(args.out or ".", "families.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "params", "formula", "engine", "agree"])
        for family, params, expected, got, agree in rows:
            writer.writerow([family, params, expected, got, agree])
    bad = [r for r in rows if not r[4]]
    sys.stdout.write(f"wrote {path} ({len(rows)} rows, {len(bad)} disagreements)\n")
    return 2 if bad else 0


# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="gcrlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--prime", type=int, default=None)
        p.add_argument("--votes", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--format", choices=["json", "text", "csv"], default=None)
        p.add_argument("--config", default=None, help="TOML config file")
        p.add_argument("-o", "--out", default=None)

    p = sub.add_parser("gen", help="generate a named pattern family")
    p.add_argument("family")
    p.add_argument("params", nargs="*", type=int)
    common(p)

    p = sub.add_parser("gcr", help="generic completion rank of a pattern file")
    p.add_argument("pattern")
    common(p)

    p = sub.add_parser("certify", help="check a partition certificate")
    p.add_argument("pattern", nargs="?", default=None)
    p.add_argument("-r", "--rank", type=int, default=None)
    p.add_argument("--partition-file", default=None)
    p.add_argument("--circulant", nargs=2, type=int, metavar=("N", "K"), default=None)
    common(p)

    p = sub.add_parser("complete", help="complete a partial matrix file")
    p.add_argument("partial")
    p.add_argument("--chordal", action="store_true")
    p.add_argument("--rank", type=int, default=None)
    common(p)

    p = sub.add_parser("sample", help="typical-rank sampling harnesses")
    p.add_argument("pattern", nargs="?", default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--cube", action="store_true")
    p.add_argument("--knk1", type=int, default=None)
    p.add_argument("--gn", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--crosscheck", type=int, default=0,
                   help="optimizer cross-check subsample size for --knk1")
    common(p)

    p = sub.add_parser("report", help="closed-form family table as CSV")
    p.add_argument("--families", default="all",
                   help="'all' or '' for an empty table")
    common(p)

    return parser


_COMMANDS = {
    "gen": _cmd_gen,
    "gcr": _cmd_gcr,
    "certify": _cmd_certify,
    "complete": _cmd_complete,
    "sample": _cmd_sample,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _resolve_config(args)
        return _COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return 1
    except SeedDisagreementError as exc:
        sys.stderr.write(f"randomized decision disagreement: {exc}\n")
        return 3
    except (ValueError, completion.CompletionRankError, CertificateMismatchError,
            typical.FormulaMismatchError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
