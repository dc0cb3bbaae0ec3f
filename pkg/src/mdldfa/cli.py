"""Command-line interface.

Exit status is 0 on success, 2 on a domain, capacity, decode or input
error (one diagnostic line on stderr) and 64 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .codelen import DecodeError, DomainError
from .coders import CODER_FAMILY_VERSION, khat_data_given_model
from .dfa import CapacityError, DataSample, Dfa, decode, encode, from_text, slice_count, to_text, universal_dfa, word_ranks
from .experiments import run_lemma1_counting, run_oscillation, run_parity
from .ranking import subset_code_len, subset_rank
from .search import (
    EmptyTraceError,
    SearchTrace,
    direct_method_search,
    dovetail_optimal,
    greedy_merge_search,
)
from .structfn import DfaClass, SubsetClass, build_structure_table, minimal_sufficient_alpha

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    subcommand: str
    n: int | None = None
    d: int | None = None
    data: str | None = None
    alpha: float | None = None
    budget: int | None = None
    seed: int | None = None
    rule: str | None = None
    mode: str | None = None
    threads: int = 1
    outputs: dict[str, str] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.alpha is not None and self.alpha < 0:
            raise DomainError(f"alpha must be non-negative, got {self.alpha}")
        if self.budget is not None and self.budget < 1:
            raise DomainError(f"budget must be at least 1, got {self.budget}")
        if self.threads < 1:
            raise DomainError(f"threads must be at least 1, got {self.threads}")
        if self.n is not None and self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        return self

    def provenance(self) -> dict:
        return {"version": __version__, "coder_family": CODER_FAMILY_VERSION, "config": asdict(self)}


# ---------------------------------------------------------------------------
# Files


def read_data_file(path: str | Path, n: int | None = None) -> DataSample:
    """First line 'n d', then d sorted distinct words of length n; '#' lines are ignored."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise DomainError(f"{path}: empty data file")
    head = lines[0].split()
    if len(head) != 2 or not all(h.isdigit() for h in head):
        raise DomainError(f"{path}: first line must be 'n d'")
    file_n, d = map(int, head)
    words = lines[1:]
    if n is not None and n != file_n:
        raise DomainError(f"{path}: file declares n={file_n} but --n {n} was given")
    if len(words) != d:
        raise DomainError(f"{path}: header declares d={d} but {len(words)} words follow")
    if len(set(words)) != len(words):
        raise DomainError(f"{path}: duplicate words")
    if words != sorted(words):
        raise DomainError(f"{path}: words are not sorted")
    return DataSample(tuple(words), file_n)


def write_data_file(path: str | Path, sample: DataSample) -> None:
    Path(path).write_text(f"{sample.n} {sample.d}\n" + "".join(w + "\n" for w in sample.words))


def _comment_block(cfg: RunConfig) -> list[str]:
    return [f"mdldfa {__version__}", "config " + json.dumps(cfg.provenance()["config"], sort_keys=True)]


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _write_trace(trace: SearchTrace, cfg: RunConfig, path: str | None, fmt: str) -> None:
    if fmt == "jsonl":
        head = json.dumps({"provenance": cfg.provenance(), "mode": trace.mode, "alpha": trace.alpha,
                           "terminated_reason": trace.terminated_reason.value, "steps": trace.steps}) + "\n"
        _emit(head + trace.to_jsonl(), path)
    else:
        comments = _comment_block(cfg) + [
            f"mode {trace.mode} alpha {trace.alpha} terminated {trace.terminated_reason.value} steps {trace.steps}"]
        _emit(trace.to_csv(comments), path)


def _summary(trace: SearchTrace) -> str:
    e = trace.final
    return (f"{trace.mode}: {len(trace.explanations)} explanations, final q={e.model.q} "
            f"total={e.total:.3f} bits ({trace.terminated_reason.value} after {trace.steps} steps)\n")


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_search(args, cfg: RunConfig) -> int:
    sample = read_data_file(args.data, args.n)
    cfg.n, cfg.d = sample.n, sample.d
    if args.command == "induce":
        trace = greedy_merge_search(sample, args.alpha, args.rule, coding=args.coding,
                                    max_steps=args.max_steps, threads=args.threads)
    elif args.command == "dovetail":
        trace = dovetail_optimal(sample, args.alpha, args.budget, args.max_states)
    else:
        trace = direct_method_search(sample, args.alpha, args.budget, args.max_states)
    _write_trace(trace, cfg, args.trace, args.format)
    if args.trace:
        sys.stderr.write(_summary(trace))
    return EXIT_OK


def _cmd_structfn(args, cfg: RunConfig) -> int:
    sample = read_data_file(args.data, args.n)
    cfg.n, cfg.d = sample.n, sample.d
    cls = SubsetClass() if args.model_class == "subset" else DfaClass(max_states=args.max_states)
    table = build_structure_table(sample, cls, with_beta=not args.no_beta)
    fmt = args.format or ("json" if args.out and args.out.endswith(".json") else "csv")
    if fmt == "json":
        suff = minimal_sufficient_alpha(table)
        extra = dict(cfg.provenance())
        extra["minimal_sufficient"] = None if suff is None else {"alpha": suff.alpha, "witness": suff.witness.id}
        _emit(table.to_json(extra) + "\n", args.out)
    else:
        _emit(table.to_csv(_comment_block(cfg) + [f"khat_D {table.khat_D}"]), args.out)
    return EXIT_OK


def _read_dfa(path: str | None) -> Dfa:
    return universal_dfa() if path is None else from_text(Path(path).read_text())


def _cmd_rank(args, cfg: RunConfig) -> int:
    sample = read_data_file(args.data, args.n)
    cfg.n, cfg.d = sample.n, sample.d
    a = _read_dfa(args.dfa)
    if not all(a.accepts(w) for w in sample.words):
        raise DomainError("the sample is not contained in the DFA's slice")
    l = slice_count(a, sample.n)
    ranks = word_ranks(a, sample.n, sample.words)
    index = subset_rank(l, ranks)
    khat = khat_data_given_model(sample, a, sample.n, materialize=False)
    doc = dict(cfg.provenance())
    doc.update({"n": sample.n, "d": sample.d, "l": l, "word_ranks": ranks, "subset_rank": str(index.rank),
                "subset_code_len": subset_code_len(l, sample.d), "khat_bits": khat.bits,
                "khat_coder": khat.coder.as_record()})
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_experiment(args, cfg: RunConfig) -> int:
    if args.name == "oscillation":
        cfg.n = args.n or 90
        report = run_oscillation(cfg.n, args.seed)
    elif args.name == "parity":
        cfg.n = args.n or 16
        report = run_parity(cfg.n, args.seed)
    else:
        cfg.n = args.n or 4
        report = run_lemma1_counting(cfg.n)
    if args.out:
        Path(args.out).write_text(report.to_json(cfg.provenance()) + "\n")
        sys.stderr.write(report.to_table())
    else:
        sys.stdout.write(report.to_table())
    return EXIT_OK


def _cmd_encode(args, cfg: RunConfig) -> int:
    bits = encode(from_text(Path(args.input).read_text()))
    if args.out:
        Path(args.out).write_text("".join(f"# {c}\n" for c in _comment_block(cfg)) + bits + "\n")
    else:
        sys.stdout.write(bits + "\n")
    return EXIT_OK


def _cmd_decode(args, cfg: RunConfig) -> int:
    if args.bits is not None:
        bits = args.bits
    elif args.input:
        lines = Path(args.input).read_text().splitlines()
        bits = "".join(ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#"))
    else:
        raise DomainError("decode-dfa needs --in FILE or --bits STRING")
    a = decode(bits)
    if args.out:
        Path(args.out).write_text("".join(f"# {c}\n" for c in _comment_block(cfg)) + to_text(a))
    else:
        sys.stdout.write(to_text(a))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mdldfa", description="Two-part MDL model selection for DFAs.")
    p.add_argument("--version", action="version", version=f"mdldfa {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(sp):
        sp.add_argument("--data", required=True, help="data file: 'n d' then d sorted words")
        sp.add_argument("--n", type=int, help="word length; must match the data file")
        sp.add_argument("--threads", type=int, default=1)

    def trace_args(sp):
        sp.add_argument("--trace", help="trace output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    sp = sub.add_parser("induce", help="greedy state-merging MDL search")
    data_args(sp)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--rule", choices=("plain", "safe"), default="plain")
    sp.add_argument("--coding", choices=("raw", "shortest"), default="raw")
    sp.add_argument("--max-steps", type=int)
    trace_args(sp)

    for name, text in (("dovetail", "dovetailed search over the standard enumeration"),
                       ("direct", "dovetailed search selecting by deficiency")):
        sp = sub.add_parser(name, help=text)
        data_args(sp)
        sp.add_argument("--alpha", type=float, required=True)
        sp.add_argument("--budget", type=int, help="stage budget (default: run to exhaustion)")
        sp.add_argument("--max-states", type=int, default=3)
        trace_args(sp)

    sp = sub.add_parser("structfn", help="structure-function table")
    data_args(sp)
    sp.add_argument("--class", dest="model_class", choices=("dfa", "subset"), default="dfa")
    sp.add_argument("--max-states", type=int, default=3)
    sp.add_argument("--no-beta", action="store_true", help="skip the deficiency column")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv", "json"))

    sp = sub.add_parser("rank", help="subset index of the sample inside a DFA slice")
    data_args(sp)
    sp.add_argument("--dfa", help="DFA text file (default: the universal machine)")
    sp.add_argument("--out")

    sp = sub.add_parser("experiment", help="run a scripted experiment")
    sp.add_argument("name", choices=("oscillation", "parity", "lemma1"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out")

    sp = sub.add_parser("encode-dfa", help="binary self-delimiting encoding of a DFA text file")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out")

    sp = sub.add_parser("decode-dfa", help="DFA text from its binary encoding")
    sp.add_argument("--in", dest="input")
    sp.add_argument("--bits")
    sp.add_argument("--out")
    return p


COMMANDS = {
    "induce": _cmd_search,
    "dovetail": _cmd_search,
    "direct": _cmd_search,
    "structfn": _cmd_structfn,
    "rank": _cmd_rank,
    "experiment": _cmd_experiment,
    "encode-dfa": _cmd_encode,
    "decode-dfa": _cmd_decode,
}


def _config(args) -> RunConfig:
    known = {"command", "data", "n", "alpha", "budget", "seed", "rule", "threads"}
    outputs = {k: v for k, v in (("trace", getattr(args, "trace", None)), ("out", getattr(args, "out", None)))
               if v}
    options = {k: v for k, v in vars(args).items() if k not in known and k not in outputs}
    mode = {"induce": "merge", "dovetail": "dovetail", "direct": "direct"}.get(args.command)
    return RunConfig(args.command, getattr(args, "n", None), None, getattr(args, "data", None),
                     getattr(args, "alpha", None), getattr(args, "budget", None), getattr(args, "seed", None),
                     getattr(args, "rule", None), mode, getattr(args, "threads", 1), outputs, options).validate()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except (DomainError, DecodeError, CapacityError, EmptyTraceError, OSError) as exc:
        message = " ".join(str(exc).split())
        sys.stderr.write(f"mdldfa: error: {message}\n")
        return EXIT_DOMAIN
