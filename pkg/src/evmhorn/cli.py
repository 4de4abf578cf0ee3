"""Command-line front end.

Exit codes: 0 every goal is unreachable, 1 some goal is reachable,
2 undetermined, 3 the input is rejected or out of scope, 4 internal error.
"""
from __future__ import annotations

import json
import pathlib
import sys

import click

from . import __version__
from .backend import emit_script, find_solver, run_queries
from .backend.evaluate import Verdict
from .bytecode import BytecodeError, decode, parse_hex
from .fetch import FetchError, fetch_bytecode
from .hrt import HrtParseError, HrtTypeError, parse_module, pretty_module, typecheck_module
from .preanalysis import run_preanalysis
from .semantics.analyze import (
    ASSERTION_QUERY,
    FOLDING_MODES,
    REENTRANCY_QUERY,
    analyze,
    analyze_vmtest,
    build_clauses,
    load_spec,
    solved_precisely,
)
from .semantics.program import Contract, OutOfScope, build_selectors

EXIT_UNREACHABLE = 0
EXIT_REACHABLE = 1
EXIT_UNKNOWN = 2
EXIT_REJECTED = 3
EXIT_ERROR = 4

PROPERTIES = {"reentrancy": REENTRANCY_QUERY, "assertion": ASSERTION_QUERY}
REPORT_VERSION = 1


def _load_code(code: str | None, path: str | None, address: str | None) -> bytes:
    sources = [s for s in (code, path, address) if s]
    if len(sources) != 1:
        raise click.UsageError("provide exactly one of CODE, --file or --address")
    if address:
        return fetch_bytecode(address)
    if path:
        return parse_hex(pathlib.Path(path).read_text())
    return parse_hex(code)


def _report(payload: dict, out: str | None) -> None:
    text = json.dumps({"reportVersion": REPORT_VERSION, **payload}, indent=2)
    if out:
        pathlib.Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def _exit_for(classification: str) -> int:
    return {"safe": EXIT_UNREACHABLE, "vulnerable": EXIT_REACHABLE,
            "unknown": EXIT_UNKNOWN}[classification]


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Reachability analyses for EVM bytecode."""


@main.command("analyze")
@click.argument("code", required=False)
@click.option("--file", "path", type=click.Path(exists=True), help="read hex bytecode from a file")
@click.option("--address", help="fetch deployed bytecode for an address")
@click.option("--property", "prop", type=click.Choice(sorted(PROPERTIES)), default="reentrancy",
              show_default=True)
@click.option("--folding", type=click.Choice((*FOLDING_MODES, "all")), default="linear",
              show_default=True, help="clause folding before evaluation")
@click.option("--widen-limit", default=256, show_default=True,
              help="distinct values tracked per state component before widening")
@click.option("--storage", "storage_json", default=None,
              help='known initial storage as JSON, e.g. \'{"0": 5}\'')
@click.option("--report", "report_path", type=click.Path(), help="write the JSON report here")
def analyze_cmd(code, path, address, prop, folding, widen_limit, storage_json, report_path):
    """Check one property of a contract."""
    try:
        raw = _load_code(code, path, address)
        pre_storage = ({int(k): int(v) for k, v in json.loads(storage_json).items()}
                       if storage_json else None)
        contract = Contract.from_bytecode(0, raw, pre_storage=pre_storage,
                                          known_storage=pre_storage is not None)
    except (BytecodeError, FetchError, ValueError) as exc:
        click.echo(f"rejected: {exc}", err=True)
        sys.exit(EXIT_REJECTED)

    problems = contract.scope_problems()
    if problems:
        _report({"property": prop, "classification": "out-of-scope",
                 "problems": problems}, report_path)
        sys.exit(EXIT_REJECTED)

    modes = FOLDING_MODES if folding == "all" else (folding,)
    runs = {}
    try:
        for mode in modes:
            runs[mode] = analyze([contract], PROPERTIES[prop],
                                 folding=mode, widen_limit=widen_limit)
    except OutOfScope as exc:
        _report({"property": prop, "classification": "out-of-scope",
                 "problems": exc.reasons}, report_path)
        sys.exit(EXIT_REJECTED)

    classifications = {m: a.classification for m, a in runs.items()}
    overall = classifications[modes[-1]]
    _report({
        "property": prop,
        "classification": overall,
        "foldingModes": {
            m: {
                "classification": a.classification,
                "clauses": len(a.clause_set.clauses),
                "queries": [{"name": r.name, "verdict": r.verdict.name.lower()}
                            for r in a.results],
            }
            for m, a in runs.items()
        },
    }, report_path)
    if len(set(classifications.values())) > 1:
        click.echo("folding modes disagree", err=True)
        sys.exit(EXIT_ERROR)
    sys.exit(_exit_for(overall))


@main.command()
@click.argument("fixtures", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--folding", type=click.Choice(FOLDING_MODES), default="linear", show_default=True)
@click.option("--report", "report_path", type=click.Path())
def vmtest(fixtures, folding, report_path):
    """Replay VM test fixtures and check the post-state is pinned exactly.

    Each fixture is a JSON object with "name", hex "code", and "pre"/"post"
    storage maps.
    """
    cases = []
    failures = 0
    for fx in fixtures:
        spec = json.loads(pathlib.Path(fx).read_text())
        contract = Contract.from_bytecode(
            0, parse_hex(spec["code"]),
            pre_storage={int(k): int(v) for k, v in spec.get("pre", {}).items()},
            known_storage=True)
        post = {int(k): int(v) for k, v in spec.get("post", {}).items()}
        if contract.scope_problems():
            cases.append({"name": spec["name"], "status": "out-of-scope"})
            failures += 1
            continue
        result = analyze_vmtest([contract], {0: post}, folding=folding)
        ok = solved_precisely(result)
        failures += not ok
        cases.append({
            "name": spec["name"],
            "status": "solved" if ok else "unsolved",
            "queries": [{"name": r.name, "verdict": r.verdict.name.lower(),
                         "expect": r.expect} for r in result.results],
        })
    _report({"cases": cases, "solved": len(cases) - failures, "total": len(cases)},
            report_path)
    sys.exit(EXIT_UNREACHABLE if failures == 0 else EXIT_REACHABLE)


@main.command("compile")
@click.argument("code", required=False)
@click.option("--file", "path", type=click.Path(exists=True))
@click.option("--property", "prop", type=click.Choice(sorted(PROPERTIES)), default="reentrancy",
              show_default=True)
@click.option("--folding", type=click.Choice(FOLDING_MODES), default="linear", show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default="chc-out", show_default=True,
              help="directory for the generated scripts")
@click.option("--dump-ir", is_flag=True, help="also print the ground clauses")
def compile_cmd(code, path, prop, folding, out_dir, dump_ir):
    """Emit one smt-lib CHC script per reachability goal."""
    try:
        contract = Contract.from_bytecode(0, _load_code(code, path, None))
        selectors = build_selectors([contract])
    except (BytecodeError, ValueError, OutOfScope) as exc:
        click.echo(f"rejected: {exc}", err=True)
        sys.exit(EXIT_REJECTED)
    cs = build_clauses(load_spec(PROPERTIES[prop]), selectors, folding)
    if dump_ir:
        for clause in cs.clauses:
            click.echo(f"; {clause.name}: {len(clause.premises)} premises "
                       f"=> {clause.head.name if clause.head else 'false'}")
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for query in cs.queries:
        name = query.name.replace("@", "_").replace("#", "_")
        (out / f"{name}.smt2").write_text(emit_script(cs, query))
    click.echo(f"wrote {len(cs.queries)} script(s) to {out}")
    if find_solver() is None:
        click.echo("note: no CHC solver found on PATH; use the analyze command "
                   "for the built-in evaluator", err=True)


@main.command()
@click.argument("code", required=False)
@click.option("--file", "path", type=click.Path(exists=True))
def cfg(code, path):
    """Reconstruct and summarize the control-flow graph."""
    try:
        pre = run_preanalysis(decode(_load_code(code, path, None)))
    except BytecodeError as exc:
        click.echo(f"rejected: {exc}", err=True)
        sys.exit(EXIT_REJECTED)
    g = pre.cfg
    click.echo(f"blocks: {len(g.blocks)}  reachable: {len(g.reachable)}  "
               f"resolved: {g.resolved}  acyclic: {g.is_acyclic}")
    for src, dst in sorted(g.edges):
        click.echo(f"  {src} -> {dst}")
    for pc in g.offending_pcs:
        click.echo(f"  unresolved jump at pc {pc}")
    sys.exit(EXIT_UNREACHABLE if g.resolved else EXIT_REJECTED)


@main.command()
@click.argument("address")
@click.option("--out", type=click.Path(), help="write the hex code to a file")
def fetch(address, out):
    """Download deployed bytecode for an address."""
    try:
        raw = fetch_bytecode(address)
    except FetchError as exc:
        click.echo(f"fetch failed: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    text = "0x" + raw.hex()
    if out:
        pathlib.Path(out).write_text(text + "\n")
    else:
        click.echo(text)


@main.command()
@click.argument("spec", type=click.Path(exists=True))
@click.option("--pretty", "reprint", is_flag=True, help="pretty-print the parsed module")
def check(spec, reprint):
    """Parse and type-check a clause-specification file."""
    text = pathlib.Path(spec).read_text()
    try:
        module = parse_module(text)
        typecheck_module(module)
    except (HrtParseError, HrtTypeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_REJECTED)
    if reprint:
        click.echo(pretty_module(module))
    else:
        click.echo("ok")


if __name__ == "__main__":
    main()
