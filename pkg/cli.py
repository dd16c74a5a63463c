# cli.py
"""
synccheck command line
- check: evaluate a CTL+Sync formula, report verdicts and witnesses
- quotient / stutter: structure transformers
- reduce: SAT and validity gadgets from DIMACS input
- fuzz: checker vs brute-force oracle on random structures
- distinguish: bounded search for a separating formula
Exit codes: 0 satisfied / found / clean, 1 not, 2 on any error.
"""

import functools
import json
import logging
import time
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape

from checker import Lasso, SemMap, SyncPoint, check, verify_lasso, verify_ua_witness
from errors import SyncCheckError
from formula import SeqSync, UntilExists, UntilForall, parse, pretty_print
from kripke import disjoint_union, n_stuttering
from kripke_io import load_kripke, save_kripke
from oracle import DEFAULT_TEMPLATES, diff_fuzz, verify_ue_witness
from quotient import bisim_partition, distinguish, quotient_structure
from reductions import (
    cnf_to_favorall,
    cnf_to_ue,
    dnf_to_ue,
    indist_pair,
    load_dimacs,
)
from schemas import BlockMap, CheckReport, StateVerdict
from settings import configure_logging

logger = logging.getLogger(__name__)
console = Console(highlight=False, soft_wrap=True)
err_console = Console(stderr=True, highlight=False, soft_wrap=True)

verbose_option = click.option("--verbose", is_flag=True, help="Debug logging on stderr.")


def handle_errors(func):
    """Turn every domain error into one diagnostic line and exit code 2."""

    @functools.wraps(func)
    def wrapper(*args, verbose: bool = False, **kwargs):
        configure_logging("DEBUG" if verbose else None)
        try:
            return func(*args, **kwargs)
        except (SyncCheckError, ValidationError, OSError) as exc:
            err_console.print(f"❌ error: {escape(str(exc))}")
            raise SystemExit(2)
        except RecursionError:
            err_console.print("❌ error: input nested too deeply")
            raise SystemExit(2)

    return wrapper


@click.group()
def main():
    """Model checker for CTL with synchronization operators."""


# ---------------------------------------------------------------- check


def verify_witness(sem: SemMap, state: int) -> bool:
    """Re-check the root witness at one state with the matching certificate check."""
    root, kripke = sem.root, sem.kripke
    witness = sem.witness(state)
    if isinstance(witness, SyncPoint) and isinstance(root, UntilForall):
        return verify_ua_witness(kripke, state, sem[root.left], sem[root.right], witness.k)
    if isinstance(witness, SyncPoint) and isinstance(root, UntilExists):
        return verify_ue_witness(kripke, state, sem[root.left], sem[root.right], witness.k)
    if isinstance(witness, Lasso) and isinstance(root, SeqSync):
        return verify_lasso(kripke, state, sem[root.arg], witness.n, witness.period)
    return False


@main.command("check")
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False))
@click.option("--formula", "formula_text", required=True)
@click.option("--state", default=None, help="State to query; defaults to init, then to all states.")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report.")
@click.option("--witness", "show_witness", is_flag=True, help="Show synchronization witnesses.")
@click.option("--complete-selfloops", is_flag=True, help="Add self-loops to dead-end states.")
@verbose_option
@handle_errors
def check_cmd(model_path, formula_text, state, as_json, show_witness, complete_selfloops):
    kripke = load_kripke(model_path, complete_selfloops=complete_selfloops)
    phi = parse(formula_text)
    started = time.perf_counter()
    sem = check(kripke, phi)
    elapsed = (time.perf_counter() - started) * 1000

    verdicts = []
    for i, name in enumerate(kripke.states):
        witness = sem.witness(i) if i in sem.sat else None
        if witness is not None and show_witness and not verify_witness(sem, i):
            logger.error("witness %s at %s failed verification", witness.render(), name)
        verdicts.append(
            StateVerdict(name=name, holds=i in sem.sat, witness=witness.render() if witness else None)
        )
    report = CheckReport(formula=pretty_print(phi), states=verdicts, time_ms=round(elapsed, 3))

    if state is None:
        state = kripke.init
    queried = [report.verdict(kripke.states[kripke.state_index(state)])] if state else report.states

    if as_json:
        click.echo(report.model_dump_json())
    else:
        for entry in queried:
            mark = "✅" if entry.holds else "❌"
            line = f"{mark} {entry.name}: {escape(report.formula)} {'holds' if entry.holds else 'fails'}"
            if show_witness and entry.witness is not None:
                line += f" (witness {entry.witness})"
            console.print(line)
        console.print(f"[dim]{report.time_ms:.1f} ms[/dim]")
    raise SystemExit(0 if all(entry.holds for entry in queried) else 1)


# ---------------------------------------------------------------- transformers


@main.command("quotient")
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False))
@click.option("-o", "--output", "out_path", required=True, type=click.Path(dir_okay=False))
@verbose_option
@handle_errors
def quotient_cmd(model_path, out_path):
    """Write the bisimulation quotient and OUT.blocks.json."""
    kripke = load_kripke(model_path)
    partition = bisim_partition(kripke)
    quotient, mapping = quotient_structure(kripke, partition)
    save_kripke(quotient, out_path, comments=[f"bisimulation quotient of {Path(model_path).name}"])
    blocks = BlockMap(
        blocks=[[kripke.states[i] for i in members] for members in partition.blocks],
        state_to_block=mapping,
    )
    Path(f"{out_path}.blocks.json").write_text(blocks.model_dump_json(indent=2), encoding="utf-8")
    console.print(f"✅ {kripke.size} states -> {quotient.size} blocks, written to {out_path}")


@main.command("stutter")
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False))
@click.option("-n", "factor", required=True, type=click.IntRange(min=1))
@click.option("-o", "--output", "out_path", required=True, type=click.Path(dir_okay=False))
@verbose_option
@handle_errors
def stutter_cmd(model_path, factor, out_path):
    kripke = load_kripke(model_path)
    stuttered = n_stuttering(kripke, factor)
    save_kripke(stuttered, out_path, comments=[f"{factor}-stuttering of {Path(model_path).name}"])
    console.print(f"✅ {stuttered.size} states written to {out_path}")


@main.command("reduce")
@click.argument("kind", type=click.Choice(["cnf-favorall", "cnf-ue", "dnf-ue", "indist"]))
@click.option("--dimacs", "dimacs_path", required=True, type=click.Path(dir_okay=False))
@click.option("-o", "--output", "out_path", required=True, type=click.Path(dir_okay=False))
@verbose_option
@handle_errors
def reduce_cmd(kind, dimacs_path, out_path):
    """Build a gadget structure; prints the initial state(s) to query."""
    psi = load_dimacs(dimacs_path, dnf=kind == "dnf-ue")
    if kind == "indist":
        fixed, gadget = indist_pair(psi)
        union = disjoint_union(fixed, gadget, "L_", "R_")
        save_kripke(union, out_path, comments=["indistinguishability pair: L_ fixed, R_ gadget"])
        console.print(f"✅ {union.size} states; compare L_{fixed.init} R_{gadget.init}")
        return
    build = {"cnf-favorall": cnf_to_favorall, "cnf-ue": cnf_to_ue, "dnf-ue": dnf_to_ue}[kind]
    kripke, initial = build(psi)
    save_kripke(kripke, out_path, comments=[f"{kind} gadget for {Path(dimacs_path).name}"])
    console.print(f"✅ {kripke.size} states; initial state {initial}")


# ---------------------------------------------------------------- analysis


@main.command("fuzz")
@click.option("--trials", required=True, type=click.IntRange(min=0))
@click.option("--states", "max_states", required=True, type=click.IntRange(min=1))
@click.option("--seed", required=True, type=int)
@click.option("--templates", default=None, help="Formulas separated by ';'.")
@click.option("--workers", default=None, type=click.IntRange(min=1))
@verbose_option
@handle_errors
def fuzz_cmd(trials, max_states, seed, templates, workers):
    """Exit 0 iff checker and oracle agree everywhere."""
    texts = [t.strip() for t in templates.split(";") if t.strip()] if templates else DEFAULT_TEMPLATES
    report = diff_fuzz(trials, max_states, texts, seed=seed, workers=workers)
    for m in report.mismatches:
        console.print(
            f"❌ trial {m.trial} ({m.digest}) {escape(m.formula)} at {m.state}: "
            f"checker={m.checker} oracle={m.oracle}"
        )
    mark = "✅" if report.ok else "❌"
    console.print(f"{mark} {report.trials} trials, {len(report.mismatches)} mismatches")
    raise SystemExit(0 if report.ok else 1)


@main.command("distinguish")
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False))
@click.option("--s1", required=True)
@click.option("--s2", required=True)
@click.option("--depth", required=True, type=click.IntRange(min=0))
@click.option("--no-next", is_flag=True, help="Leave out EX and AX.")
@click.option("--extended", is_flag=True, help="Also use GFE and GFA.")
@click.option("--json", "as_json", is_flag=True)
@verbose_option
@handle_errors
def distinguish_cmd(model_path, s1, s2, depth, no_next, extended, as_json):
    """Exit 0 with a formula true at exactly one of the states, 1 if none up to depth."""
    kripke = load_kripke(model_path)
    found = distinguish(kripke, s1, s2, depth, allow_next=not no_next, extended=extended)
    text: Optional[str] = pretty_print(found) if found is not None else None
    if as_json:
        click.echo(json.dumps({"s1": s1, "s2": s2, "depth": depth, "formula": text}))
    elif found is None:
        console.print(f"❌ no formula up to depth {depth} separates {s1} and {s2}")
    else:
        holder = s1 if check(kripke, found).holds(s1) else s2
        console.print(f"✅ {escape(text)} holds in {holder} only")
    raise SystemExit(0 if found is not None else 1)


if __name__ == "__main__":
    main()
