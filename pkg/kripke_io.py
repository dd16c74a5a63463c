# kripke_io.py
"""
Reader and writer for the line-based Kripke text format

    # comment to end of line
    kripke
    props <prop> ...
    state <name> [<prop> ...]
    init <name>
    edge <from> <to> [<to> ...]

Names match [A-Za-z0-9_]+; edges may repeat; unknown names are errors.
The optional `props` line declares propositions that may label no state;
the writer emits it only when such a proposition exists.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import ValidationError

from errors import ModelFormatError, TotalityError
from kripke import NAME_RE, KripkeStructure

logger = logging.getLogger(__name__)


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_kripke_text(text: str, complete_selfloops: bool = False) -> KripkeStructure:
    """Parse the text format; dead-end states are rejected unless repaired with self-loops."""
    states: List[str] = []
    labels: Dict[str, List[str]] = {}
    props: List[str] = []
    succ: Dict[str, List[str]] = {}
    init: Optional[str] = None
    header_seen = False

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        words = line.split()
        if not header_seen:
            if words != ["kripke"]:
                raise ModelFormatError("first line must be 'kripke'", lineno)
            header_seen = True
            continue
        keyword, args = words[0], words[1:]
        for name in args:
            if not NAME_RE.fullmatch(name):
                raise ModelFormatError(f"invalid name '{name}'", lineno)

        if keyword == "state":
            if not args:
                raise ModelFormatError("state line needs a name", lineno)
            name, state_props = args[0], args[1:]
            if name in labels:
                raise ModelFormatError(f"duplicate state '{name}'", lineno)
            states.append(name)
            labels[name] = []
            succ[name] = []
            for p in state_props:
                if p not in labels[name]:
                    labels[name].append(p)
                if p not in props:
                    props.append(p)
        elif keyword == "props":
            for p in args:
                if p not in props:
                    props.append(p)
        elif keyword == "init":
            if len(args) != 1:
                raise ModelFormatError("init line needs exactly one name", lineno)
            if init is not None:
                raise ModelFormatError("init given twice", lineno)
            if args[0] not in labels:
                raise ModelFormatError(f"unknown state '{args[0]}'", lineno)
            init = args[0]
        elif keyword == "edge":
            if len(args) < 2:
                raise ModelFormatError("edge line needs a source and at least one target", lineno)
            for name in args:
                if name not in labels:
                    raise ModelFormatError(f"unknown state '{name}'", lineno)
            src = args[0]
            for dst in args[1:]:
                if dst not in succ[src]:
                    succ[src].append(dst)
        else:
            raise ModelFormatError(f"unknown keyword '{keyword}'", lineno)

    if not header_seen:
        raise ModelFormatError("missing 'kripke' header")
    if not states:
        raise ModelFormatError("no states declared")

    dead = [name for name in states if not succ[name]]
    if dead:
        if not complete_selfloops:
            raise TotalityError(dead)
        logger.info("adding self-loops to dead-end states: %s", ", ".join(dead))
        for name in dead:
            succ[name].append(name)

    index = {name: i for i, name in enumerate(states)}
    try:
        return KripkeStructure(
            states=tuple(states),
            props=tuple(props),
            labels=tuple(frozenset(labels[name]) for name in states),
            successors=tuple(tuple(sorted(index[d] for d in succ[name])) for name in states),
            init=init,
        )
    except ValidationError as exc:
        raise ModelFormatError(str(exc)) from exc


def load_kripke(path: Union[str, Path], complete_selfloops: bool = False) -> KripkeStructure:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"{path} is not valid UTF-8 (byte {exc.start})") from exc
    return parse_kripke_text(text, complete_selfloops=complete_selfloops)


def dump_kripke_text(kripke: KripkeStructure, comments: Optional[List[str]] = None) -> str:
    lines = [f"# {c}" for c in comments or []]
    lines.append("kripke")
    used = set().union(*kripke.labels)
    if any(p not in used for p in kripke.props):
        lines.append(" ".join(["props"] + list(kripke.props)))
    for name, label in zip(kripke.states, kripke.labels):
        ordered = [p for p in kripke.props if p in label]
        lines.append(" ".join(["state", name] + ordered))
    if kripke.init is not None:
        lines.append(f"init {kripke.init}")
    for name, succ in zip(kripke.states, kripke.successors):
        lines.append(" ".join(["edge", name] + [kripke.states[j] for j in succ]))
    return "\n".join(lines) + "\n"


def save_kripke(
    kripke: KripkeStructure, path: Union[str, Path], comments: Optional[List[str]] = None
) -> None:
    Path(path).write_text(dump_kripke_text(kripke, comments), encoding="utf-8")
