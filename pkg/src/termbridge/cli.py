"""REPL and script runner.

Commands (one per line)::

    ?- Goal.                          run a query, one solution per line
    :assert Clause.                   add a clause
    :retractall Head                  remove matching clauses
    :consult PATH                     load a program file
    :select Var Goal.                 convert each binding of Var to an object
    :mkperson NAME as OBJ             create a demo Person held by the session
    :refterm OBJ KEY                  strong association OBJ <-> KEY
    :weakrefterm OBJ KEY              weak association
    :softrefterm OBJ KEY              soft association
    :genref OBJ [as T]                generated opaque key jref(N)
    :jref OBJ [strong|weak|soft] as T [cleanup COMMAND]
    :serialize OBJ as T               serialized/1 term for OBJ
    :forget KEY                       drop an association
    :drop OBJ                         release the session's handle on OBJ
    :collect [--pressure]             run a collection pass
    :refs                             dump the reference registry
    :context NAME                     switch to (or create) a named context
    :register-person-converter        add PersonConverter to the active context

``$T`` inside a term stands for the term saved under ``T`` by ``:genref``,
``:jref`` or ``:serialize``; this is how reference terms, which have no
textual syntax, get into clauses and goals.
"""

from __future__ import annotations

import argparse
import re
import sys
from typing import Callable, Dict, List, Optional, TextIO

from termbridge.conversion import DEFAULT_CONTEXT, ConversionContext, serialize_term
from termbridge.demo import Person, PersonConverter
from termbridge.engine import DEFAULT_DEPTH_LIMIT, Engine, Query
from termbridge.errors import ParseError, TermBridgeError
from termbridge.refbridge import RefRegistry
from termbridge.syntax import parse_clause, parse_term, print_term
from termbridge.terms import Strength, Term, Var
from termbridge.unify import Substitution

EXIT_OK, EXIT_USER_ERROR, EXIT_IO_ERROR = 0, 1, 2

_SESSION_REF = re.compile(r"\$([A-Za-z_][A-Za-z0-9_]*)")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class CommandError(TermBridgeError):
    """Malformed REPL command or unknown session name."""


class Session:
    def __init__(self, depth_limit: int = DEFAULT_DEPTH_LIMIT):
        self.registry = RefRegistry()
        self.engine = Engine(self.registry, depth_limit=depth_limit)
        self.contexts: Dict[str, ConversionContext] = {
            "default": ConversionContext(parent=DEFAULT_CONTEXT, registry=self.registry)}
        self.active = "default"
        self.objects: Dict[str, object] = {}
        self.terms: Dict[str, Term] = {}
        self.last_query: Optional[Query] = None
        self.errors = 0
        self.last_failed = False
        self._task_output: List[str] = []
        self._commands: Dict[str, Callable[[str], str]] = {
            "consult": self._consult,
            "assert": self._assert,
            "retractall": self._retractall,
            "select": self._select,
            "mkperson": self._mkperson,
            "refterm": lambda arg: self._associate(arg, Strength.STRONG),
            "weakrefterm": lambda arg: self._associate(arg, Strength.WEAK),
            "softrefterm": lambda arg: self._associate(arg, Strength.SOFT),
            "genref": self._genref,
            "jref": self._jref,
            "serialize": self._serialize,
            "forget": self._forget,
            "drop": self._drop,
            "collect": self._collect,
            "refs": self._refs,
            "context": self._context,
            "register-person-converter": self._register_person_converter,
            "help": lambda arg: __doc__.strip(),
        }

    @property
    def context(self) -> ConversionContext:
        return self.contexts[self.active]

    # -- entry point -------------------------------------------------------

    def eval(self, line: str) -> str:
        """Evaluate one line and return its rendered output.

        User errors are rendered, counted and never raised.
        """
        self.last_failed = False
        line = line.strip()
        if not line or line.startswith("%"):
            return ""
        try:
            if line.startswith("?-"):
                return self._query(line[2:])
            if line.startswith(":"):
                name, _, arg = line[1:].partition(" ")
                command = self._commands.get(name)
                if command is None:
                    raise CommandError(f"unknown command :{name}")
                return command(arg.strip())
            raise CommandError("expected '?- Goal.' or a :command")
        except (TermBridgeError, KeyError, ValueError, TypeError) as exc:
            self.errors += 1
            self.last_failed = True
            return _render_error(exc)

    # -- helpers -----------------------------------------------------------

    def _expand(self, text: str):
        """Replace ``$T`` by placeholder variables; returns text and bindings."""
        bindings = {}

        def expand(m: "re.Match[str]") -> str:
            name = m.group(1)
            if name not in self.terms:
                raise CommandError(f"no saved term ${name}")
            var = Var(f"_S_{name}")
            bindings[var] = self.terms[name]
            return var.name

        return _SESSION_REF.sub(expand, text), Substitution(bindings)

    def _term(self, text: str) -> Term:
        text, bindings = self._expand(text)
        return bindings.apply(parse_term(text))

    def _object(self, name: str) -> object:
        if name not in self.objects:
            raise CommandError(f"no object named {name!r}")
        return self.objects[name]

    def _save_name(self, name: str) -> str:
        if not _NAME.match(name):
            raise CommandError(f"invalid name {name!r}")
        return name

    def _describe(self, obj: object) -> str:
        text = repr(obj)
        for name, held in self.objects.items():
            if held is obj:
                return f"{text} (identical to {name})"
        for name, held in self.objects.items():
            if type(held) is type(obj) and held == obj:
                return f"{text} (equal to {name}, not identical)"
        return text

    # -- commands ----------------------------------------------------------

    def _query(self, text: str) -> str:
        goal = self._term(text)
        self.last_query = query = self.engine.query(goal, self.context)
        lines = []
        for sol in query:
            lines.append(sol.render())
        return "\n".join(lines) if lines else "false"

    def _consult(self, arg: str) -> str:
        if not arg:
            raise CommandError("usage: :consult PATH")
        try:
            n = self.engine.consult(arg)
        except OSError as exc:
            raise CommandError(f"cannot read {arg}: {exc.strerror or exc}") from None
        return f"consulted {n} clauses from {arg}"

    def _assert(self, arg: str) -> str:
        text, bindings = self._expand(arg)
        if not text.rstrip().endswith("."):
            text += "."
        clause = parse_clause(text)
        self.engine.assertz(bindings.apply(clause.head), bindings.apply(clause.body))
        return "ok"

    def _retractall(self, arg: str) -> str:
        n = self.engine.retract_all(self._term(arg))
        return f"retracted {n}"

    def _select(self, arg: str) -> str:
        var, _, goal = arg.partition(" ")
        if not goal:
            raise CommandError("usage: :select Var Goal.")
        self.last_query = query = self.engine.query(self._term(goal), self.context)
        lines = []
        try:
            for obj in query.select_object(var):
                lines.append(self._describe(obj))
        except TermBridgeError as exc:
            self.errors += 1
            self.last_failed = True
            lines.append(_render_error(exc))
        return "\n".join(lines) if lines else "false"

    def _mkperson(self, arg: str) -> str:
        m = re.fullmatch(r"(\S+)\s+as\s+(\S+)", arg)
        if m is None:
            raise CommandError("usage: :mkperson NAME as OBJ")
        name, obj = m.group(1), self._save_name(m.group(2))
        self.objects[obj] = Person(name)
        return f"{obj} = {self.objects[obj]!r}"

    def _associate(self, arg: str, strength: Strength) -> str:
        obj_name, _, key_text = arg.partition(" ")
        if not key_text:
            raise CommandError("usage: :refterm OBJ KEY")
        key = self._term(key_text)
        obj = self._object(obj_name)
        if strength is Strength.STRONG:
            t = self.registry.new_ref_term(obj, key)
        elif strength is Strength.WEAK:
            t = self.registry.new_weak_ref_term(obj, key)
        else:
            t = self.registry.new_soft_ref_term(obj, key)
        return print_term(t)

    def _genref(self, arg: str) -> str:
        m = re.fullmatch(r"(\S+)(?:\s+as\s+(\S+))?", arg)
        if m is None:
            raise CommandError("usage: :genref OBJ [as T]")
        t = self.registry.new_ref_term_generated(self._object(m.group(1)))
        if m.group(2):
            self.terms[self._save_name(m.group(2))] = t
        return print_term(t)

    def _jref(self, arg: str) -> str:
        m = re.fullmatch(r"(\S+)(?:\s+(strong|weak|soft))?\s+as\s+(\S+)(?:\s+cleanup\s+(.+))?", arg)
        if m is None:
            raise CommandError("usage: :jref OBJ [strong|weak|soft] as T [cleanup COMMAND]")
        obj = self._object(m.group(1))
        strength = Strength(m.group(2) or "strong")
        name = self._save_name(m.group(3))
        task = self._cleanup(m.group(4)) if m.group(4) else None
        t = self.registry.make_jref(obj, strength, task)
        self.terms[name] = t
        return print_term(t)

    def _cleanup(self, command: str) -> Callable[[], None]:
        def task() -> None:
            out = self.eval(command)
            self._task_output.append(f"cleanup: {command} -> {out}")
        return task

    def _serialize(self, arg: str) -> str:
        m = re.fullmatch(r"(\S+)\s+as\s+(\S+)", arg)
        if m is None:
            raise CommandError("usage: :serialize OBJ as T")
        t = serialize_term(self._object(m.group(1)))
        self.terms[self._save_name(m.group(2))] = t
        return print_term(t)

    def _forget(self, arg: str) -> str:
        return "true" if self.registry.forget_ref_term(self._term(arg)) else "false"

    def _drop(self, arg: str) -> str:
        self._object(arg)
        del self.objects[arg]
        return f"dropped {arg}"

    def _collect(self, arg: str) -> str:
        if arg not in ("", "--pressure"):
            raise CommandError("usage: :collect [--pressure]")
        self._task_output = []
        sweep = self.registry.run_collection_pass(pressure=arg == "--pressure")
        lines = [f"collected [{', '.join(map(str, sweep))}]"]
        lines.extend(self._task_output)
        for id_, exc in sweep.errors.items():
            lines.append(f"cleanup {id_} failed: {exc}")
        self._task_output = []
        return "\n".join(lines)

    def _refs(self, arg: str) -> str:
        return "\n".join(self.registry.dump())

    def _context(self, arg: str) -> str:
        name = self._save_name(arg)
        if name not in self.contexts:
            self.contexts[name] = ConversionContext(parent=DEFAULT_CONTEXT, registry=self.registry)
        self.active = name
        return f"context {name}"

    def _register_person_converter(self, arg: str) -> str:
        ctx = self.context
        self.contexts[self.active] = ConversionContext(
            ctx.converters + (PersonConverter(),), ctx.parent, self.registry)
        return f"registered PersonConverter in {self.active}"


def _render_error(exc: BaseException) -> str:
    if isinstance(exc, KeyError) and exc.args:
        message = str(exc.args[0])
    else:
        message = str(exc)
    return f"error: {type(exc).__name__}: {message}"


def repl_eval(state: Session, line: str) -> str:
    return state.eval(line)


def run_script(path: str, session: Optional[Session] = None,
               out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    session = session or Session()
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as exc:
        err.write(f"error: cannot read script {path}: {exc.strerror or exc}\n")
        return EXIT_IO_ERROR
    before = session.errors
    for line in lines:
        text = session.eval(line)
        if not text:
            continue
        (err if session.last_failed else out).write(text + "\n")
    return EXIT_OK if session.errors == before else EXIT_USER_ERROR


def interactive(session: Session, stdin: TextIO = sys.stdin, out: TextIO = sys.stdout) -> int:
    prompt = stdin.isatty()
    before = session.errors
    while True:
        if prompt:
            out.write("| ")
            out.flush()
        line = stdin.readline()
        if not line:
            break
        text = session.eval(line)
        if text:
            out.write(text + "\n")
    return EXIT_OK if session.errors == before else EXIT_USER_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="termbridge", description=__doc__.splitlines()[0])
    parser.add_argument("--script", metavar="PATH", help="run the commands in PATH and exit")
    parser.add_argument("--consult", metavar="PATH", action="append", default=[],
                        help="load a program file first (repeatable)")
    parser.add_argument("--depth-limit", type=int, default=DEFAULT_DEPTH_LIMIT,
                        help="maximum resolution depth (default %(default)s)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    session = Session(depth_limit=args.depth_limit)
    for path in args.consult:
        try:
            session.engine.consult(path)
        except OSError as exc:
            sys.stderr.write(f"error: cannot read {path}: {exc.strerror or exc}\n")
            return EXIT_IO_ERROR
        except ParseError as exc:
            sys.stderr.write(_render_error(exc) + "\n")
            return EXIT_USER_ERROR
    if args.script:
        return run_script(args.script, session)
    return interactive(session)


if __name__ == "__main__":
    sys.exit(main())
