"""Registry of associations between host objects and terms.

An association ties a host object either to a symbolic key (a ground
compound chosen by the caller or generated as ``jref(N)``) or to a
``ForeignRef`` term.  Each carries a life-span policy:

* strong: the registry owns the object; only ``forget_ref_term`` ends it.
* weak: invalidated by the next collection pass once nothing outside the
  registry holds the object.
* soft: like weak, but only swept when the pass runs under memory pressure.

Reclamation never happens behind the caller's back: entries change state
only inside ``run_collection_pass``.  Outside ownership is measured with
CPython reference counts, so objects kept alive by a cleaning task's own
closure are never considered unowned.
"""

from __future__ import annotations

import itertools
import logging
import operator
import resource
import sys
from typing import Any, Callable, Dict, Iterator, List, Optional

from termbridge.errors import DeadReferenceError, KeyConflictError, NotAReferenceError
from termbridge.syntax import print_term
from termbridge.terms import Compound, ForeignRef, IntTerm, RefHandle, Strength, Term, is_ground

log = logging.getLogger(__name__)

GENERATED_FUNCTOR = "jref"

CleaningTask = Callable[[], Any]

_EQUALITY: Dict[type, Callable[[Any, Any], bool]] = {}


def register_equality(tp: type, eq: Callable[[Any, Any], bool] = operator.eq) -> None:
    """Declare the value-equality contract used when unifying references to ``tp``."""
    _EQUALITY[tp] = eq


class RefEntry:
    __slots__ = ("id", "key", "strength", "referent", "task", "live", "generated")

    def __init__(self, id: int, key: Term, strength: Strength, referent: Any,
                 task: Optional[CleaningTask] = None, generated: bool = False):
        self.id = id
        self.key = key
        self.strength = strength
        self.referent = referent
        self.task = task
        self.live = True
        self.generated = generated

    def __repr__(self) -> str:
        state = "live" if self.live else "dead"
        return f"<RefEntry {self.id} {self.strength} {state} {print_term(self.key)}>"


def _refcount(entry: RefEntry) -> int:
    return sys.getrefcount(entry.referent)


def _calibrate() -> int:
    probe = RefEntry(0, Compound("probe", (IntTerm(0),)), Strength.WEAK, object())
    return _refcount(probe)


# references seen by _refcount for an object held by exactly one entry
_BASELINE = _calibrate()


class Sweep(list):
    """Ids invalidated by one collection pass, in invalidation order.

    ``errors`` maps entry id to the exception its cleaning task raised.
    """

    def __init__(self, ids=(), errors=None):
        super().__init__(ids)
        self.errors: Dict[int, BaseException] = dict(errors or {})


def _rss_bytes() -> int:
    # ru_maxrss is in KiB on Linux
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


class RefRegistry:
    """Associations between host objects and terms, with life-span policies.

    Not thread-safe: registrations, forgets and collection passes must be
    serialised with each other and with query iteration.
    """

    def __init__(self, memory_threshold: Optional[int] = None,
                 memory_probe: Optional[Callable[[], int]] = None):
        self.memory_threshold = memory_threshold
        self.memory_probe = memory_probe or _rss_bytes
        self._entries: Dict[int, RefEntry] = {}
        self._key_index: Dict[Term, int] = {}
        self._identity_index: Dict[int, int] = {}
        self._strong_jrefs: Dict[int, int] = {}
        self._ids = itertools.count(1)
        self._equality: Dict[type, Callable[[Any, Any], bool]] = {}

    # -- registration ------------------------------------------------------

    def register_equality(self, tp: type, eq: Callable[[Any, Any], bool] = operator.eq) -> None:
        """Per-registry override of the equality contract for ``tp``."""
        self._equality[tp] = eq

    def _new_entry(self, key: Optional[Term], strength: Strength, obj: Any,
                   task: Optional[CleaningTask] = None, generated: bool = False) -> RefEntry:
        id_ = next(self._ids)
        if key is None:
            key = ForeignRef(RefHandle(id_, strength))
        entry = RefEntry(id_, key, strength, obj, task, generated)
        self._entries[id_] = entry
        return entry

    def _associate(self, obj: Any, key: Term, strength: Strength,
                   task: Optional[CleaningTask]) -> Term:
        if not isinstance(key, Compound):
            raise TypeError(f"association key must be a compound term, got {key!r}")
        if not is_ground(key):
            raise ValueError(f"association key must be ground: {print_term(key)}")
        existing = self._lookup(key)
        if existing is not None:
            if existing.referent is not obj:
                raise KeyConflictError(
                    f"{print_term(key)} is already associated with another object")
            if existing.strength is strength:
                if task is not None:
                    existing.task = task
                return key
            self._remove(existing)
        entry = self._new_entry(key, strength, obj, task)
        self._key_index[key] = entry.id
        return key

    def new_ref_term(self, obj: Any, key: Compound) -> Term:
        """Strongly associate ``obj`` with ``key``; returns ``key``."""
        return self._associate(obj, key, Strength.STRONG, None)

    def new_weak_ref_term(self, obj: Any, key: Compound,
                          task: Optional[CleaningTask] = None) -> Term:
        return self._associate(obj, key, Strength.WEAK, task)

    def new_soft_ref_term(self, obj: Any, key: Compound,
                          task: Optional[CleaningTask] = None) -> Term:
        return self._associate(obj, key, Strength.SOFT, task)

    def new_ref_term_generated(self, obj: Any) -> Term:
        """Opaque key ``jref(N)`` for ``obj``, stable for a given object identity."""
        id_ = self._identity_index.get(id(obj))
        if id_ is not None:
            return self._entries[id_].key
        entry = self._new_entry(None, Strength.STRONG, obj, generated=True)
        key: Term = Compound(GENERATED_FUNCTOR, (IntTerm(entry.id),))
        if key in self._key_index:
            # a caller claimed this jref(N) by hand; it keeps it
            del self._entries[entry.id]
            return self.new_ref_term_generated(obj)
        entry.key = key
        self._key_index[key] = entry.id
        self._identity_index[id(obj)] = entry.id
        return key

    def make_jref(self, obj: Any, strength: Strength = Strength.STRONG,
                  task: Optional[CleaningTask] = None) -> ForeignRef:
        """Wrap ``obj`` in a ForeignRef term.

        Strong references without a task are shared per object identity;
        weak and soft ones get a fresh handle on every call.
        """
        strength = Strength(strength)
        if strength is Strength.STRONG and task is None:
            id_ = self._strong_jrefs.get(id(obj))
            if id_ is not None:
                return self._entries[id_].key  # type: ignore[return-value]
        entry = self._new_entry(None, strength, obj, task)
        if strength is Strength.STRONG and task is None:
            self._strong_jrefs[id(obj)] = entry.id
        return entry.key  # type: ignore[return-value]

    def jref(self, obj: Any) -> ForeignRef:
        return self.make_jref(obj, Strength.STRONG)

    def weak_jref(self, obj: Any, task: Optional[CleaningTask] = None) -> ForeignRef:
        return self.make_jref(obj, Strength.WEAK, task)

    def soft_jref(self, obj: Any, task: Optional[CleaningTask] = None) -> ForeignRef:
        return self.make_jref(obj, Strength.SOFT, task)

    def forget_ref_term(self, key: Term) -> bool:
        """Drop the association for ``key``; cleaning tasks do not run."""
        if isinstance(key, ForeignRef):
            entry = self._entries.get(key.id)
        else:
            entry = self._lookup(key)
        if entry is None:
            return False
        self._remove(entry)
        return True

    def _remove(self, entry: RefEntry) -> None:
        self._entries.pop(entry.id, None)
        if self._key_index.get(entry.key) == entry.id:
            del self._key_index[entry.key]
        self._drop_identity(entry)
        entry.live = False
        entry.referent = None

    def _drop_identity(self, entry: RefEntry) -> None:
        if entry.referent is None:
            return
        oid = id(entry.referent)
        if self._identity_index.get(oid) == entry.id:
            del self._identity_index[oid]
        if self._strong_jrefs.get(oid) == entry.id:
            del self._strong_jrefs[oid]

    # -- lookup ------------------------------------------------------------

    def _lookup(self, key: Term) -> Optional[RefEntry]:
        try:
            id_ = self._key_index.get(key)
        except TypeError:
            return None
        return None if id_ is None else self._entries.get(id_)

    def lookup_key(self, t: Term) -> Optional[RefEntry]:
        """The live association whose symbolic key is ``t``, if any."""
        if isinstance(t, ForeignRef):
            return None
        return self._lookup(t)

    def entry(self, id_: int) -> Optional[RefEntry]:
        return self._entries.get(id_)

    def is_live(self, id_: int) -> bool:
        entry = self._entries.get(id_)
        return entry is not None and entry.live

    def referent_of(self, t: Term) -> Any:
        if isinstance(t, ForeignRef):
            entry = self._entries.get(t.id)
            if entry is None or not entry.live:
                raise DeadReferenceError(f"reference {t.id} is no longer live", term=t)
            return entry.referent
        entry = self._lookup(t)
        if entry is None:
            raise NotAReferenceError(f"{print_term(t)} is not a reference")
        return entry.referent

    def referents_equal(self, a: RefHandle, b: RefHandle) -> bool:
        ea, eb = self._entries.get(a.id), self._entries.get(b.id)
        if ea is None or eb is None or not (ea.live and eb.live):
            return False
        if a.id == b.id or ea.referent is eb.referent:
            return True
        x, y = ea.referent, eb.referent
        if type(x) is not type(y):
            return False
        eq = self._equality.get(type(x)) or _EQUALITY.get(type(x))
        return bool(eq(x, y)) if eq is not None else False

    def __iter__(self) -> Iterator[RefEntry]:
        return iter(sorted(self._entries.values(), key=lambda e: e.id))

    def __len__(self) -> int:
        return len(self._entries)

    def dump(self) -> List[str]:
        """One ``id strength live|dead key`` line per entry, by id."""
        return [f"{e.id} {e.strength} {'live' if e.live else 'dead'} {print_term(e.key)}"
                for e in self]

    # -- reclamation -------------------------------------------------------

    def under_pressure(self) -> bool:
        return self.memory_threshold is not None and self.memory_probe() > self.memory_threshold

    def run_collection_pass(self, pressure: bool = False) -> Sweep:
        """Invalidate unowned weak (and, under pressure, soft) entries.

        Cleaning tasks run after the sweep, once each, in invalidation order;
        a failing task is logged and recorded without stopping the others.
        """
        pressure = pressure or self.under_pressure()
        live = [e for e in self if e.live]
        holders: Dict[int, int] = {}
        strongly_held = set()
        for e in live:
            oid = id(e.referent)
            holders[oid] = holders.get(oid, 0) + 1
            if e.strength is Strength.STRONG:
                strongly_held.add(oid)

        doomed = []
        for e in live:
            if e.strength is Strength.STRONG:
                continue
            if e.strength is Strength.SOFT and not pressure:
                continue
            oid = id(e.referent)
            if oid in strongly_held:
                continue
            outside = _refcount(e) - _BASELINE - (holders[oid] - 1)
            if outside <= 0:
                doomed.append(e)
        del live

        for e in doomed:
            if self._key_index.get(e.key) == e.id:
                del self._key_index[e.key]
            self._drop_identity(e)
            e.live = False
            e.referent = None

        sweep = Sweep(e.id for e in doomed)
        for e in doomed:
            task, e.task = e.task, None
            if task is None:
                continue
            try:
                task()
            except Exception as exc:
                log.warning("cleaning task for reference %d failed: %s", e.id, exc)
                sweep.errors[e.id] = exc
        return sweep


_default: Optional[RefRegistry] = None


def default_registry() -> RefRegistry:
    """The process-wide registry shared by contexts and engines by default."""
    global _default
    if _default is None:
        _default = RefRegistry()
    return _default
