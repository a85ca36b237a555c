"""Conversion contexts: scoped, two-way translation between host objects and terms.

A context is an immutable stack of converters chained to a parent (by default
the built-in default context).  Turning a term back into an object walks a
fixed order:

1. a live symbolic association in the reference registry (identity kept),
2. the referent of a live ``ForeignRef``,
3. the ``serialized/1`` black-box form, decoded through the codec registry,
4. registered converters matching the term's shape, newest first, then the
   parent chain,
5. the built-in defaults (numbers, atoms, booleans, lists).
"""

from __future__ import annotations

import base64
import binascii
import struct
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from termbridge.errors import ConversionError, NoCodecError
from termbridge.refbridge import CleaningTask, RefRegistry, default_registry
from termbridge.syntax import print_term
from termbridge.terms import (
    NIL,
    Atom,
    Compound,
    FloatTerm,
    ForeignRef,
    IntTerm,
    Term,
    Var,
    list_items,
    make_list,
)

SERIALIZED_FUNCTOR = "serialized"


class Converter:
    """Two-way translation for one host type and one term shape.

    Subclass and define ``to_term(self, obj, ctx)`` and/or
    ``from_term(self, term, ctx)``, or pass plain functions to the
    constructor.  ``functor``/``arity`` declare the shape ``from_term``
    accepts; ``host_type`` is the type ``to_term`` handles and ``from_term``
    produces.
    """

    host_type: Optional[type] = None
    functor: Optional[str] = None
    arity: Optional[int] = None
    to_term: Optional[Callable[..., Term]] = None
    from_term: Optional[Callable[..., Any]] = None

    def __init__(self, host_type: Optional[type] = None, functor: Optional[str] = None,
                 arity: Optional[int] = None, *, to_term=None, from_term=None):
        if host_type is not None:
            self.host_type = host_type
        if functor is not None:
            self.functor = functor
        if arity is not None:
            self.arity = arity
        if to_term is not None:
            self.to_term = to_term
        if from_term is not None:
            self.from_term = from_term
        if self.to_term is None and self.from_term is None:
            raise ValueError("a converter needs at least one direction")

    def converts_object(self, obj: Any) -> bool:
        return self.to_term is not None and self.host_type is type(obj)

    def accepts_term(self, t: Term, target: Optional[type] = None) -> bool:
        if self.from_term is None:
            return False
        if target is not None and self.host_type is not None and target is not self.host_type:
            return False
        if self.functor is None:
            return True
        if self.arity in (None, 0) and isinstance(t, Atom):
            return t.name == self.functor
        return (isinstance(t, Compound) and t.functor == self.functor
                and (self.arity is None or len(t.args) == self.arity))

    def __repr__(self) -> str:
        name = getattr(self.host_type, "__name__", None)
        return f"<{type(self).__name__} {name} {self.functor}/{self.arity}>"


# -- codecs -----------------------------------------------------------------

@dataclass(frozen=True)
class Codec:
    tag: str
    host_type: type
    encode: Callable[[Any], bytes]
    decode: Callable[[bytes], Any]


_CODECS_BY_TYPE: Dict[type, Codec] = {}
_CODECS_BY_TAG: Dict[str, Codec] = {}


def register_codec(host_type: type, encode: Callable[[Any], bytes],
                   decode: Callable[[bytes], Any], tag: Optional[str] = None) -> Codec:
    tag = tag or f"{host_type.__module__}.{host_type.__qualname__}"
    codec = Codec(tag, host_type, encode, decode)
    _CODECS_BY_TYPE[host_type] = codec
    _CODECS_BY_TAG[tag] = codec
    return codec


def pack_fields(*fields: str) -> bytes:
    """Length-prefixed UTF-8 fields, for simple record codecs."""
    out = bytearray()
    for f in fields:
        data = f.encode("utf-8")
        out += struct.pack(">I", len(data)) + data
    return bytes(out)


def unpack_fields(data: bytes) -> List[str]:
    fields, pos = [], 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise ValueError("truncated field length")
        (n,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if pos + n > len(data):
            raise ValueError("truncated field")
        fields.append(data[pos:pos + n].decode("utf-8"))
        pos += n
    return fields


def encode_object(obj: Any) -> bytes:
    codec = _CODECS_BY_TYPE.get(type(obj))
    if codec is None:
        raise NoCodecError(f"no codec registered for {type(obj).__name__}", target=type(obj))
    tag = codec.tag.encode("utf-8")
    return struct.pack(">H", len(tag)) + tag + codec.encode(obj)


def decode_object(data: bytes) -> Any:
    if len(data) < 2:
        raise ConversionError("serialized payload too short")
    (n,) = struct.unpack_from(">H", data, 0)
    if 2 + n > len(data):
        raise ConversionError("serialized payload has a truncated type tag")
    tag = data[2:2 + n].decode("utf-8", errors="replace")
    codec = _CODECS_BY_TAG.get(tag)
    if codec is None:
        raise NoCodecError(f"no codec registered for tag {tag!r}")
    try:
        return codec.decode(data[2 + n:])
    except Exception as exc:
        raise ConversionError(f"codec {tag!r} rejected payload: {exc}") from exc


def serialize_term(obj: Any) -> Compound:
    payload = base64.b64encode(encode_object(obj)).decode("ascii")
    return Compound(SERIALIZED_FUNCTOR, (Atom(payload),))


def is_serialized_term(t: Term) -> bool:
    return (isinstance(t, Compound) and t.functor == SERIALIZED_FUNCTOR
            and len(t.args) == 1 and isinstance(t.args[0], Atom))


def deserialize_term(t: Term) -> Any:
    if not is_serialized_term(t):
        raise ConversionError("not a serialized term", term=print_term(t))
    try:
        data = base64.b64decode(t.args[0].name, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ConversionError(f"payload is not valid base-64: {exc}",
                              term=print_term(t)) from exc
    return decode_object(data)


# -- default conversions ----------------------------------------------------

def _default_to_term(obj: Any, ctx: "ConversionContext") -> Optional[Term]:
    tp = type(obj)
    if isinstance(obj, Term):
        return obj
    if tp is bool:
        return Atom("true" if obj else "false")
    if tp is int:
        return IntTerm(obj)
    if tp is float:
        return FloatTerm(obj)
    if tp is str:
        return Atom(obj)
    if tp in (list, tuple):
        return make_list(ctx.to_term(x) for x in obj)
    return None


_MISSING = object()


def _default_from_term(t: Term, target: Optional[type], ctx: "ConversionContext") -> Any:
    if target is not None and isinstance(target, type) and issubclass(target, Term):
        return t if isinstance(t, target) else _MISSING
    if target is bool:
        if isinstance(t, Atom) and t.name in ("true", "false"):
            return t.name == "true"
        return _MISSING
    if isinstance(t, IntTerm) and target in (None, int, object):
        return t.value
    if isinstance(t, IntTerm) and target is float:
        return float(t.value)
    if isinstance(t, FloatTerm) and target in (None, float, object):
        return t.value
    if target in (None, list, tuple, object):
        split = list_items(t)
        if split is not None and split[1] == NIL:
            items = [ctx.from_term(x) for x in split[0]]
            return tuple(items) if target is tuple else items
    if isinstance(t, Atom) and target in (None, str, object):
        return t.name
    return _MISSING


class ConversionContext:
    """Immutable bundle of converters plus a view onto a reference registry."""

    def __init__(self, converters: Sequence[Converter] = (),
                 parent: Optional["ConversionContext"] = None,
                 registry: Optional[RefRegistry] = None):
        self.converters: Tuple[Converter, ...] = tuple(converters)
        self.parent = parent
        self._registry = registry

    @property
    def registry(self) -> RefRegistry:
        if self._registry is not None:
            return self._registry
        if self.parent is not None:
            return self.parent.registry
        return default_registry()

    @property
    def bound(self) -> bool:
        """Whether a registry was chosen for this context or an ancestor."""
        ctx: Optional[ConversionContext] = self
        while ctx is not None:
            if ctx._registry is not None:
                return True
            ctx = ctx.parent
        return False

    def with_registry(self, registry: RefRegistry) -> "ConversionContext":
        return ConversionContext(self.converters, self.parent, registry)

    def chain(self) -> Iterator["ConversionContext"]:
        ctx: Optional[ConversionContext] = self
        while ctx is not None:
            yield ctx
            ctx = ctx.parent

    def _converters(self) -> Iterator[Converter]:
        for ctx in self.chain():
            yield from reversed(ctx.converters)

    # -- object -> term ----------------------------------------------------

    def to_term(self, obj: Any) -> Term:
        for conv in self._converters():
            if conv.converts_object(obj):
                return conv.to_term(obj, self)
        t = _default_to_term(obj, self)
        if t is None:
            raise ConversionError(f"no converter from {type(obj).__name__} to a term",
                                  target=type(obj), steps=("converters", "defaults"))
        return t

    # -- term -> object ----------------------------------------------------

    def from_term(self, t: Term, target: Optional[type] = None) -> Any:
        registry = self.registry
        tried = ["association"]
        entry = registry.lookup_key(t)
        if entry is not None:
            return entry.referent
        if isinstance(t, ForeignRef):
            return registry.referent_of(t)
        tried.append("reference")
        if is_serialized_term(t):
            obj = deserialize_term(t)
            if target is not None and not isinstance(obj, target):
                raise ConversionError("serialized object has the wrong type",
                                      term=print_term(t), target=target)
            return obj
        tried.append("serialized")
        for conv in self._converters():
            if conv.accepts_term(t, target):
                try:
                    return conv.from_term(t, self)
                except ConversionError:
                    raise
                except Exception as exc:
                    raise ConversionError(f"{conv!r} failed: {exc}", term=print_term(t),
                                          target=target, steps=tried + ["converters"]) from exc
        tried.append("converters")
        if not isinstance(t, Var):
            obj = _default_from_term(t, target, self)
            if obj is not _MISSING:
                return obj
        tried.append("defaults")
        raise ConversionError("no conversion applies", term=print_term(t), target=target,
                              steps=tried)

    # -- registry shortcuts ------------------------------------------------

    def new_ref_term(self, obj: Any, key: Optional[Compound] = None) -> Term:
        """Associate ``obj`` with ``key``, or with a generated opaque key."""
        if key is None:
            return self.registry.new_ref_term_generated(obj)
        return self.registry.new_ref_term(obj, key)

    def new_weak_ref_term(self, obj: Any, key: Compound,
                          task: Optional[CleaningTask] = None) -> Term:
        return self.registry.new_weak_ref_term(obj, key, task)

    def new_soft_ref_term(self, obj: Any, key: Compound,
                          task: Optional[CleaningTask] = None) -> Term:
        return self.registry.new_soft_ref_term(obj, key, task)

    def forget_ref_term(self, key: Term) -> bool:
        return self.registry.forget_ref_term(key)


DEFAULT_CONTEXT = ConversionContext()


class ContextBuilder:
    def __init__(self, parent: ConversionContext = DEFAULT_CONTEXT):
        self._converters: List[Converter] = []
        self._parent = parent
        self._registry: Optional[RefRegistry] = None

    @classmethod
    def create(cls, parent: ConversionContext = DEFAULT_CONTEXT) -> "ContextBuilder":
        return cls(parent)

    def register(self, converter: Converter) -> "ContextBuilder":
        self._converters.append(converter)
        return self

    def registry(self, registry: RefRegistry) -> "ContextBuilder":
        self._registry = registry
        return self

    def build(self) -> ConversionContext:
        return ConversionContext(self._converters, self._parent, self._registry)


def build_context(registrations: Iterable[Converter] = (),
                  registry: Optional[RefRegistry] = None,
                  parent: ConversionContext = DEFAULT_CONTEXT) -> ConversionContext:
    return ConversionContext(tuple(registrations), parent, registry)
