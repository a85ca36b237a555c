"""Demo host type used by the examples, the CLI and the tests.

``Person`` compares by name; ``PersonConverter`` maps it to the white-box
term ``person(Name)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from termbridge.conversion import Converter, pack_fields, register_codec, unpack_fields
from termbridge.errors import ConversionError
from termbridge.refbridge import register_equality
from termbridge.syntax import print_term
from termbridge.terms import Atom, Compound, Term

PERSON_FUNCTOR = "person"


@dataclass(eq=True)
class Person:
    name: str


class PersonConverter(Converter):
    host_type = Person
    functor = PERSON_FUNCTOR
    arity = 1

    def __init__(self) -> None:
        super().__init__()

    def to_term(self, person: Person, ctx=None) -> Compound:
        return Compound(PERSON_FUNCTOR, (Atom(person.name),))

    def from_term(self, term: Term, ctx=None) -> Person:
        name = term.args[0]
        if not isinstance(name, Atom):
            raise ConversionError("person name must be an atom", term=print_term(term),
                                  target=Person)
        return Person(name.name)


def _decode_person(data: bytes) -> Person:
    fields = unpack_fields(data)
    if len(fields) != 1:
        raise ValueError(f"expected 1 field, got {len(fields)}")
    return Person(fields[0])


register_codec(Person, lambda p: pack_fields(p.name), _decode_person, tag="termbridge.Person")
register_equality(Person)
