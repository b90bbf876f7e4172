"""Charts: named coordinate systems plus declared exponential atoms.

Every geometric object in the toolkit lives on exactly one chart.  An
exponential atom is an extra scalar symbol u with the derivation rule
du/d(base) = scale * u and zero derivative along every other variable;
it is the only transcendental ingredient the scalar arithmetic admits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InputError, UnknownIdentifierError


@dataclass(frozen=True)
class ExpAtom:
    name: str
    base: str
    scale: Fraction

    def __post_init__(self):
        object.__setattr__(self, "scale", Fraction(self.scale))


@dataclass(frozen=True)
class Chart:
    id: str
    variables: tuple
    atoms: tuple = ()
    # variables first, then atom names; exponent vectors of Poly follow this order
    symbols: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        variables = tuple(self.variables)
        atoms = tuple(self.atoms)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "atoms", atoms)
        names = variables + tuple(a.name for a in atoms)
        if len(set(names)) != len(names):
            raise InputError(f"chart {self.id!r}: duplicate symbol names")
        if not variables:
            raise InputError(f"chart {self.id!r}: needs at least one variable")
        for a in atoms:
            if a.base not in variables:
                raise InputError(
                    f"chart {self.id!r}: atom {a.name!r} has unknown base {a.base!r}")
        object.__setattr__(self, "symbols", names)

    @property
    def dimension(self):
        return len(self.variables)

    def index(self, name):
        """Position of a symbol (variable or atom) in exponent vectors."""
        try:
            return self.symbols.index(name)
        except ValueError:
            raise UnknownIdentifierError(
                f"{name!r} is not a symbol of chart {self.id!r}") from None

    def var_index(self, name):
        try:
            return self.variables.index(name)
        except ValueError:
            raise UnknownIdentifierError(
                f"{name!r} is not a variable of chart {self.id!r}") from None

    def atom_rules(self):
        """Map symbol index of each atom -> (base variable index, scale)."""
        offset = len(self.variables)
        return {
            offset + i: (self.variables.index(a.base), a.scale)
            for i, a in enumerate(self.atoms)
        }

    def extended(self, new_id, extra_variables=(), extra_atoms=()):
        """New chart with variables/atoms appended after the existing ones."""
        return Chart(new_id, self.variables + tuple(extra_variables),
                     self.atoms + tuple(extra_atoms))
