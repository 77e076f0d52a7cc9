"""Admissible weight families W = {W_n} and expansions of binomial powers.

A family assigns W_n : Z -> Q for every vertex valence n >= 0 subject to two
axioms: the n = 2 row is the delta function at 0, and W_n(i+1) - W_n(i-1) =
W_{n-1}(i) for n >= 1.  Those force W_1(-1) = 1, W_1(1) = -1, W_0(0) = -2,
W_0(+-2) = 1.  Rows with n >= 3 are genuinely extra data; the principal
built-in family takes the half-sum of the two one-sided geometric expansions
of (z - z^{-1})^{2-n}, which satisfies the symmetry W_n(-i) = (-1)^n W_n(i).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable

from .errors import FamilyDomainError, SchemaError
from .laurent import LaurentQTZ, binomial_power

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class AdmissibleFamily:
    name: str
    fn: Callable[[int, int], Fraction]
    symmetric: bool
    n_max: int | None = None  # None: defined for all n >= 0
    i_max: int | None = None

    def __call__(self, n: int, i: int) -> Fraction:
        if n < 0:
            raise FamilyDomainError("vertex valence must be nonnegative")
        if self.n_max is not None and n > self.n_max:
            raise FamilyDomainError(
                f"family {self.name!r} is only tabulated for n <= {self.n_max}"
            )
        if self.i_max is not None and abs(i) > self.i_max:
            raise FamilyDomainError(
                f"family {self.name!r} is only tabulated for |i| <= {self.i_max}"
            )
        return self.fn(n, i)


def _low_rows(n: int, i: int) -> Fraction | None:
    """The n <= 2 rows, identical for every admissible family."""
    if n == 0:
        return Fraction({0: -2, 2: 1, -2: 1}.get(i, 0))
    if n == 1:
        return Fraction({-1: 1, 1: -1}.get(i, 0))
    if n == 2:
        return Fraction(1 if i == 0 else 0)
    return None


def what_function(n: int, i: int) -> Fraction:
    """Principal family: half-sum of the two expansions of (z-z^{-1})^{2-n}.

    Closed form for n >= 3: with r = (|i| - (n-2))/2,
    W-hat_n(i) = 1/2 * C(n-3+r, r) for i >= n-2 with i == n (mod 2), and
    (-1)^n times that for i <= -(n-2); zero otherwise.
    """
    low = _low_rows(n, i)
    if low is not None:
        return low
    span = abs(i) - (n - 2)
    if span < 0 or span % 2:
        return Fraction(0)
    r = span // 2
    value = Fraction(comb(n - 3 + r, r), 2)
    if i < 0 and n % 2:
        value = -value
    return value


WHAT = AdmissibleFamily("what", what_function, symmetric=True)


def one_sided_function(n: int, i: int) -> Fraction:
    """The |z| < 1 geometric expansion alone; admissible but not symmetric."""
    low = _low_rows(n, i)
    if low is not None:
        return low
    # (z - z^{-1})^{2-n} = (-1)^n z^{n-2} (1 - z^2)^{-(n-2)} inside |z| < 1,
    # so only exponents j >= n-2 appear and W_n(i) is supported on i <= -(n-2).
    span = -i - (n - 2)
    if span < 0 or span % 2:
        return Fraction(0)
    r = span // 2
    value = Fraction(comb(n - 3 + r, r))
    if n % 2:
        value = -value
    return value


def one_sided_table(n_max: int, i_max: int) -> dict:
    """JSON-ready table for the one-sided family.

    Not registered as a built-in: alternate families enter through table
    files, which also exercises the loader's axiom validation.
    """
    family = AdmissibleFamily("one-sided", one_sided_function, symmetric=False)
    return family_to_table(family, n_max, i_max)


BUILTIN_FAMILIES = {"what": WHAT}


def validate_family(fn, n_max: int, i_max: int, symmetric: bool | None = None):
    """Check the two axioms (plus the forced low rows) on a finite grid.

    Raises SchemaError with a pinpointed message on the first violation.
    When symmetric is not None, also checks W_n(-i) = (-1)^n W_n(i) accordingly.
    """
    for i in range(-i_max, i_max + 1):
        if fn(2, i) != (1 if i == 0 else 0):
            raise SchemaError(f"axiom AD1 fails: W_2({i}) = {fn(2, i)}")
    for n in range(1, n_max + 1):
        for i in range(-(i_max - 1), i_max):
            lhs = fn(n, i + 1) - fn(n, i - 1)
            rhs = fn(n - 1, i)
            if lhs != rhs:
                raise SchemaError(
                    f"axiom AD2 fails at n={n}, i={i}: {lhs} != {rhs}"
                )
    if fn(1, -1) != 1 or fn(1, 1) != -1 or fn(0, 0) != -2 or fn(0, 2) != 1:
        raise SchemaError("forced n <= 1 rows are wrong")
    if symmetric:
        for n in range(n_max + 1):
            for i in range(i_max + 1):
                if fn(n, -i) != (-1) ** n * fn(n, i):
                    raise SchemaError(
                        f"claimed symmetry fails at n={n}, i={i}"
                    )


def family_from_table(
    values: dict[tuple[int, int], Fraction],
    name: str,
    n_max: int,
    i_max: int,
    symmetric: bool = False,
) -> AdmissibleFamily:
    """Build a family from a sparse table, validating the axioms on the grid."""
    table = {(int(n), int(i)): Fraction(v) for (n, i), v in values.items()}

    def fn(n: int, i: int) -> Fraction:
        return table.get((n, i), Fraction(0))

    validate_family(fn, n_max, i_max, symmetric=symmetric or None)
    return AdmissibleFamily(name, fn, symmetric=symmetric, n_max=n_max, i_max=i_max)


def load_family(path: str) -> AdmissibleFamily:
    """Load a family from its JSON table file (or name a built-in)."""
    if path in BUILTIN_FAMILIES:
        return BUILTIN_FAMILIES[path]
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read family file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"family file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("kind") != "family":
        raise SchemaError('family file needs "kind": "family"')
    try:
        n_max = int(doc["n_max"])
        i_max = int(doc["i_max"])
        raw = doc["values"]
        values = {}
        for key, val in raw.items():
            n_str, i_str = key.split(",")
            values[(int(n_str), int(i_str))] = Fraction(val)
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"malformed family table: {exc}") from exc
    return family_from_table(
        values,
        name=str(doc.get("name", "user")),
        n_max=n_max,
        i_max=i_max,
        symmetric=bool(doc.get("symmetric", False)),
    )


def family_to_table(family: AdmissibleFamily, n_max: int, i_max: int) -> dict:
    """Serialize a family's grid to the JSON table format."""
    values = {}
    for n in range(n_max + 1):
        for i in range(-i_max, i_max + 1):
            v = family(n, i)
            if v:
                values[f"{n},{i}"] = str(v)
    return {
        "schema": "plumb-roots/1",
        "kind": "family",
        "name": family.name,
        "symmetric": family.symmetric,
        "n_max": n_max,
        "i_max": i_max,
        "values": values,
    }


def expand_binomial(
    e: int, family: AdmissibleFamily | None = None, z_window=None
) -> LaurentQTZ:
    """(t^{1/2}z - t^{-1/2}z^{-1})^e as a Laurent polynomial.

    e >= 0 is an exact power.  e < 0 uses the family rows: the coefficient of
    z^j is W_{2-e}(-j) t^{j/2}, which needs a finite z-window since the rows
    have infinite support.
    """
    if e >= 0:
        poly = binomial_power(e)
        if z_window is None:
            return poly
        lo, hi = z_window
        return LaurentQTZ(
            {k: c for k, c in poly.items() if lo <= k[2] <= hi}
        )
    if family is None:
        raise FamilyDomainError("negative binomial powers need a weight family")
    if z_window is None:
        raise FamilyDomainError("negative binomial powers need a finite z-window")
    lo, hi = int(z_window[0]), int(z_window[1])
    n = 2 - e
    terms = {}
    for j in range(lo, hi + 1):
        c = family(n, -j)
        if c:
            terms[(Fraction(0), Fraction(j, 2), Fraction(j))] = c
    return LaurentQTZ(terms)


def prefactor_z_coefficient(e: int, j, family: AdmissibleFamily) -> LaurentQTZ:
    """Coefficient of z^j in (t^{1/2}z - t^{-1/2}z^{-1})^e, as a t-monomial.

    Defined for any integer e: positive powers extract from the exact
    expansion, negative ones from the family rows.  Non-integer j gives 0.
    """
    j = Fraction(j)
    if j.denominator != 1:
        return LaurentQTZ.zero()
    j = int(j)
    if e >= 0:
        poly = binomial_power(e)
        out = {}
        for (qe, te, ze), c in poly.items():
            if ze == j:
                out[(qe, te, Fraction(0))] = c
        return LaurentQTZ(out)
    c = family(2 - e, -j)
    if not c:
        return LaurentQTZ.zero()
    return LaurentQTZ.monomial(c, t=Fraction(j, 2))
