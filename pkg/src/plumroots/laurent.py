"""Exact three-variable Laurent polynomials and lazy knot weights.

Terms live in q^a t^b z^c with Fraction exponents (half-integer t-powers are
the norm, and z-exponents can be rational when the ambient manifold is not an
integer homology sphere) and Fraction coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

_HALF = Fraction(1, 2)


def _key(q, t, z):
    return (Fraction(q), Fraction(t), Fraction(z))


class LaurentQTZ:
    """Immutable exact Laurent polynomial in q, t, z."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff:
                    key = _key(*key)
                    clean[key] = clean.get(key, Fraction(0)) + coeff
        object.__setattr__(self, "_terms", {k: c for k, c in clean.items() if c})

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def one(cls):
        return cls.monomial(1)

    @classmethod
    def monomial(cls, coeff, q=0, t=0, z=0):
        return cls({(q, t, z): coeff})

    # -- ring structure ----------------------------------------------------
    def __add__(self, other):
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return LaurentQTZ(out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return LaurentQTZ({k: -c for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return LaurentQTZ({k: c * other for k, c in self._terms.items()})
        out = {}
        for (q1, t1, z1), c1 in self._terms.items():
            for (q2, t2, z2), c2 in other._terms.items():
                k = (q1 + q2, t1 + t2, z1 + z2)
                out[k] = out.get(k, Fraction(0)) + c1 * c2
        return LaurentQTZ(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are handled by weight families")
        result = LaurentQTZ.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, LaurentQTZ) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    # -- views -------------------------------------------------------------
    def items(self):
        """Terms as ((q, t, z), coeff), sorted by exponent triple."""
        return tuple(sorted(self._terms.items()))

    def coefficient(self, q=None, t=None, z=None):
        """Sum of coefficients of the terms matching the fixed exponents."""
        total = Fraction(0)
        for (qe, te, ze), c in self._terms.items():
            if q is not None and qe != Fraction(q):
                continue
            if t is not None and te != Fraction(t):
                continue
            if z is not None and ze != Fraction(z):
                continue
            total += c
        return total

    def q_support(self):
        return tuple(sorted({k[0] for k in self._terms}))

    def z_support(self):
        return tuple(sorted({k[2] for k in self._terms}))

    # -- substitutions -----------------------------------------------------
    def specialize_t(self):
        """Set t = 1."""
        out = {}
        for (q, _t, z), c in self._terms.items():
            k = (q, Fraction(0), z)
            out[k] = out.get(k, Fraction(0)) + c
        return LaurentQTZ(out)

    def specialize_z(self):
        """Set z = 1."""
        out = {}
        for (q, t, _z), c in self._terms.items():
            k = (q, t, Fraction(0))
            out[k] = out.get(k, Fraction(0)) + c
        return LaurentQTZ(out)

    def invert_t(self):
        return LaurentQTZ({(q, -t, z): c for (q, t, z), c in self._terms.items()})

    def invert_z(self):
        return LaurentQTZ({(q, t, -z): c for (q, t, z), c in self._terms.items()})

    def truncate_q(self, q_max):
        q_max = Fraction(q_max)
        return LaurentQTZ(
            {k: c for k, c in self._terms.items() if k[0] <= q_max}
        )

    # -- rendering ---------------------------------------------------------
    def render(self) -> str:
        """Human string like ``1/2*q^(21/2) - 1/2*q^(23/2)``."""
        if not self._terms:
            return "0"
        pieces = []
        for (q, t, z), c in self.items():
            factors = []
            for sym, e in (("q", q), ("t", t), ("z", z)):
                if e == 0:
                    continue
                if e == 1:
                    factors.append(sym)
                elif e.denominator == 1 and e > 0:
                    factors.append(f"{sym}^{e}")
                else:
                    factors.append(f"{sym}^({e})")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            pieces.append(("-" if c < 0 else "+", body))
        sign, body = pieces[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"LaurentQTZ({self.render()})"

    # -- structured division -----------------------------------------------
    def divide_binomial(self):
        """Exact quotient by t^{1/2}z - t^{-1/2}z^{-1}, or None.

        Works one z-congruence-level at a time from the bottom; a residue
        pushed above the original top z-exponent certifies indivisibility.
        """
        if not self._terms:
            return LaurentQTZ.zero()
        z_max = max(k[2] for k in self._terms)
        res = dict(self._terms)
        out = {}
        while res:
            (qe, te, ze), c = min(res.items(), key=lambda kv: (kv[0][2], kv[0][1], kv[0][0]))
            if ze > z_max:
                return None
            # lowest term must arise from -t^{-1/2} z^{-1} * (quotient term)
            qk = (qe, te + _HALF, ze + 1)
            out[qk] = out.get(qk, Fraction(0)) - c
            # subtract binomial * that quotient term from the residue
            for key, delta in (((qe, te, ze), c), ((qe, te + 1, ze + 2), -c)):
                val = res.get(key, Fraction(0)) - delta
                if val:
                    res[key] = val
                else:
                    res.pop(key, None)
        return LaurentQTZ(out)


def binomial() -> LaurentQTZ:
    """t^{1/2} z - t^{-1/2} z^{-1}."""
    return LaurentQTZ({(0, _HALF, 1): 1, (0, -_HALF, -1): -1})


def binomial_power(e: int) -> LaurentQTZ:
    """Exact nonnegative power of the binomial."""
    if e < 0:
        raise ValueError("negative powers require a weight family expansion")
    return binomial() ** e


@dataclass(frozen=True)
class KnotWeight:
    """Lazy weight (t^{1/2}z - t^{-1/2}z^{-1})^e * core with e possibly < 0.

    The prefactor exponent e = 1 - delta_0 is shared by every node weight of
    one marked graph; the core is exact.  Negative powers of the binomial are
    never expanded here -- equality testing cross-multiplies instead.
    """

    e: int
    core: LaurentQTZ

    def __bool__(self):
        return bool(self.core)

    def __add__(self, other):
        if isinstance(other, KnotWeight):
            if other.e != self.e and self.core and other.core:
                raise ValueError("cannot add knot weights with different prefactors")
            if not self.core:
                return other
            if not other.core:
                return self
            return KnotWeight(self.e, self.core + other.core)
        return NotImplemented

    def __neg__(self):
        return KnotWeight(self.e, -self.core)

    def lowered_to(self, e_target: int) -> "KnotWeight":
        """Rewrite with a smaller prefactor exponent by exact multiplication."""
        if e_target > self.e:
            raise ValueError("can only lower the prefactor exponent")
        return KnotWeight(e_target, self.core * binomial_power(self.e - e_target))

    def equals(self, other: "KnotWeight") -> bool:
        """Equality as rational expressions, by cross-multiplication."""
        e_min = min(self.e, other.e)
        return self.lowered_to(e_min).core == other.lowered_to(e_min).core

    def canonical(self):
        """Representative of the equivalence class under (e, c) ~ (e-1, c*B).

        Factors the binomial out of the core as often as it divides; zero
        cores collapse to a single canonical zero.
        """
        if not self.core:
            return (0, ())
        e, core = self.e, self.core
        while True:
            quotient = core.divide_binomial()
            if quotient is None:
                return (e, core.items())
            e += 1
            core = quotient

    def truncate_q(self, q_max) -> "KnotWeight":
        return KnotWeight(self.e, self.core.truncate_q(q_max))

    def render(self) -> str:
        if not self.core:
            return "0"
        base = "(t^(1/2)*z - t^(-1/2)*z^(-1))"
        core = self.core.render()
        if self.e == 0:
            return core
        return f"{base}^{self.e} * ({core})"
