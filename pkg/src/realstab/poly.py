"""Dense univariate polynomials in z with exact rational coefficients.

A polynomial c0 + c1*z + ... + cn*z^n is stored as the tuple
(c0, c1, ..., cn) of Fractions, ascending powers, with the leading
coefficient nonzero. The zero polynomial is the single tuple (0,).

All arithmetic is exact. Floating point enters only through
``float_coeffs_desc``, the bridge to the numeric analysis layer
(root finding, frequency sweeps).
"""

from __future__ import annotations

import math
from fractions import Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _coerce(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational scalar, got {type(value).__name__}")


class Polynomial:
    """Immutable dense polynomial over the rationals."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=(0,)):
        cs = [_coerce(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [_ZERO]
        self.coeffs = tuple(cs)

    @classmethod
    def _make(cls, cs: list[Fraction]) -> "Polynomial":
        # Internal: coefficients are known-exact Fractions, only strip zeros.
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        obj = object.__new__(cls)
        obj.coeffs = tuple(cs) if cs else (_ZERO,)
        return obj

    @classmethod
    def constant(cls, value) -> "Polynomial":
        return cls((value,))

    @classmethod
    def z(cls) -> "Polynomial":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        """Length-based degree; the zero polynomial reports 0 (see is_zero)."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def is_one(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 1

    @property
    def is_constant(self) -> bool:
        return len(self.coeffs) == 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1]

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.is_constant and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            else:
                zi = "z" if k == 1 else f"z^{k}"
                if c == 1:
                    parts.append(zi)
                elif c == -1:
                    parts.append(f"-{zi}")
                else:
                    parts.append(f"{c}*{zi}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __add__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            other = Polynomial((other,))
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial._make(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._make([-c for c in self.coeffs])

    def __sub__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            other = Polynomial((other,))
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Polynomial((0,))
        if other.is_constant:
            return self.scale(other.coeffs[0])
        if self.is_constant:
            return other.scale(self.coeffs[0])
        # Convolve over the integers; one Fraction normalization per output
        # coefficient is much cheaper than Fraction arithmetic throughout.
        a, da = _clear_denominators(self.coeffs)
        b, db = _clear_denominators(other.coeffs)
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        d = da * db
        return Polynomial._make([Fraction(c, d) for c in out])

    __rmul__ = __mul__

    def scale(self, factor) -> "Polynomial":
        factor = _coerce(factor)
        if factor == 0:
            return Polynomial((0,))
        return Polynomial._make([c * factor for c in self.coeffs])

    def __divmod__(self, other):
        """Polynomial long division over the rationals; other must be nonzero.

        Runs fraction-free over the integers: with A, B the
        denominator-cleared operands, lc(B)^t A = Q B + R, and the true
        quotient and remainder are recovered by one Fraction
        normalization per coefficient.
        """
        if not isinstance(other, Polynomial):
            other = Polynomial((other,))
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero or self.degree < other.degree:
            return Polynomial((0,)), self
        a, da = _clear_denominators(self.coeffs)
        b, db = _clear_denominators(other.coeffs)
        q_int, r_int, lead_pow = _int_pdiv(a, b)
        qden = da * lead_pow
        q = [Fraction(c * db, qden) for c in q_int]
        r = [Fraction(c, qden) for c in r_int]
        return Polynomial._make(q), Polynomial._make(r or [_ZERO])

    def __floordiv__(self, other) -> "Polynomial":
        return divmod(self, other)[0]

    def __mod__(self, other) -> "Polynomial":
        return divmod(self, other)[1]

    def monic(self) -> "Polynomial":
        if self.is_zero:
            return self
        lead = self.leading
        if lead == 1:
            return self
        return self.scale(_ONE / lead)

    def __call__(self, x):
        """Horner evaluation; x may be a Fraction, float, or complex."""
        acc = self.coeffs[-1]
        if not isinstance(x, Fraction):
            acc = complex(acc) if isinstance(x, complex) else float(acc)
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + (c if isinstance(x, Fraction) else float(c))
        return acc

    def float_coeffs_desc(self) -> list[float]:
        """Descending-power float coefficients for numpy consumption."""
        return [float(c) for c in reversed(self.coeffs)]


def _clear_denominators(coeffs) -> tuple[list[int], int]:
    """Integer coefficient image (c * lcm for every c) plus the lcm used."""
    den = 1
    for c in coeffs:
        d = c.denominator
        if d != 1:
            den = den * d // math.gcd(den, d)
    if den == 1:
        return [c.numerator for c in coeffs], 1
    return [c.numerator * (den // c.denominator) for c in coeffs], den


def _int_pdiv(a: list[int], b: list[int]) -> tuple[list[int], list[int], int]:
    """Fraction-free division: lc(b)^t * a = q * b + r with t = deg a - deg b + 1."""
    db = len(b) - 1
    lb = b[-1]
    t = len(a) - 1 - db + 1
    r = list(a)
    q = [0] * t
    for k in range(t - 1, -1, -1):
        top = r[db + k]
        for i in range(t):
            q[i] *= lb
        q[k] += top
        for i in range(len(r)):
            r[i] *= lb
        for i in range(db + 1):
            r[k + i] -= top * b[i]
        r.pop()
    while len(r) > 1 and r[-1] == 0:
        r.pop()
    return q, r, lb ** t


def _valuation(p: Polynomial) -> int:
    """Index of the lowest nonzero coefficient (order of the root at z = 0)."""
    for k, c in enumerate(p.coeffs):
        if c != 0:
            return k
    return 0


def _is_monomial(p: Polynomial) -> bool:
    return all(c == 0 for c in p.coeffs[:-1])


def _to_int_coeffs(p: Polynomial) -> list[int]:
    den_lcm = 1
    for c in p.coeffs:
        den_lcm = den_lcm * c.denominator // _int_gcd(den_lcm, c.denominator)
    return [int(c * den_lcm) for c in p.coeffs]


def _int_gcd(a: int, b: int) -> int:
    return math.gcd(a, b)


def _int_primitive(v: list[int]) -> list[int]:
    g = 0
    for x in v:
        g = _int_gcd(g, abs(x))
        if g == 1:
            return v
    return [x // g for x in v] if g else v


def _int_strip(v: list[int]) -> list[int]:
    while len(v) > 1 and v[-1] == 0:
        v.pop()
    return v


def _int_prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of a by b (result differs from a mod b by lc(b)^k)."""
    db = len(b) - 1
    lb = b[-1]
    r = _int_strip(list(a))
    while len(r) - 1 >= db and not (len(r) == 1 and r[0] == 0):
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [lb * c for c in r]
        for i in range(db + 1):
            r[shift + i] -= lr * b[i]
        r.pop()
        _int_strip(r)
        if not r:
            r = [0]
    return r


def _int_poly_gcd(a: list[int], b: list[int]) -> list[int]:
    a = _int_primitive(_int_strip(list(a)))
    b = _int_primitive(_int_strip(list(b)))
    if len(a) < len(b):
        a, b = b, a
    while not (len(b) == 1 and b[0] == 0):
        if len(b) == 1:
            return [1]
        r = _int_prem(a, b)
        a, b = b, _int_primitive(_int_strip(r))
    return a


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd of two polynomials.

    Constants and monomials short-circuit (the FIR denominators z^k this
    package produces fall here); the general case clears denominators and
    runs primitive pseudo-remainder Euclid over the integers, which is far
    cheaper than Fraction arithmetic.
    """
    if a.is_zero:
        return b.monic()
    if b.is_zero:
        return a.monic()
    if a.is_constant or b.is_constant:
        return Polynomial((1,))
    if _is_monomial(a):
        k = min(a.degree, _valuation(b))
        return Polynomial([0] * k + [1])
    if _is_monomial(b):
        k = min(b.degree, _valuation(a))
        return Polynomial([0] * k + [1])
    g = _int_poly_gcd(_to_int_coeffs(a), _to_int_coeffs(b))
    return Polynomial(g).monic()
