"""Real and complex Hermite polynomials with exact coefficient algebra.

``BiPoly`` stores a polynomial in one complex variable ``z`` and its
conjugate ``zbar`` with coefficients in Q(i, sqrt(2)).  Writing
``z = x + i y`` gives an equivalent real form in ``(x, y)``; the two forms
convert exactly in both directions.

The real Hermite polynomials H_n follow the probabilists' normalization
H_n(x) = (-1)^n exp(x^2/2) d^n/dx^n exp(-x^2/2) (leading coefficient 1).
The complex Hermite polynomials J_{m,n}(z, rho) are built by repeated
application of the creation operators

    a*  : p -> -dp/dzbar + (z/rho) p
    a~* : p -> -dp/dz    + (zbar/rho) p

as J_{m,n} = rho^(m+n) (a*)^m (a~*)^n 1, so J_{0,0} = 1, J_{1,0} = z and
J_{1,1} = z zbar - rho.  Both families are eigenfunctions of the
Ornstein-Uhlenbeck generator implemented by :func:`ou_apply`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Mapping, Tuple, Union

import numpy as np

from .exact import EC, ExactComplex, HALF, I_UNIT, ZERO, i_power

Scalar = Union[int, Fraction, ExactComplex]
ExponentPair = Tuple[int, int]


def _ec(x) -> ExactComplex:
    return ExactComplex.coerce(x)


class BiPoly:
    """Polynomial in (z, zbar) with ExactComplex coefficients.

    Keys of the term map are pairs (a, b): the degree in z and in zbar.
    Instances are immutable; all arithmetic is exact.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[ExponentPair, Scalar] | None = None):
        cleaned: Dict[ExponentPair, ExactComplex] = {}
        if terms:
            for (a, b), coeff in terms.items():
                if a < 0 or b < 0:
                    raise ValueError(f"negative exponent pair ({a}, {b})")
                c = _ec(coeff)
                if not c.is_zero():
                    cleaned[(int(a), int(b))] = c
        self._terms = cleaned

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value) -> "BiPoly":
        return cls({(0, 0): value})

    @classmethod
    def z(cls) -> "BiPoly":
        return cls({(1, 0): 1})

    @classmethod
    def zbar(cls) -> "BiPoly":
        return cls({(0, 1): 1})

    @classmethod
    def linear(cls, cz, czbar, const=0) -> "BiPoly":
        return cls({(1, 0): cz, (0, 1): czbar, (0, 0): const})

    @classmethod
    def from_xy(cls, xy_terms: Mapping[ExponentPair, Scalar]) -> "BiPoly":
        """Build from a real-coordinate map (i, j) -> coeff of x^i y^j."""
        x = cls({(1, 0): HALF, (0, 1): HALF})                 # (z + zbar)/2
        y = cls({(1, 0): -HALF * I_UNIT, (0, 1): HALF * I_UNIT})  # (z - zbar)/(2i)
        out = cls()
        for (i, j), coeff in xy_terms.items():
            out = out + _ec(coeff) * (x ** i) * (y ** j)
        return out

    # -- inspection --------------------------------------------------------

    def terms(self) -> Dict[ExponentPair, ExactComplex]:
        return dict(self._terms)

    def coefficient(self, a: int, b: int) -> ExactComplex:
        return self._terms.get((a, b), ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((a + b for a, b in self._terms), default=0)

    def degrees(self) -> ExponentPair:
        """(max degree in z, max degree in zbar)."""
        dz = max((a for a, _ in self._terms), default=0)
        db = max((b for _, b in self._terms), default=0)
        return dz, db

    # -- algebra -----------------------------------------------------------

    def __add__(self, other):
        o = other if isinstance(other, BiPoly) else BiPoly.constant(other)
        out = dict(self._terms)
        for key, coeff in o._terms.items():
            s = out.get(key, ZERO) + coeff
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
        return BiPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        o = other if isinstance(other, BiPoly) else BiPoly.constant(other)
        return self + (-o)

    def __rsub__(self, other):
        return BiPoly.constant(other) - self

    def __neg__(self):
        return BiPoly({k: -c for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, BiPoly):
            out: Dict[ExponentPair, ExactComplex] = {}
            for (a1, b1), c1 in self._terms.items():
                for (a2, b2), c2 in other._terms.items():
                    key = (a1 + a2, b1 + b2)
                    s = out.get(key, ZERO) + c1 * c2
                    if s.is_zero():
                        out.pop(key, None)
                    else:
                        out[key] = s
            return BiPoly(out)
        c = _ec(other)
        return BiPoly({k: c * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = BiPoly.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "BiPoly(0)"
        bits = [f"z^{a} zb^{b}: {c!r}" for (a, b), c in sorted(self._terms.items())]
        return "BiPoly{" + ", ".join(bits) + "}"

    def conj(self) -> "BiPoly":
        """Complex conjugate: conjugate coefficients, swap z and zbar powers."""
        return BiPoly({(b, a): c.conjugate() for (a, b), c in self._terms.items()})

    def d_z(self) -> "BiPoly":
        return BiPoly({(a - 1, b): a * c for (a, b), c in self._terms.items() if a})

    def d_zbar(self) -> "BiPoly":
        return BiPoly({(a, b - 1): b * c for (a, b), c in self._terms.items() if b})

    # -- coordinate forms ----------------------------------------------------

    def to_xy(self) -> Dict[ExponentPair, ExactComplex]:
        """Exact real-coordinate form: map (i, j) -> coeff of x^i y^j."""
        out: Dict[ExponentPair, ExactComplex] = {}
        for (a, b), coeff in self._terms.items():
            # z^a zbar^b = (x + iy)^a (x - iy)^b
            for r in range(a + 1):
                ca = math.comb(a, r) * (i_power(a - r))
                for s in range(b + 1):
                    cb = math.comb(b, s) * ((-I_UNIT) ** (b - s))
                    key = (r + s, a + b - r - s)
                    val = out.get(key, ZERO) + coeff * ca * cb
                    if val.is_zero():
                        out.pop(key, None)
                    else:
                        out[key] = val
        return out

    # -- evaluation -----------------------------------------------------------

    def __call__(self, z):
        return evaluate(self, z)


def evaluate(p: BiPoly, z):
    """Evaluate in floating complex arithmetic; ``z`` may be a numpy array."""
    if isinstance(z, np.ndarray):
        out = np.zeros_like(z, dtype=np.complex128)
        zb = np.conj(z)
        pow_cache: Dict[ExponentPair, np.ndarray] = {}
        for (a, b), coeff in p._terms.items():
            key = (a, b)
            if key not in pow_cache:
                pow_cache[key] = (z ** a) * (zb ** b)
            out = out + coeff.to_complex() * pow_cache[key]
        return out
    zc = complex(z)
    zb = zc.conjugate()
    total = 0j
    for (a, b), coeff in p._terms.items():
        total += coeff.to_complex() * zc ** a * zb ** b
    return total


# -- real Hermite polynomials ---------------------------------------------------


@lru_cache(maxsize=None)
def hermite_coeffs(n: int) -> Tuple[int, ...]:
    """Integer coefficients (c_0, ..., c_n) of H_n, from the derivative definition.

    Maintains d^k/dx^k exp(-x^2/2) = P_k(x) exp(-x^2/2) via P_{k+1} = P_k' - x P_k,
    then H_n = (-1)^n P_n.  The three-term recurrence is *not* assumed here.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    p = [1]  # P_0
    for _ in range(n):
        nxt = [0] * (len(p) + 1)
        for k, c in enumerate(p):
            if k >= 1:
                nxt[k - 1] += k * c   # derivative of c x^k
            nxt[k + 1] -= c           # -x * c x^k
        p = nxt
    sign = -1 if n % 2 else 1
    return tuple(sign * c for c in p)


def real_hermite(n: int) -> BiPoly:
    """H_n as a BiPoly in the variable x = Re z (univariate in x)."""
    return BiPoly.from_xy({(k, 0): c for k, c in enumerate(hermite_coeffs(n)) if c})


def real_hermite_y(n: int) -> BiPoly:
    """H_n in the variable y = Im z."""
    return BiPoly.from_xy({(0, k): c for k, c in enumerate(hermite_coeffs(n)) if c})


def hermite_of_linear(n: int, cx, cy) -> BiPoly:
    """H_n(cx * x + cy * y) as an exact BiPoly (cx, cy rational or ExactComplex)."""
    lin = BiPoly.from_xy({(1, 0): cx, (0, 1): cy})
    out = BiPoly()
    for k, c in enumerate(hermite_coeffs(n)):
        if c:
            out = out + c * (lin ** k)
    return out


# -- complex Hermite polynomials -------------------------------------------------


@dataclass(frozen=True)
class HermiteIndex:
    """Index (m, n) and scale rho > 0 of a complex Hermite polynomial."""

    m: int
    n: int
    rho: Fraction = Fraction(2)

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("indices must be nonnegative")
        object.__setattr__(self, "rho", Fraction(self.rho))
        if self.rho <= 0:
            raise ValueError("rho must be positive")


def _create(p: BiPoly, rho: Fraction) -> BiPoly:
    # a* p = -dp/dzbar + (z/rho) p
    return -p.d_zbar() + BiPoly({(1, 0): Fraction(1, 1) / rho}) * p


def _create_bar(p: BiPoly, rho: Fraction) -> BiPoly:
    # a~* p = -dp/dz + (zbar/rho) p
    return -p.d_z() + BiPoly({(0, 1): Fraction(1, 1) / rho}) * p


@lru_cache(maxsize=None)
def _complex_hermite_cached(m: int, n: int, rho: Fraction) -> BiPoly:
    p = BiPoly.constant(1)
    for _ in range(n):
        p = _create_bar(p, rho)
    for _ in range(m):
        p = _create(p, rho)
    return EC(rho ** (m + n)) * p


def complex_hermite(idx, n: int | None = None, rho=Fraction(2)) -> BiPoly:
    """J_{m,n}(z, rho) built by repeated creation-operator application.

    Accepts either a HermiteIndex or plain (m, n[, rho]) arguments.
    """
    if isinstance(idx, HermiteIndex):
        m, n, rho = idx.m, idx.n, idx.rho
    else:
        m = idx
        if n is None:
            raise TypeError("complex_hermite needs (m, n) or a HermiteIndex")
    return _complex_hermite_cached(int(m), int(n), Fraction(rho))


# -- Ornstein-Uhlenbeck generator ------------------------------------------------


def _check_rho(rho) -> Fraction:
    rho = Fraction(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    return rho


def ou_apply(p: BiPoly, trig: Tuple[Fraction, Fraction], rho=Fraction(2)) -> BiPoly:
    """Apply the OU generator exactly, given exact rational (cos, sin).

    A = 2 rho cos * d2/dz dzbar - e^{i theta} z d/dz - e^{-i theta} zbar d/dzbar,
    restricted to angles with cos > 0 (theta in (-pi/2, pi/2)).
    """
    cos_t, sin_t = Fraction(trig[0]), Fraction(trig[1])
    if cos_t * cos_t + sin_t * sin_t != 1:
        raise ValueError("(cos, sin) must lie on the unit circle")
    if cos_t <= 0:
        raise ValueError("angle outside (-pi/2, pi/2): cos must be positive")
    rho = _check_rho(rho)
    eit = ExactComplex(cos_t, sin_t)
    eit_bar = eit.conjugate()
    diff = p.d_z().d_zbar()
    term1 = EC(2 * rho * cos_t) * diff
    term2 = eit * (BiPoly.z() * p.d_z())
    term3 = eit_bar * (BiPoly.zbar() * p.d_zbar())
    return term1 - term2 - term3


def ou_apply_numeric(p: BiPoly, theta: float, rho=2.0) -> Dict[ExponentPair, complex]:
    """Floating-point OU application for generic angles; returns a term map."""
    if not -math.pi / 2 < theta < math.pi / 2:
        raise ValueError("theta must lie in (-pi/2, pi/2)")
    rho = float(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    eit = complex(math.cos(theta), math.sin(theta))
    out: Dict[ExponentPair, complex] = {}

    def add(key, val):
        if val != 0:
            out[key] = out.get(key, 0j) + val

    for (a, b), coeff in p.terms().items():
        c = coeff.to_complex()
        if a >= 1 and b >= 1:
            add((a - 1, b - 1), 2 * rho * math.cos(theta) * a * b * c)
        if a >= 1:
            add((a, b), -eit * a * c)
        if b >= 1:
            add((a, b), -eit.conjugate() * b * c)
    return {k: v for k, v in out.items() if v != 0}


def ou_eigenvalue(m: int, n: int, cos_t, sin_t):
    """Eigenvalue -( (m+n) cos + i (m-n) sin ) of J_{m,n} under the generator."""
    if isinstance(cos_t, float) or isinstance(sin_t, float):
        return complex(-(m + n) * cos_t, -(m - n) * sin_t)
    return ExactComplex(-(m + n) * Fraction(cos_t), -(m - n) * Fraction(sin_t))


# -- monomial expansion ----------------------------------------------------------


def expand_monomial(r: int, s: int) -> Dict[ExponentPair, int]:
    """Coefficients of z^r zbar^s in the J basis at rho = 2.

    z^r zbar^s = sum_{i=0}^{min(r,s)} C(r,i) C(s,i) i! 2^i J_{r-i, s-i}(z).
    """
    if r < 0 or s < 0:
        raise ValueError("exponents must be nonnegative")
    out: Dict[ExponentPair, int] = {}
    for i in range(min(r, s) + 1):
        out[(r - i, s - i)] = math.comb(r, i) * math.comb(s, i) * math.factorial(i) * 2 ** i
    return out
