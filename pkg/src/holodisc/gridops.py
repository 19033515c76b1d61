"""Shift-operator stencils and subgrid polynomial fields.

A :class:`Stencil` is a finite Laurent polynomial in the macroscale shift
``E_j``; tap ``s`` (a multiple of 1/2) carries the coefficient of
``E_j**s``.  Composition of stencils is convolution of taps.

A :class:`SubgridPoly` is a finite sum of ``xi**p * h(z) * S(E_j)`` where
``xi`` in [0, 1] is the subgrid coordinate, ``h`` is 1, ``cos(n k z)`` or
``sin(n k z)`` and ``S`` a stencil.  Products of harmonics are recombined
into single harmonics.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Iterable, Mapping

from .exactalg import ParamPoly, TruncSeries, as_rat, sym

__all__ = [
    "Stencil", "SubgridPoly", "CONST", "cos_h", "sin_h",
    "E", "DELTA", "MU", "IDENTITY", "expand_mu_delta",
    "dxi", "dz", "element_mean", "linv_diffusion", "linv_wave", "linv_het",
    "edge_residuals", "tap_moments", "HarmonicError",
]


class HarmonicError(ValueError):
    """A rule that only accepts pure polynomials met a z-harmonic."""


def _coerce_pp(c: Any) -> ParamPoly:
    return c if isinstance(c, ParamPoly) else ParamPoly.const(c)


class Stencil:
    """Finite map from half-integer shifts to :class:`ParamPoly` coefficients.

    >>> print(DELTA * DELTA)
    {-1: 1, 0: -2, 1: 1}
    """

    __slots__ = ("_t",)

    def __init__(self, taps: Mapping[Any, Any] | None = None, *, _doubled: bool = False):
        t: dict[int, ParamPoly] = {}
        if taps:
            for s, c in taps.items():
                key = s if _doubled else _double(s)
                c = _coerce_pp(c)
                if c:
                    t[key] = t[key] + c if key in t else c
            t = {k: v for k, v in t.items() if v}
        self._t = t

    @classmethod
    def _raw(cls, t: dict[int, ParamPoly]) -> "Stencil":
        obj = cls.__new__(cls)
        obj._t = t
        return obj

    @classmethod
    def shift(cls, s: Any, coeff: Any = 1) -> "Stencil":
        return cls({s: coeff})

    @classmethod
    def scalar(cls, coeff: Any) -> "Stencil":
        return cls({0: coeff})

    # -- inspection --------------------------------------------------------
    @property
    def taps(self) -> dict[Fraction, ParamPoly]:
        return {Fraction(k, 2): v for k, v in sorted(self._t.items())}

    def raw(self) -> dict[int, ParamPoly]:
        return self._t

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    @property
    def support(self) -> tuple[Fraction, Fraction] | None:
        if not self._t:
            return None
        return Fraction(min(self._t), 2), Fraction(max(self._t), 2)

    @property
    def width(self) -> Fraction:
        """Span ``max s - min s`` of the nonzero taps (0 for the zero stencil)."""
        if not self._t:
            return Fraction(0)
        return Fraction(max(self._t) - min(self._t), 2)

    def npoints(self) -> int:
        """Number of grid points spanned, ``width + 1``."""
        return int(self.width) + 1 if self._t else 0

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "Stencil") -> "Stencil":
        if not isinstance(other, Stencil):
            other = Stencil.scalar(other)
        out = dict(self._t)
        for k, v in other._t.items():
            if k in out:
                s = out[k] + v
                if s:
                    out[k] = s
                else:
                    del out[k]
            else:
                out[k] = v
        return Stencil._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Stencil":
        return Stencil._raw({k: -v for k, v in self._t.items()})

    def __sub__(self, other: "Stencil") -> "Stencil":
        if not isinstance(other, Stencil):
            other = Stencil.scalar(other)
        return self + (-other)

    def __rsub__(self, other: Any) -> "Stencil":
        return Stencil.scalar(other) - self

    def __mul__(self, other: Any) -> "Stencil":
        if isinstance(other, Stencil):
            return compose(self, other)
        if isinstance(other, (ParamPoly, int, Fraction)):
            c = _coerce_pp(other)
            if not c:
                return Stencil()
            if c.is_const():
                q = c.const_value()
                return Stencil._raw({k: v * q for k, v in self._t.items()})
            out = {k: v * c for k, v in self._t.items()}
            return Stencil._raw({k: v for k, v in out.items() if v})
        return NotImplemented

    def __rmul__(self, other: Any) -> "Stencil":
        if isinstance(other, (ParamPoly, int, Fraction)):
            return self.__mul__(other)
        return NotImplemented

    def __pow__(self, n: int) -> "Stencil":
        out = IDENTITY
        for _ in range(n):
            out = out * self
        return out

    def mul_monomial_key(self, key: int) -> "Stencil":
        return Stencil._raw({k: v.mul_monomial_key(key) for k, v in self._t.items()})

    def translate(self, s: Any) -> "Stencil":
        """Multiply by ``E_j**s``."""
        d = _double(s)
        return Stencil._raw({k + d: v for k, v in self._t.items()})

    def subs(self, **values: Any) -> "Stencil":
        return Stencil._raw({k: v for k, v in ((k, c.subs(**values)) for k, c in self._t.items()) if v})

    def map_coeffs(self, fn) -> "Stencil":
        return Stencil._raw({k: v for k, v in ((k, fn(c)) for k, c in self._t.items()) if v})

    def numeric_taps(self, values: Mapping[str, Any]) -> dict[Fraction, float]:
        return {Fraction(k, 2): v.evaluate(values) for k, v in sorted(self._t.items())}

    def symbol_at(self, phase: complex, values: Mapping[str, Any]) -> complex:
        """Fourier symbol ``sum_s c_s exp(i s phase)`` with numeric parameters."""
        import cmath
        return sum(v.evaluate(values) * cmath.exp(1j * phase * k / 2) for k, v in self._t.items())

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Stencil):
            return self._t == other._t
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._t.items()))

    def to_text(self) -> str:
        return "{" + ", ".join(f"{_fmt_shift(k)}: {v}" for k, v in sorted(self._t.items())) + "}"

    __str__ = to_text

    def __repr__(self) -> str:
        return f"Stencil({self.to_text()})"


def _double(s: Any) -> int:
    s2 = as_rat(s) * 2
    if s2.denominator != 1:
        raise ValueError(f"shift {s} is not a multiple of 1/2")
    return int(s2)


def _fmt_shift(k: int) -> str:
    return str(k // 2) if k % 2 == 0 else f"{k}/2"


def compose(a: Stencil, b: Stencil) -> Stencil:
    """Convolution of taps: ``(a o b)(s) = sum_r a(r) b(s - r)``."""
    out: dict[int, ParamPoly] = {}
    for ka, va in a._t.items():
        for kb, vb in b._t.items():
            k = ka + kb
            p = va * vb
            if k in out:
                out[k] = out[k] + p
            else:
                out[k] = p
    return Stencil._raw({k: v for k, v in out.items() if v})


IDENTITY = Stencil({0: 1})
DELTA = Stencil({Fraction(1, 2): 1, Fraction(-1, 2): -1})
MU = Stencil({Fraction(1, 2): Fraction(1, 2), Fraction(-1, 2): Fraction(1, 2)})


def E(s: Any = 1) -> Stencil:
    return Stencil.shift(s)


def expand_mu_delta(expr: Mapping[tuple[int, int], Any] | tuple[int, int]) -> Stencil:
    """Expand ``sum coeff * mu**a * delta**b`` into shift taps.

    ``expr`` is either a single ``(a, b)`` pair or a map ``{(a, b): coeff}``
    with ``coeff`` a rational or :class:`ParamPoly`.

    >>> print(expand_mu_delta((1, 1)))
    {-1: -1/2, 1: 1/2}
    """
    if isinstance(expr, tuple):
        expr = {expr: 1}
    total = Stencil()
    for (a, b), c in expr.items():
        total = total + (MU ** a) * (DELTA ** b) * _coerce_pp(c)
    return total


# ---------------------------------------------------------------------------
# subgrid polynomials
# ---------------------------------------------------------------------------

# harmonic tag: (kind, n) with kind 0 = const, 1 = cos(n k z), 2 = sin(n k z)
CONST = (0, 0)


def cos_h(n: int = 1) -> tuple[int, int]:
    return (1, n) if n else CONST


def sin_h(n: int = 1) -> tuple[int, int]:
    if n <= 0:
        raise ValueError("sin harmonic needs n >= 1")
    return (2, n)


def _harm_text(h: tuple[int, int]) -> str:
    kind, n = h
    if kind == 0:
        return ""
    arg = "k*z" if n == 1 else f"{n}*k*z"
    return ("cos(" if kind == 1 else "sin(") + arg + ")"


def _harm_product(h1: tuple[int, int], h2: tuple[int, int]) -> list[tuple[Fraction, tuple[int, int]]]:
    """Product of two harmonics as a combination of single harmonics."""
    k1, n1 = h1
    k2, n2 = h2
    if k1 == 0:
        return [(Fraction(1), h2)]
    if k2 == 0:
        return [(Fraction(1), h1)]
    half = Fraction(1, 2)
    s, d = n1 + n2, n1 - n2

    def cosn(n):  # cos(n kz) for any integer n
        return [(Fraction(1), cos_h(abs(n)))]

    def sinn(n, c):  # c * sin(n kz)
        if n == 0:
            return []
        return [(c if n > 0 else -c, sin_h(abs(n)))]

    out: list[tuple[Fraction, tuple[int, int]]] = []
    if k1 == 1 and k2 == 1:  # cos a cos b = (cos(a-b) + cos(a+b))/2
        out += [(half * c, h) for c, h in cosn(d) + cosn(s)]
    elif k1 == 2 and k2 == 2:  # sin a sin b = (cos(a-b) - cos(a+b))/2
        out += [(half, cos_h(abs(d))), (-half, cos_h(s))]
    elif k1 == 2 and k2 == 1:  # sin a cos b = (sin(a+b) + sin(a-b))/2
        out += sinn(s, half) + sinn(d, half)
    else:  # cos a sin b = (sin(a+b) - sin(a-b))/2
        out += sinn(s, half) + sinn(d, -half)
    return out


class SubgridPoly:
    """Sparse ``{(xi power, harmonic): Stencil}``.

    >>> u = SubgridPoly.xi_power(2)
    >>> print(dxi(u))
    2*xi*{0: 1}
    """

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[tuple[int, tuple[int, int]], Stencil] | None = None):
        self._t: dict[tuple[int, tuple[int, int]], Stencil] = (
            {k: v for k, v in terms.items() if v} if terms else {})

    @classmethod
    def _raw(cls, t) -> "SubgridPoly":
        obj = cls.__new__(cls)
        obj._t = t
        return obj

    @classmethod
    def from_stencil(cls, s: Stencil, p: int = 0, harmonic: tuple[int, int] = CONST) -> "SubgridPoly":
        return cls({(p, harmonic): s})

    @classmethod
    def xi_power(cls, p: int, coeff: Any = 1, harmonic: tuple[int, int] = CONST) -> "SubgridPoly":
        return cls({(p, harmonic): Stencil.scalar(coeff)})

    @classmethod
    def polynomial(cls, coeffs: Iterable[Any], stencil: Stencil = None) -> "SubgridPoly":
        """``sum_p coeffs[p] xi**p`` times ``stencil`` (identity by default)."""
        st = stencil if stencil is not None else IDENTITY
        return cls({(p, CONST): st * _coerce_pp(c) for p, c in enumerate(coeffs) if c})

    # -- inspection --------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, tuple[int, int]], Stencil]:
        return dict(sorted(self._t.items()))

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def has_harmonics(self) -> bool:
        return any(h != CONST for _, h in self._t)

    def xi_degree(self) -> int:
        return max((p for p, _ in self._t), default=0)

    def as_stencil(self) -> Stencil:
        """The stencil of a xi-free, harmonic-free polynomial."""
        if any(key != (0, CONST) for key in self._t):
            raise ValueError("SubgridPoly depends on xi or z; not a pure stencil")
        return self._t.get((0, CONST), Stencil())

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "SubgridPoly") -> "SubgridPoly":
        out = dict(self._t)
        for k, v in other._t.items():
            if k in out:
                s = out[k] + v
                if s:
                    out[k] = s
                else:
                    del out[k]
            else:
                out[k] = v
        return SubgridPoly._raw(out)

    def __neg__(self) -> "SubgridPoly":
        return SubgridPoly._raw({k: -v for k, v in self._t.items()})

    def __sub__(self, other: "SubgridPoly") -> "SubgridPoly":
        return self + (-other)

    def __mul__(self, other: Any) -> "SubgridPoly":
        if isinstance(other, SubgridPoly):
            return _sgp_product(self, other)
        if isinstance(other, Stencil):
            out = {k: v * other for k, v in self._t.items()}
            return SubgridPoly._raw({k: v for k, v in out.items() if v})
        if isinstance(other, (ParamPoly, int, Fraction)):
            c = _coerce_pp(other)
            out = {k: v * c for k, v in self._t.items()}
            return SubgridPoly._raw({k: v for k, v in out.items() if v})
        return NotImplemented

    def __rmul__(self, other: Any) -> "SubgridPoly":
        if isinstance(other, (ParamPoly, int, Fraction, Stencil)):
            return self.__mul__(other)
        return NotImplemented

    def mul_monomial_key(self, key: int) -> "SubgridPoly":
        return SubgridPoly._raw({k: v.mul_monomial_key(key) for k, v in self._t.items()})

    def times_xi(self, q: int = 1) -> "SubgridPoly":
        return SubgridPoly._raw({(p + q, h): v for (p, h), v in self._t.items()})

    def apply(self, st: Stencil) -> "SubgridPoly":
        return self * st

    def translate(self, s: Any) -> "SubgridPoly":
        """Element shift ``j -> j + s`` applied to every stencil."""
        return SubgridPoly._raw({k: v.translate(s) for k, v in self._t.items()})

    def at_xi(self, x: Any) -> "SubgridPoly":
        """Evaluate the xi-dependence at ``xi = x`` (harmonics survive)."""
        x = as_rat(x)
        out: dict[tuple[int, tuple[int, int]], Stencil] = {}
        for (p, h), v in self._t.items():
            w = x ** p
            if not w:
                continue
            term = v * w if w != 1 else v
            key = (0, h)
            out[key] = out[key] + term if key in out else term
        return SubgridPoly({k: v for k, v in out.items() if v})

    def substitute_xi_shift(self, shift: ParamPoly) -> "SubgridPoly":
        """Exact polynomial substitution ``xi -> xi + shift``."""
        from math import comb
        out = SubgridPoly()
        for (p, h), v in self._t.items():
            for q in range(p + 1):
                coeff = shift ** (p - q) * comb(p, q)
                out = out + SubgridPoly({(q, h): v * coeff})
        return out

    def subs(self, **values: Any) -> "SubgridPoly":
        return SubgridPoly({k: v.subs(**values) for k, v in self._t.items()})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SubgridPoly):
            return self._t == other._t
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._t.items()))

    def to_text(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for (p, h), v in sorted(self._t.items()):
            f = []
            if p == 1:
                f.append("xi")
            elif p:
                f.append(f"xi^{p}")
            if h != CONST:
                f.append(_harm_text(h))
            f.append(v.to_text())
            parts.append("*".join(f))
        return " + ".join(parts)

    __str__ = to_text

    def __repr__(self) -> str:
        return f"SubgridPoly({self.to_text()})"


def _sgp_product(a: SubgridPoly, b: SubgridPoly) -> SubgridPoly:
    out: dict[tuple[int, tuple[int, int]], Stencil] = {}
    for (pa, ha), va in a._t.items():
        for (pb, hb), vb in b._t.items():
            st = va * vb
            if not st:
                continue
            for c, h in _harm_product(ha, hb):
                key = (pa + pb, h)
                term = st * c if c != 1 else st
                out[key] = out[key] + term if key in out else term
    return SubgridPoly({k: v for k, v in out.items() if v})


# ---------------------------------------------------------------------------
# calculus on subgrid polynomials
# ---------------------------------------------------------------------------

def dxi(f: SubgridPoly) -> SubgridPoly:
    """Derivative in xi (harmonics are constants for this operator)."""
    out = {}
    for (p, h), v in f._t.items():
        if p:
            out[(p - 1, h)] = v * p
    return SubgridPoly(out)


_K = sym("k")


def dz(f: SubgridPoly) -> SubgridPoly:
    """Derivative in z: ``cos(nkz) -> -nk sin(nkz)``, ``sin(nkz) -> nk cos(nkz)``."""
    out: dict = {}
    for (p, (kind, n)), v in f._t.items():
        if kind == 0:
            continue
        if kind == 1:
            out[(p, sin_h(n))] = v * (_K * (-n))
        else:
            out[(p, cos_h(n))] = v * (_K * n)
    return SubgridPoly(out)


def element_mean(f: SubgridPoly) -> Stencil:
    """Mean over ``xi`` in [0, 1] and over whole periods in z."""
    out = Stencil()
    for (p, h), v in f._t.items():
        if h == CONST:
            out = out + v * Fraction(1, p + 1)
    return out


def _linv_poly(p: int) -> list[Fraction]:
    """Coefficients of ``(xi^(p+2) - xi + 1/2 - 1/(p+3)) / ((p+1)(p+2))``."""
    c = [Fraction(0)] * (p + 3)
    den = (p + 1) * (p + 2)
    c[p + 2] += Fraction(1, den)
    c[1] -= Fraction(1, den)
    c[0] += (Fraction(1, 2) - Fraction(1, p + 3)) / den
    return c


def _poly_terms(coeffs: list[Fraction], v: Stencil, h=CONST) -> dict:
    return {(q, h): v * c for q, c in enumerate(coeffs) if c}


def _accumulate(out: dict, terms: dict) -> None:
    for k, v in terms.items():
        out[k] = out[k] + v if k in out else v


def linv_diffusion(rhs: SubgridPoly) -> SubgridPoly:
    """``v`` with ``v'' = rhs``, ``v(1) = v(0)`` and zero mean (polynomials only)."""
    if rhs.has_harmonics():
        raise HarmonicError("linv_diffusion got z-harmonics; use linv_het")
    out: dict = {}
    for (p, h), v in rhs._t.items():
        _accumulate(out, _poly_terms(_linv_poly(p), v))
    return SubgridPoly({k: s for k, s in out.items() if s})


def linv_wave(rhs: SubgridPoly) -> SubgridPoly:
    """``v`` with ``v' = rhs`` and zero mean: ``xi^p -> (xi^(p+1) - 1/(p+2))/(p+1)``."""
    if rhs.has_harmonics():
        raise HarmonicError("linv_wave got z-harmonics")
    out: dict = {}
    for (p, h), v in rhs._t.items():
        c = [Fraction(0)] * (p + 2)
        c[p + 1] += Fraction(1, p + 1)
        c[0] -= Fraction(1, (p + 2) * (p + 1))
        _accumulate(out, _poly_terms(c, v))
    return SubgridPoly({k: s for k, s in out.items() if s})


_H2 = sym("H", 2)


def linv_het(rhs: SubgridPoly) -> SubgridPoly:
    """Approximate inverse for the embedded heterogeneous operator.

    Pure polynomials get the diffusion rule times ``H**2``; a harmonic of
    wavenumber ``q = n k`` maps ``h -> -h/q**2`` and ``xi**p h -> -(xi**p - xi) h/q**2``.
    """
    out: dict = {}
    for (p, h), v in rhs._t.items():
        if h == CONST:
            _accumulate(out, _poly_terms(_linv_poly(p), v * _H2))
            continue
        n = h[1]
        scale = sym("k", -2) * Fraction(-1, n * n)
        if p == 0:
            _accumulate(out, {(0, h): v * scale})
        else:
            terms = {(p, h): v * scale}
            _accumulate(terms, {(1, h): v * (-scale)})
            _accumulate(out, {k: s for k, s in terms.items() if s})
    return SubgridPoly({k: s for k, s in out.items() if s})


# ---------------------------------------------------------------------------
# edge conditions
# ---------------------------------------------------------------------------

def edge_residuals(u: TruncSeries, family) -> dict[str, TruncSeries]:
    """Edge residuals of the subgrid field ``u`` under ``family``'s coupling.

    Keys are ``"ucc"`` (field) and, for second-order families, ``"udc"``
    (flux); the first-order wave has the single combined condition.
    """
    return family.edges(u)


def tap_moments(st: Stencil, upto: int) -> list[ParamPoly]:
    """``sum_s c_s s**m`` for ``m = 0..upto``.

    A stencil is a multiple of ``delta**n`` exactly when its first ``n``
    moments vanish.
    """
    out = []
    for m in range(upto + 1):
        total = ParamPoly()
        for s, c in st.taps.items():
            if m and not s:
                continue
            total = total + c * s ** m
        out.append(total)
    return out
