"""Exact arithmetic kernel.

Three layers, all immutable:

* ``Rat`` -- arbitrary precision rationals (``fractions.Fraction``).
* :class:`ParamPoly` -- Laurent polynomials with ``Rat`` coefficients in a
  fixed set of parameter symbols.
* :class:`TruncSeries` -- sparse multivariate power series in one or more
  "series variables" (``gamma`` always, optionally ``a``, ``alpha``, ``c``)
  whose coefficients are arbitrary payload objects (``ParamPoly``,
  ``Stencil`` or ``SubgridPoly``).  Any term whose exponent reaches the
  truncation order of its variable is discarded.

Monomials of a :class:`ParamPoly` are stored packed into a single Python int
(balanced base ``2**12`` digits, one digit per symbol), so that multiplying
two monomials is one integer addition.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from itertools import product as _iproduct
from typing import Any, Callable, Iterable, Mapping

Rat = Fraction

#: The fixed symbol set.  ``c0`` .. ``c4`` are the coefficients of the
#: optional linear perturbation of the advection/wave families.
SYMBOLS: tuple[str, ...] = (
    "gamma", "theta", "c", "alpha", "a", "H", "k", "d", "c0", "c2", "c3", "c4",
)
_INDEX = {s: i for i, s in enumerate(SYMBOLS)}
_NSYM = len(SYMBOLS)
_BITS = 12
_BASE = 1 << _BITS
_HALF = _BASE >> 1
_WEIGHTS = tuple(_BASE ** i for i in range(_NSYM))


class UnknownSymbolError(KeyError):
    """Raised when a symbol outside :data:`SYMBOLS` is used."""


def _sym_index(name: str) -> int:
    try:
        return _INDEX[name]
    except KeyError:
        raise UnknownSymbolError(f"unknown symbol {name!r}; known: {SYMBOLS}") from None


def as_rat(x: Any) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to ``Rat``.

    Floats are refused: symbolic code must stay exact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} exactly to Rat")


def pack(exps: Iterable[int]) -> int:
    key = 0
    for w, e in zip(_WEIGHTS, exps):
        if not -_HALF < e < _HALF:
            raise OverflowError("exponent out of range")
        key += e * w
    return key


@lru_cache(maxsize=None)
def unpack(key: int) -> tuple[int, ...]:
    out = []
    for _ in range(_NSYM):
        r = key % _BASE
        if r >= _HALF:
            r -= _BASE
        out.append(r)
        key = (key - r) >> _BITS
    return tuple(out)


def mono_key(**powers: int) -> int:
    """Packed key of the monomial ``prod(sym**e)``."""
    key = 0
    for name, e in powers.items():
        key += e * _WEIGHTS[_sym_index(name)]
    return key


class ParamPoly:
    """Exact Laurent polynomial in the parameter symbols.

    >>> t = ParamPoly.symbol("theta")
    >>> print((1 - t) * (1 + t))
    -theta^2 + 1
    """

    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Mapping[int, Fraction] | None = None, *, _trusted: bool = False):
        if terms is None:
            self._t: dict[int, Fraction] = {}
        elif _trusted:
            self._t = terms  # type: ignore[assignment]
        else:
            self._t = {k: as_rat(v) for k, v in terms.items() if v != 0}
        self._hash = None

    # -- construction ------------------------------------------------------
    @classmethod
    def const(cls, q: Any) -> "ParamPoly":
        q = as_rat(q)
        return cls({0: q} if q else {}, _trusted=True)

    @classmethod
    def symbol(cls, name: str, power: int = 1) -> "ParamPoly":
        return cls({power * _WEIGHTS[_sym_index(name)]: Fraction(1)}, _trusted=True)

    @classmethod
    def monomial(cls, coeff: Any = 1, **powers: int) -> "ParamPoly":
        q = as_rat(coeff)
        return cls({mono_key(**powers): q} if q else {}, _trusted=True)

    @classmethod
    def from_exponents(cls, terms: Mapping[tuple[int, ...] | Mapping[str, int], Any]) -> "ParamPoly":
        out: dict[int, Fraction] = {}
        for exps, c in terms.items():
            key = mono_key(**exps) if isinstance(exps, Mapping) else pack(exps)
            q = out.get(key, 0) + as_rat(c)
            if q:
                out[key] = q
            else:
                out.pop(key, None)
        return cls(out, _trusted=True)

    # -- inspection --------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        """Exponent vector (ordered as :data:`SYMBOLS`) to coefficient."""
        return {unpack(k): v for k, v in self._t.items()}

    def raw(self) -> dict[int, Fraction]:
        return self._t

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def __len__(self) -> int:
        return len(self._t)

    def is_const(self) -> bool:
        return not self._t or (len(self._t) == 1 and 0 in self._t)

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError(f"{self} is not constant")
        return self._t.get(0, Fraction(0))

    def symbols(self) -> set[str]:
        used = set()
        for k in self._t:
            for name, e in zip(SYMBOLS, unpack(k)):
                if e:
                    used.add(name)
        return used

    def degree(self, name: str) -> tuple[int, int]:
        """(min, max) exponent of ``name`` over all terms."""
        i = _sym_index(name)
        es = [unpack(k)[i] for k in self._t] or [0]
        return min(es), max(es)

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other: Any) -> "ParamPoly":
        if isinstance(other, ParamPoly):
            return other
        return ParamPoly.const(other)

    def __add__(self, other: Any) -> "ParamPoly":
        other = self._coerce(other)
        if len(other._t) > len(self._t):
            big, small = other._t, self._t
        else:
            big, small = self._t, other._t
        out = dict(big)
        for k, v in small.items():
            q = out.get(k)
            if q is None:
                out[k] = v
            else:
                q += v
                if q:
                    out[k] = q
                else:
                    del out[k]
        return ParamPoly(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "ParamPoly":
        return ParamPoly({k: -v for k, v in self._t.items()}, _trusted=True)

    def __sub__(self, other: Any) -> "ParamPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "ParamPoly":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "ParamPoly":
        if not isinstance(other, ParamPoly):
            if isinstance(other, (int, Fraction)):
                q = as_rat(other)
                if not q:
                    return ParamPoly()
                return ParamPoly({k: v * q for k, v in self._t.items()}, _trusted=True)
            return NotImplemented
        a, b = self._t, other._t
        if len(a) < len(b):
            a, b = b, a
        out: dict[int, Fraction] = {}
        get = out.get
        for kb, vb in b.items():
            for ka, va in a.items():
                k = ka + kb
                out[k] = get(k, 0) + va * vb
        return ParamPoly({k: v for k, v in out.items() if v}, _trusted=True)

    def __rmul__(self, other: Any) -> "ParamPoly":
        return self.__mul__(other)

    def __truediv__(self, other: Any) -> "ParamPoly":
        if isinstance(other, ParamPoly):
            return self.div_monomial(other)
        q = as_rat(other)
        return self * (1 / q)

    def __pow__(self, n: int) -> "ParamPoly":
        if n < 0:
            return ParamPoly.const(1) / self.__pow__(-n)
        out = ParamPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def div_monomial(self, m: "ParamPoly") -> "ParamPoly":
        """Exact division by a single-term polynomial."""
        if len(m._t) != 1:
            raise ZeroDivisionError("can only divide a ParamPoly by a monomial")
        (km, vm), = m._t.items()
        return ParamPoly({k - km: v / vm for k, v in self._t.items()}, _trusted=True)

    def mul_monomial_key(self, key: int, coeff: Fraction = Fraction(1)) -> "ParamPoly":
        if coeff == 1:
            return ParamPoly({k + key: v for k, v in self._t.items()}, _trusted=True)
        return ParamPoly({k + key: v * coeff for k, v in self._t.items()}, _trusted=True)

    # -- substitution / evaluation ----------------------------------------
    def subs(self, **values: Any) -> "ParamPoly":
        """Substitute exact rational values for symbols."""
        idx = {_sym_index(n): as_rat(v) for n, v in values.items()}
        out: dict[int, Fraction] = {}
        for k, v in self._t.items():
            exps = list(unpack(k))
            for i, val in idx.items():
                e = exps[i]
                if e:
                    if val == 0 and e < 0:
                        raise ZeroDivisionError(f"{SYMBOLS[i]}=0 in a negative power")
                    v = v * val ** e
                    exps[i] = 0
            if v:
                nk = pack(exps)
                q = out.get(nk, 0) + v
                if q:
                    out[nk] = q
                else:
                    out.pop(nk, None)
        return ParamPoly(out, _trusted=True)

    def evaluate(self, values: Mapping[str, Any] | None = None, **kw: Any):
        """Value at bound symbols; exact if every value is rational, else floating."""
        vals = dict(values or {}, **kw)
        exact = all(isinstance(x, (int, Fraction)) for x in vals.values())
        total = 0
        for k, v in self._t.items():
            term = v if exact else float(v)
            for name, e in zip(SYMBOLS, unpack(k)):
                if e:
                    if name not in vals:
                        raise KeyError(f"no value bound for symbol {name!r}")
                    base = Fraction(vals[name]) if exact else vals[name]
                    term = term * base ** e
            total = total + term
        return total

    def truncate(self, name: str, order: int) -> "ParamPoly":
        """Drop terms whose exponent of ``name`` is >= ``order``."""
        i = _sym_index(name)
        return ParamPoly({k: v for k, v in self._t.items() if unpack(k)[i] < order}, _trusted=True)

    def coeff(self, name: str, power: int) -> "ParamPoly":
        """Coefficient of ``name**power`` (as a polynomial in the other symbols)."""
        i = _sym_index(name)
        w = _WEIGHTS[i]
        return ParamPoly({k - power * w: v for k, v in self._t.items() if unpack(k)[i] == power},
                         _trusted=True)

    # -- comparison / printing --------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, ParamPoly):
            return self._t == other._t
        if isinstance(other, (int, Fraction)):
            return self._t == ({0: Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        return sorted(((unpack(k), v) for k, v in self._t.items()), reverse=True)

    def to_text(self) -> str:
        """Canonical text: sorted monomials, rational coefficients as ``num/den``."""
        if not self._t:
            return "0"
        parts = []
        for exps, v in self.sorted_terms():
            factors = []
            for name, e in zip(SYMBOLS, exps):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            if not factors:
                parts.append(str(v))
            elif v == 1:
                parts.append("*".join(factors))
            elif v == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(f"{v}*" + "*".join(factors))
        return " + ".join(parts)

    __str__ = to_text

    def __repr__(self) -> str:
        return f"ParamPoly({self.to_text()!r})"


_TERM_RE = re.compile(r"\s*\+\s*")
_RAT_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_poly(text: str) -> ParamPoly:
    """Inverse of :meth:`ParamPoly.to_text`."""
    text = text.strip()
    if text == "0":
        return ParamPoly()
    out = ParamPoly()
    for term in _TERM_RE.split(text):
        coeff = Fraction(1)
        if term.startswith("-") and not _RAT_RE.match(term.split("*")[0]):
            coeff = Fraction(-1)
            term = term[1:]
        powers: dict[str, int] = {}
        for f in term.split("*"):
            f = f.strip()
            if _RAT_RE.match(f):
                coeff *= Fraction(f)
                continue
            name, _, e = f.partition("^")
            _sym_index(name)
            powers[name] = powers.get(name, 0) + (int(e) if e else 1)
        out = out + ParamPoly.monomial(coeff, **powers)
    return out


ONE = ParamPoly.const(1)
ZERO = ParamPoly()


def sym(name: str, power: int = 1) -> ParamPoly:
    return ParamPoly.symbol(name, power)


def poly_mul(p: ParamPoly, q: ParamPoly) -> ParamPoly:
    return p * q


# ---------------------------------------------------------------------------
# truncated series
# ---------------------------------------------------------------------------

def _payload_zero(x: Any) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return x.is_zero()


class TruncSeries:
    """Sparse truncated power series in the series variables ``vars``.

    ``orders[i]`` is the first *discarded* exponent of ``vars[i]``
    (``None`` = untruncated), mirroring ``let gamma^p => 0``.

    >>> one_g = TruncSeries.from_terms(("gamma",), (3,), {(0,): ONE, (1,): ONE})
    >>> sq = one_g * one_g
    >>> [str(sq[(i,)]) for i in range(3)]
    ['1', '2', '1']
    """

    __slots__ = ("vars", "orders", "_c")

    def __init__(self, vars: tuple[str, ...], orders: tuple[int | None, ...],
                 coeffs: Mapping[tuple[int, ...], Any] | None = None, *, _trusted: bool = False):
        if len(vars) != len(orders):
            raise ValueError("vars and orders differ in length")
        for v in vars:
            _sym_index(v)
        self.vars = tuple(vars)
        self.orders = tuple(orders)
        if coeffs is None:
            self._c: dict[tuple[int, ...], Any] = {}
        elif _trusted:
            self._c = coeffs  # type: ignore[assignment]
        else:
            self._c = {k: v for k, v in coeffs.items() if self._keep(k) and not _payload_zero(v)}

    @classmethod
    def from_terms(cls, vars, orders, coeffs) -> "TruncSeries":
        return cls(tuple(vars), tuple(orders), coeffs)

    @classmethod
    def constant(cls, vars, orders, payload) -> "TruncSeries":
        return cls(tuple(vars), tuple(orders), {(0,) * len(vars): payload})

    def _keep(self, key: tuple[int, ...]) -> bool:
        for e, o in zip(key, self.orders):
            if o is not None and e >= o:
                return False
        return True

    def like(self, coeffs: Mapping[tuple[int, ...], Any]) -> "TruncSeries":
        return TruncSeries(self.vars, self.orders, coeffs)

    # -- access ------------------------------------------------------------
    def __getitem__(self, key: tuple[int, ...]) -> Any:
        return self._c[key]

    def get(self, key: tuple[int, ...], default: Any = None) -> Any:
        return self._c.get(key, default)

    def items(self):
        return sorted(self._c.items())

    def keys(self):
        return sorted(self._c)

    def __len__(self) -> int:
        return len(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def coeff_of(self, **powers: int) -> Any:
        key = tuple(powers.get(v, 0) for v in self.vars)
        return self._c.get(key)

    # -- arithmetic --------------------------------------------------------
    def _align(self, other: "TruncSeries") -> tuple[tuple[int | None, ...]]:
        if self.vars != other.vars:
            raise ValueError(f"series variables differ: {self.vars} vs {other.vars}")
        return tuple(_min_order(a, b) for a, b in zip(self.orders, other.orders))

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        orders = self._align(other)
        out = dict(self._c)
        for k, v in other._c.items():
            if k in out:
                out[k] = out[k] + v
            else:
                out[k] = v
        return TruncSeries(self.vars, orders, out)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.vars, self.orders, {k: -v for k, v in self._c.items()}, _trusted=True)

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other: Any) -> "TruncSeries":
        if not isinstance(other, TruncSeries):
            return self.map(lambda v: v * other)
        return series_mul(self, other)

    def map(self, fn: Callable[[Any], Any]) -> "TruncSeries":
        return TruncSeries(self.vars, self.orders, {k: fn(v) for k, v in self._c.items()})

    def lmap(self, fn: Callable[[Any], Any]) -> "TruncSeries":
        """Left-multiply payloads, ``fn`` applied as ``fn(payload)``; alias of :meth:`map`."""
        return self.map(fn)

    def shift(self, **powers: int) -> "TruncSeries":
        """Multiply by the monomial ``prod(var**e)`` of series variables."""
        add = tuple(powers.get(v, 0) for v in self.vars)
        out = {tuple(a + b for a, b in zip(k, add)): v for k, v in self._c.items()}
        return TruncSeries(self.vars, self.orders, out)

    def truncate(self, orders: Mapping[str, int] | tuple[int | None, ...]) -> "TruncSeries":
        if isinstance(orders, Mapping):
            orders = tuple(_min_order(o, orders.get(v)) for v, o in zip(self.vars, self.orders))
        else:
            orders = tuple(_min_order(a, b) for a, b in zip(self.orders, orders))
        return TruncSeries(self.vars, orders, self._c)

    def fold(self) -> Any:
        """Collapse into a single payload, folding series variables in as symbols."""
        total = None
        for key, v in self.items():
            kk = sum(e * _WEIGHTS[_sym_index(n)] for n, e in zip(self.vars, key))
            term = _mul_mono(v, kk)
            total = term if total is None else total + term
        return total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.vars == other.vars and self._c == other._c

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v}" for k, v in self.items())
        return f"TruncSeries({self.vars}, orders={self.orders}, {{{body}}})"


def _mul_mono(payload: Any, key: int) -> Any:
    if key == 0:
        return payload
    if isinstance(payload, ParamPoly):
        return payload.mul_monomial_key(key)
    return payload.mul_monomial_key(key)


def _min_order(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def series_mul(s: TruncSeries, t: TruncSeries,
               mul: Callable[[Any, Any], Any] | None = None) -> TruncSeries:
    """Truncated product; ``mul`` combines payloads (default ``*``)."""
    orders = s._align(t)
    mul = mul or (lambda x, y: x * y)
    out: dict[tuple[int, ...], Any] = {}
    for ka, va in s._c.items():
        for kb, vb in t._c.items():
            key = tuple(a + b for a, b in zip(ka, kb))
            ok = True
            for e, o in zip(key, orders):
                if o is not None and e >= o:
                    ok = False
                    break
            if not ok:
                continue
            p = mul(va, vb)
            if key in out:
                out[key] = out[key] + p
            else:
                out[key] = p
    return TruncSeries(s.vars, orders, out)


def series_power(s: TruncSeries, n: int, one: Any) -> TruncSeries:
    out = TruncSeries.constant(s.vars, s.orders, one)
    for _ in range(n):
        out = out * s
    return out


def series_compose(coeffs: Iterable[Fraction], x: TruncSeries, one: Any,
                   odd_only: bool = False) -> TruncSeries:
    """Evaluate ``sum_n coeffs[n] x**n`` for a series ``x`` with zero constant term."""
    coeffs = list(coeffs)
    if x.get((0,) * len(x.vars)) is not None:
        raise ValueError("composition needs a series without constant term")
    total = TruncSeries(x.vars, x.orders, {})
    power = TruncSeries.constant(x.vars, x.orders, one)
    for n, c in enumerate(coeffs):
        if n:
            power = power * x
            if power.is_zero():
                break
        if c:
            total = total + power.map(lambda v, c=c: v * c)
    return total


def all_exponents(orders: tuple[int, ...]):
    return _iproduct(*(range(o) for o in orders))
