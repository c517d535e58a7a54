"""Scalar expressions over named variables.

Expressions are kept in a light normal form: a sum of monomials with exact
rational coefficients, where a monomial is a product of atoms raised to
integer powers.  Atoms are variables, ``sin``/``cos``/``exp`` applications and
reciprocals of multi-term sums.  Like terms are collected on construction, so
polynomial cancellations are exact, but no further simplification is tried.
Semantic equality is decided by :func:`probably_equal`.
"""

from __future__ import annotations

import math
import re
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

Number = Union[int, Fraction]

__all__ = [
    "Variable",
    "Expr",
    "SamplingPolicy",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "EvaluationError",
    "const",
    "var",
    "sin",
    "cos",
    "exp",
    "parse_expr",
    "differentiate",
    "evaluate",
    "evaluate_at_samples",
    "sample_points",
    "probably_equal",
    "max_abs",
]

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
FUNCTIONS = ("sin", "cos", "exp")


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(ValueError):
    pass


class EvaluationError(ArithmeticError):
    """Division by zero or an unassigned variable during evaluation."""


@dataclass(frozen=True)
class Variable:
    name: str

    def __post_init__(self):
        if not _IDENT.match(self.name) or self.name in FUNCTIONS:
            raise ValueError(f"invalid variable name {self.name!r}")

    def __str__(self):
        return self.name


def _name(v) -> str:
    return v.name if isinstance(v, Variable) else str(v)


# -- atoms -------------------------------------------------------------------


@dataclass(frozen=True)
class _Sym:
    name: str


@dataclass(frozen=True)
class _Fn:
    name: str
    arg: "Expr"


@dataclass(frozen=True)
class _Recip:
    arg: "Expr"


def _atom_key(a) -> str:
    if isinstance(a, _Sym):
        return "0" + a.name
    if isinstance(a, _Fn):
        return "1" + a.name + str(a.arg)
    return "2" + str(a.arg)


def _mono_key(m: frozenset) -> tuple:
    return tuple(sorted((_atom_key(a), e) for a, e in m))


_ONE = frozenset()


class Expr:
    """Immutable scalar expression (sum of rational-weighted monomials)."""

    __slots__ = ("_terms", "_hash", "_free", "_str")

    def __init__(self, terms: Mapping[frozenset, Fraction] | None = None):
        self._terms = {m: c for m, c in (terms or {}).items() if c != 0}
        self._hash = None
        self._free = None
        self._str = None

    # construction helpers
    @staticmethod
    def _coerce(x) -> "Expr":
        if isinstance(x, Expr):
            return x
        if isinstance(x, (int, Fraction)):
            return const(x)
        if isinstance(x, float):
            return const(Fraction(x))
        if isinstance(x, (str, Variable)):
            return var(x)
        raise TypeError(f"cannot convert {type(x).__name__} to Expr")

    @property
    def terms(self) -> Mapping[frozenset, Fraction]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == _ONE for m in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("expression is not constant")
        return self._terms.get(_ONE, Fraction(0))

    def free_variables(self) -> frozenset:
        if self._free is None:
            names = set()
            for m in self._terms:
                for a, _ in m:
                    if isinstance(a, _Sym):
                        names.add(a.name)
                    else:
                        names |= a.arg.free_variables()
            self._free = frozenset(names)
        return self._free

    def _single_monomial(self):
        if len(self._terms) == 1:
            ((m, c),) = self._terms.items()
            return m, c
        return None

    # arithmetic
    def __add__(self, other):
        other = Expr._coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0) + c
        return Expr(terms)

    __radd__ = __add__

    def __neg__(self):
        return Expr({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-Expr._coerce(other))

    def __rsub__(self, other):
        return Expr._coerce(other) + (-self)

    def __mul__(self, other):
        other = Expr._coerce(other)
        if not self._terms or not other._terms:
            return ZERO
        terms: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                if m1 == _ONE:
                    m, extra = m2, None
                elif m2 == _ONE:
                    m, extra = m1, None
                else:
                    m, extra = _mono_mul(m1, m2)
                if extra is not None:
                    for mm, cc in extra._terms.items():
                        terms[mm] = terms.get(mm, 0) + c1 * c2 * cc
                else:
                    terms[m] = terms.get(m, 0) + c1 * c2
        return Expr(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * Expr._coerce(other) ** -1

    def __rtruediv__(self, other):
        return Expr._coerce(other) * self**-1

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n == 0:
            return ONE
        if n < 0:
            single = self._single_monomial()
            if single is None:
                if not self._terms:
                    raise ZeroDivisionError("reciprocal of the zero expression")
                return Expr({frozenset({(_Recip(self), -n)}): Fraction(1)})
            m, c = single
            out = const(Fraction(1) / c)
            for a, e in m:
                out = out * _atom_pow(a, -e)
            return out ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # comparisons are structural
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"Expr({str(self)!r})"

    def __str__(self):
        if self._str is None:
            self._str = _render(self)
        return self._str

    def substitute(self, mapping: Mapping[str, "Expr"]) -> "Expr":
        """Replace variables by expressions (used for chart renaming)."""
        if not mapping or not (self.free_variables() & set(mapping)):
            return self
        out = ZERO
        for m, c in self._terms.items():
            term = const(c)
            for a, e in m:
                term = term * (_subst_atom(a, mapping) ** e)
            out = out + term
        return out

    def degree_in(self, name: str) -> set:
        """Exponents of ``name`` over all monomials (None if it hides in an atom)."""
        degs = set()
        for m in self._terms:
            d = 0
            for a, e in m:
                if isinstance(a, _Sym):
                    if a.name == name:
                        d = e
                elif name in a.arg.free_variables():
                    d = None
                    break
            degs.add(d)
        return degs


def _subst_atom(a, mapping) -> Expr:
    if isinstance(a, _Sym):
        return Expr._coerce(mapping[a.name]) if a.name in mapping else _atom_expr(a)
    if isinstance(a, _Fn):
        return _FN_BUILDERS[a.name](a.arg.substitute(mapping))
    return a.arg.substitute(mapping) ** -1


def _atom_expr(a) -> Expr:
    return Expr({frozenset({(a, 1)}): Fraction(1)})


def _atom_pow(a, e: int) -> Expr:
    if e == 0:
        return ONE
    if isinstance(a, _Recip) and e < 0:
        return a.arg ** (-e)
    return Expr({frozenset({(a, e)}): Fraction(1)})


def _mono_mul(m1: frozenset, m2: frozenset):
    exps = dict(m1)
    for a, e in m2:
        exps[a] = exps.get(a, 0) + e
    extra = None
    out = []
    for a, e in exps.items():
        if e == 0:
            continue
        if isinstance(a, _Recip) and e < 0:
            # a reciprocal cannot carry a negative power; expand the sum back
            extra = (extra or ONE) * a.arg ** (-e)
            continue
        out.append((a, e))
    m = frozenset(out)
    if extra is not None:
        return m, Expr({m: Fraction(1)}) * extra
    return m, None


def const(c: Number) -> Expr:
    c = Fraction(c)
    return Expr({_ONE: c}) if c else Expr()


def var(v) -> Expr:
    name = _name(v)
    Variable(name)
    return _atom_expr(_Sym(name))


ZERO = Expr()
ONE = const(1)


def _fn(name: str, e) -> Expr:
    e = Expr._coerce(e)
    if e.is_zero():
        return ZERO if name == "sin" else ONE
    return _atom_expr(_Fn(name, e))


def sin(e) -> Expr:
    return _fn("sin", e)


def cos(e) -> Expr:
    return _fn("cos", e)


def exp(e) -> Expr:
    return _fn("exp", e)


_FN_BUILDERS = {"sin": sin, "cos": cos, "exp": exp}


# -- rendering -----------------------------------------------------------------


def _render_atom(a) -> str:
    if isinstance(a, _Sym):
        return a.name
    if isinstance(a, _Fn):
        return f"{a.name}({a.arg})"
    return f"({a.arg})"


def _render_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _render_monomial(m: frozenset, c: Fraction) -> str:
    num, den = [], []
    for a, e in sorted(m, key=lambda ae: (_atom_key(ae[0]), ae[1])):
        if isinstance(a, _Recip):
            den.append((a, e))
        elif e > 0:
            num.append((a, e))
        else:
            den.append((a, -e))
    parts = [_render_atom(a) + (f"^{e}" if e != 1 else "") for a, e in num]
    mag = abs(c)
    text = "*".join(parts)
    if mag.numerator != 1 or not parts:
        text = str(mag.numerator) + ("*" + text if text else "")
    for a, e in den:
        text += "/" + _render_atom(a) + (f"^{e}" if e != 1 else "")
    if mag.denominator != 1:
        text += f"/{mag.denominator}"
    return text


def _render(e: Expr) -> str:
    if not e._terms:
        return "0"
    items = sorted(e._terms.items(), key=lambda mc: (len(mc[0]), _mono_key(mc[0])))
    out = ""
    for idx, (m, c) in enumerate(items):
        body = _render_monomial(m, c)
        if idx == 0:
            out = ("-" if c < 0 else "") + body
        else:
            out += (" - " if c < 0 else " + ") + body
    return out


# -- parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z][A-Za-z0-9_]*)|(.))")


class _Parser:
    def __init__(self, text: str, vocabulary: set | None):
        self.text = text
        self.vocab = vocabulary
        self.tokens = []
        pos = 0
        while pos < len(text):
            mt = _TOKEN.match(text, pos)
            if mt is None or mt.end() == pos:
                break
            if mt.group(0).strip() == "":
                pos = mt.end()
                continue
            kind = "num" if mt.group(1) else "id" if mt.group(2) else "op"
            value = mt.group(1) or mt.group(2) or mt.group(3)
            self.tokens.append((kind, value, mt.start(mt.lastindex)))
            pos = mt.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value or kind == "end":
            raise ExprSyntaxError(f"expected {value!r}", pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {v!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            kind, v, pos = self.peek()
            rhs = self.factor()
            if op == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    raise ExprSyntaxError("division by the literal zero", pos)
                e = e / rhs
        return e

    def factor(self):
        kind, v, pos = self.peek()
        if kind == "op" and v in "-+":
            self.take()
            f = self.factor()
            return -f if v == "-" else f
        b = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, v, pos = self.take()
            if kind != "num" or not v.isdigit():
                raise ExprSyntaxError("expected integer exponent", pos)
            n = sign * int(v)
            if n < 0 and b.is_zero():
                raise ExprSyntaxError("negative power of zero", pos)
            b = b**n
        return b

    def base(self):
        kind, v, pos = self.take()
        if kind == "num":
            return const(Fraction(v))
        if kind == "id":
            if v in FUNCTIONS:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return _FN_BUILDERS[v](inner)
            if self.vocab is not None and v not in self.vocab:
                raise UnknownIdentifierError(f"unknown identifier {v!r} at position {pos}")
            return var(v)
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", pos)
        raise ExprSyntaxError(f"unexpected {v!r}", pos)


def parse_expr(text: str, vocabulary: Iterable | None = None) -> Expr:
    """Parse ``text`` with the grammar::

        expr   := term (('+'|'-') term)*
        term   := factor (('*'|'/') factor)*
        factor := '-' factor | base ('^' integer)?
        base   := number | identifier | '(' expr ')' | fn '(' expr ')'

    ``vocabulary`` restricts identifiers; ``None`` accepts any identifier.
    """
    vocab = None if vocabulary is None else {_name(v) for v in vocabulary}
    return _Parser(text, vocab).parse()


# -- calculus --------------------------------------------------------------------


def _atom_diff(a, name: str) -> Expr:
    if isinstance(a, _Sym):
        return ONE if a.name == name else ZERO
    inner = differentiate(a.arg, name)
    if inner.is_zero():
        return ZERO
    if isinstance(a, _Fn):
        if a.name == "sin":
            return cos(a.arg) * inner
        if a.name == "cos":
            return -sin(a.arg) * inner
        return exp(a.arg) * inner
    return -inner * _atom_pow(a, 2)


def differentiate(e: Expr, v) -> Expr:
    """Exact partial derivative of ``e`` with respect to variable ``v``."""
    name = _name(v)
    if name not in e.free_variables():
        return ZERO
    out: dict = {}
    for m, c in e.terms.items():
        for a, k in m:
            if isinstance(a, _Sym):
                if a.name != name:
                    continue
                rest = dict(m)
                if k == 1:
                    del rest[a]
                else:
                    rest[a] = k - 1
                mm = frozenset(rest.items())
                out[mm] = out.get(mm, 0) + c * k
                continue
            da = _atom_diff(a, name)
            if da.is_zero():
                continue
            rest = dict(m)
            if k == 1:
                del rest[a]
            else:
                rest[a] = k - 1
            piece = Expr({frozenset(rest.items()): c * k}) * da
            for mm, cc in piece.terms.items():
                out[mm] = out.get(mm, 0) + cc
    return Expr(out)


# -- numeric evaluation ----------------------------------------------------------


def _eval_vec(e: Expr, env: Mapping[str, np.ndarray], cache: dict, size: int):
    """Vectorised evaluation; returns (values, bad) with bad marking zero divisions."""
    key = id(e)
    hit = cache.get(key)
    if hit is not None and hit[0] is e:
        return hit[1], hit[2]
    values = np.zeros(size)
    bad = np.zeros(size, dtype=bool)
    for m, c in e.terms.items():
        term = np.full(size, float(c))
        for a, k in m:
            if isinstance(a, _Sym):
                if a.name not in env:
                    raise EvaluationError(f"unassigned variable {a.name!r}")
                base = env[a.name]
            elif isinstance(a, _Fn):
                inner, ib = _eval_vec(a.arg, env, cache, size)
                bad |= ib
                base = {"sin": np.sin, "cos": np.cos, "exp": np.exp}[a.name](inner)
            else:
                inner, ib = _eval_vec(a.arg, env, cache, size)
                bad |= ib
                zero = inner == 0
                bad |= zero
                base = 1.0 / np.where(zero, 1.0, inner)
            if k < 0:
                zero = base == 0
                bad |= zero
                base = 1.0 / np.where(zero, 1.0, base)
                k = -k
            term = term * base**k if k != 1 else term * base
        values = values + term
    bad |= ~np.isfinite(values)
    cache[key] = (e, values, bad)
    return values, bad


def evaluate(e: Expr, pt: Mapping) -> float:
    """IEEE-double value of ``e`` at a single point ``{variable: value}``."""
    env = {_name(k): np.array([float(v)]) for k, v in pt.items()}
    with np.errstate(all="ignore"):
        vals, bad = _eval_vec(e, env, {}, 1)
    if bad[0]:
        raise EvaluationError(f"division by zero evaluating {e} at {dict(pt)}")
    return float(vals[0])


@dataclass(frozen=True)
class SamplingPolicy:
    """Seeded random-evaluation policy for identity tests.

    ``box`` overrides the sampling interval per variable name.  The variable
    ``p`` (the fibre coordinate of the symplectization) is sampled with
    ``0.5 <= |p| <= 2`` unless overridden by an interval excluding zero.
    """

    seed: int = 0xC0FFEE
    num_samples: int = 32
    box: Mapping[str, tuple] = field(default_factory=dict)
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be positive")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        lo_hi = self.box.get("p")
        if lo_hi is not None and lo_hi[0] <= 0 <= lo_hi[1]:
            raise ValueError("the sampling interval for p must exclude 0")

    def __hash__(self):
        return hash((self.seed, self.num_samples, tuple(sorted(self.box.items())), self.abs_tol, self.rel_tol))

    def with_(self, **changes) -> "SamplingPolicy":
        data = dict(seed=self.seed, num_samples=self.num_samples, box=self.box,
                    abs_tol=self.abs_tol, rel_tol=self.rel_tol)
        data.update(changes)
        return SamplingPolicy(**data)

    def sample(self, name: str, size: int, attempt: int = 0) -> np.ndarray:
        rng = np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode()), attempt])
        if name in self.box:
            lo, hi = self.box[name]
            return rng.uniform(lo, hi, size)
        if name == "p":
            return rng.uniform(0.5, 2.0, size) * rng.choice([-1.0, 1.0], size)
        return rng.uniform(-2.0, 2.0, size)


MAX_RESAMPLES = 8


def sample_points(names: Iterable[str], policy: SamplingPolicy, attempt: int = 0) -> dict:
    return {n: policy.sample(n, policy.num_samples, attempt) for n in sorted(set(names))}


def evaluate_at_samples(exprs: Iterable[Expr], policy: SamplingPolicy, extra_names=()) -> tuple:
    """Evaluate several expressions at the same seeded sample points.

    Points where some expression divides by zero are redrawn (up to
    ``MAX_RESAMPLES`` times).  Returns ``(values, env)`` with ``values`` of
    shape ``(len(exprs), num_samples)``.
    """
    exprs = list(exprs)
    names = set(extra_names)
    for e in exprs:
        names |= e.free_variables()
    size = policy.num_samples
    env = sample_points(names, policy)
    with np.errstate(all="ignore"):
        for attempt in range(MAX_RESAMPLES + 1):
            cache: dict = {}
            rows, bad = [], np.zeros(size, dtype=bool)
            for e in exprs:
                v, b = _eval_vec(e, env, cache, size)
                rows.append(v)
                bad |= b
            if not bad.any():
                break
            if attempt == MAX_RESAMPLES:
                raise EvaluationError(
                    f"division by zero persisted after {MAX_RESAMPLES} resampling attempts")
            fresh = sample_points(names, policy, attempt + 1)
            env = {n: np.where(bad, fresh[n], env[n]) for n in env}
    values = np.array(rows) if rows else np.zeros((0, size))
    return values, env


def probably_equal(e1: Expr, e2: Expr, policy: SamplingPolicy | None = None) -> bool:
    """Randomised pointwise equality test with mixed absolute/relative tolerance."""
    e1, e2 = Expr._coerce(e1), Expr._coerce(e2)
    if (e1 - e2).is_zero():
        return True
    policy = policy or SamplingPolicy()
    (v1, v2), _ = evaluate_at_samples([e1, e2], policy)
    bound = policy.abs_tol + policy.rel_tol * np.maximum(np.abs(v1), np.abs(v2))
    return bool(np.all(np.abs(v1 - v2) <= bound))


def max_abs(exprs: Iterable[Expr], policy: SamplingPolicy | None = None) -> float:
    """Largest absolute value of any expression over the policy's sample points."""
    exprs = [e for e in exprs if not e.is_zero()]
    if not exprs:
        return 0.0
    values, _ = evaluate_at_samples(exprs, policy or SamplingPolicy())
    return float(np.max(np.abs(values)))


def isclose_float(a: float, b: float, policy: SamplingPolicy) -> bool:
    return abs(a - b) <= policy.abs_tol + policy.rel_tol * max(abs(a), abs(b))


def as_fraction(x: float, max_den: int = 10**6) -> Fraction:
    return Fraction(x).limit_denominator(max_den) if math.isfinite(x) else Fraction(0)
