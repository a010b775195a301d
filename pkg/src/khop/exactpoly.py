"""Exact multivariate polynomials with rational coefficients.

Monomials are packed into a single Python integer, one 8-bit exponent field per
registry symbol, so monomial multiplication is integer addition. Coefficients
are ``gmpy2.mpq`` when gmpy2 is importable and ``fractions.Fraction``
otherwise; every public value that leaves this module is a ``Fraction``.

The registry is fixed for the process: endpoint offsets ``tau, tau1..tau12``
(ascending by index), cell intensities ``lambda, lambda1..lambda12`` and
transient integration variables ``u1..u16``.
"""
from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _Q

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover
    _Q = Fraction
    HAVE_GMPY2 = False

__all__ = [
    "VarRegistry",
    "REGISTRY",
    "MultiPoly",
    "ChamberPoly",
    "definite_integral",
    "box_integral",
    "chain_integral",
    "substitute",
    "rename",
    "poly_arith",
    "to_fraction",
    "tau",
    "lam",
    "bound",
    "specialize",
    "lambda_symbols",
    "effective_caps",
    "HAVE_GMPY2",
]

_BITS = 8
_FIELD = (1 << _BITS) - 1

MAX_TAU = 12
MAX_LAMBDA = 12
MAX_BOUND = 16


def to_fraction(x) -> Fraction:
    """Convert an internal coefficient (or int/str/Fraction) to ``Fraction``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # decimal reading, so that 0.1 means 1/10
        return Fraction(repr(x))
    return Fraction(int(x.numerator), int(x.denominator))


def _coef(x):
    if isinstance(x, Fraction):
        return _Q(x.numerator, x.denominator)
    return _Q(x)


class VarRegistry:
    """Ordered symbol table with a role per symbol.

    Roles are ``"tau"`` (endpoint offsets, totally ordered by index),
    ``"lambda"`` (cell intensities) and ``"bound"`` (integration variables).
    """

    def __init__(self, symbols: Sequence[tuple[str, str]]):
        names = [s for s, _ in symbols]
        if len(set(names)) != len(names):
            raise ValueError("duplicate symbol names")
        self.names: tuple[str, ...] = tuple(names)
        self.roles: tuple[str, ...] = tuple(r for _, r in symbols)
        self.index: dict[str, int] = {s: i for i, s in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def role(self, name: str) -> str:
        return self.roles[self.index[name]]

    def tau_rank(self, name: str) -> tuple[int, int]:
        """Order key of a tau symbol: ``(family, index)``.

        ``tau`` forms its own family; ``tau1 < tau2 < ...`` form another.
        Comparing across families is undefined.
        """
        if self.role(name) != "tau":
            raise ValueError(f"{name} is not a tau symbol")
        if name == "tau":
            return (0, 0)
        return (1, int(name[3:]))

    def tau_less_eq(self, a: str, b: str) -> bool:
        fa, ia = self.tau_rank(a)
        fb, ib = self.tau_rank(b)
        if fa != fb:
            raise ValueError(f"order of {a} and {b} is not declared")
        return ia <= ib

    def tau_min(self, names: Iterable[str]) -> str:
        names = list(names)
        best = names[0]
        for n in names[1:]:
            if not self.tau_less_eq(best, n):
                best = n
        return best


def _standard_registry() -> VarRegistry:
    syms = [("tau", "tau")]
    syms += [(f"tau{i}", "tau") for i in range(1, MAX_TAU + 1)]
    syms += [("lambda", "lambda")]
    syms += [(f"lambda{i}", "lambda") for i in range(1, MAX_LAMBDA + 1)]
    syms += [(f"u{i}", "bound") for i in range(1, MAX_BOUND + 1)]
    return VarRegistry(syms)


REGISTRY = _standard_registry()
_SHIFT = {name: i * _BITS for i, name in enumerate(REGISTRY.names)}


def tau(i: int | None = None) -> str:
    return "tau" if i is None else f"tau{i}"


def lam(i: int | None = None) -> str:
    return "lambda" if i is None else f"lambda{i}"


def bound(i: int) -> str:
    return f"u{i}"


def _exp(mono: int, shift: int) -> int:
    return (mono >> shift) & _FIELD


def _decode(mono: int) -> list[tuple[int, int]]:
    out = []
    i = 0
    while mono:
        e = mono & _FIELD
        if e:
            out.append((i, e))
        mono >>= _BITS
        i += 1
    return out


class MultiPoly:
    """Polynomial over :data:`REGISTRY` with exact rational coefficients.

    Instances are treated as immutable. ``terms`` maps packed monomials to
    nonzero coefficients.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, object] | None = None):
        self.terms: dict[int, object] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    self.terms[m] = c

    # construction -----------------------------------------------------
    @classmethod
    def const(cls, c) -> "MultiPoly":
        c = _coef(c)
        return cls({0: c}) if c else cls()

    @classmethod
    def var(cls, name: str, power: int = 1) -> "MultiPoly":
        if power > _FIELD:
            raise OverflowError("exponent field overflow")
        return cls({power << _SHIFT[name]: _Q(1)})

    @classmethod
    def monomial(cls, coef, powers: Mapping[str, int]) -> "MultiPoly":
        m = 0
        for name, e in powers.items():
            m += e << _SHIFT[name]
        return cls({m: _coef(coef)})

    @classmethod
    def _raw(cls, terms: dict[int, object]) -> "MultiPoly":
        p = cls.__new__(cls)
        p.terms = terms
        return p

    # inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def symbols(self) -> set[str]:
        acc = 0
        for m in self.terms:
            acc |= m
        out = set()
        for i in range(len(REGISTRY)):
            if (acc >> (i * _BITS)) & _FIELD:
                out.add(REGISTRY.names[i])
        # OR of packed fields can hide nothing: a field is nonzero in the OR
        # iff it is nonzero in some monomial
        return out

    def degree(self, name: str | None = None) -> int:
        if not self.terms:
            return -1
        if name is None:
            return max(sum(e for _, e in _decode(m)) for m in self.terms)
        s = _SHIFT[name]
        return max(_exp(m, s) for m in self.terms)

    def coefficients(self) -> dict[tuple[tuple[str, int], ...], Fraction]:
        """Return ``{((symbol, exponent), ...): Fraction}``."""
        out = {}
        for m, c in self.terms.items():
            key = tuple((REGISTRY.names[i], e) for i, e in _decode(m))
            out[key] = to_fraction(c)
        return out

    def coefficient(self, powers: Mapping[str, int]) -> Fraction:
        m = 0
        for name, e in powers.items():
            m += e << _SHIFT[name]
        return to_fraction(self.terms.get(m, 0))

    # ring operations --------------------------------------------------
    def __add__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(other)
        if len(other.terms) > len(self.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = dict(a)
        for m, c in b.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return MultiPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "MultiPoly":
        return MultiPoly.const(other) - self

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            c = _coef(other)
            if not c:
                return MultiPoly()
            return MultiPoly._raw({m: v * c for m, v in self.terms.items()})
        out: dict[int, object] = {}
        get = out.get
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 + m2
                v = get(m)
                out[m] = c1 * c2 if v is None else v + c1 * c2
        return MultiPoly._raw({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power")
        result = MultiPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            try:
                other = MultiPoly.const(to_fraction(other))
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    # evaluation -------------------------------------------------------
    def eval(self, assignment: Mapping[str, object]) -> Fraction:
        """Exact value at a full assignment of the occurring symbols."""
        missing = self.symbols() - set(assignment)
        if missing:
            raise KeyError(f"missing symbols: {sorted(missing)}")
        vals = {REGISTRY.index[k]: _coef(to_fraction(v)) for k, v in assignment.items()
                if k in REGISTRY.index}
        total = _Q(0)
        for m, c in self.terms.items():
            t = c
            for i, e in _decode(m):
                t = t * vals[i] ** e
            total += t
        return to_fraction(total)

    def eval_float(self, assignment: Mapping[str, float]) -> float:
        missing = self.symbols() - set(assignment)
        if missing:
            raise KeyError(f"missing symbols: {sorted(missing)}")
        vals = {REGISTRY.index[k]: float(v) for k, v in assignment.items()
                if k in REGISTRY.index}
        terms = []
        for m, c in self.terms.items():
            t = float(c)
            for i, e in _decode(m):
                t *= vals[i] ** e
            terms.append(t)
        return math.fsum(terms)

    def eval_array(self, columns: Mapping[str, "object"]):
        """Vectorised float evaluation; ``columns`` maps symbols to numpy arrays."""
        total = 0.0
        for m, c in self.terms.items():
            t = float(c)
            for i, e in _decode(m):
                t = t * columns[REGISTRY.names[i]] ** e
            total = total + t
        return total

    # formatting -------------------------------------------------------
    def _sorted_terms(self):
        def key(item):
            dec = _decode(item[0])
            return (sum(e for _, e in dec), [(i, -e) for i, e in dec])

        return sorted(self.terms.items(), key=key)

    def to_string(self, rename: Mapping[str, str] | None = None) -> str:
        """Canonical form, e.g. ``1/2*tau^2 + 2/3*tau^3``."""
        if not self.terms:
            return "0"
        rename = rename or {}
        parts: list[str] = []
        for m, c in self._sorted_terms():
            c = to_fraction(c)
            mono = "*".join(
                rename.get(REGISTRY.names[i], REGISTRY.names[i]) + (f"^{e}" if e > 1 else "")
                for i, e in _decode(m)
            )
            neg = c < 0
            a = -c if neg else c
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if not parts:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append((" - " if neg else " + ") + body)
        return "".join(parts)

    __str__ = to_string

    def __repr__(self) -> str:
        return f"MultiPoly({self.to_string()!r})"

    _TERM = re.compile(r"^(?:(\d+(?:/\d+)?)\*?)?(.*)$")

    @classmethod
    def parse(cls, text: str) -> "MultiPoly":
        """Inverse of :meth:`to_string` (canonical strings only)."""
        text = text.strip()
        if text == "0":
            return cls()
        tokens = re.split(r" ([+-]) ", text)
        signs = ["+"] + tokens[1::2]
        bodies = tokens[0::2]
        out = cls()
        for sign, body in zip(signs, bodies):
            neg = sign == "-"
            if body.startswith("-"):
                neg = not neg
                body = body[1:]
            coef_s, mono_s = cls._TERM.match(body).groups()
            if coef_s is not None and not mono_s:
                out = out + (-1 if neg else 1) * to_fraction(coef_s)
                continue
            coef = to_fraction(coef_s) if coef_s else Fraction(1)
            powers: dict[str, int] = {}
            for f in mono_s.split("*"):
                name, _, e = f.partition("^")
                if name not in REGISTRY:
                    raise ValueError(f"unknown symbol {name!r}")
                powers[name] = powers.get(name, 0) + (int(e) if e else 1)
            out = out + MultiPoly.monomial(-coef if neg else coef, powers)
        return out


def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def rename(p: MultiPoly, mapping: Mapping[str, str]) -> MultiPoly:
    """Substitute symbols by symbols. Several sources may share a target."""
    moves = [(_SHIFT[s], _SHIFT[t]) for s, t in mapping.items() if s != t]
    if not moves:
        return p
    out: dict[int, object] = {}
    for m, c in p.terms.items():
        nm = m
        for s, _ in moves:
            nm -= ((m >> s) & _FIELD) << s
        for s, t in moves:
            nm += ((m >> s) & _FIELD) << t
        v = out.get(nm)
        out[nm] = c if v is None else v + c
    return MultiPoly._raw({m: c for m, c in out.items() if c})


def _split_by(p: MultiPoly, name: str) -> dict[int, dict[int, object]]:
    s = _SHIFT[name]
    groups: dict[int, dict[int, object]] = {}
    for m, c in p.terms.items():
        e = (m >> s) & _FIELD
        groups.setdefault(e, {})[m - (e << s)] = c
    return groups


def substitute(p: MultiPoly, v: str, q: MultiPoly | object) -> MultiPoly:
    """Exact composition ``p[v := q]``."""
    if not isinstance(q, MultiPoly):
        q = MultiPoly.const(to_fraction(q))
    groups = _split_by(p, v)
    if list(groups) == [0]:
        return p
    out = MultiPoly()
    powers = {0: MultiPoly.const(1)}
    for e in sorted(groups):
        if e not in powers:
            powers[e] = q ** e
        out = out + MultiPoly._raw(groups[e]) * powers[e]
    return out


def _antiderivative_terms(p: MultiPoly, v: str):
    s = _SHIFT[v]
    for m, c in p.terms.items():
        e = (m >> s) & _FIELD
        yield m - (e << s), e + 1, c / (e + 1)


def definite_integral(p: MultiPoly, v: str, lo, hi) -> MultiPoly:
    """``∫_lo^hi p dv`` with polynomial (or constant) bounds free of ``v``."""
    lo = lo if isinstance(lo, MultiPoly) else MultiPoly.const(to_fraction(lo))
    hi = hi if isinstance(hi, MultiPoly) else MultiPoly.const(to_fraction(hi))
    if v in lo.symbols() or v in hi.symbols():
        raise ValueError(f"integration bound contains the variable {v}")
    anti: dict[int, object] = {}
    s = _SHIFT[v]
    for base, e1, c in _antiderivative_terms(p, v):
        m = base + (e1 << s)
        anti[m] = anti.get(m, 0) + c
    anti_p = MultiPoly._raw({m: c for m, c in anti.items() if c})
    return substitute(anti_p, v, hi) - substitute(anti_p, v, lo)


def _integrate_var_between(p: MultiPoly, v: str, lo: str | None, hi: str) -> MultiPoly:
    """Fast path of :func:`definite_integral` when both bounds are symbols (or 0)."""
    s_hi = _SHIFT[hi]
    s_lo = None if lo is None else _SHIFT[lo]
    out: dict[int, object] = {}
    get = out.get
    for base, e1, c in _antiderivative_terms(p, v):
        m = base + (e1 << s_hi)
        w = get(m)
        out[m] = c if w is None else w + c
        if s_lo is not None:
            m = base + (e1 << s_lo)
            w = get(m)
            out[m] = -c if w is None else w - c
    for m, c in out.items():
        if _exp(m, s_hi) > _FIELD - 1:
            raise OverflowError("exponent field overflow")
    return MultiPoly._raw({m: c for m, c in out.items() if c})


def chain_integral(integrand: MultiPoly, caps: Sequence[str]) -> MultiPoly:
    """Integrate over ``0 < u1 < ... < ul`` with ``u_i < caps[i-1]``.

    ``caps`` must be non-decreasing tau symbols. The innermost variable is the
    largest one: ``u_l`` runs from ``u_{l-1}`` to its cap, then ``u_{l-1}``,
    and so on; this is exact because every cap of a smaller variable is also
    below the caps of all larger ones.
    """
    p = integrand
    n = len(caps)
    for i in range(n, 0, -1):
        lo = bound(i - 1) if i > 1 else None
        p = _integrate_var_between(p, bound(i), lo, caps[i - 1])
    return p


def effective_caps(caps: Sequence[str]) -> list[str]:
    """Suffix minima: ``e_i = min_{j >= i} caps[j]`` under the tau order."""
    out = list(caps)
    for i in range(len(out) - 2, -1, -1):
        if not REGISTRY.tau_less_eq(out[i], out[i + 1]):
            out[i] = out[i + 1]
    return out


def _multiset_permutations(items: Sequence):
    counts = Counter(items)
    keys = sorted(counts)
    n = len(items)
    seq: list = []

    def rec():
        if len(seq) == n:
            yield tuple(seq)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                seq.append(k)
                yield from rec()
                seq.pop()
                counts[k] += 1

    yield from rec()


def box_integral(
    blocks: Sequence[tuple[int, str]],
    evaluator: Callable[[tuple[int, ...]], MultiPoly],
) -> MultiPoly:
    """Integrate a chamber-wise polynomial integrand over ``∏_j [0, cap_j]``.

    ``blocks[j] = (multiplicity, cap)``. For every strict ordering of the block
    variables, ``evaluator(order)`` gets the tuple of block indices sorted by
    increasing variable value and returns the integrand on that chamber as a
    polynomial in ``u1 < u2 < ... < ul``. Blocks with equal
    ``(multiplicity, cap)`` are exchangeable, so each distinct label sequence
    is integrated once and weighted by its number of orderings.
    """
    caps = [c for _, c in blocks]
    for a, b in itertools.combinations(set(caps), 2):
        REGISTRY.tau_less_eq(a, b)  # raises if the order is undeclared
    l = len(blocks)
    if l == 0:
        return evaluator(())
    if l > MAX_BOUND:
        raise ValueError("too many integration variables")
    labels = [(m, REGISTRY.tau_rank(c), j) for j, (m, c) in enumerate(blocks)]
    by_label: dict[tuple, list[int]] = {}
    for m, rank, j in labels:
        by_label.setdefault((m, rank), []).append(j)
    weight = 1
    for js in by_label.values():
        weight *= math.factorial(len(js))
    total = MultiPoly()
    for seq in _multiset_permutations([(m, r) for m, r, _ in labels]):
        used = {k: 0 for k in by_label}
        order = []
        for lab in seq:
            order.append(by_label[lab][used[lab]])
            used[lab] += 1
        order = tuple(order)
        integrand = evaluator(order)
        ecaps = effective_caps([blocks[j][1] for j in order])
        total = total + chain_integral(integrand, ecaps)
    return total * weight if weight != 1 else total


@dataclass(frozen=True)
class ChamberPoly:
    """A polynomial valid on the chamber ``chain[0] <= chain[1] <= ...``."""

    poly: MultiPoly
    chain: tuple[str, ...]

    def __post_init__(self):
        extra = {s for s in self.poly.symbols() if REGISTRY.role(s) != "lambda"} - set(self.chain)
        if extra:
            raise ValueError(f"symbols {sorted(extra)} are not in the chain")

    def at(self, values: Sequence, lambdas: Mapping[str, object] | None = None) -> Fraction:
        """Exact value at ascending chain values (and lambda values)."""
        if len(values) != len(self.chain):
            raise ValueError("wrong number of chain values")
        vals = [to_fraction(v) for v in values]
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("chain values must be ascending")
        assignment = dict(zip(self.chain, vals))
        assignment.update(lambdas or {})
        return self.poly.eval(assignment)

    def collapse(self, target: str = "tau") -> MultiPoly:
        """Set every chain variable equal to ``target``."""
        return rename(self.poly, {c: target for c in self.chain})

    def __str__(self) -> str:
        return self.poly.to_string()


def lambda_symbols(k: int) -> list[str]:
    """Cell intensity symbols ``lambda1..lambda_{k-1}`` used at hop count ``k``."""
    return [lam(i) for i in range(1, k)]


def specialize(
    p: MultiPoly,
    *,
    chain: Sequence[str] = (),
    tau_equal: bool = False,
    lambda_equal: object = None,
    k: int | None = None,
) -> MultiPoly:
    """Specialize chain and intensity symbols.

    ``tau_equal`` collapses every chain symbol to ``tau``. ``lambda_equal``
    replaces ``lambda1..lambda12`` by the symbol ``lambda`` when it is the
    string ``"lambda"``, or by a rational constant otherwise.
    """
    if tau_equal and chain:
        p = rename(p, {c: "tau" for c in chain})
    if lambda_equal is not None:
        names = lambda_symbols(k + 1 if k else MAX_LAMBDA + 1)
        if isinstance(lambda_equal, str):
            p = rename(p, {n: lambda_equal for n in names})
        else:
            for n in names:
                p = substitute(p, n, to_fraction(lambda_equal))
    return p
