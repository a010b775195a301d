from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from khop.exactpoly import (
    REGISTRY,
    ChamberPoly,
    MultiPoly,
    box_integral,
    chain_integral,
    definite_integral,
    effective_caps,
    rename,
    specialize,
    substitute,
    to_fraction,
)
from khop.oracles import cell_box_integral, quadrature
from strategies import SYMBOLS, assignments, polys, rationals

X = MultiPoly.var


class TestConstruction:
    def test_const_and_var(self):
        assert MultiPoly.const(0).is_zero()
        assert (X("tau1") * 2).coefficient({"tau1": 1}) == 2

    def test_unknown_symbol_rejected(self):
        with pytest.raises((KeyError, ValueError)):
            X("sigma")

    def test_to_fraction_reads_decimals(self):
        assert to_fraction(0.1) == Fraction(1, 10)
        assert to_fraction("1/3") == Fraction(1, 3)
        assert to_fraction(2) == 2

    def test_degree(self):
        p = X("tau1") ** 2 * X("lambda1") + X("tau2")
        assert p.degree() == 3
        assert p.degree("tau1") == 2
        assert p.symbols() == {"tau1", "tau2", "lambda1"}


class TestCanonicalString:
    def test_order_by_degree_then_registry(self):
        p = X("tau1") * X("tau2") * X("lambda1") ** 2 + X("tau1") * X("lambda1")
        assert p.to_string() == "tau1*lambda1 + tau1*tau2*lambda1^2"

    def test_rational_coefficients(self):
        p = MultiPoly.parse("2/3*tau^3 + 1/2*tau^2")
        assert p.to_string() == "1/2*tau^2 + 2/3*tau^3"

    def test_zero(self):
        assert MultiPoly().to_string() == "0"

    @given(polys())
    def test_parse_round_trip(self, p):
        assert MultiPoly.parse(p.to_string()) == p


class TestRingAxioms:
    @given(polys(), polys(), polys())
    def test_associativity(self, a, b, c):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)

    @given(polys(), polys())
    def test_commutativity(self, a, b):
        assert a + b == b + a
        assert a * b == b * a

    @given(polys(), polys(), polys())
    def test_distributivity(self, a, b, c):
        assert a * (b + c) == a * b + a * c

    @given(polys())
    def test_identities(self, a):
        assert a + MultiPoly() == a
        assert a * MultiPoly.const(1) == a
        assert (a - a).is_zero()

    @given(polys(), polys(), assignments)
    def test_evaluation_is_a_homomorphism(self, a, b, env):
        assert (a * b).eval(env) == a.eval(env) * b.eval(env)
        assert (a + b).eval(env) == a.eval(env) + b.eval(env)

    @given(polys(), st.integers(0, 3), assignments)
    def test_power(self, a, n, env):
        assert (a**n).eval(env) == a.eval(env) ** n


class TestCalculus:
    @given(polys(), rationals, rationals)
    def test_fundamental_theorem(self, p, lo, hi):
        # d/dx of the integral from lo to x recovers p at x = hi, checked via
        # additivity and the exact antiderivative of monomials
        whole = definite_integral(p, "tau1", lo, hi)
        mid = (lo + hi) / 2
        split = definite_integral(p, "tau1", lo, mid) + definite_integral(p, "tau1", mid, hi)
        assert whole == split

    def test_monomial_integral(self):
        p = definite_integral(X("tau1") ** 2, "tau1", 0, X("tau2"))
        assert p == MultiPoly.parse("1/3*tau2^3")

    def test_bound_containing_variable_rejected(self):
        with pytest.raises(ValueError):
            definite_integral(X("tau1"), "tau1", 0, X("tau1"))

    @given(polys(), rationals)
    def test_substitute_matches_eval(self, p, v):
        env = {s: Fraction(1, 3) for s in SYMBOLS}
        env2 = dict(env, tau1=v)
        assert substitute(p, "tau1", v).eval(env) == p.eval(env2)

    def test_rename_is_simultaneous(self):
        p = X("tau1") + 2 * X("tau2")
        assert rename(p, {"tau1": "tau2", "tau2": "tau1"}) == X("tau2") + 2 * X("tau1")

    def test_chain_integral_simplex_volume(self):
        # volume of {0 < u1 < u2 < u3 < tau}
        assert chain_integral(MultiPoly.const(1), ["tau"] * 3) == MultiPoly.parse("1/6*tau^3")

    def test_effective_caps_suffix_minimum(self):
        assert effective_caps(["tau2", "tau1", "tau3"]) == ["tau1", "tau1", "tau3"]


def _constant_evaluator(order):
    return MultiPoly.const(1)


class TestBoxIntegral:
    def test_box_volume(self):
        blocks = [(1, "tau1"), (1, "tau2"), (2, "tau2")]
        got = box_integral(blocks, _constant_evaluator)
        assert got == X("tau1") * X("tau2") ** 2

    @given(st.lists(st.tuples(st.integers(1, 2), st.sampled_from(["tau1", "tau2", "tau3"])),
                    min_size=1, max_size=3))
    def test_matches_cell_decomposition(self, blocks):
        def ev(order):
            # depends on the ordering only through (multiplicity, cap), which
            # is what makes equally labelled blocks exchangeable
            p = MultiPoly.const(1)
            for pos, j in enumerate(order, start=1):
                m, cap = blocks[j]
                p = p * (MultiPoly.var(f"u{pos}") ** m + int(cap[-1]))
            return p

        assert box_integral(blocks, ev) == cell_box_integral(blocks, ev)

    def test_min_integrand_against_quadrature(self):
        # integral of min(x, y) over [0,1] x [0,1/2]
        def ev(order):
            return MultiPoly.var("u1")

        exact = box_integral([(1, "tau1"), (1, "tau2")], ev).eval({"tau1": Fraction(1, 2), "tau2": 1})
        num = quadrature(lambda x, y: __import__("numpy").minimum(x, y), [0.5, 1.0], rtol=1e-6)
        assert abs(float(exact) - num) < 1e-4
        assert exact == Fraction(5, 48)

    def test_undeclared_cap_order_rejected(self):
        with pytest.raises(ValueError):
            box_integral([(1, "tau"), (1, "tau1")], _constant_evaluator)


class TestChamberAndSpecialize:
    def test_chamber_at(self):
        c = ChamberPoly(X("tau1") * X("tau2"), ("tau1", "tau2"))
        assert c.at([Fraction(1, 2), 1]) == Fraction(1, 2)
        with pytest.raises(ValueError):
            c.at([1, Fraction(1, 2)])

    def test_collapse(self):
        c = ChamberPoly(X("tau1") * X("tau2"), ("tau1", "tau2"))
        assert c.collapse() == X("tau") ** 2

    def test_specialize_lambda(self):
        p = X("lambda1") * X("lambda2") ** 2
        assert specialize(p, lambda_equal="lambda") == X("lambda") ** 3
        assert specialize(p, lambda_equal=2) == MultiPoly.const(8)

    def test_registry_tau_order(self):
        assert REGISTRY.tau_less_eq("tau1", "tau2")
        assert REGISTRY.tau_min(["tau3", "tau1"]) == "tau1"
