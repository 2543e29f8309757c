"""Field expression trees: evaluation, derivatives, supports, serialization."""

import cmath
import math

import numpy as np
import pytest

from loctrace import fields as F

RNG = np.random.default_rng(42)


def fd_wirtinger(fn, z, p, q, h=1e-5):
    """(p, q) mixed derivative by central differences in x and y."""

    def dz(g):
        return lambda w: (g(w + h) - g(w - h)) / (2 * h) / 2 - 1j * (
            g(w + 1j * h) - g(w - 1j * h)
        ) / (2 * h) / 2

    def dzbar(g):
        return lambda w: (g(w + h) - g(w - h)) / (2 * h) / 2 + 1j * (
            g(w + 1j * h) - g(w - 1j * h)
        ) / (2 * h) / 2

    for _ in range(p):
        fn = dz(fn)
    for _ in range(q):
        fn = dzbar(fn)
    return fn(z)


def test_eval_basic_nodes():
    z = 0.3 - 0.7j
    assert F.eval_field(F.fz(), z) == z
    assert F.eval_field(F.fzbar(), z) == z.conjugate()
    assert F.eval_field(F.fconst(2 + 1j), z) == 2 + 1j
    assert F.eval_field(F.fone(), z) == 1.0
    assert F.eval_field(F.fzero(), z) == 0.0


def test_eval_composite_expression():
    # (z^2 * zbar + 3) / (1 + z zbar), conj and log branches
    z = 0.4 + 0.2j
    f = F.fmul(
        F.fadd(F.fmul(F.fpow(F.fz(), 2), F.fzbar()), F.fconst(3.0)),
        F.frecip(F.fadd(F.fone(), F.fmul(F.fz(), F.fzbar()))),
    )
    want = (z**2 * z.conjugate() + 3) / (1 + abs(z) ** 2)
    assert abs(F.eval_field(f, z) - want) < 1e-14
    g = F.fconj(f)
    assert abs(F.eval_field(g, z) - want.conjugate()) < 1e-14
    h = F.flog(F.fadd(F.fconst(2.0), F.fmul(F.fz(), F.fzbar())))
    assert abs(F.eval_field(h, z) - cmath.log(2 + abs(z) ** 2)) < 1e-14


def test_eval_monomial_helper():
    z = -0.2 + 0.5j
    f = F.fmonomial(2j, 3, 1)
    assert abs(F.eval_field(f, z) - 2j * z**3 * z.conjugate()) < 1e-14


@pytest.mark.parametrize("p,q", [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
def test_deriv_matches_finite_differences(p, q):
    f = F.fmul(
        F.fadd(F.fconst(1.0), F.fmul(F.fz(), F.fz()), F.fscale(F.fzbar(), 0.5j)),
        F.frecip(F.fadd(F.fconst(3.0), F.fmul(F.fz(), F.fzbar()))),
    )
    df = F.fderiv(f, p, q)

    def fn(w):
        num = 1 + w * w + 0.5j * w.conjugate()
        return num / (3 + abs(w) ** 2)

    for z in (0.2 + 0.1j, -0.4j, 0.55):
        want = fd_wirtinger(fn, z, p, q)
        got = F.eval_field(df, z)
        assert abs(got - want) < 2e-6, (p, q, z)


def test_deriv_of_bump_matches_finite_differences():
    b = F.bump_field(0.0, 0.5, 1.0)
    db = F.fderiv(b, 1, 1)

    def fn(w):
        return F.eval_field(b, w)

    z = 0.7 + 0.1j  # inside the transition annulus
    want = fd_wirtinger(fn, z, 1, 1, h=1e-4)
    got = F.eval_field(db, z)
    assert abs(got - want) < 1e-4 * max(1.0, abs(want))


def test_jet2_at_polynomial_exact():
    # f = 2 + z^2 zbar: every mixed coefficient is explicit
    f = F.fadd(F.fconst(2.0), F.fmonomial(1.0, 2, 1))
    z0 = 0.3 - 0.2j
    j = F.jet2_at(f, z0, 3)
    zb = z0.conjugate()
    assert abs(j.coeff(0, 0) - (2 + z0**2 * zb)) < 1e-12
    assert abs(j.coeff(1, 0) - 2 * z0 * zb) < 1e-12
    assert abs(j.coeff(0, 1) - z0**2) < 1e-12
    assert abs(j.coeff(1, 1) - 2 * z0) < 1e-12
    assert abs(j.coeff(2, 0) - zb) < 1e-12
    assert abs(j.coeff(2, 1) - 1.0) < 1e-12
    assert abs(j.coeff(0, 2)) < 1e-12


def test_jet2_at_recip_against_sympy():
    import sympy as sp

    zs, ws = sp.symbols("zs ws")
    f = F.frecip(F.fadd(F.fconst(2.0), F.fmul(F.fz(), F.fzbar())))
    z0 = 0.25 + 0.1j
    j = F.jet2_at(f, z0, 2)
    expr = 1 / (2 + zs * ws)
    for p in range(3):
        for q in range(3 - p):
            d = sp.diff(expr, zs, p, ws, q)
            val = complex(d.subs({zs: z0, ws: z0.conjugate()}))
            want = val / (math.factorial(p) * math.factorial(q))
            assert abs(j.coeff(p, q) - want) < 1e-10, (p, q)


class TestBump:
    def test_plateau_and_support(self):
        b = F.bump_field(0.5, 0.3, 0.8)
        assert F.eval_field(b, 0.5) == 1.0
        assert F.eval_field(b, 0.5 + 0.29j) == 1.0
        assert F.eval_field(b, 0.5 + 0.81) == 0.0
        mid = F.eval_field(b, 0.5 + 0.55j)
        assert 0.0 < abs(mid) < 1.0

    def test_monotone_profile(self):
        b = F.bump_field(0.0, 0.5, 1.0)
        rs = np.linspace(0.5, 1.0, 40)
        vals = [F.eval_field(b, complex(r)).real for r in rs]
        assert all(v1 >= v2 - 1e-12 for v1, v2 in zip(vals, vals[1:]))

    def test_flat_jets_on_plateau_and_outside(self):
        b = F.bump_field(0.0, 0.5, 1.0)
        j = F.jet2_at(b, 0.2 + 0.1j, 2)
        assert abs(j.coeff(0, 0) - 1.0) < 1e-14
        for p in range(3):
            for q in range(3 - p):
                if (p, q) != (0, 0):
                    assert abs(j.coeff(p, q)) < 1e-14

    def test_plateau_safe(self):
        b = F.bumped(F.fone(), 0.0, 0.5, 1.0)
        assert F.plateau_safe(b, 0.1)
        assert not F.plateau_safe(b, 0.7)  # transition zone

    def test_ctor_validation(self):
        with pytest.raises(Exception):
            F.bump_field(0.0, 1.0, 0.5)  # plateau larger than support


class TestSupports:
    def test_bumped_sets_support(self):
        f = F.bumped(F.fz(), 1.0, 0.25, 0.5)
        assert f.support is not None
        assert F.eval_field(f, 1.8) == 0.0

    def test_mul_disjoint_supports_is_structural_zero(self):
        a = F.bumped(F.fone(), 0.0, 0.2, 0.4)
        b = F.bumped(F.fone(), 2.0, 0.2, 0.4)
        prod = F.fmul(a, b)
        # no overlap: the product should be recognized as zero
        assert prod.support is not None
        bb = prod.support.bbox() if hasattr(prod.support, "bbox") else None
        assert F.eval_field(prod, 0.0) == 0.0
        assert F.eval_field(prod, 2.0) == 0.0

    def test_support_survives_neg_and_pow(self):
        a = F.bumped(F.fz(), 0.0, 0.2, 0.4)
        assert F.fneg(a).support is not None
        assert F.fpow(a, 2).support is not None
        assert F.fmul(F.fconst(3.0), a).support is not None


def test_pullback_evaluates_composition():
    from loctrace.groupoid import MobiusMap

    g = MobiusMap([[2.0, 0.0], [0.0, 1.0]])
    f = F.fadd(F.fmul(F.fz(), F.fz()), F.fzbar())
    pb = F.fpullback(f, g)
    for z in (0.1 + 0.2j, -0.3j, 0.25):
        w = g.apply(z)
        assert abs(F.eval_field(pb, z) - (w * w + w.conjugate())) < 1e-13


def test_pullback_shrinks_support():
    from loctrace.groupoid import AffineMap

    g = AffineMap(2.0, 0.0)  # z -> 2z
    f = F.bumped(F.fone(), 0.0, 0.5, 1.0)
    pb = F.fpullback(f, g)
    # support of f o g is the preimage: radius 0.5 disk, plateau 0.25
    assert F.eval_field(pb, 0.2) == 1.0
    assert F.eval_field(pb, 0.6) == 0.0
    assert pb.support is not None


class TestSexp:
    def test_round_trip_preserves_values(self):
        f = F.fadd(
            F.fconst(1.5 - 2j),
            F.fscale(F.fmul(F.fz(), F.fzbar()), 0.5),
            F.bumped(F.fpow(F.fz(), 2), 0.1j, 0.2, 0.4),
        )
        s = F.field_to_sexp(f)
        g = F.field_from_sexp(s)
        for z in (0.05 + 0.1j, 0.2j, -0.15):
            assert abs(F.eval_field(f, z) - F.eval_field(g, z)) < 1e-13

    def test_round_trip_special_nodes(self):
        f = F.fderiv(
            F.fconj(F.frecip(F.fadd(F.fconst(2.0), F.fmul(F.fz(), F.fzbar())))), 1, 0
        )
        g = F.field_from_sexp(F.field_to_sexp(f))
        z = 0.3 - 0.1j
        assert abs(F.eval_field(f, z) - F.eval_field(g, z)) < 1e-13

    def test_parse_literal_forms(self):
        f = F.field_from_sexp("(* (c 2 0) z)")
        assert F.eval_field(f, 0.5j) == 1j

    def test_parse_rejects_garbage(self):
        for bad in ("(unknownop z)", "(c 1", "(pow z -1)", ""):
            with pytest.raises(Exception):
                F.field_from_sexp(bad)

    def test_parsed_bump_gets_support(self):
        f = F.field_from_sexp("(* (bump 0 0 0.5 1.0) z)")
        assert f.support is not None
        assert F.eval_field(f, 2.0) == 0.0


def test_regions():
    d = F.Disk(1.0, 0.5)
    assert d.contains(1.2)
    assert not d.contains(1.8)
    b = F.Box(0.0, 1.0, 0.0, 1.0)
    assert b.contains(0.5 + 0.5j)
    a = F.Annulus(0.0, 0.5, 1.0)
    assert a.contains(0.75)
    assert not a.contains(0.25)
    assert not a.contains(1.25)


def test_domain_error_on_unbounded_support():
    # integration-facing helpers need a bbox; plain fields have none
    f = F.fmul(F.fz(), F.fz())
    assert f.support is None
