"""Scalar coefficient fields on a planar chart.

A field is a small expression tree in the variables z and zbar whose leaves
include smooth compactly supported cutoff factors.  Evaluating a field always
goes through truncated bivariate Taylor expansion (Jet2 data) at a batch of
points in one vectorized numpy pass; a plain value query is the order-0 case.

The cutoff ("bump") profile equals 1 on a closed plateau disk, 0 outside a
larger support disk, and is glued with the standard exp(-1/t) profile in the
annulus between the two radii.  On the plateau and outside the support the
factor is exactly constant, so Taylor data of any order is available there;
inside the glue annulus the order is capped (default 8) and higher requests
raise UnsupportedOrderError.

Trees are immutable and shared; evaluation memoizes on node identity so that
products built from common subexpressions do not pay twice.
"""

from __future__ import annotations

import math

import numpy as np

from .jets import Jet2

__all__ = [
    "UnsupportedOrderError",
    "FieldDomainError",
    "Region",
    "WholePlane",
    "EmptyRegion",
    "Disk",
    "Box",
    "Annulus",
    "ScalarField",
    "fconst",
    "fzero",
    "fone",
    "fz",
    "fzbar",
    "fmonomial",
    "bump_field",
    "bumped",
    "fadd",
    "fmul",
    "fneg",
    "fscale",
    "fconj",
    "fpow",
    "frecip",
    "flog",
    "fderiv",
    "fpullback",
    "eval_field",
    "jet2_at",
    "plateau_safe",
    "field_to_sexp",
    "field_from_sexp",
]

GLUE_ORDER_CAP = 8


class UnsupportedOrderError(Exception):
    """Raised when Taylor data is requested beyond the glue order cap inside
    a cutoff transition annulus."""


class FieldDomainError(Exception):
    """Raised when an evaluation hits a pole or a branch point."""


# ---------------------------------------------------------------------------
# regions; only used for conservative support bookkeeping


class Region:
    def bbox(self):
        """(x0, x1, y0, y1) outer bounds, or None when unbounded."""
        return None

    def contains(self, z):
        raise NotImplementedError


class WholePlane(Region):
    def contains(self, z):
        return np.ones(np.shape(z), dtype=bool)

    def __repr__(self):
        return "WholePlane()"


class EmptyRegion(Region):
    def bbox(self):
        return (0.0, 0.0, 0.0, 0.0)

    def contains(self, z):
        return np.zeros(np.shape(z), dtype=bool)

    def __repr__(self):
        return "EmptyRegion()"


class Disk(Region):
    def __init__(self, center, radius):
        self.center = complex(center)
        self.radius = float(radius)

    def bbox(self):
        c, r = self.center, self.radius
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    def contains(self, z):
        return np.abs(np.asarray(z, dtype=complex) - self.center) <= self.radius

    def __repr__(self):
        return f"Disk({self.center}, {self.radius})"


class Box(Region):
    def __init__(self, x0, x1, y0, y1):
        self.b = (float(x0), float(x1), float(y0), float(y1))

    def bbox(self):
        return self.b

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        x0, x1, y0, y1 = self.b
        return (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)

    def __repr__(self):
        return f"Box{self.b}"


class Annulus(Region):
    def __init__(self, center, r_inner, r_outer):
        self.center = complex(center)
        self.r_inner = float(r_inner)
        self.r_outer = float(r_outer)

    def bbox(self):
        c, r = self.center, self.r_outer
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    def contains(self, z):
        d = np.abs(np.asarray(z, dtype=complex) - self.center)
        return (d >= self.r_inner) & (d <= self.r_outer)

    def __repr__(self):
        return f"Annulus({self.center}, {self.r_inner}, {self.r_outer})"


def bbox_union(a, b):
    if a is None or b is None:
        return None
    return (min(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), max(a[3], b[3]))


def bbox_intersect(a, b):
    if a is None:
        return b
    if b is None:
        return a
    out = (max(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), min(a[3], b[3]))
    if out[0] > out[1] or out[2] > out[3]:
        return (0.0, 0.0, 0.0, 0.0)
    return out


# ---------------------------------------------------------------------------
# jet dictionaries: {(p, q): ndarray}, missing keys are zero.  All arrays in
# one dictionary share a common flat shape.


def jd_add(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k] + v if k in out else v
    return out


def jd_scale(a, s):
    return {k: v * s for k, v in a.items()}


def jd_mul(a, b, order):
    out = {}
    for (p1, q1), v1 in a.items():
        if p1 + q1 > order:
            continue
        for (p2, q2), v2 in b.items():
            p, q = p1 + p2, q1 + q2
            if p + q > order:
                continue
            key = (p, q)
            prod = v1 * v2
            out[key] = out[key] + prod if key in out else prod
    return out


def jd_conj(a):
    return {(q, p): np.conj(v) for (p, q), v in a.items()}


def jd_pow(a, n, order, npts):
    out = {(0, 0): np.ones(npts, dtype=complex)}
    for _ in range(n):
        out = jd_mul(out, a, order)
    return out


def _split_const(a, npts):
    c0 = a.get((0, 0), np.zeros(npts, dtype=complex))
    rest = {k: v for k, v in a.items() if k != (0, 0)}
    return c0, rest


def jd_recip(a, order, npts, where):
    """1/f as a jet dictionary; f's value must not vanish on the batch."""
    c0, rest = _split_const(a, npts)
    bad = np.abs(c0) == 0.0
    if np.any(bad):
        raise FieldDomainError(f"reciprocal of a vanishing field ({where})")
    inv0 = 1.0 / c0
    out = {(0, 0): inv0.copy()}
    if rest:
        term = {(0, 0): np.ones(npts, dtype=complex)}
        scaled = jd_scale(rest, -1.0)
        scaled = {k: v * inv0 for k, v in scaled.items()}
        for _ in range(order):
            term = jd_mul(term, scaled, order)
            if not term:
                break
            for k, v in term.items():
                out[k] = out[k] + v * inv0 if k in out else v * inv0
    return out


def jd_log(a, order, npts, where):
    """Principal-branch log of f."""
    c0, rest = _split_const(a, npts)
    bad = np.abs(c0) == 0.0
    if np.any(bad):
        raise FieldDomainError(f"log of a vanishing field ({where})")
    out = {(0, 0): np.log(c0)}
    if rest:
        u = {k: v / c0 for k, v in rest.items()}
        term = {(0, 0): np.ones(npts, dtype=complex)}
        for m in range(1, order + 1):
            term = jd_mul(term, u, order)
            if not term:
                break
            s = ((-1.0) ** (m + 1)) / m
            for k, v in term.items():
                out[k] = out[k] + v * s if k in out else v * s
    return out


# ---------------------------------------------------------------------------
# vectorized univariate jets for the cutoff profile; arrays have shape
# (order+1, npts) and hold normalized Taylor coefficients.


def uv_mul(A, B):
    m = A.shape[0] - 1
    out = np.zeros_like(A)
    for k in range(m + 1):
        for j in range(k + 1):
            out[k] += A[j] * B[k - j]
    return out


def uv_recip(A):
    out = np.zeros_like(A)
    out[0] = 1.0 / A[0]
    for k in range(1, A.shape[0]):
        acc = np.zeros_like(A[0])
        for j in range(1, k + 1):
            acc += A[j] * out[k - j]
        out[k] = -acc / A[0]
    return out


def uv_exp(A):
    out = np.zeros_like(A)
    out[0] = np.exp(A[0])
    for k in range(1, A.shape[0]):
        acc = np.zeros_like(A[0])
        for j in range(1, k + 1):
            acc += j * A[j] * out[k - j]
        out[k] = acc / k
    return out


def _sqrt_jet(s0, m):
    """Jet of sqrt at strictly positive s0; rows are binomial(1/2, k) s0^(1/2-k)."""
    out = np.zeros((m + 1,) + s0.shape)
    b = 1.0
    for k in range(m + 1):
        out[k] = b * s0 ** (0.5 - k)
        b *= (0.5 - k) / (k + 1)
    return out


def bump_profile_jet(s0, m, r_pl, r_sup):
    """Univariate jet in s = |w - c|^2 of the glued cutoff, at interior
    annulus points r_pl < sqrt(s0) < r_sup.  Returns (m+1, npts) real data."""
    R = _sqrt_jet(s0, m)
    A = -R.copy()
    A[0] += r_sup  # r_sup - r
    B = R.copy()
    B[0] -= r_pl  # r - r_pl
    ga = uv_exp(-uv_recip(A))
    gb = uv_exp(-uv_recip(B))
    return uv_mul(ga, uv_recip(ga + gb))


# ---------------------------------------------------------------------------
# expression nodes


class EvalCtx:
    __slots__ = ("order_cap", "memo", "npts", "keepalive")

    def __init__(self, order_cap, npts):
        self.order_cap = order_cap
        self.memo = {}
        self.npts = npts
        self.keepalive = []


class Node:
    __slots__ = ()

    def jet(self, z, K, ctx):
        # the batch id is part of the key: composed subtrees are evaluated at
        # mapped points, and id reuse is prevented by the keepalive list
        key = (id(self), K, id(z))
        hit = ctx.memo.get(key)
        if hit is None:
            hit = self._jet(z, K, ctx)
            ctx.memo[key] = hit
            ctx.keepalive.append(z)
        return hit

    def subst(self, zr, zbr, memo):
        key = id(self)
        hit = memo.get(key)
        if hit is None:
            hit = self._subst(zr, zbr, memo)
            memo[key] = hit
        return hit

    def children(self):
        return ()


class Const(Node):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = complex(value)

    def _jet(self, z, K, ctx):
        return {(0, 0): np.full(ctx.npts, self.value, dtype=complex)}

    def _subst(self, zr, zbr, memo):
        return self


class VarZ(Node):
    __slots__ = ()

    def _jet(self, z, K, ctx):
        out = {(0, 0): z.astype(complex)}
        if K >= 1:
            out[(1, 0)] = np.ones(ctx.npts, dtype=complex)
        return out

    def _subst(self, zr, zbr, memo):
        return zr


class VarZbar(Node):
    __slots__ = ()

    def _jet(self, z, K, ctx):
        out = {(0, 0): np.conj(z)}
        if K >= 1:
            out[(0, 1)] = np.ones(ctx.npts, dtype=complex)
        return out

    def _subst(self, zr, zbr, memo):
        return zbr


class Add(Node):
    __slots__ = ("terms",)

    def __init__(self, terms):
        flat = []
        for t in terms:
            if isinstance(t, Add):
                flat.extend(t.terms)
            elif not (isinstance(t, Const) and t.value == 0):
                flat.append(t)
        self.terms = tuple(flat)

    def _jet(self, z, K, ctx):
        out = {}
        for t in self.terms:
            out = jd_add(out, t.jet(z, K, ctx))
        return out

    def _subst(self, zr, zbr, memo):
        return Add([t.subst(zr, zbr, memo) for t in self.terms])

    def children(self):
        return self.terms


class Mul(Node):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def _jet(self, z, K, ctx):
        return jd_mul(self.a.jet(z, K, ctx), self.b.jet(z, K, ctx), K)

    def _subst(self, zr, zbr, memo):
        return Mul(self.a.subst(zr, zbr, memo), self.b.subst(zr, zbr, memo))

    def children(self):
        return (self.a, self.b)


class Neg(Node):
    __slots__ = ("a",)

    def __init__(self, a):
        self.a = a

    def _jet(self, z, K, ctx):
        return jd_scale(self.a.jet(z, K, ctx), -1.0)

    def _subst(self, zr, zbr, memo):
        return Neg(self.a.subst(zr, zbr, memo))

    def children(self):
        return (self.a,)


class IntPow(Node):
    __slots__ = ("a", "n")

    def __init__(self, a, n):
        if n < 0:
            raise ValueError("IntPow wants n >= 0; use Recip for inverses")
        self.a = a
        self.n = int(n)

    def _jet(self, z, K, ctx):
        return jd_pow(self.a.jet(z, K, ctx), self.n, K, ctx.npts)

    def _subst(self, zr, zbr, memo):
        return IntPow(self.a.subst(zr, zbr, memo), self.n)

    def children(self):
        return (self.a,)


class Recip(Node):
    __slots__ = ("a",)

    def __init__(self, a):
        self.a = a

    def _jet(self, z, K, ctx):
        return jd_recip(self.a.jet(z, K, ctx), K, ctx.npts, "Recip")

    def _subst(self, zr, zbr, memo):
        return Recip(self.a.subst(zr, zbr, memo))

    def children(self):
        return (self.a,)


class Log(Node):
    __slots__ = ("a",)

    def __init__(self, a):
        self.a = a

    def _jet(self, z, K, ctx):
        return jd_log(self.a.jet(z, K, ctx), K, ctx.npts, "Log")

    def _subst(self, zr, zbr, memo):
        return Log(self.a.subst(zr, zbr, memo))

    def children(self):
        return (self.a,)


class Conj(Node):
    __slots__ = ("a",)

    def __init__(self, a):
        self.a = a

    def _jet(self, z, K, ctx):
        return jd_conj(self.a.jet(z, K, ctx))

    def _subst(self, zr, zbr, memo):
        return Conj(self.a.subst(zr, zbr, memo))

    def children(self):
        return (self.a,)


class Deriv(Node):
    """p z-derivatives and q zbar-derivatives of the subtree, as a field."""

    __slots__ = ("a", "p", "q")

    def __init__(self, a, p, q):
        self.a = a
        self.p = int(p)
        self.q = int(q)

    def _jet(self, z, K, ctx):
        inner = self.a.jet(z, K + self.p + self.q, ctx)
        out = {}
        for (i, j), v in inner.items():
            if i < self.p or j < self.q:
                continue
            a, b = i - self.p, j - self.q
            if a + b > K:
                continue
            out[(a, b)] = v * (math.perm(i, self.p) * math.perm(j, self.q))
        return out

    def _subst(self, zr, zbr, memo):
        # derivatives refer to the chart they were taken in, so precomposing
        # with a map wraps the node in an explicit composition
        if isinstance(zr, VarZ) and isinstance(zbr, VarZbar):
            return self
        if not (isinstance(zbr, Conj) and zbr.a is zr):
            raise ValueError("substitution must send zbar to the conjugate of the z image")
        return Compose(self, zr)

    def children(self):
        return (self.a,)


class Compose(Node):
    """Evaluate a subtree in the chart w = inner(z); the subtree's jet is
    taken at the mapped points and recombined through the inner jet."""

    __slots__ = ("sub", "inner")

    def __init__(self, sub, inner):
        self.sub = sub
        self.inner = inner

    def _jet(self, z, K, ctx):
        gj = self.inner.jet(z, K, ctx)
        w0 = np.asarray(
            gj.get((0, 0), np.zeros(ctx.npts, dtype=complex)), dtype=complex
        )
        if w0.shape != (ctx.npts,):
            w0 = np.broadcast_to(w0, (ctx.npts,)).copy()
        D = self.sub.jet(w0, K, ctx)
        if K == 0:
            return {(0, 0): D.get((0, 0), np.zeros(ctx.npts, dtype=complex))}
        dw = {k: v for k, v in gj.items() if k != (0, 0)}
        dwb = jd_conj(dw)
        out = {}
        pow_w = {0: {(0, 0): np.ones(ctx.npts, dtype=complex)}}
        for a in range(1, K + 1):
            pow_w[a] = jd_mul(pow_w[a - 1], dw, K)
        pow_wb = {0: {(0, 0): np.ones(ctx.npts, dtype=complex)}}
        for b in range(1, K + 1):
            pow_wb[b] = jd_mul(pow_wb[b - 1], dwb, K)
        for (a, b), c in D.items():
            if a + b > K:
                continue
            term = jd_mul(pow_w[a], pow_wb[b], K)
            for key, v in term.items():
                add = v * c
                out[key] = out[key] + add if key in out else add
        return out

    def _subst(self, zr, zbr, memo):
        return Compose(self.sub, self.inner.subst(zr, zbr, memo))

    def children(self):
        return (self.sub, self.inner)


class Bump(Node):
    __slots__ = ("inner", "center", "r_pl", "r_sup")

    def __init__(self, inner, center, r_pl, r_sup):
        if not (0 < r_pl < r_sup):
            raise ValueError("bump radii must satisfy 0 < plateau < support")
        self.inner = inner
        self.center = complex(center)
        self.r_pl = float(r_pl)
        self.r_sup = float(r_sup)

    def _jet(self, z, K, ctx):
        wj = self.inner.jet(z, K, ctx)
        wc = dict(wj)
        c00 = wc.get((0, 0), np.zeros(ctx.npts, dtype=complex))
        wc[(0, 0)] = c00 - self.center
        sj = jd_mul(wc, jd_conj(wc), K)
        s0 = np.real(sj.get((0, 0), np.zeros(ctx.npts, dtype=complex)))
        plateau = s0 <= self.r_pl ** 2
        outside = s0 >= self.r_sup ** 2
        annulus = ~(plateau | outside)
        out = {(0, 0): plateau.astype(complex)}
        if np.any(annulus):
            if K > ctx.order_cap:
                raise UnsupportedOrderError(
                    f"jet order {K} exceeds glue cap {ctx.order_cap} inside a cutoff annulus"
                )
            F = bump_profile_jet(s0[annulus], K, self.r_pl, self.r_sup)
            ds = {k: v[annulus] for k, v in sj.items() if k != (0, 0)}
            acc = {(0, 0): F[K].astype(complex)}
            for k in range(K - 1, -1, -1):
                acc = jd_mul(acc, ds, K)
                key = (0, 0)
                acc[key] = acc.get(key, 0) + F[k]
            for key, v in acc.items():
                if key not in out:
                    out[key] = np.zeros(ctx.npts, dtype=complex)
                tgt = out[key]
                if np.isscalar(v) or np.shape(v) == ():
                    tgt[annulus] += v
                else:
                    tgt[annulus] += v
        return out

    def _subst(self, zr, zbr, memo):
        return Bump(self.inner.subst(zr, zbr, memo), self.center, self.r_pl, self.r_sup)

    def children(self):
        return (self.inner,)


def _walk(node, seen, out):
    if id(node) in seen:
        return
    seen.add(id(node))
    out.append(node)
    for c in node.children():
        _walk(c, seen, out)


def all_nodes(node):
    seen, out = set(), []
    _walk(node, seen, out)
    return out


# ---------------------------------------------------------------------------
# fields


class ScalarField:
    """Expression tree plus an optional conservative support region."""

    __slots__ = ("expr", "support")

    def __init__(self, expr, support=None):
        self.expr = expr
        self.support = support

    def is_structural_zero(self):
        e = self.expr
        return (isinstance(e, Const) and e.value == 0) or (
            isinstance(e, Add) and not e.terms
        )

    def __repr__(self):
        return f"ScalarField({field_to_sexp(self)!r}, support={self.support})"


def fconst(c):
    if c == 0:
        return ScalarField(Const(0.0), EmptyRegion())
    return ScalarField(Const(c), None)


def fzero():
    return fconst(0.0)


def fone():
    return fconst(1.0)


def fz():
    return ScalarField(VarZ(), None)


def fzbar():
    return ScalarField(VarZbar(), None)


def fmonomial(coeff, p, q):
    """coeff * z^p * zbar^q."""
    e = Const(coeff)
    if p:
        e = Mul(e, IntPow(VarZ(), p)) if p > 1 else Mul(e, VarZ())
    if q:
        e = Mul(e, IntPow(VarZbar(), q)) if q > 1 else Mul(e, VarZbar())
    return ScalarField(e, None)


def bump_field(center, r_pl, r_sup):
    return ScalarField(
        Bump(VarZ(), center, r_pl, r_sup), Disk(center, r_sup)
    )


def bumped(f, center, r_pl, r_sup):
    """Multiply a field by a standard cutoff; the support disk is recorded."""
    b = bump_field(center, r_pl, r_sup)
    return fmul(f, b)


def _sup_mul(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if isinstance(a, EmptyRegion) or isinstance(b, EmptyRegion):
        return EmptyRegion()
    ba, bb = a.bbox(), b.bbox()
    if ba is None:
        return b
    if bb is None:
        return a
    x0 = max(ba[0], bb[0])
    x1 = min(ba[1], bb[1])
    y0 = max(ba[2], bb[2])
    y1 = min(ba[3], bb[3])
    # outer bounds: provably disjoint supports make the product vanish
    if x0 >= x1 or y0 >= y1:
        return EmptyRegion()
    return Box(x0, x1, y0, y1)


def _sup_add(a, b):
    if isinstance(a, EmptyRegion):
        return b
    if isinstance(b, EmptyRegion):
        return a
    if a is None or b is None:
        return None
    bb = bbox_union(a.bbox(), b.bbox())
    if bb is None:
        return None
    return Box(*bb)


def fadd(*fs):
    fs = [f for f in fs if not f.is_structural_zero()]
    # cancel x + (-x) pairs sharing the same expression object
    live = list(fs)
    i = 0
    while i < len(live):
        hit = False
        for j in range(len(live)):
            if i == j:
                continue
            a, b = live[i].expr, live[j].expr
            if isinstance(b, Neg) and b.a is a:
                del live[max(i, j)], live[min(i, j)]
                hit = True
                break
        if not hit:
            i += 1
    fs = live
    if not fs:
        return fzero()
    if len(fs) == 1:
        return fs[0]
    sup = fs[0].support
    for f in fs[1:]:
        sup = _sup_add(sup, f.support)
    return ScalarField(Add([f.expr for f in fs]), sup)


def fmul(a, b):
    if a.is_structural_zero() or b.is_structural_zero():
        return fzero()
    if isinstance(a.expr, Const) and a.expr.value == 1:
        return b
    if isinstance(b.expr, Const) and b.expr.value == 1:
        return a
    sup = _sup_mul(a.support, b.support)
    if isinstance(sup, EmptyRegion):
        return fzero()
    return ScalarField(Mul(a.expr, b.expr), sup)


def fneg(a):
    if a.is_structural_zero():
        return a
    if isinstance(a.expr, Neg):
        return ScalarField(a.expr.a, a.support)
    return ScalarField(Neg(a.expr), a.support)


def fscale(a, s):
    if s == 0 or a.is_structural_zero():
        return fzero()
    if s == 1:
        return a
    if s == -1:
        return fneg(a)
    return ScalarField(Mul(Const(s), a.expr), a.support)


def fconj(a):
    if a.is_structural_zero():
        return a
    return ScalarField(Conj(a.expr), a.support)


def fpow(a, n):
    if n == 0:
        return fone()
    if a.is_structural_zero():
        return fzero()
    return ScalarField(IntPow(a.expr, n), a.support)


def frecip(a):
    return ScalarField(Recip(a.expr), None)


def flog(a):
    return ScalarField(Log(a.expr), None)


def fderiv(a, p, q):
    if a.is_structural_zero() or (p == 0 and q == 0):
        return a
    if isinstance(a.expr, Const):
        return fzero()
    return ScalarField(Deriv(a.expr, p, q), a.support)


def fpullback(f, cmap):
    """Precompose a field with a conformal map: z -> expression of the map,
    zbar -> its conjugate.  The support becomes a conservative outer bound on
    the preimage of the original support."""
    if f.is_structural_zero():
        return f
    g_expr = cmap.expr_tree()
    memo = {}
    new_expr = f.expr.subst(g_expr, Conj(g_expr), memo)
    return ScalarField(new_expr, cmap.preimage_region(f.support))


# ---------------------------------------------------------------------------
# evaluation entry points


def _jet_batch(expr, z, K, order_cap):
    zflat = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    ctx = EvalCtx(order_cap, zflat.shape[0])
    raw = expr.jet(zflat, K, ctx)
    shape = np.shape(np.asarray(z))
    out = {}
    for key, v in raw.items():
        arr = np.asarray(v, dtype=complex)
        if arr.shape != zflat.shape:
            arr = np.broadcast_to(arr, zflat.shape).copy()
        out[key] = arr.reshape(shape) if shape else arr[0]
    return out


def eval_field(f, z, order_cap=GLUE_ORDER_CAP):
    """Pointwise values; z may be a scalar or any ndarray of points."""
    d = _jet_batch(f.expr, z, 0, order_cap)
    got = d.get((0, 0))
    if got is None:
        return np.zeros(np.shape(z), dtype=complex) if np.shape(z) else 0j
    return got


def jet2_at(f, z0, order, order_cap=GLUE_ORDER_CAP):
    """Bivariate jet of the field at a single point."""
    d = _jet_batch(f.expr, complex(z0), order, order_cap)
    return Jet2(z0, order, {k: complex(v) for k, v in d.items()})


def plateau_safe(f, z0, margin=1e-9):
    """True when every cutoff factor in the tree is locally constant at z0,
    i.e. its inner point lies strictly inside the plateau or strictly outside
    the support.  Composition nodes switch to the mapped chart point."""
    return _plateau_walk(f.expr, complex(z0), margin)


def _plateau_walk(node, z0, margin):
    if isinstance(node, Compose):
        w0 = _jet_batch(node.inner, z0, 0, GLUE_ORDER_CAP).get((0, 0), 0j)
        if not _plateau_walk(node.sub, complex(w0), margin):
            return False
        return _plateau_walk(node.inner, z0, margin)
    if isinstance(node, Bump):
        w = _jet_batch(node.inner, z0, 0, GLUE_ORDER_CAP).get((0, 0), 0j)
        r = abs(complex(w) - node.center)
        if r >= node.r_pl * (1 - margin) and r <= node.r_sup * (1 + margin):
            return False
    for c in node.children():
        if not _plateau_walk(c, z0, margin):
            return False
    return True


# ---------------------------------------------------------------------------
# prefix-notation serialization


def _fmt_num(x):
    return repr(float(x))


def field_to_sexp(f):
    return _node_to_sexp(f.expr)


def _node_to_sexp(n):
    if isinstance(n, Const):
        return f"(c {_fmt_num(n.value.real)} {_fmt_num(n.value.imag)})"
    if isinstance(n, VarZ):
        return "z"
    if isinstance(n, VarZbar):
        return "zbar"
    if isinstance(n, Add):
        return "(+ " + " ".join(_node_to_sexp(t) for t in n.terms) + ")"
    if isinstance(n, Mul):
        return f"(* {_node_to_sexp(n.a)} {_node_to_sexp(n.b)})"
    if isinstance(n, Neg):
        return f"(neg {_node_to_sexp(n.a)})"
    if isinstance(n, IntPow):
        return f"(pow {_node_to_sexp(n.a)} {n.n})"
    if isinstance(n, Recip):
        return f"(recip {_node_to_sexp(n.a)})"
    if isinstance(n, Log):
        return f"(log {_node_to_sexp(n.a)})"
    if isinstance(n, Conj):
        return f"(conj {_node_to_sexp(n.a)})"
    if isinstance(n, Deriv):
        return f"(deriv {n.p} {n.q} {_node_to_sexp(n.a)})"
    if isinstance(n, Compose):
        return f"(compose {_node_to_sexp(n.sub)} {_node_to_sexp(n.inner)})"
    if isinstance(n, Bump):
        head = (
            f"(bump {_fmt_num(n.center.real)} {_fmt_num(n.center.imag)} "
            f"{_fmt_num(n.r_pl)} {_fmt_num(n.r_sup)}"
        )
        if isinstance(n.inner, VarZ):
            return head + ")"
        return head + f" {_node_to_sexp(n.inner)})"
    raise TypeError(f"unknown node {type(n).__name__}")


def _tokenize(s):
    return s.replace("(", " ( ").replace(")", " ) ").split()


def _parse(tokens, pos):
    tok = tokens[pos]
    if tok == "(":
        head = tokens[pos + 1]
        args = []
        pos += 2
        while tokens[pos] != ")":
            node, pos = _parse(tokens, pos)
            args.append(node)
        pos += 1
        return _build(head, args), pos
    if tok == "z":
        return VarZ(), pos + 1
    if tok == "zbar":
        return VarZbar(), pos + 1
    return float(tok), pos + 1


def _build(head, args):
    if head == "c":
        return Const(complex(args[0], args[1]))
    if head == "+":
        return Add(args)
    if head == "*":
        out = args[0]
        for a in args[1:]:
            out = Mul(out, a)
        return out
    if head == "neg":
        return Neg(args[0])
    if head == "pow":
        return IntPow(args[0], int(args[1]))
    if head == "recip":
        return Recip(args[0])
    if head == "log":
        return Log(args[0])
    if head == "conj":
        return Conj(args[0])
    if head == "deriv":
        return Deriv(args[2], int(args[0]), int(args[1]))
    if head == "compose":
        return Compose(args[0], args[1])
    if head == "bump":
        inner = args[4] if len(args) > 4 else VarZ()
        return Bump(inner, complex(args[0], args[1]), args[2], args[3])
    raise ValueError(f"unknown operator {head!r}")


def field_from_sexp(s, support=None):
    tokens = _tokenize(s)
    node, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise ValueError("trailing tokens in field expression")
    if isinstance(node, float):
        raise ValueError("a bare number is not a field; use (c re im)")
    if support is None:
        support = _derive_support(node)
    return ScalarField(node, support)


def _derive_support(node):
    """If a cutoff in the plain chart multiplies the whole tree, its disk
    bounds the support."""
    if isinstance(node, Bump) and isinstance(node.inner, VarZ):
        return Disk(node.center, node.r_sup)
    if isinstance(node, Mul):
        for side in (node.a, node.b):
            got = _derive_support(side)
            if got is not None:
                return got
    if isinstance(node, Neg):
        return _derive_support(node.a)
    if isinstance(node, IntPow) and node.n >= 1:
        return _derive_support(node.a)
    return None
