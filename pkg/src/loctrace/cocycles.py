"""Localized trace and the degree-two cocycles built from it.

The localized trace of a crossed element sums, over isolated fixed points z0
of the maps carrying its coefficients, minus the (n-1)-st Taylor coefficient
of H * a at z0; here n is the local order, a is the holomorphic restriction
jet of the diagonal coefficient, and H is the jet of (z - z0)^n / (g(z) - z).
Replacing n by any padded m >= n multiplies H by (z - z0)^(m-n) and shifts
the extracted index the same way, so the value is unchanged; both entry
points share the extraction kernel on purpose.

Integration over the units pairs the dz^dzbar slot of identity-germ
coefficients with the plane: the form measure is -2i dx dy.

The degree-two functionals: the fundamental one integrates a0 da1 da2, the
curvature-type one integrates a0 (da1 delta a2 + delta a1 da2), and the
Todd combination integrates a0 nabla a1 nabla a2, which equals fundamental
minus half curvature because the cross terms cancel under the unit-label
restriction.
"""

from __future__ import annotations

import math

import numpy as np

from . import fields as F
from .algebra import (
    CrossedForm,
    WordCrossedForm,
    diff_d,
    diff_delta,
    diff_nabla,
    word_mu,
)
from .groupoid import (
    GroupAction,
    GroupLabel,
    automorphism_order,
    compose_maps,
    fixed_points,
)
from .quadrature import integrate_box

__all__ = [
    "PlateauError",
    "CocycleValue",
    "phi_trace",
    "phi_trace_words",
    "integrate_units",
    "integrate_units_words",
    "fundamental_class",
    "chern1",
    "todd",
    "hochschild_b",
    "cyclic_defect",
    "ConjugatedAction",
    "transport_coordinates",
]

DEFAULT_TOL = 1e-6
DEFAULT_DEPTH = 12


class PlateauError(Exception):
    """A localized trace was requested at a point where some cutoff factor is
    not locally constant, so the finite jet would not be exact."""


class CocycleValue:
    __slots__ = ("value", "est_error", "breakdown")

    def __init__(self, value, est_error=0.0, breakdown=None):
        self.value = complex(value)
        self.est_error = float(est_error)
        self.breakdown = breakdown or []

    def __repr__(self):
        return f"CocycleValue({self.value:.12g}, est={self.est_error:.3g})"


def _diag_sum(mat, p, q):
    out = F.fzero()
    for i in range(len(mat)):
        out = F.fadd(out, mat[i][i].get(p, q))
    return out


def _phi_one_term(cmap, mat, region, jet_order, n_max, pad, tag, breakdown):
    """Trace contributions of one coefficient matrix sitting over one map."""
    total = 0j
    a_field = _diag_sum(mat, 0, 0)
    if a_field.is_structural_zero():
        return total
    for z0 in fixed_points(cmap, region):
        aut = automorphism_order(cmap, z0, jet_order, n_max)
        m = aut.order + pad
        if not F.plateau_safe(a_field, z0):
            raise PlateauError(
                f"coefficient at {tag} is inside a cutoff transition at fixed point {z0}"
            )
        a_jet = F.jet2_at(a_field, z0, max(m - 1, 0)).restrict_z()
        c = aut.trace_coefficient(a_jet, m)
        breakdown.append((tag, z0, aut.order, c))
        total += c
    return total


def phi_trace(
    x,
    region=None,
    jet_order=16,
    n_max=8,
    pad=0,
):
    """Localized fixed-point trace of a crossed element.  Identity germs and
    the constant part contribute nothing; each isolated fixed point of the
    other labels contributes its extraction coefficient."""
    region = region or x.action.domain
    breakdown = []
    total = 0j
    for lab, mat in x.terms.items():
        if lab.cmap.is_identity_germ():
            continue
        total += _phi_one_term(
            lab.cmap, mat, region, jet_order, n_max, pad, lab.name, breakdown
        )
    return CocycleValue(total, 0.0, breakdown)


def phi_trace_words(x, region=None, jet_order=16, n_max=8):
    """Wordwise localized trace of a word-indexed element: a map from word
    keys to complex numbers (zero-valued words are kept out)."""
    region = region or x.action.domain
    out = {}
    for key in x.sorted_keys():
        lab = word_mu(x.action, key)
        if lab.cmap.is_identity_germ():
            continue
        breakdown = []
        v = _phi_one_term(
            lab.cmap, x.terms[key], region, jet_order, n_max, 0, lab.name, breakdown
        )
        if v != 0:
            out[key] = v
    return out


def _integrand(field):
    def f(z):
        return F.eval_field(field, z)

    return f


def _unit_integral(mat, tol, max_depth, threads, tag):
    field = _diag_sum(mat, 1, 1)
    if field.is_structural_zero():
        return 0j, 0.0
    if field.support is None:
        raise ValueError(
            f"cannot integrate the coefficient at {tag}: unbounded or unknown support"
        )
    bb = field.support.bbox()
    if bb is None:
        raise ValueError(f"cannot integrate the coefficient at {tag}: unbounded support")
    res = integrate_box(_integrand(field), bb, tol, max_depth, threads)
    # dz^dzbar against the plane: -2i dx dy
    return -2j * res.value, 2.0 * res.est_error


def integrate_units(x, tol=DEFAULT_TOL, max_depth=DEFAULT_DEPTH, threads=1):
    """Integrate the top-degree slot of the identity-germ coefficients over
    the plane.  Constant parts carry no top-degree slot and drop out."""
    total = 0j
    est = 0.0
    breakdown = []
    for lab, mat in x.terms.items():
        if not lab.cmap.is_identity_germ():
            continue
        v, e = _unit_integral(mat, tol, max_depth, threads, lab.name)
        breakdown.append((lab.name, v))
        total += v
        est += e
    return CocycleValue(total, est, breakdown)


def integrate_units_words(x, tol=DEFAULT_TOL, max_depth=DEFAULT_DEPTH, threads=1):
    """Wordwise unit integration of a word-indexed element."""
    out = {}
    est = 0.0
    for key in x.sorted_keys():
        lab = word_mu(x.action, key)
        if not lab.cmap.is_identity_germ():
            continue
        v, e = _unit_integral(x.terms[key], tol, max_depth, threads, str(key))
        est += e
        if v != 0:
            out[key] = v
    return out, est


def fundamental_class(a0, a1, a2, tol=DEFAULT_TOL, max_depth=DEFAULT_DEPTH, threads=1):
    """Integral of a0 da1 da2 over the units."""
    x = a0.mul(diff_d(a1)).mul(diff_d(a2))
    return integrate_units(x, tol, max_depth, threads)


def chern1(a0, a1, a2, tol=DEFAULT_TOL, max_depth=DEFAULT_DEPTH, threads=1):
    """Integral of a0 (da1 delta a2 + delta a1 da2) over the units."""
    inner = diff_d(a1).mul(diff_delta(a2)).add(diff_delta(a1).mul(diff_d(a2)))
    return integrate_units(a0.mul(inner), tol, max_depth, threads)


def todd(a0, a1, a2, tol=DEFAULT_TOL, max_depth=DEFAULT_DEPTH, threads=1):
    """Integral of a0 nabla a1 nabla a2 over the units."""
    x = a0.mul(diff_nabla(a1)).mul(diff_nabla(a2))
    return integrate_units(x, tol, max_depth, threads)


def todd_dual_defect(a0, a1, a2, tol=DEFAULT_TOL, max_depth=DEFAULT_DEPTH, threads=1):
    """Difference between the direct Todd route and fundamental - chern1/2."""
    direct = todd(a0, a1, a2, tol, max_depth, threads)
    fc = fundamental_class(a0, a1, a2, tol, max_depth, threads)
    c1 = chern1(a0, a1, a2, tol, max_depth, threads)
    other = fc.value - 0.5 * c1.value
    return abs(direct.value - other), direct, fc, c1


def hochschild_b(phi, args):
    """Hochschild coboundary of a k-cochain evaluated on k+2 elements; phi is
    any callable returning a CocycleValue or a complex number."""

    def val(*xs):
        got = phi(*xs)
        return got.value if isinstance(got, CocycleValue) else complex(got)

    args = list(args)
    k = len(args) - 2
    if k < 0:
        raise ValueError("need at least two arguments")
    total = 0j
    for i in range(k + 1):
        merged = args[:i] + [args[i].mul(args[i + 1])] + args[i + 2 :]
        total += ((-1.0) ** i) * val(*merged)
    wrap = [args[-1].mul(args[0])] + args[1:-1]
    total += ((-1.0) ** (k + 1)) * val(*wrap)
    return total


def cyclic_defect(phi, args):
    """phi(a0, ..., ak) minus its cyclic rotation with the sign (-1)^k."""

    def val(*xs):
        got = phi(*xs)
        return got.value if isinstance(got, CocycleValue) else complex(got)

    args = list(args)
    k = len(args) - 1
    rotated = [args[-1]] + args[:-1]
    return val(*args) - ((-1.0) ** k) * val(*rotated)


# ---------------------------------------------------------------------------
# coordinate transport


class ConjugatedAction(GroupAction):
    """The same group acting through h g h^-1; labels mirror the base action
    one to one and keep its composition table."""

    def __init__(self, base, h):
        self.base = base
        self.h = h
        self.h_inv = h.inverse()
        dom = base.domain
        if dom is not None and not isinstance(dom, F.WholePlane):
            bb = self.h_inv.preimage_region(dom)  # image of dom under h
            dom = bb if bb is not None else F.WholePlane()
        super().__init__(dom)
        self._wrap = {}
        self._unit = self.wrap(base.unit)

    def wrap(self, base_label):
        hit = self._wrap.get(base_label)
        if hit is None:
            g = base_label.cmap
            if g.is_identity_germ():
                cm = compose_maps(self.h, self.h_inv, self.domain)
            else:
                cm = compose_maps(self.h, compose_maps(g, self.h_inv), self.domain)
            # keep the base label in the key slot so composition can delegate
            hit = self._new_label(base_label, cm, base_label.name)
            self._wrap[base_label] = hit
        return hit

    @property
    def unit(self):
        return self._unit

    def compose(self, l1, l2):
        return self.wrap(self.base.compose(l1.key, l2.key))

    def inverse(self, lab):
        return self.wrap(self.base.inverse(lab.key))


def transport_coordinates(x, h):
    """Move a crossed element through a chart change h: labels become
    h g h^-1 and coefficients are pulled back through h^-1.  The localized
    trace is unchanged by this."""
    act2 = ConjugatedAction(x.action, h)
    h_inv = act2.h_inv
    terms = {}
    for lab, mat in x.terms.items():
        new_mat = [
            [mat[i][j].pullback(h_inv) for j in range(x.size)] for i in range(x.size)
        ]
        terms[act2.wrap(lab)] = new_mat
    return act2, CrossedForm(act2, x.size, terms, x.scalar)
