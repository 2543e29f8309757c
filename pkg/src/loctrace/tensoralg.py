"""Truncated tensor algebra over group labels and its canonical liftings.

Word-indexed crossed elements (``WordCrossedForm``) play the role of the
completed tensor algebra after the splitting homomorphism has been applied:
every tensor word of crossed generators is stored by its label word, with the
convolution product of the letters as coefficient.  This module adds

* the splitting map itself (``rho_star``),
* canonical lifts of relative invertibles and idempotents, exact inverses
  resp. idempotents modulo words longer than the cap,
* numeric word containers for evaluated class representatives
  (``TruncatedSeries``, ``UniversalOneForm``) and the universal differential
  between them,
* collapse functionals turning representatives into numbers.
"""

import math

import numpy as np

from . import fields as F
from .algebra import (
    CrossedForm,
    DWord,
    WordCrossedForm,
    mat_is_zero,
    word_mu,
)


class CertificateError(Exception):
    """An invertibility certificate is missing or fails its check."""


# ---------------------------------------------------------------------------
# sampled residual checks
#
# Crossed elements cannot be inverted numerically here, so invertibility and
# idempotency are certified by sampling residuals on grids covering the
# coefficient supports.

_DEFAULT_GRID = 4


def _bbox_points(bb, n=_DEFAULT_GRID):
    xs = np.linspace(bb[0], bb[1], n + 2)[1:-1]
    ys = np.linspace(bb[2], bb[3], n + 2)[1:-1]
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def _term_points(mat):
    pts = [np.array([0.0 + 0.0j])]
    found = False
    for row in mat:
        for c in row:
            bb = c.support_bbox()
            if bb is not None:
                pts.append(_bbox_points(bb))
                found = True
    if not found:
        pts.append(_bbox_points((-1.0, 1.0, -1.0, 1.0)))
    return np.concatenate(pts)


def crossed_max_abs(x):
    """Largest sampled coefficient magnitude over all labels and slots."""
    worst = 0.0
    if x.scalar is not None:
        worst = float(np.max(np.abs(x.scalar)))
    for lab, mat in x.terms.items():
        zs = _term_points(mat)
        for row in mat:
            for c in row:
                for (p, q), f in c.comps.items():
                    vals = F.eval_field(f, zs)
                    worst = max(worst, float(np.max(np.abs(vals))))
    return worst


def _require_unit_scalar(x, what):
    eye = np.eye(x.size, dtype=complex)
    if x.scalar is None or not np.allclose(x.scalar, eye, rtol=0.0, atol=1e-12):
        raise ValueError(
            f"{what} must be relative: constant part exactly the identity matrix"
        )


def check_idempotent(e, tol=1e-10):
    """Sampled residual of e*e - e; raises when it exceeds the tolerance."""
    res = e.mul(e).sub(e)
    worst = crossed_max_abs(res)
    if worst > tol:
        raise ValueError(f"not an idempotent: sampled residual {worst:.3g} > {tol:g}")
    return worst


def check_inverse(u, v, tol=1e-9):
    one = CrossedForm.unit(u.action, u.size)
    worst = max(
        crossed_max_abs(u.mul(v).sub(one)), crossed_max_abs(v.mul(u).sub(one))
    )
    if worst > tol:
        raise CertificateError(
            f"inverse certificate fails: sampled residual {worst:.3g} > {tol:g}"
        )
    return worst


def check_nilpotent(a, tol=1e-9):
    sq = a.mul(a)
    if not sq.terms and sq.scalar is None:
        return 0.0
    worst = crossed_max_abs(sq)
    if worst > tol:
        raise CertificateError(
            f"nilpotency certificate fails: sampled residual {worst:.3g} > {tol:g}"
        )
    return worst


# ---------------------------------------------------------------------------
# canonical liftings


def lift_invertible(u, cap, certificate):
    """Lift a relative invertible u = 1 + a into the word algebra.

    Returns (u_hat, u_hat_inv).  u_hat is the letterwise lift; u_hat_inv is
    the series (1 + q~) * sum_n C~^n with q the compact part of the inverse
    and C~ the curvature term (lift of a*q minus the product of the lifts).
    Both products u_hat*u_hat_inv and u_hat_inv*u_hat equal 1 exactly modulo
    words longer than the cap.

    The inverse is never computed numerically: the caller must certify it,
    either with ``{"kind": "nilpotent"}`` (then u^-1 = 1 - a) or with
    ``{"kind": "inverse", "value": v}`` for an explicit v.
    """
    _require_unit_scalar(u, "an invertible")
    act, n = u.action, u.size
    a = CrossedForm(act, n, u.terms, None)

    kind = None if certificate is None else certificate.get("kind")
    if kind == "nilpotent":
        check_nilpotent(a)
        q = a.neg()
    elif kind == "inverse":
        v = certificate["value"]
        _require_unit_scalar(v, "an inverse certificate")
        check_inverse(u, v)
        q = CrossedForm(act, n, v.terms, None)
    else:
        raise CertificateError(
            "refusing to invert a crossed element without a certificate "
            "(supply kind 'nilpotent' or 'inverse')"
        )

    u_hat = WordCrossedForm.from_crossed(u, cap)
    a_til = WordCrossedForm.from_crossed(a, cap)
    q_til = WordCrossedForm.from_crossed(q, cap)
    # lift of the product minus the product of the lifts; dies under the
    # multiplication map and raises the word length by at least one
    curv = WordCrossedForm.from_crossed(a.mul(q), cap).sub(a_til.mul(q_til))

    one = WordCrossedForm.unit(act, n, cap)
    total = one
    power = one
    for _ in range(cap):
        power = power.mul(curv)
        if not power.terms and power.scalar is None:
            break
        total = total.add(power)
    u_hat_inv = one.add(q_til).mul(total)
    return u_hat, u_hat_inv


# (1+4t)^(-1/2) = sum_k (-1)^k binom(2k, k) t^k; integer coefficients
def _binom_half_inv(k):
    return (-1) ** k * math.comb(2 * k, k)


def lift_idempotent(e, cap, tol=1e-10):
    """Canonical idempotent lift 1/2 + (c - 1/2)(1 + 4q)^(-1/2), q = c^2 - c.

    The input must be idempotent (sampled check); the output squares to
    itself exactly modulo words longer than the cap.  It collapses back to e
    under the multiplication map up to contributions from dropped words,
    exactly so when the defect series terminates within the cap (check the
    ``dropped`` counter).
    """
    check_idempotent(e, tol)
    act, n = e.action, e.size
    c_til = WordCrossedForm.from_crossed(e, cap)
    q_til = c_til.mul(c_til).sub(c_til)
    if q_til.scalar is not None:
        if float(np.max(np.abs(q_til.scalar))) > tol:
            raise ValueError("constant part of the input is not idempotent")
        q_til = WordCrossedForm(act, n, cap, q_til.terms, None, q_til.dropped)

    one = WordCrossedForm.unit(act, n, cap)
    series = one.scale(_binom_half_inv(0))
    power = one
    for k in range(1, cap + 1):
        power = power.mul(q_til)
        if not power.terms and power.scalar is None:
            break
        series = series.add(power.scale(_binom_half_inv(k)))
    half = one.scale(0.5)
    return half.add(c_til.sub(half).mul(series))


def rho_star(letters, cap, action=None, size=None):
    """Splitting homomorphism: a tensor word of crossed generators goes to
    the convolution product of its letters sitting over the label word.

    Letters are single-label crossed elements (or (label, matrix) pairs).
    The empty word needs the action and size spelled out.
    """
    out = None
    for letter in letters:
        if isinstance(letter, CrossedForm):
            if letter.scalar is not None or len(letter.terms) != 1:
                raise ValueError("each letter must be a single-label crossed term")
            w = WordCrossedForm.from_crossed(letter, cap)
        else:
            lab, mat = letter
            w = WordCrossedForm(lab.action, len(mat), cap, {(lab,): mat})
        out = w if out is None else out.mul(w)
    if out is None:
        if action is None or size is None:
            raise ValueError("empty word needs an explicit action and size")
        return WordCrossedForm.unit(action, size, cap)
    return out


# ---------------------------------------------------------------------------
# numeric word containers


def _word_sort(w):
    return (len(w), tuple(l.index for l in w))


class TruncatedSeries:
    """Words of group labels with constant matrix coefficients, truncated by
    word length.  The unit is the empty word with the identity matrix."""

    def __init__(self, action, size, cap, terms=None, dropped=0):
        self.action = action
        self.size = int(size)
        self.cap = int(cap)
        self.terms = {}
        self.dropped = int(dropped)
        if terms:
            for w, m in terms.items():
                if len(w) > self.cap:
                    self.dropped += 1
                    continue
                m = np.asarray(m, dtype=complex)
                if np.any(m != 0):
                    self.terms[tuple(w)] = m

    @staticmethod
    def unit(action, size, cap):
        return TruncatedSeries(
            action, size, cap, {(): np.eye(size, dtype=complex)}
        )

    def add(self, other):
        out = dict(self.terms)
        for w, m in other.terms.items():
            out[w] = out[w] + m if w in out else m
        return TruncatedSeries(
            self.action, self.size, self.cap, out, self.dropped + other.dropped
        )

    def scale(self, s):
        return TruncatedSeries(
            self.action,
            self.size,
            self.cap,
            {w: m * s for w, m in self.terms.items()},
            self.dropped,
        )

    def neg(self):
        return self.scale(-1.0)

    def sub(self, other):
        return self.add(other.neg())

    def mul(self, other):
        terms = {}
        dropped = self.dropped + other.dropped
        for w1, m1 in self.terms.items():
            for w2, m2 in other.terms.items():
                if len(w1) + len(w2) > self.cap:
                    dropped += 1
                    continue
                w = w1 + w2
                m = m1 @ m2
                terms[w] = terms[w] + m if w in terms else m
        return TruncatedSeries(self.action, self.size, self.cap, terms, dropped)

    def sorted_keys(self):
        return sorted(self.terms.keys(), key=_word_sort)

    def to_jsonable(self):
        out = []
        for w in self.sorted_keys():
            m = self.terms[w]
            out.append(
                {
                    "word": [l.name for l in w],
                    "matrix": [[[v.real, v.imag] for v in row] for row in m],
                }
            )
        return out

    def __repr__(self):
        return (
            f"TruncatedSeries(size={self.size}, cap={self.cap}, "
            f"words={len(self.terms)})"
        )


def nat_key(dkey):
    """Rotate a marked word to its stored quotient representative: the right
    factors move to the front, the marked letter goes last."""
    return (dkey.post + dkey.pre, dkey.mid)


class UniversalOneForm:
    """One-form words (left word, marked label) with constant matrices.

    Keys are quotient representatives: the marked letter is always last, so
    cyclic words are compared by rotating right factors to the front."""

    def __init__(self, action, size, cap, terms=None, dropped=0):
        self.action = action
        self.size = int(size)
        self.cap = int(cap)
        self.terms = {}
        self.dropped = int(dropped)
        if terms:
            for (w, b), m in terms.items():
                if len(w) + 1 > self.cap:
                    self.dropped += 1
                    continue
                m = np.asarray(m, dtype=complex)
                if np.any(m != 0):
                    self.terms[(tuple(w), b)] = m

    def add(self, other):
        out = dict(self.terms)
        for k, m in other.terms.items():
            out[k] = out[k] + m if k in out else m
        return UniversalOneForm(
            self.action, self.size, self.cap, out, self.dropped + other.dropped
        )

    def scale(self, s):
        return UniversalOneForm(
            self.action,
            self.size,
            self.cap,
            {k: m * s for k, m in self.terms.items()},
            self.dropped,
        )

    def neg(self):
        return self.scale(-1.0)

    def sub(self, other):
        return self.add(other.neg())

    def sorted_keys(self):
        return sorted(
            self.terms.keys(), key=lambda k: (_word_sort(k[0]), k[1].index)
        )

    def to_jsonable(self):
        out = []
        for w, b in self.sorted_keys():
            m = self.terms[(w, b)]
            out.append(
                {
                    "word": [l.name for l in w],
                    "dletter": b.name,
                    "matrix": [[[v.real, v.imag] for v in row] for row in m],
                }
            )
        return out

    def __repr__(self):
        return (
            f"UniversalOneForm(size={self.size}, cap={self.cap}, "
            f"words={len(self.terms)})"
        )


def universal_d(x):
    """Universal differential by the Leibniz rule over tensor words.

    On numeric series the result is a ``UniversalOneForm`` in rotated form.
    On word-indexed crossed elements each plain word splits into marked
    words; the coefficient stays attached to the whole word and the rotation
    is deferred until after evaluation (the evaluating functionals are
    traces, so rotation only re-keys their values).
    """
    if isinstance(x, TruncatedSeries):
        terms = {}
        for w, m in x.terms.items():
            for i, b in enumerate(w):
                key = (w[i + 1 :] + w[:i], b)
                terms[key] = terms[key] + m if key in terms else m
        return UniversalOneForm(x.action, x.size, x.cap, terms, x.dropped)
    if isinstance(x, WordCrossedForm):
        terms = {}
        for key, mat in x.terms.items():
            if isinstance(key, DWord):
                raise ValueError("already a one-form word")
            for i in range(len(key)):
                dk = DWord(key[:i], key[i], key[i + 1 :])
                terms[dk] = mat if dk not in terms else _mat_add(terms[dk], mat)
        return WordCrossedForm(x.action, x.size, x.cap, terms, None, x.dropped)
    raise TypeError(f"universal_d does not apply to {type(x).__name__}")


def _mat_add(a, b):
    return [[a[i][j].add(b[i][j]) for j in range(len(a))] for i in range(len(a))]


# ---------------------------------------------------------------------------
# collapse functionals


class Tau0:
    """Trace functional: push words through the multiplication map and read
    the matrix trace of everything landing on the unit label."""

    kind = "tau0"

    def of(self, x):
        total = 0.0 + 0.0j
        for w, m in x.terms.items():
            if word_mu(x.action, w).cmap.is_identity_germ():
                total += np.trace(m)
        return complex(total)


class GroupCocycle1:
    """Additive group 1-cocycle pairing against one-form words.

    The weight c is additive on products; it comes either from per-generator
    weights on a free action (extended by exponent sums) or from an explicit
    per-label table."""

    kind = "cocycle1"

    def __init__(self, weights=None, table=None):
        if (weights is None) == (table is None):
            raise ValueError("give exactly one of generator weights or a label table")
        self.weights = dict(weights) if weights is not None else None
        self.table = dict(table) if table is not None else None

    def value(self, label):
        if self.table is not None:
            try:
                return complex(self.table[label])
            except KeyError:
                raise ValueError(f"cocycle table has no entry for label {label.name}")
        total = 0.0 + 0.0j
        for name, exp in label.key:
            if name not in self.weights:
                raise ValueError(f"cocycle weights miss generator {name}")
            total += exp * self.weights[name]
        return complex(total)

    def check_additive(self, pairs):
        """Largest additivity defect c(gh) - c(g) - c(h) over label pairs
        whose product has a defined weight."""
        worst = 0.0
        for g, h in pairs:
            gh = g.action.compose(h, g)
            try:
                defect = abs(self.value(gh) - self.value(g) - self.value(h))
            except ValueError:
                continue
            worst = max(worst, defect)
        return worst

    def of(self, x):
        total = 0.0 + 0.0j
        for (w, b), m in x.terms.items():
            lab = x.action.compose(b, word_mu(x.action, w))
            if lab.cmap.is_identity_germ():
                total += np.trace(m) * self.value(b)
        return complex(total)


def collapse(x, phi):
    """Pair an evaluated representative with a collapse functional of the
    matching parity."""
    if isinstance(x, TruncatedSeries):
        if phi.kind != "tau0":
            raise ValueError("even representatives collapse through Tau0")
        return phi.of(x)
    if isinstance(x, UniversalOneForm):
        if phi.kind != "cocycle1":
            raise ValueError("one-form representatives collapse through a 1-cocycle")
        return phi.of(x)
    raise TypeError(f"cannot collapse {type(x).__name__}")
