"""Fock representation of the generalized Heisenberg algebra.

A PBW monomial is a weakly decreasing tuple ``js`` of positive integers and
stands for A_{g/2-j_1} ... A_{g/2-j_k} |0>; its weight is sum(js).  Modes
are addressed by twice-index t = g - 2j.  Modes with n >= g/2 annihilate
the vacuum and A_{g/2} acts as zero.

Operators are stored as sparse matrices on the monomials of weight <= wmax.
Each matrix carries

* ``trust``: columns of input weight <= trust are exact images, truncated
  to weight <= wmax (-1 means no column is exact);
* ``lo``/``hi``: bounds on the weight shift of the operator on the whole
  space (floats, so that -inf / +inf express "unbounded").

These three numbers are all the composition rule needs to decide which
columns of a product are still exact after the overflow above wmax has been
dropped.
"""

from __future__ import annotations

import re
import threading
from fractions import Fraction
from functools import lru_cache
from math import inf

from .coeffs import dot, render_scalar
from .errors import WindowError
from .surface import KNModel, fmt_index, twice
from .windows import a_valuation, gamma_partners, xi_partners

__all__ = [
    "FockSpace",
    "FockVector",
    "ModeOperator",
    "partitions",
    "monomial_weight",
    "parse_state",
    "render_monomial",
]


def monomial_weight(js) -> int:
    return sum(js)


@lru_cache(maxsize=None)
def _partitions_of(w, cap):
    if w == 0:
        return ((),)
    out = []
    for first in range(min(w, cap), 0, -1):
        for rest in _partitions_of(w - first, first):
            out.append((first,) + rest)
    return tuple(out)


def partitions(w: int):
    """Weakly decreasing tuples of positive integers summing to w."""
    return list(_partitions_of(w, w))


def render_monomial(js, genus: int) -> str:
    if not js:
        return "|0>"
    return "".join(f"A[{fmt_index(genus - 2 * j)}]" for j in js) + "|0>"


_MODE_RE = re.compile(r"A\[\s*([-+]?\d+(?:/\d+)?)\s*\]")


# ---------------------------------------------------------------------------


class FockVector:
    """Sparse vector; components of weight > wmax are not tracked.

    ``trust`` is the largest weight up to which the components are exact;
    ``inf`` marks a vector known completely (nothing above wmax either).
    """

    __slots__ = ("coeffs", "wmax", "trust")

    def __init__(self, coeffs, wmax, trust=inf):
        self.coeffs = {k: v for k, v in coeffs.items() if v and monomial_weight(k) <= wmax}
        if trust == inf and len(self.coeffs) != sum(1 for v in coeffs.values() if v):
            trust = wmax
        self.wmax = wmax
        self.trust = trust

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return FockVector(out, min(self.wmax, other.wmax), min(self.trust, other.trust))

    def __neg__(self):
        return FockVector({k: -v for k, v in self.coeffs.items()}, self.wmax, self.trust)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        return FockVector({k: c * v for k, v in self.coeffs.items()}, self.wmax, self.trust)

    def __bool__(self):
        return bool(self.coeffs)

    def coeff(self, js):
        if monomial_weight(js) > min(self.trust, self.wmax):
            raise WindowError(f"component of weight {monomial_weight(js)} is beyond the trusted weight {self.trust}")
        return self.coeffs.get(tuple(js), 0)

    def restrict(self, wmax):
        return FockVector(self.coeffs, min(wmax, self.wmax), min(wmax, self.trust))

    def top_weight(self):
        return max((monomial_weight(k) for k in self.coeffs), default=None)

    def graded_part(self, w):
        return {k: v for k, v in self.coeffs.items() if monomial_weight(k) == w}

    def agrees(self, other, upto=None) -> bool:
        top = min(self.trust, other.trust, self.wmax, other.wmax) if upto is None else upto
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeffs.get(k, 0) == other.coeffs.get(k, 0) for k in keys if monomial_weight(k) <= top)

    def render(self, genus):
        terms = []
        for k in sorted(self.coeffs, key=lambda js: (monomial_weight(js), js)):
            terms.append(f"({render_scalar(self.coeffs[k])})*{render_monomial(k, genus)}")
        return " + ".join(terms) or "0"

    def to_json(self, genus):
        return {
            "wmax": self.wmax,
            "trusted_weight": shown_trust(self.trust) if self.trust != inf else "all",
            "terms": [
                {"state": render_monomial(k, genus), "js": list(k), "coeff": render_scalar(self.coeffs[k])}
                for k in sorted(self.coeffs, key=lambda js: (monomial_weight(js), js))
            ],
        }

    def __repr__(self):
        return f"FockVector({len(self.coeffs)} terms, wmax={self.wmax}, trust={self.trust})"


class ModeOperator:
    """Sparse matrix on V_{<= wmax}; ``cols[js]`` is the image of monomial js."""

    __slots__ = ("cols", "wmax", "trust", "lo", "hi")

    def __init__(self, cols, wmax, trust=None, lo=-inf, hi=inf):
        self.cols = {}
        for js, col in cols.items():
            clean = {k: v for k, v in col.items() if v and monomial_weight(k) <= wmax}
            if clean:
                self.cols[js] = clean
        self.wmax = wmax
        # may drop below -1: products can shift it back up by a known amount
        self.trust = wmax if trust is None else min(trust, wmax)
        self.lo = lo
        self.hi = hi

    @classmethod
    def identity(cls, basis, wmax):
        return cls({js: {js: 1} for js in basis}, wmax, wmax, 0, 0)

    @classmethod
    def zero(cls, wmax):
        return cls({}, wmax, wmax, inf, -inf)

    # linear structure
    def _combine(self, other, sign):
        if isinstance(other, int) and other == 0:
            return self
        if not isinstance(other, ModeOperator):
            return NotImplemented
        cols = {js: dict(col) for js, col in self.cols.items()}
        for js, col in other.cols.items():
            tgt = cols.setdefault(js, {})
            for k, v in col.items():
                v = v if sign > 0 else -v
                tgt[k] = tgt[k] + v if k in tgt else v
        return ModeOperator(cols, min(self.wmax, other.wmax), min(self.trust, other.trust),
                            min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, other):
        return self._combine(other, 1)

    def __radd__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self)._combine(other, 1)

    def __neg__(self):
        return ModeOperator({js: {k: -v for k, v in col.items()} for js, col in self.cols.items()},
                            self.wmax, self.trust, self.lo, self.hi)

    def __rmul__(self, c):
        if isinstance(c, ModeOperator):
            return c.compose(self)
        if not c:
            return ModeOperator({}, self.wmax, self.trust, self.lo, self.hi)
        return ModeOperator({js: {k: c * v for k, v in col.items()} for js, col in self.cols.items()},
                            self.wmax, self.trust, self.lo, self.hi)

    def __mul__(self, other):
        if isinstance(other, ModeOperator):
            return self.compose(other)
        return self.__rmul__(other)

    def __bool__(self):
        # "not known to be zero": untrusted columns keep the operator alive
        return bool(self.cols) or self.trust < self.wmax

    def compose(self, other: "ModeOperator") -> "ModeOperator":
        """self o other (other acts first)."""
        w = min(self.wmax, other.wmax)
        cols = {}
        for js, col in other.cols.items():
            cells = {}
            for mid, c in col.items():
                for k, v in self.cols.get(mid, {}).items():
                    cells.setdefault(k, []).append((c, v))
            if cells:
                cols[js] = {k: dot(pairs) for k, pairs in cells.items()}
        if self.lo == inf or other.lo == inf:
            lo, hi = inf, -inf
        else:
            lo, hi = self.lo + other.lo, self.hi + other.hi
        return ModeOperator(cols, w, composed_trust(self, other, w), lo, hi)

    def apply(self, v: FockVector) -> FockVector:
        out = {}
        for js, c in v.coeffs.items():
            for k, x in self.cols.get(js, {}).items():
                t = c * x
                out[k] = out[k] + t if k in out else t
        # output weight w needs every input of weight up to w - lo, each
        # mapped by an exact column
        eff = v.trust
        bad = [monomial_weight(js) for js in v.coeffs if monomial_weight(js) > self.trust]
        if bad:
            eff = min(eff, min(bad) - 1)
        if eff == inf:
            trust = self.wmax
        elif self.lo == -inf:
            trust = -inf
        else:
            trust = eff + (self.lo if self.lo < inf else 0)
        trust = min(trust, self.wmax, v.wmax)
        return FockVector(out, min(self.wmax, v.wmax), trust)

    def column(self, js) -> FockVector:
        js = tuple(js)
        return FockVector(self.cols.get(js, {}), self.wmax, self.wmax if monomial_weight(js) <= self.trust else -1)

    def entry(self, row, col):
        return self.cols.get(tuple(col), {}).get(tuple(row), 0)

    def is_zero(self, upto=None) -> bool:
        """True when every column of input weight <= upto (default trust) vanishes."""
        top = self.trust if upto is None else upto
        return not any(col for js, col in self.cols.items() if monomial_weight(js) <= top)

    def first_nonzero(self, upto=None):
        top = self.trust if upto is None else upto
        for js in sorted(self.cols, key=lambda x: (monomial_weight(x), x)):
            if monomial_weight(js) <= top:
                k = min(self.cols[js], key=lambda x: (monomial_weight(x), x))
                return js, k, self.cols[js][k]
        return None

    def agrees(self, other, upto=None) -> bool:
        top = min(self.trust, other.trust) if upto is None else upto
        return (self - other).is_zero(top)

    def weight_shifts(self):
        """Observed weight shifts (output minus input) over stored entries."""
        return sorted({monomial_weight(k) - monomial_weight(js) for js, col in self.cols.items() for k in col})

    def with_bounds(self, lo=None, hi=None, trust=None):
        return ModeOperator(self.cols, self.wmax, self.trust if trust is None else trust,
                            self.lo if lo is None else lo, self.hi if hi is None else hi)

    def __repr__(self):
        return f"ModeOperator({sum(len(c) for c in self.cols.values())} entries, trust={self.trust}, shifts=[{self.lo}, {self.hi}])"


def shown_trust(t) -> int:
    """Trust as reported: -1 means no weight is trusted."""
    return int(max(-1, t))


def composed_trust(m1: ModeOperator, m2: ModeOperator, wmax: int) -> int:
    """Largest column weight of m1 o m2 that is still exact.

    A column w of m2 is exact up to wmax; the dropped overflow can only come
    back below wmax when m1 can lower the weight.  The columns of m1 that
    are hit must be exact too.
    """
    if m1.lo == inf or m2.lo == inf:
        # a factor with empty shift range is exactly zero
        return wmax
    t = m2.trust
    if m1.lo < 0:
        t = min(t, wmax - m2.hi)
    if m1.trust < wmax:
        t = min(t, m1.trust - m2.hi)
    return min(t, wmax)


# ---------------------------------------------------------------------------


class FockSpace:
    """Weight-truncated induced representation for one surface model."""

    def __init__(self, model: KNModel, wmax: int, structure=None):
        from .structure import structure_of

        if wmax < 0:
            raise ValueError("wmax must be nonnegative")
        self.model = model
        self.genus = model.genus
        self.wmax = wmax
        self.constants = structure if structure is not None else structure_of(model)
        self._lock = threading.Lock()
        self._modes = {}
        self._bounds = {}
        self._translation = None
        self._act = lru_cache(maxsize=None)(self._act_exact)

    # basis ------------------------------------------------------------------
    def basis(self, wmax=None):
        top = self.wmax if wmax is None else wmax
        return [js for w in range(top + 1) for js in partitions(w)]

    def dim(self, w=None):
        """Number of monomials of weight w (or of weight <= wmax)."""
        if w is None:
            return len(self.basis())
        return len(partitions(w))

    def vacuum(self) -> FockVector:
        return FockVector({(): 1}, self.wmax)

    def monomial(self, js) -> FockVector:
        js = tuple(sorted(js, reverse=True))
        return FockVector({js: 1}, self.wmax)

    def j_of(self, tn):
        return (self.genus - tn) // 2

    def is_creator(self, tn):
        return tn < self.genus

    def gamma(self, tn, tm):
        return self.constants.gamma(tn, tm)

    # the exact action on single monomials -----------------------------------
    def _act_exact(self, tn, js):
        """A_n applied to the monomial js, exactly (no weight cap)."""
        g = self.genus
        if tn == g:
            return {}
        if not js:
            return {} if tn > g else {(self.j_of(tn),): 1}
        head, rest = js[0], js[1:]
        tb = g - 2 * head
        if self.is_creator(tn) and tn <= tb:
            return {(self.j_of(tn),) + js: 1}
        # A_a A_b = A_b A_a + gamma_ab
        out = {}
        for mono, c in self._act(tn, rest).items():
            key = (head,) + mono
            out[key] = out.get(key, 0) + c
        gab = self.gamma(tn, tb)
        if gab:
            out[rest] = out.get(rest, 0) + gab
        return {k: v for k, v in out.items() if v}

    def act(self, tn, js):
        self.model.check_index(tn)
        return dict(self._act(tn, tuple(js)))

    def apply_mode(self, tn, v: FockVector) -> FockVector:
        return self.mode_matrix(tn).apply(v)

    # matrices ---------------------------------------------------------------
    def mode_bounds(self, tn):
        """(lo, hi) of the weight shift of A_n on the whole space."""
        with self._lock:
            if tn in self._bounds:
                return self._bounds[tn]
        g = self.genus
        shifts = set()
        if tn != g:
            if self.is_creator(tn):
                shifts.add(self.j_of(tn))
            for tb in gamma_partners(self.model, tn):
                if self.is_creator(tb) and (not self.is_creator(tn) or tb < tn) and self.gamma(tn, tb):
                    shifts.add(-self.j_of(tb))
        bounds = (min(shifts), max(shifts)) if shifts else (inf, -inf)
        with self._lock:
            self._bounds[tn] = bounds
        return bounds

    def nonzero_on_space(self, tn) -> bool:
        """False when A_n is known to vanish on all of V_{<= wmax}."""
        if tn == self.genus:
            return False
        if self.is_creator(tn):
            return self.j_of(tn) <= self.wmax
        # an annihilator needs a partner of weight >= n - g/2
        return a_valuation(self.genus, tn) <= self.wmax

    def mode_matrix(self, tn) -> ModeOperator:
        self.model.check_index(tn)
        with self._lock:
            if tn in self._modes:
                return self._modes[tn]
        lo, hi = self.mode_bounds(tn)
        cols = {js: self._act(tn, js) for js in self.basis()} if self.nonzero_on_space(tn) else {}
        op = ModeOperator(cols, self.wmax, self.wmax, lo, hi)
        with self._lock:
            self._modes[tn] = op
        return op

    def identity(self) -> ModeOperator:
        return ModeOperator.identity(self.basis(), self.wmax)

    # translation --------------------------------------------------------------
    def bracket_T(self, tn):
        """[T, A_n] = sum_u xi_n^u A_u as {twice_u: coefficient}."""
        out = {}
        for tu in xi_partners(self.model, tn):
            c = self.constants.xi(tn, tu)
            if c:
                out[tu] = c
        return out

    def _translate(self, js):
        g = self.genus
        total = {}
        for i, j in enumerate(js):
            tn = g - 2 * j
            head, tail = js[:i], js[i + 1:]
            for tu, c in self.bracket_T(tn).items():
                state = self._act(tu, tail)
                for j2 in reversed(head):
                    nxt = {}
                    t2 = g - 2 * j2
                    for mono, x in state.items():
                        for k, y in self._act(t2, mono).items():
                            nxt[k] = nxt.get(k, 0) + x * y
                    state = {k: v for k, v in nxt.items() if v}
                for k, v in state.items():
                    total[k] = total.get(k, 0) + c * v
        return {k: v for k, v in total.items() if v}

    def translation_matrix(self) -> ModeOperator:
        """T with T|0> = 0 and [T, A_n] = sum_u xi_n^u A_u, as a derivation."""
        with self._lock:
            if self._translation is not None:
                return self._translation
        cols = {js: self._translate(js) for js in self.basis()}
        lo = 1 if self.genus == 0 and self._homogeneous_translation() else -inf
        op = ModeOperator(cols, self.wmax, self.wmax, lo, 1)
        with self._lock:
            self._translation = op
        return op

    def _homogeneous_translation(self) -> bool:
        # T shifts weight by exactly one when every bracket [T, A_n] is a
        # multiple of A_{n-1} and creators commute among themselves
        g = self.genus
        for j in range(1, self.wmax + 2):
            tn = g - 2 * j
            if set(self.bracket_T(tn)) - {tn - 2}:
                return False
            for tb in gamma_partners(self.model, tn):
                if self.is_creator(tb) and tb != tn and self.gamma(tn, tb):
                    return False
        return True

    # text ---------------------------------------------------------------------
    def parse_state(self, text: str) -> FockVector:
        return parse_state(self, text)

    def render(self, v: FockVector) -> str:
        return v.render(self.genus)


def parse_state(space: FockSpace, text: str) -> FockVector:
    """Evaluate a product of modes such as "A[-3/2]A[-1/2]|0>" on the vacuum."""
    body = text.strip()
    if not body.endswith("|0>"):
        raise ValueError(f"state {text!r} must end with |0>")
    body = body[:-3].strip()
    modes = []
    pos = 0
    for m in _MODE_RE.finditer(body):
        if body[pos:m.start()].strip():
            raise ValueError(f"cannot parse state {text!r}")
        modes.append(twice(Fraction(m.group(1))))
        pos = m.end()
    if body[pos:].strip():
        raise ValueError(f"cannot parse state {text!r}")
    v = space.vacuum()
    for tn in reversed(modes):
        space.model.check_index(tn)
        v = space.apply_mode(tn, v)
    return v
