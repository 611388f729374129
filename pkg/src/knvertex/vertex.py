"""KN fields, the KN normal-ordered product and the vertex-algebra axioms.

A field is expanded at S+ in the local coordinate z as an OperatorSeries: a
Laurent series whose coefficients are ModeOperators on V_{<= wmax}.  Level-one
fields also remember their decomposition over the modes A_n, which is what
the normal-ordered product splits on.

Only finitely many modes matter on V_{<= wmax}: creators A_{g/2-j} with
j <= wmax and annihilators A_{g/2+j} with j <= wmax.  All others act as zero
there, so truncating the mode sums loses nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, inf

from .errors import InsufficientPrecision, ModelError
from .fock import FockSpace, FockVector, ModeOperator, monomial_weight, partitions, render_monomial, shown_trust
from .reports import render, report
from .series import BiSeries, LaurentSeries, PLUS, _plus, _upper_min
from .structure import delta_kernel, szego_split
from .surface import fmt_index
from .windows import delta_window, field_valuation, locality_margin

__all__ = [
    "OperatorSeries",
    "FieldHandle",
    "mode_function",
    "generator_field",
    "derived_field",
    "knop",
    "vertex_operator",
    "commutator_series",
    "check_vacuum",
    "check_translation",
    "check_locality",
    "check_knop_residue_form",
    "field_report",
    "genus0_compare",
]


class OperatorSeries:
    """sum_k coeffs[k] z^k with ModeOperator coefficients, exact for k < precision."""

    __slots__ = ("coeffs", "valuation", "precision", "wmax", "level")

    def __init__(self, coeffs, valuation, precision, wmax, level=1):
        if precision is not None and precision < valuation:
            precision = valuation
        # empty operators are kept: their weight-shift bounds still matter
        # when the series is composed with something that can lower weight
        self.coeffs = {}
        for k, op in coeffs.items():
            if op is None:
                continue
            if op.cols and k < valuation:
                raise ValueError(f"operator coefficient at z^{k} below the valuation {valuation}")
            if k >= valuation and (precision is None or k < precision):
                self.coeffs[k] = op
        self.valuation = valuation
        self.precision = precision
        self.wmax = wmax
        self.level = level

    def exponents(self):
        top = self.precision if self.precision is not None else max(self.coeffs, default=self.valuation) + 1
        return range(self.valuation, top)

    def coeff(self, k) -> ModeOperator:
        if self.precision is not None and k >= self.precision:
            raise InsufficientPrecision(
                f"operator coefficient z^{k} outside the trusted window [{self.valuation}, {self.precision})",
                deficit=k - self.precision + 1,
            )
        op = self.coeffs.get(k)
        if op is None:
            if k < self.valuation:
                return ModeOperator.zero(self.wmax)
            # nothing recorded: unknown shifts
            return ModeOperator({}, self.wmax)
        return op

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, op in other.coeffs.items():
            out[k] = out[k] + op if k in out else op
        return OperatorSeries(out, min(self.valuation, other.valuation),
                              _upper_min(self.precision, other.precision), min(self.wmax, other.wmax),
                              max(self.level, other.level))

    def __neg__(self):
        return OperatorSeries({k: -op for k, op in self.coeffs.items()}, self.valuation, self.precision,
                              self.wmax, self.level)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        """Product of operator series (self acts after other)."""
        v = self.valuation + other.valuation
        n = _upper_min(_plus(self.valuation, other.precision), _plus(other.valuation, self.precision))
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                k = i + j
                if n is not None and k >= n:
                    continue
                t = a.compose(b)
                out[k] = out[k] + t if k in out else t
        return OperatorSeries(out, v, n, min(self.wmax, other.wmax), self.level + other.level)

    def scale_by(self, f: LaurentSeries):
        """f(z) times the series, f scalar."""
        v = self.valuation + f.valuation
        n = _upper_min(_plus(self.valuation, f.precision), _plus(f.valuation, self.precision))
        out = {}
        for i, c in f.items():
            for j, op in self.coeffs.items():
                k = i + j
                if n is not None and k >= n:
                    continue
                t = c * op
                out[k] = out[k] + t if k in out else t
        return OperatorSeries(out, v, n, self.wmax, self.level)

    def derivative(self):
        return OperatorSeries({k - 1: k * op for k, op in self.coeffs.items() if k},
                              self.valuation - 1, None if self.precision is None else self.precision - 1,
                              self.wmax, self.level)

    def nabla(self, e: LaurentSeries):
        """Lie derivative e(z) d/dz of an operator-valued function."""
        return self.derivative().scale_by(e)

    def apply(self, v: FockVector):
        """{k: coefficient of z^k in Y(z) v} over the trusted exponents."""
        return {k: self.coeff(k).apply(v) for k in self.exponents()}

    def trust_profile(self):
        return {k: shown_trust(op.trust) for k, op in sorted(self.coeffs.items())}

    def to_json(self, genus):
        return {
            "valuation": self.valuation,
            "precision": self.precision,
            "wmax": self.wmax,
            "level": self.level,
            "coeffs": [
                {
                    "exponent": k,
                    "trusted_weight": shown_trust(op.trust),
                    "weight_shifts": op.weight_shifts(),
                    "entries": [
                        {"in": render_monomial(js, genus), "out": render_monomial(out, genus), "value": render(c)}
                        for js in sorted(op.cols, key=lambda x: (monomial_weight(x), x))
                        for out, c in sorted(op.cols[js].items(), key=lambda x: (monomial_weight(x[0]), x[0]))
                    ],
                }
                for k, op in sorted(self.coeffs.items())
            ],
        }

    def __repr__(self):
        return f"OperatorSeries(level={self.level}, window=[{self.valuation}, {self.precision}), {len(self.coeffs)} terms)"


def _identity_series(space: FockSpace) -> OperatorSeries:
    return OperatorSeries({0: space.identity()}, 0, None, space.wmax, 0)


# ---------------------------------------------------------------------------
# level-one fields


_MODE_FUNCTIONS = {}


def mode_function(model, twice_n: int, m: int, precision: int) -> LaurentSeries:
    """(1/m!) nabla^m <omega^n, e> at S+, trusted below ``precision``."""
    key = (id(model), twice_n, m)
    hit = _MODE_FUNCTIONS.get(key)
    if hit is not None and hit[0] is model and (hit[1].precision is None or hit[1].precision >= precision):
        return hit[1].truncate(precision)
    g = model.genus
    v = (g - twice_n) // 2 - 1
    top = precision + m
    w = model.omega(twice_n, top, PLUS).series
    e = model.e(top - v + m + 1, PLUS).series
    s = w * e
    for _ in range(m):
        s = s.derivative() * e
    if m:
        s = Fraction(1, factorial(m)) * s
    s = s.truncate(precision)
    if s.precision is not None and s.precision < precision:
        raise InsufficientPrecision("mode function lost precision", deficit=precision - s.precision)
    _MODE_FUNCTIONS[key] = (model, s)
    return s


def _field_modes(space: FockSpace):
    """Twice-indices of the modes acting nontrivially on V_{<= wmax}."""
    g, w = space.genus, space.wmax
    return [t for t in range(g - 2 * w, g + 2 * w + 1, 2) if t != g and space.nonzero_on_space(t)]


def _assemble(space: FockSpace, parts, valuation, precision, level, bounds):
    """sum over (op, scalar series) of op * series, as an OperatorSeries.

    ``bounds(k)`` gives the weight-shift bounds of the full coefficient,
    including the modes that vanish on V_{<= wmax} and were left out.
    """
    out = {}
    for op, s in parts:
        for k, c in s.items():
            if k >= precision:
                continue
            t = c * op
            out[k] = out[k] + t if k in out else t
    for k in range(valuation, precision):
        lo, hi = bounds(k)
        op = out.get(k) or ModeOperator({}, space.wmax)
        out[k] = op.with_bounds(lo=lo, hi=hi)
    return OperatorSeries(out, valuation, precision, space.wmax, level)


def _coefficient_bounds(space: FockSpace, m: int, part=None):
    """Weight-shift bounds of the z^k coefficient of a derived field.

    The creator A_{g/2-j} enters at exponents >= j - 1 - m, so nothing
    raises the weight by more than k + 1 + m; annihilators lower it by at
    least one.  At genus 0 the coefficient is the single mode A_{-k-1-m}.
    Otherwise infinitely many annihilators enter every coefficient and no
    lower bound is claimed (reordering creators produces gamma terms).
    ``part`` selects the creator ("minus") or annihilator ("plus") half;
    the creator half is empty below exponent -m.
    """
    def bounds(k):
        top = k + 1 + m
        if space.genus == 0:
            creator = top > 0
            if (part == "minus" and not creator) or (part == "plus" and creator):
                return inf, -inf
            return top, top
        if part == "plus":
            return -inf, min(top, -1)
        if part == "minus" and top < 1:
            return inf, -inf
        return -inf, top
    return bounds


@dataclass
class FieldHandle:
    """Y(a, P) for a PBW monomial a, with its level-one decomposition when level is one."""

    state: tuple
    genus: int
    series: OperatorSeries
    modes: dict = field(default_factory=dict)
    order: int = None

    @property
    def level(self):
        return len(self.state)

    @property
    def weight(self):
        return monomial_weight(self.state)

    def describe(self):
        return {
            "state": render_monomial(self.state, self.genus),
            "level": self.level,
            "weight": self.weight,
            "window": [self.series.valuation, self.series.precision],
        }


def derived_field(space: FockSpace, m: int, precision: int, floor: int = 0) -> FieldHandle:
    """Y(A_{g/2-m-1}|0>, P) = (1/m!) nabla^m sum_n A_n <omega^n, e>.

    ``floor`` adds that many (empty on V_{<= wmax}) coefficients below the
    valuation, carrying their weight-shift bounds.
    """
    if m < 0:
        raise ValueError("derivative order must be nonnegative")
    model = space.model
    modes = {t: mode_function(model, t, m, precision) for t in _field_modes(space)}
    v = field_valuation(space.wmax, m) - floor
    bad = [t for t, s in modes.items() if s.coeffs and min(s.coeffs) < v]
    if bad:
        raise ModelError(f"mode functions {bad} start below z^{v}")
    series = _assemble(space, [(space.mode_matrix(t), s) for t, s in modes.items()], v, precision, 1,
                       _coefficient_bounds(space, m))
    return FieldHandle((m + 1,), space.genus, series, modes, m)


def generator_field(space: FockSpace, precision: int) -> FieldHandle:
    """Y(A_{g/2-1}|0>, P) = sum_n A_n <omega^n, e>."""
    return derived_field(space, 0, precision)


def _split(space: FockSpace, a: FieldHandle, precision):
    g = space.genus
    minus = [(space.mode_matrix(t), s.truncate(precision)) for t, s in a.modes.items() if t < g]
    plus = [(space.mode_matrix(t), s.truncate(precision)) for t, s in a.modes.items() if t >= g]
    v = a.series.valuation
    m = a.order
    return (_assemble(space, minus, v, precision, 1, _coefficient_bounds(space, m, "minus")),
            _assemble(space, plus, v, precision, 1, _coefficient_bounds(space, m, "plus")))


def knop(space: FockSpace, a: FieldHandle, b: OperatorSeries, precision: int) -> OperatorSeries:
    """:a b: = sum_{n<g/2} a_n <omega^n,e> b + b sum_{n>=g/2} a_n <omega^n,e>.

    The split is by the index of the generator mode A_n; the e coupling is
    already part of each mode function, so the result is simply the sum of
    the two ordered products.  ``b`` must be trusted far enough that the
    products are trusted below ``precision``.
    """
    if not a.state:
        # Y(|0>) = Id sits entirely in the left half
        out = _identity_series(space) * b
        return OperatorSeries(out.coeffs, out.valuation, _upper_min(out.precision, precision), space.wmax, b.level)
    if not a.modes:
        raise ValueError("knop needs a level-one field with a mode decomposition")
    need_a = precision - b.valuation
    minus, plus = _split(space, a, need_a)
    out = minus * b + b * plus
    top = _upper_min(out.precision, precision)
    return OperatorSeries(out.coeffs, out.valuation, top, space.wmax, b.level + 1)


def _nested(space: FockSpace, js, precision: int) -> OperatorSeries:
    if len(js) == 1:
        return derived_field(space, js[0] - 1, precision).series
    # the tail must reach past the poles of the front factor and vice versa
    front = field_valuation(space.wmax, js[0] - 1)
    rest = sum(field_valuation(space.wmax, j - 1) for j in js[1:])
    tail = _nested(space, js[1:], precision - front)
    a = derived_field(space, js[0] - 1, precision - rest)
    return knop(space, a, tail, precision)


def vertex_operator(space: FockSpace, js, precision: int) -> FieldHandle:
    """Y(a, P) for the PBW monomial a = A_{g/2-j_1} ... A_{g/2-j_k}|0>.

    Y(|0>) is the identity; otherwise the derived fields
    Y(A_{g/2-j}|0>) (derivative order j - 1) are folded right to left with
    the normal-ordered product.
    """
    js = tuple(sorted(js, reverse=True))
    if any(j < 1 for j in js):
        raise ValueError("monomial parts must be positive")
    if not js:
        return FieldHandle((), space.genus, _identity_series(space))
    if len(js) == 1:
        return derived_field(space, js[0] - 1, precision)
    return FieldHandle(js, space.genus, _nested(space, js, precision))


# ---------------------------------------------------------------------------
# reports


def field_report(space: FockSpace, handle: FieldHandle):
    """KN-field property: Y(a) v has finitely many negative powers for every basis v."""
    s = handle.series
    worst = {}
    for js in space.basis():
        v = space.monomial(js)
        neg = [k for k, w in s.apply(v).items() if k < 0 and w.coeffs]
        worst[render_monomial(js, space.genus)] = min(neg) if neg else None
    return {"field": handle.describe(), "lowest_negative_power": worst}


def _vector_witness(v: FockVector, genus, upto):
    for js in sorted(v.coeffs, key=lambda x: (monomial_weight(x), x)):
        if monomial_weight(js) <= upto:
            return {"state": render_monomial(js, genus), "value": render(v.coeffs[js])}
    return None


def check_vacuum(space: FockSpace, js, exact: bool = None):
    """Y(a, P)|0> has no negative powers and its z^0 term is a modulo lower weight.

    With ``exact`` (default at genus 0) the z^0 term must equal a on the
    whole trusted range.
    """
    js = tuple(sorted(js, reverse=True))
    g = space.genus
    if exact is None:
        exact = g == 0
    wt = monomial_weight(js)
    if wt > space.wmax:
        raise InsufficientPrecision(f"state of weight {wt} does not fit in wmax={space.wmax}", deficit=wt - space.wmax)
    handle = vertex_operator(space, js, 1)
    vac = space.vacuum()
    images = handle.series.apply(vac)
    name = "vacuum axiom Y(a,P)|0> regular at S+ with value a mod lower weight"
    params = {"genus": g, "state": render_monomial(js, g), "weight": wt, "level": len(js), "exact": exact}
    trusted = {k: shown_trust(min(v.trust, space.wmax)) for k, v in images.items()}
    window = {"valuation": handle.series.valuation, "precision": 1, "wmax": space.wmax,
              "trusted_weight": {str(k): t for k, t in sorted(trusted.items())}}
    if trusted.get(0, -1) < wt:
        raise InsufficientPrecision(
            f"{name}: z^0 term trusted only up to weight {trusted.get(0, -1)} < {wt}",
            deficit=wt - trusted.get(0, -1),
        )
    for k in sorted(images):
        if k >= 0:
            continue
        w = _vector_witness(images[k], g, trusted[k])
        if w is not None:
            return report(name, params, window, False, {"exponent": k, **w})
    const = images[0]
    diff = const - space.monomial(js)
    floor = 0 if exact else wt
    bad = {k: c for k, c in diff.coeffs.items() if floor <= monomial_weight(k) <= trusted[0]}
    witness = None
    if bad:
        witness = {"exponent": 0, **_vector_witness(FockVector(bad, space.wmax), g, trusted[0])}
    lower = {render_monomial(k, g): render(c) for k, c in sorted(diff.coeffs.items()) if monomial_weight(k) < wt}
    return report(name, params, window, not bad, witness, lower_weight_terms=lower)


def _op_witness(op: ModeOperator, genus, upto):
    hit = op.first_nonzero(upto)
    if hit is None:
        return None
    js, out, c = hit
    return {"column": render_monomial(js, genus), "row": render_monomial(out, genus), "value": render(c)}


def check_translation(space: FockSpace, m: int, precision: int = None):
    """[T, Y(A_{g/2-m-1}|0>, P)] = nabla Y(A_{g/2-m-1}|0>, P) coefficientwise."""
    g = space.genus
    if precision is None:
        precision = space.wmax + 2
    # one extra exponent below: [T, Y_k] need not vanish where Y_k does on V_{<= wmax}
    handle = derived_field(space, m, precision + 1, floor=1)
    y = handle.series
    T = space.translation_matrix()
    e = space.model.e(precision + 2 - y.valuation, PLUS).series
    rhs = y.nabla(e)
    name = "translation axiom [T, Y(a,P)] = nabla Y(a,P)"
    params = {"genus": g, "m": m, "state": render_monomial((m + 1,), g)}
    checked = 0
    witness = None
    trust = {}
    for k in range(y.valuation, precision):
        yk = y.coeff(k)
        lhs = T.compose(yk) - yk.compose(T)
        r = rhs.coeff(k)
        diff = lhs - r
        top = shown_trust(min(diff.trust, r.trust))
        trust[k] = top
        if top < 0:
            continue
        checked += sum(1 for js in space.basis() if monomial_weight(js) <= top)
        if not diff.is_zero(top):
            witness = {"exponent": k, **_op_witness(diff, g, top)}
            break
    window = {"exponents": [y.valuation, precision], "wmax": space.wmax,
              "trusted_weight": {str(k): t for k, t in trust.items()}, "checked_columns": checked}
    if not checked:
        raise InsufficientPrecision(f"{name}: nothing trusted", deficit=1)
    return report(name, params, window, witness is None, witness)


# ---------------------------------------------------------------------------
# locality


class LocalityTrust:
    """Trusted column weight of the (i, j) coefficient of a commutator BiSeries.

    For fields of weights ca and cb the z^i coefficient raises the weight by
    at most i + ca, so [a_i, b_j] is exact on columns of weight
    <= wmax - max(i + ca, j + cb); below the valuations the coefficient
    vanishes on those columns.  Products and derivatives move the bound
    (``shifted``) and sums keep the smaller one (``merge``).
    """

    __slots__ = ("wmax", "parts")

    def __init__(self, wmax, parts):
        self.wmax = wmax
        self.parts = tuple(parts)

    @classmethod
    def of(cls, wmax, ca, cb):
        return cls(wmax, [(ca, cb)])

    def __call__(self, i, j):
        return min(self.wmax - max(i + cx, j + cy) for cx, cy in self.parts)

    def shifted(self, dx, dy):
        return LocalityTrust(self.wmax, [(cx + dx, cy + dy) for cx, cy in self.parts])

    def merge(self, other):
        parts = sorted(set(self.parts) | set(other.parts))
        # drop dominated pairs
        keep = [p for p in parts if not any(q != p and q[0] >= p[0] and q[1] >= p[1] for q in parts)]
        return LocalityTrust(min(self.wmax, other.wmax), keep)


def commutator_series(a: OperatorSeries, b: OperatorSeries, ca: int, cb: int) -> BiSeries:
    """[Y(a, P), Y(b, Q)] as a BiSeries with operator coefficients.

    ``ca`` and ``cb`` are the weights of the two states.
    """
    out = {}
    for i in a.exponents():
        ai = a.coeff(i)
        for j in b.exponents():
            bj = b.coeff(j)
            if not ai or not bj:
                continue
            c = ai.compose(bj) - bj.compose(ai)
            if c:
                out[(i, j)] = c
    return BiSeries(out, vx=a.valuation, vy=b.valuation, vs=a.valuation + b.valuation,
                    nx=a.precision, ny=b.precision, trust=LocalityTrust.of(a.wmax, ca, cb))


def _zero_scan(bi: BiSeries, genus, wmax, expected=None):
    """(checked coefficients, first witness) over the trusted region.

    A coefficient counts when at least the vacuum column is trusted; with
    ``expected`` the difference to expected(i, j) times the identity is
    scanned instead.
    """
    checked = 0
    for (i, j) in bi.region():
        c = bi.coeff(i, j)
        top = wmax if bi.trust is None else min(wmax, bi.trust(i, j))
        if isinstance(c, ModeOperator):
            top = min(top, c.trust)
        if top < 0:
            continue
        checked += 1
        if expected is not None:
            e = expected(i, j)
            if e:
                c = c - e
        if isinstance(c, ModeOperator):
            if not c.is_zero(top):
                return checked, {"exponent": [i, j], **_op_witness(c, genus, top)}
        elif c:
            return checked, {"exponent": [i, j], "value": render(c)}
    return checked, None


def _apply_F(bi: BiSeries, au: LaurentSeries, power: int) -> BiSeries:
    for _ in range(power):
        bi = bi.mul_x(au) - bi.mul_y(au)
    return bi


def check_locality(space: FockSpace, a, b, twice_u: int, power: int, expect_zero: bool = True,
                   compare_delta: bool = None):
    """F_u(P,Q)^power [Y(a,P), Y(b,Q)] = 0 on the trusted window.

    ``a`` and ``b`` are PBW monomials (tuples of j's).  With
    ``expect_zero=False`` the check passes when some trusted coefficient is
    nonzero (sharpness probe).  For two generators the commutator itself is
    compared with -d_P Delta(P,Q) <e(P)> <e(Q)> times the identity.
    """
    g = space.genus
    model = space.model
    a, b = tuple(sorted(a, reverse=True)), tuple(sorted(b, reverse=True))
    va = sum(field_valuation(space.wmax, j - 1) for j in a)
    vb = sum(field_valuation(space.wmax, j - 1) for j in b)
    na, nb, nu = locality_margin(g, space.wmax, twice_u, power, va, vb)
    ya = vertex_operator(space, a, na).series
    yb = vertex_operator(space, b, nb).series
    comm = commutator_series(ya, yb, monomial_weight(a), monomial_weight(b))
    params = {"genus": g, "a": render_monomial(a, g), "b": render_monomial(b, g),
              "twice_u": twice_u, "N": power}
    window = {"wmax": space.wmax, "nx": na, "ny": nb, "u_precision": nu}
    extra = {}
    if compare_delta is None:
        compare_delta = a == (1,) and b == (1,)
    if compare_delta:
        expected = _generator_commutator(space, na, nb)
        ident = space.identity()
        box = comm.restrict(nx=expected.nx, ny=expected.ny)
        n_exp, exp_w = _zero_scan(box, g, space.wmax, lambda i, j: expected.coeff(i, j) * ident)
        extra["commutator_is_minus_dP_delta"] = exp_w is None
        extra["commutator_checked_coefficients"] = n_exp
        if exp_w is not None:
            return report("locality: generator commutator equals -d_P Delta(P,Q) Id", params, window, False, exp_w,
                          **extra)
    au = model.A(twice_u, nu, PLUS).series
    x = _apply_F(comm, au, power)
    checked, witness = _zero_scan(x, g, space.wmax)
    window.update(x.bounds())
    window["checked_coefficients"] = checked
    if not checked:
        raise InsufficientPrecision("locality check: no trusted coefficient", deficit=1)
    name = "locality F_u(P,Q)^N [Y(a,P), Y(b,Q)] = 0"
    if expect_zero:
        return report(name, params, window, witness is None, witness, **extra)
    return report("sharpness: F_u(P,Q)^N [Y(a,P), Y(b,Q)] is not zero", params, window, witness is not None,
                  witness, **extra)


def _generator_commutator(space, na, nb):
    """-d_P Delta(P,Q) <e(P)> <e(Q)> trusted on i < na, j < nb (scalar BiSeries)."""
    model = space.model
    g = model.genus
    lo, hi = delta_window(g, na + 1, nb)
    dk = delta_kernel(model, lo, hi).series
    e = model.e(na + nb + 4, PLUS).series
    x = dk.diff_x().mul_x(e).mul_y(e)
    return -x


# ---------------------------------------------------------------------------
# residue form of the normal-ordered product


def check_knop_residue_form(model, lo: int, hi: int, modes=None):
    """Res_P(omega^n(P) S(P,Q)) reproduces the index split used by knop.

    For the generator field the residue form of the normal-ordered product
    is sum_n A_n [Res_P(omega^n(P) i_{P,Q}S) b(Q) - b(Q) Res_P(omega^n(P) i_{Q,P}S)];
    it agrees with the split form exactly when the first residue is
    omega^n(Q) for n < g/2 and 0 otherwise, and the second the other way
    round.
    """
    g = model.genus
    s_pq, s_qp = szego_split(model, lo, hi)
    if modes is None:
        modes = [t for t in range(lo + 4, hi - 3, 2)]
    bad = None
    checked = 0
    for t in modes:
        for half, keep in ((s_pq, t < g), (s_qp, t >= g)):
            w = model.omega(t, half.nx + 2 - (t - g) // 2 + 1, PLUS).series
            res = half.mul_x(w).residue_x()
            if keep:
                res = res if half is s_pq else -res
                target = model.omega(t, res.precision, PLUS).series
            else:
                target = LaurentSeries({}, res.valuation, res.precision)
            if res.precision is None or res.precision <= max(res.valuation, 0):
                continue
            checked += 1
            top = res.precision
            diff = [k for k in range(res.valuation, top) if res.coeff(k) != target.coeff(k)]
            if diff and bad is None:
                bad = {"twice_n": t, "fmt": fmt_index(t), "exponent": diff[0],
                       "lhs": render(res.coeff(diff[0])), "rhs": render(target.coeff(diff[0]))}
    if not checked:
        raise InsufficientPrecision("residue form: nothing trusted", deficit=1)
    return report(
        "normal-ordered product: residue form agrees with the index split",
        {"genus": g, "modes": [fmt_index(t) for t in modes]},
        {"twice_lo": lo, "twice_hi": hi, "checked": checked},
        bad is None,
        bad,
    )


# ---------------------------------------------------------------------------
# genus 0 against the classical Heisenberg vertex algebra
#
# The classical side is coded from scratch: V = C[x_1, x_2, ...] with
# A_{-n} = x_n, A_n = n d/dx_n (n > 0), A_0 = 0, T = sum_n n x_{n+1} d/dx_n,
# Y(A_{-1}|0>, z) = sum_n A_n z^{-n-1} and the Y_+ / Y_- normal ordering.
# Monomials are the same descending tuples of j's as in the Fock space.


def _classical_mode(n: int, wmax: int, basis) -> ModeOperator:
    cols = {}
    for js in basis:
        if n < 0:
            out = tuple(sorted(js + (-n,), reverse=True))
            if monomial_weight(out) <= wmax:
                cols[js] = {out: 1}
        elif n > 0 and n in js:
            rest = list(js)
            rest.remove(n)
            cols[js] = {tuple(rest): n * js.count(n)}
    return ModeOperator(cols, wmax, wmax, -n, -n)


def _classical_translation(wmax: int, basis) -> ModeOperator:
    cols = {}
    for js in basis:
        col = {}
        for n in set(js):
            rest = list(js)
            rest.remove(n)
            out = tuple(sorted(rest + [n + 1], reverse=True))
            if monomial_weight(out) <= wmax:
                col[out] = col.get(out, 0) + n * js.count(n)
        cols[js] = col
    return ModeOperator(cols, wmax, wmax, 1, 1)


def _binom(top: int, m: int) -> Fraction:
    out = Fraction(1)
    for i in range(m):
        out = out * (top - i) / (i + 1)
    return out


class _Classical:
    """Y(a, z) of the classical Heisenberg vertex algebra on V_{<= wmax}."""

    def __init__(self, wmax: int):
        self.wmax = wmax
        self.basis = [js for w in range(wmax + 1) for js in partitions(w)]
        self.modes = {n: _classical_mode(n, wmax, self.basis) for n in range(-wmax, wmax + 1) if n}
        self.zero = ModeOperator({}, wmax, wmax, inf, -inf)
        self._memo = {}

    def mode(self, n):
        return self.modes.get(n, self.zero)

    def field(self, m: int, k: int) -> ModeOperator:
        """z^k coefficient of (1/m!) d^m/dz^m sum_n A_n z^{-n-1}: C(-n-1, m) A_n."""
        n = -k - 1 - m
        if n not in self.modes:
            return self.zero
        return _binom(-n - 1, m) * self.mode(n)

    def coeff(self, js, k: int) -> ModeOperator:
        key = (js, k)
        if key in self._memo:
            return self._memo[key]
        m = js[0] - 1
        if len(js) == 1:
            out = self.field(m, k)
        else:
            rest = js[1:]
            out = self.zero
            for n, a in self.modes.items():
                ka = -n - 1 - m
                a = _binom(-n - 1, m) * a
                b = self.coeff(rest, k - ka)
                out = out + (a.compose(b) if n < 0 else b.compose(a))
        self._memo[key] = out
        return out


def genus0_compare(wmax: int = 5, twice_range: int = 12, precision: int = None):
    """Mode-by-mode comparison of the genus-0 pipeline with the classical Heisenberg algebra.

    Covers the bracket table on |n| <= twice_range/2, the mode matrices, the
    generator and derived fields, every normal-ordered field Y(a) with
    weight(a) <= wmax, the translation operator and the vacuum
    reconstruction.  Returns one report per comparison.
    """
    from .structure import structure_of
    from .surface import genus0_model

    model = genus0_model()
    space = FockSpace(model, wmax)
    cl = _Classical(wmax)
    if precision is None:
        precision = wmax + 2
    params = {"genus": 0, "wmax": wmax, "twice_range": twice_range, "precision": precision}
    reports = []

    # brackets
    st = structure_of(model)
    half = twice_range // 2
    witness, checked = None, 0
    for n in range(-half, half + 1):
        for m in range(-half, half + 1):
            got = st.gamma(2 * n, 2 * m)
            want = n if n + m == 0 else 0
            checked += 1
            if got != want and witness is None:
                witness = {"n": n, "m": m, "value": render(got), "expected": want}
    reports.append(report("genus 0: [A_n, A_m] = n delta_{n+m,0}", params, {"checked": checked},
                          witness is None, witness))

    def compare_ops(got, want, upto):
        diff = got - want
        return None if diff.is_zero(upto) else _op_witness(diff, 0, upto)

    # modes
    witness, checked = None, 0
    for n in range(-half, half + 1):
        got = space.mode_matrix(2 * n) if space.nonzero_on_space(2 * n) else ModeOperator({}, wmax)
        w = compare_ops(got, cl.mode(n), wmax)
        checked += 1
        if w and witness is None:
            witness = {"n": n, **w}
    reports.append(report("genus 0: mode matrices A_n", params, {"checked": checked}, witness is None, witness))

    # fields, level one and higher
    def compare_field(js):
        series = vertex_operator(space, js, precision).series
        checked = 0
        for k in series.exponents():
            op = series.coeff(k)
            top = min(op.trust, wmax)
            if top < 0:
                continue
            checked += 1
            w = compare_ops(op, cl.coeff(js, k), top)
            if w:
                return checked, {"state": render_monomial(js, 0), "exponent": k, **w}
        return checked, None

    for name, states in (
        ("genus 0: Y(A_{-m-1}|0>, z) = sum_n C(-n-1, m) A_n z^{-n-1-m}", [(j,) for j in range(1, wmax + 1)]),
        ("genus 0: normal-ordered fields match the Y_+/Y_- split",
         [js for js in cl.basis if len(js) >= 2]),
    ):
        witness, checked = None, 0
        for js in states:
            c, w = compare_field(js)
            checked += c
            if w:
                witness = w
                break
        reports.append(report(name, params, {"checked_coefficients": checked}, witness is None, witness))

    # translation
    T = space.translation_matrix()
    w = compare_ops(T, _classical_translation(wmax, cl.basis), min(T.trust, wmax))
    reports.append(report("genus 0: T = sum_n n x_{n+1} d/dx_n", params, {"columns": len(cl.basis)}, w is None, w))

    # vacuum reconstruction
    witness = None
    vac = space.vacuum()
    for js in cl.basis:
        got = vertex_operator(space, js, 1).series.coeff(0).apply(vac)
        want = cl.coeff(js, 0).apply(vac) if js else vac
        if got.trust < monomial_weight(js) or not got.agrees(want, min(got.trust, wmax)):
            witness = {"state": render_monomial(js, 0), "value": got.render(0), "expected": want.render(0)}
            break
        if not want.agrees(space.monomial(js), wmax):
            witness = {"state": render_monomial(js, 0), "classical": want.render(0)}
            break
    reports.append(report("genus 0: Y(a, z)|0> at z = 0 equals a", params, {"states": len(cl.basis)},
                          witness is None, witness))
    return reports
