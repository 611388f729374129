"""Krichever-Novikov bases as local expansions at the two marked points.

Indices n live in Z + g/2 and are passed around as ``twice_n = 2n``.
Every element is returned as a :class:`LocalForm` in the local coordinate at
S+ (``point="+"``) or S- (``point="-"``).  ``precision`` is the exclusive
upper bound of trusted exponents; closed-form expansions come back exact.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial


from . import coeffs as _c
from .coeffs import K1
from .errors import InsufficientPrecision, ModelError
from .series import LaurentSeries, LocalForm, MINUS, PLUS

__all__ = [
    "KNIndex",
    "KNModel",
    "Genus0Model",
    "Genus1Model",
    "TableModel",
    "genus0_model",
    "genus1_model",
    "load_model",
    "export_model",
    "validate_model",
    "twice",
    "half",
    "twice_range",
]


def half(t: int) -> Fraction:
    return Fraction(t, 2)


def twice(n) -> int:
    """2n for n given as int, Fraction or a string such as '-3/2'."""
    v = Fraction(n) if not isinstance(n, str) else Fraction(n.strip())
    if (2 * v).denominator != 1:
        raise ValueError(f"{n} is not an integer or half-integer")
    return int(2 * v)


def twice_range(lo: int, hi: int, genus: int):
    """Twice-indices of the right parity in [lo, hi]."""
    start = lo if (lo - genus) % 2 == 0 else lo + 1
    return range(start, hi + 1, 2)


def fmt_index(t: int) -> str:
    v = half(t)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True, order=True)
class KNIndex:
    twice_n: int

    @classmethod
    def of(cls, n, genus: int) -> "KNIndex":
        idx = cls(twice(n))
        idx.check(genus)
        return idx

    def check(self, genus: int):
        if (self.twice_n - genus) % 2:
            raise ValueError(f"index {fmt_index(self.twice_n)} has the wrong parity for genus {genus}")

    @property
    def value(self) -> Fraction:
        return half(self.twice_n)

    def __str__(self):
        return fmt_index(self.twice_n)


class KNModel:
    """Common interface of the surface models.

    Subclasses implement ``f(lam, twice_n, precision, point)``.
    """

    genus: int
    field: str

    def f(self, lam: int, twice_n: int, precision=None, point=PLUS) -> LocalForm:
        raise NotImplementedError

    def check_index(self, twice_n: int):
        if (twice_n - self.genus) % 2:
            raise ValueError(f"index {fmt_index(twice_n)} has the wrong parity for genus {self.genus}")

    def A(self, twice_n: int, precision=None, point=PLUS) -> LocalForm:
        return self.f(0, twice_n, precision, point)

    def omega(self, twice_n: int, precision=None, point=PLUS) -> LocalForm:
        """omega^n = f_{1,-n}."""
        return self.f(1, -twice_n, precision, point)

    def e(self, precision=None, point=PLUS) -> LocalForm:
        """The vector field f_{-1, 3g/2 - 1}."""
        return self.f(-1, 3 * self.genus - 2, precision, point)

    def zero(self):
        return _c.zero(self.field)

    def one(self):
        return _c.one(self.field)

    @property
    def g_half_twice(self) -> int:
        """Twice of g/2, i.e. the genus."""
        return self.genus


class Genus0Model(KNModel):
    """The Riemann sphere with S+ = 0 and S- = infinity; w = 1/z at S-."""

    genus = 0
    field = "rational"

    def f(self, lam, twice_n, precision=None, point=PLUS):
        self.check_index(twice_n)
        n = twice_n // 2
        if point == PLUS:
            series = LaurentSeries.monomial(n - lam, Fraction(1))
        else:
            # z^{n-lam} (dz)^lam with z = 1/w, dz = -w^{-2} dw
            series = LaurentSeries.monomial(-n - lam, Fraction((-1) ** (lam % 2)))
        return LocalForm(series, lam, point)


def genus0_model() -> Genus0Model:
    return Genus0Model()


# ---------------------------------------------------------------------------
# genus one

_CTX = K1(0).a.context()
_G2, _G3, _C, _P = _CTX.gens()
_QQ = 4 * _P**3 - _G2 * _P - _G3
_PPRIME2 = 6 * _P**2 - _G2 / 2  # second derivative of wp at d


class _Weierstrass:
    """Series data for wp and zeta, shared by both charts."""

    def __init__(self):
        self._c = [None, None]  # c_k: wp(t) = t^-2 + sum_{k>=2} c_k t^{2k-2}
        self._d = [(_P, _CTX.from_dict({})), (_CTX.from_dict({}), _CTX.from_dict({}) + 1)]
        self._lock = threading.Lock()

    def c(self, k):
        with self._lock:
            while len(self._c) <= k:
                j = len(self._c)
                if j == 2:
                    val = K1(_G2) / 20
                elif j == 3:
                    val = K1(_G3) / 28
                else:
                    s = sum((self._c[m] * self._c[j - m] for m in range(2, j - 1)), K1())
                    val = s * Fraction(3, (2 * j + 1) * (j - 3))
                self._c.append(val)
            return self._c[k]

    def D(self, j) -> K1:
        """The j-th derivative of wp at the separation d, as a + b q."""
        with self._lock:
            while len(self._d) <= j:
                a, b = self._d[-1]
                # d/dd (a + b q) = a_p q + b_p q^2 + b (6p^2 - g2/2)
                da = b.derivative("p") * _QQ + b * _PPRIME2
                db = a.derivative("p")
                self._d.append((da, db))
            a, b = self._d[j]
        return K1(a, b)

    def wp(self, k, precision):
        """k-th derivative of wp(t) as a Laurent series, exponents < precision."""
        coeffs = {-2: K1(1)}
        kk = 2
        while 2 * kk - 2 < precision + k:
            coeffs[2 * kk - 2] = self.c(kk)
            kk += 1
        s = LaurentSeries(coeffs, -2, precision + k)
        for _ in range(k):
            s = s.derivative()
        return s

    def zeta(self, precision):
        coeffs = {-1: K1(1)}
        kk = 2
        while 2 * kk - 1 < precision:
            coeffs[2 * kk - 1] = -self.c(kk) / (2 * kk - 1)
            kk += 1
        return LaurentSeries(coeffs, -1, precision)

    def wp_shift(self, k, precision, sign=1):
        """sign^k-twisted Taylor series of wp^{(k)}(t + d)."""
        coeffs = {j: self.D(k + j) / factorial(j) for j in range(max(precision, 0))}
        s = LaurentSeries(coeffs, 0, max(precision, 0))
        return s if sign ** k == 1 else -s

    def zeta_shift(self, precision):
        """zeta(t + d) = c - sum_{j>=1} wp^{(j-1)}(d) t^j / j!."""
        coeffs = {0: K1(_C)}
        for j in range(1, max(precision, 0)):
            coeffs[j] = -self.D(j - 1) / factorial(j)
        return LaurentSeries(coeffs, 0, max(precision, 0))


class Genus1Model(KNModel):
    """Torus with uniformizing coordinate z; xi = dz and e = d/dz.

    A_n is solved as a combination of 1, E = zeta(z - z+) - zeta(z - z-),
    and derivatives of wp(z - z+), wp(z - z-).  The local coordinates are
    t = z - z+ at S+ and w = -(z - z-) at S-.
    """

    genus = 1
    field = "k1"

    def __init__(self):
        self._w = _Weierstrass()
        self._solutions = {}
        self._expansions = {}
        self._lock = threading.RLock()

    # generator expansions -------------------------------------------------
    def _generator(self, label, point, precision):
        w = self._w
        kind = label[0]
        if kind == "1":
            return LaurentSeries.monomial(0, K1(1))
        if kind == "E":
            return w.zeta(precision) - w.zeta_shift(precision)
        k = label[1]
        own = (kind == "P+") == (point == PLUS)
        sign = 1 if point == PLUS else -1
        if own:
            s = w.wp(k, precision)
            return s if sign ** k == 1 else -s
        return w.wp_shift(k, precision, sign)

    def _generators(self, pole_plus, pole_minus):
        labels = [("1",)]
        if pole_plus >= 1 and pole_minus >= 1:
            labels.append(("E",))
        labels += [("P+", k) for k in range(pole_plus - 1)]
        labels += [("P-", k) for k in range(pole_minus - 1)]
        return labels

    @staticmethod
    def _shape(twice_n):
        """(pole order at S+, pole order at S-, valuation at S+, valuation at S-)."""
        if twice_n >= 3:
            return 0, (twice_n + 1) // 2, (twice_n - 1) // 2, -(twice_n + 1) // 2
        if twice_n <= -3:
            return (1 - twice_n) // 2, 0, (twice_n - 1) // 2, (-twice_n - 1) // 2
        if twice_n == -1:
            return 1, 1, -1, -1
        return 0, 0, 0, 0

    def solution(self, twice_n):
        """Coefficients of A_n over the generator labels."""
        self.check_index(twice_n)
        with self._lock:
            if twice_n not in self._solutions:
                self._solutions[twice_n] = self._solve(twice_n)
            return self._solutions[twice_n]

    def _solve(self, twice_n):
        if twice_n == 1:
            return {("1",): K1(1)}
        pp, pm, vp, vm = self._shape(twice_n)
        labels = self._generators(pp, pm)
        plus = [self._generator(l, PLUS, vp + 1) for l in labels]
        minus = [self._generator(l, MINUS, max(vm, 0) + 1) for l in labels]
        rows, rhs = [], []
        for k in range(-pp, vp + 1):
            rows.append([s.coeff(k) for s in plus])
            rhs.append(K1(1) if k == vp else K1())
        for k in range(-pm, vm):
            rows.append([s.coeff(k) for s in minus])
            rhs.append(K1())
        particular, kernel = _solve_affine(rows, rhs, len(labels))
        if particular is None:
            raise ModelError(f"normalization conditions for A_{fmt_index(twice_n)} are inconsistent")
        if kernel:
            particular = self._fix_by_duality(twice_n, labels, particular, kernel)
        return {l: x for l, x in zip(labels, particular) if x}

    def _fix_by_duality(self, twice_n, labels, particular, kernel):
        # Remaining freedom only occurs in the middle range.  Impose
        # Res(A_n omega^m) = delta for m = +-1/2, where omega^m = A_{-m} dz and
        # omega^{1/2} involves A_n itself (quadratic, but the quadratic part
        # vanishes because kernel directions are residue-orthogonal).
        prec = 2
        gens = [self._generator(l, PLUS, prec) for l in labels]

        def combo(vec):
            return sum((x * g for x, g in zip(vec, gens) if x), LaurentSeries.zero(0, prec))

        a0 = combo(particular)
        ks = [combo(v) for v in kernel]
        for i, ki in enumerate(ks):
            for kj in ks[i:]:
                if (ki * kj).coeff(-1):
                    raise ModelError("duality cannot fix the middle-range ambiguity linearly")
        rows, rhs = [], []
        for tm in (-1, 1):
            target = K1(1 if tm == twice_n else 0)
            if -tm == twice_n:
                # omega^m is A_n dz itself
                rows.append([2 * (a0 * k).coeff(-1) for k in ks])
                rhs.append(target - (a0 * a0).coeff(-1))
            else:
                other = self.A(-tm, prec).series
                rows.append([(k * other).coeff(-1) for k in ks])
                rhs.append(target - (a0 * other).coeff(-1))
        x, rest = _solve_affine(rows, rhs, len(ks))
        if x is None or rest:
            raise ModelError(f"duality does not determine A_{fmt_index(twice_n)}")
        out = list(particular)
        for coef, vec in zip(x, kernel):
            out = [o + coef * v for o, v in zip(out, vec)]
        return out

    def _expansion(self, twice_n, point, precision):
        shape = self._shape(twice_n)
        v = shape[2] if point == PLUS else shape[3]
        top = max(precision, v)
        key = (twice_n, point)
        with self._lock:
            cached = self._expansions.get(key)
        if cached is None or cached.precision < top:
            acc = LaurentSeries.zero(v, top)
            for label, x in self.solution(twice_n).items():
                acc = acc + x * self._generator(label, point, top)
            cached = LaurentSeries(acc.coeffs, v, top)
            with self._lock:
                old = self._expansions.get(key)
                if old is None or old.precision < top:
                    self._expansions[key] = cached
        return cached.truncate(top)

    # public accessors ------------------------------------------------------
    def f(self, lam, twice_n, precision=None, point=PLUS):
        self.check_index(twice_n)
        if twice_n == 1:
            series = LaurentSeries.monomial(0, K1(1))
        elif precision is None:
            raise InsufficientPrecision("genus-one expansions need an explicit precision")
        else:
            series = self._expansion(twice_n, point, precision)
        if point == MINUS and lam % 2:
            series = -series  # dz = -dw
        return LocalForm(series, lam, point)


def _bareiss(rows, rhs):
    """Fraction-free elimination for a square system with ring entries.

    Returns the solution, or None when the matrix is singular.
    """
    n = len(rows)
    m = [[K1.coerce(x) for x in r] + [K1.coerce(b)] for r, b in zip(rows, rhs)]
    prev = K1(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k]), None)
        if piv is None:
            return None
        m[k], m[piv] = m[piv], m[k]
        mkk = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n + 1):
                row_i[j] = (mkk * row_i[j] - mik * row_k[j]).exact_div(prev)
            row_i[k] = K1()
        prev = mkk
    det = prev
    # y_i = x_i * det stays in the ring (Cramer)
    y = [K1()] * n
    for i in reversed(range(n)):
        acc = det * m[i][n]
        for j in range(i + 1, n):
            if m[i][j]:
                acc = acc - m[i][j] * y[j]
        y[i] = acc.exact_div(m[i][i])
    return [yi / det for yi in y]


def _solve_affine(rows, rhs, ncols):
    """Solve rows @ x = rhs over a field.

    Returns (particular solution or None, list of kernel basis vectors).
    """
    if len(rows) == ncols and all(
        isinstance(x, int) or (isinstance(x, K1) and x.is_integral()) for r in rows for x in r
    ) and all(isinstance(b, int) or (isinstance(b, K1) and b.is_integral()) for b in rhs):
        sol = _bareiss(rows, rhs)
        if sol is not None:
            return sol, []
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][col].inv() if isinstance(m[r][col], K1) else 1 / Fraction(m[r][col])
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    for i in range(r, len(m)):
        if m[i][ncols]:
            return None, []
    zero = K1()
    x = [zero] * ncols
    for i, col in enumerate(pivots):
        x[col] = m[i][ncols]
    kernel = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [zero] * ncols
        v[free] = K1(1)
        for i, col in enumerate(pivots):
            v[col] = -m[i][free]
        kernel.append(v)
    return x, kernel


_GENUS1 = None
_GENUS1_LOCK = threading.Lock()


def genus1_model() -> Genus1Model:
    """Shared genus-one model (element construction is memoized)."""
    global _GENUS1
    with _GENUS1_LOCK:
        if _GENUS1 is None:
            _GENUS1 = Genus1Model()
        return _GENUS1


# ---------------------------------------------------------------------------
# tables


class TableModel(KNModel):
    """A model read from tabulated expansions."""

    def __init__(self, genus, field, elements):
        if genus < 0:
            raise ModelError("genus must be nonnegative")
        if field not in _c.FIELDS:
            raise ModelError(f"unknown field {field!r}")
        self.genus = genus
        self.field = field
        self.elements = dict(elements)
        for lam, t in self.elements:
            if (t - genus) % 2:
                raise ModelError(f"twice_n = {t} has the wrong parity for genus {genus}")
        self._check_normalization()

    def _check_normalization(self):
        g = self.genus
        key = (0, g)
        if key in self.elements:
            plus = self.elements[key][0].series
            top = plus.precision if plus.precision is not None else 1
            if any(plus.coeffs.get(k, 0) != (1 if k == 0 else 0) for k in range(plus.valuation, top)) or \
                    any(k >= top for k in plus.coeffs):
                raise ModelError("A_{g/2} must be the constant function 1")
        for lam, t in self.elements:
            if lam == 0 and (1, -t) not in self.elements:
                raise ModelError(f"missing dual pair: omega^{fmt_index(t)} for A_{fmt_index(t)}")

    def f(self, lam, twice_n, precision=None, point=PLUS):
        self.check_index(twice_n)
        try:
            plus, minus = self.elements[(lam, twice_n)]
        except KeyError:
            raise InsufficientPrecision(
                f"table has no element lambda={lam}, n={fmt_index(twice_n)}"
            ) from None
        form = plus if point == PLUS else minus
        s = form.series
        if precision is not None:
            if s.precision is not None and precision > s.precision:
                raise InsufficientPrecision(
                    f"table precision {s.precision} < requested {precision}",
                    deficit=precision - s.precision,
                )
            s = s.truncate(precision)
        return LocalForm(s, lam, point)


def export_model(model: KNModel, lo: int, hi: int, precision: int) -> dict:
    """Serialize A_n, omega^n (n in the twice-window [lo, hi]) and e."""
    items = []
    seen = set()

    def add(lam, t):
        if (lam, t) in seen:
            return
        seen.add((lam, t))
        plus = model.f(lam, t, precision, PLUS).series
        minus = model.f(lam, t, precision, MINUS).series
        items.append({"lambda": lam, "twice_n": t, "at_plus": plus.to_json(), "at_minus": minus.to_json()})

    for t in twice_range(lo, hi, model.genus):
        add(0, t)
        add(1, -t)
    add(-1, 3 * model.genus - 2)
    return {"genus": model.genus, "field": model.field, "elements": items}


def model_from_dict(data: dict) -> TableModel:
    try:
        genus = data["genus"]
        field = data["field"]
        raw = data["elements"]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"model file: missing top-level key {exc}") from None
    if not isinstance(genus, int) or isinstance(genus, bool):
        raise ModelError("model file: genus must be an integer")
    if field not in _c.FIELDS:
        raise ModelError(f"model file: unknown field {field!r}")
    if not isinstance(raw, list):
        raise ModelError("model file: elements must be a list")
    elements = {}
    for rec in raw:
        try:
            lam, t = rec["lambda"], rec["twice_n"]
            if not isinstance(lam, int) or not isinstance(t, int):
                raise ModelError("model file: lambda and twice_n must be integers")
            plus = LaurentSeries.from_json(rec["at_plus"], field)
            minus = LaurentSeries.from_json(rec["at_minus"], field)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"model file: bad element record ({exc})") from None
        if (lam, t) in elements:
            raise ModelError(f"model file: duplicate element lambda={lam}, twice_n={t}")
        elements[(lam, t)] = (LocalForm(plus, lam, PLUS), LocalForm(minus, lam, MINUS))
    return TableModel(genus, field, elements)


def load_model(path) -> TableModel:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(data)


# ---------------------------------------------------------------------------
# validation


def _expected_valuations(genus, lam, twice_n):
    """Expected (valuation at S+, valuation at S- or None)."""
    g = genus
    if lam == 0:
        plus = (twice_n - g) // 2
        if twice_n == g:
            return 0, 0
        if abs(twice_n) >= g + 2:
            return plus, (-twice_n - g) // 2
        return plus, (-twice_n - g) // 2 - 1
    s_twice = g - 2 * lam * (g - 1)  # 2 s_lambda
    return (twice_n - s_twice) // 2, None


def _leading_report(form, expected):
    s = form.series
    try:
        k, c = s.leading()
    except InsufficientPrecision:
        k, c = None, 0
    if k is None:
        return {"expected": expected, "found": None, "leading": None, "ok": False}
    return {"expected": expected, "found": k, "leading": _c.render_scalar(c), "ok": k == expected}


def validate_model(model: KNModel, lo: int, hi: int, precision: int, lambdas=(0, 1)) -> dict:
    """Leading-behaviour and duality report on the twice-window [lo, hi]."""
    g = model.genus
    idx = list(twice_range(lo, hi, g))
    elements = []
    ok = True
    for lam in lambdas:
        for t in idx:
            entry = {"lambda": lam, "twice_n": t}
            try:
                exp_plus, exp_minus = _expected_valuations(g, lam, t)
                need = max(exp_plus + 1, 1)
                plus = model.f(lam, t, max(precision, need), PLUS)
                rep = _leading_report(plus, exp_plus)
                rep["normalized"] = rep["ok"] and plus.series.coeff(exp_plus) == 1
                entry["plus"] = rep
                good = rep["ok"] and rep["normalized"]
                if exp_minus is not None:
                    minus = model.f(lam, t, max(precision, exp_minus + 1), MINUS)
                    mrep = _leading_report(minus, exp_minus)
                    entry["minus"] = mrep
                    good = good and mrep["ok"]
                entry["ok"] = good
            except InsufficientPrecision as exc:
                entry["ok"] = False
                entry["error"] = str(exc)
            ok = ok and entry["ok"]
            elements.append(entry)
    failures = []
    matrix = []
    for n in idx:
        row = []
        for m in idx:
            try:
                val = pairing(model, n, m)
            except InsufficientPrecision as exc:
                failures.append({"twice_n": n, "twice_m": m, "error": str(exc)})
                row.append(None)
                continue
            row.append(_c.render_scalar(val))
            if val != (1 if n == m else 0):
                failures.append({"twice_n": n, "twice_m": m, "value": _c.render_scalar(val)})
        matrix.append(row)
    ok = ok and not failures
    return {
        "check": "KN normalization and duality Res(A_n omega^m) = delta_n^m",
        "params": {"genus": g, "field": model.field, "precision": precision},
        "window": {"twice_lo": lo, "twice_hi": hi},
        "result": "pass" if ok else "fail",
        "elements": elements,
        "duality": {"indices": idx, "matrix": matrix, "deviations": failures},
    }


def pairing(model: KNModel, twice_n: int, twice_m: int):
    """Res(A_n omega^m) computed at S+ with just enough precision."""
    g = model.genus
    va = (twice_n - g) // 2
    vo = (g - twice_m) // 2 - 1
    a = model.A(twice_n, -vo, PLUS)
    w = model.omega(twice_m, -va, PLUS)
    return (a * w).series.coeff(-1)
