"""Truncated Laurent series in one and two variables.

A series knows the window of exponents on which its coefficients are exact.
``precision=None`` marks an exact series (a Laurent polynomial known in
full).  Coefficients may be any ring elements supporting ``+``, ``-``, ``*``
and truthiness; truthiness means "not known to be zero".
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from .coeffs import K1, dot, parse_scalar, render_scalar
from .errors import InsufficientPrecision

__all__ = [
    "LaurentSeries",
    "LocalForm",
    "BiSeries",
    "ser_add",
    "ser_mul",
    "ser_scale",
    "ser_diff",
    "residue",
    "lie_derivative",
    "PLUS",
    "MINUS",
]

PLUS = "+"
MINUS = "-"


def _upper_min(*xs):
    """min over upper bounds, where None is +infinity."""
    vals = [x for x in xs if x is not None]
    return min(vals) if vals else None


def _lower_min(*xs):
    """min over lower bounds, where None is -infinity."""
    if any(x is None for x in xs):
        return None
    return min(xs)


def _plus(a, b):
    if a is None or b is None:
        return None
    return a + b


def _below(k, n):
    return n is None or k < n


class LaurentSeries:
    """Coefficients ``coeffs[k]`` for exponents k in [valuation, precision)."""

    __slots__ = ("coeffs", "valuation", "precision")

    def __init__(self, coeffs=None, valuation=0, precision=None):
        if precision is not None and precision < valuation:
            precision = valuation
        clean = {}
        for k, c in (coeffs or {}).items():
            if not c:
                continue
            if k < valuation:
                raise ValueError(f"coefficient at {k} below valuation {valuation}")
            if _below(k, precision):
                clean[k] = c
        self.coeffs = clean
        self.valuation = valuation
        self.precision = precision

    @classmethod
    def monomial(cls, k, c=1, precision=None):
        return cls({k: c}, k, precision)

    @classmethod
    def zero(cls, valuation=0, precision=None):
        return cls({}, valuation, precision)

    @property
    def is_exact(self):
        return self.precision is None

    @property
    def window(self):
        return (self.valuation, self.precision)

    def coeff(self, k):
        if k < self.valuation:
            return 0
        if not _below(k, self.precision):
            raise InsufficientPrecision(
                f"exponent {k} outside trusted window [{self.valuation}, {self.precision})",
                deficit=k - self.precision + 1,
            )
        return self.coeffs.get(k, 0)

    __getitem__ = coeff

    def order(self):
        """Lowest exponent with a nonzero coefficient, or None."""
        return min(self.coeffs) if self.coeffs else None

    def leading(self):
        k = self.order()
        return (k, self.coeffs[k]) if k is not None else (None, 0)

    def items(self):
        return sorted(self.coeffs.items())

    # arithmetic
    def __neg__(self):
        return LaurentSeries({k: -c for k, c in self.coeffs.items()}, self.valuation, self.precision)

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            if other == 0:
                return self
            other = LaurentSeries.monomial(0, other)
        v = min(self.valuation, other.valuation)
        n = _upper_min(self.precision, other.precision)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LaurentSeries(out, v, n)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return _convolve(self, other)
        if isinstance(other, LocalForm):
            return NotImplemented
        return LaurentSeries({k: c * other for k, c in self.coeffs.items()}, self.valuation, self.precision)

    def __rmul__(self, other):
        return LaurentSeries({k: other * c for k, c in self.coeffs.items()}, self.valuation, self.precision)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = LaurentSeries.monomial(0, 1)
        for _ in range(k):
            result = result * self
        return result

    def derivative(self):
        return LaurentSeries(
            {k - 1: k * c for k, c in self.coeffs.items() if k},
            self.valuation - 1,
            None if self.precision is None else self.precision - 1,
        )

    def shift(self, s):
        """Multiply by z^s."""
        return LaurentSeries(
            {k + s: c for k, c in self.coeffs.items()},
            self.valuation + s,
            _plus(self.precision, s),
        )

    def truncate(self, precision):
        if precision is None:
            return self
        top = max(self.valuation, _upper_min(self.precision, precision))
        return LaurentSeries(self.coeffs, self.valuation, top)

    def map(self, fn):
        return LaurentSeries({k: fn(c) for k, c in self.coeffs.items()}, self.valuation, self.precision)

    def agrees(self, other) -> bool:
        """Coefficients coincide on the intersection of trusted windows."""
        top = _upper_min(self.precision, other.precision)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeffs.get(k, 0) == other.coeffs.get(k, 0) for k in keys if _below(k, top))

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.window == other.window and self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self):
        body = " + ".join(f"({render_scalar(c) if _is_scalar(c) else c})*z^{k}" for k, c in self.items()) or "0"
        tail = "" if self.precision is None else f" + O(z^{self.precision})"
        return f"<{body}{tail}; v={self.valuation}>"

    # serialization
    def to_json(self):
        top = self.precision
        if top is None:
            top = (max(self.coeffs) + 1) if self.coeffs else self.valuation
        return {
            "valuation": self.valuation,
            "precision": self.precision,
            "coeffs": [render_scalar(self.coeffs.get(k, 0) or Fraction(0)) for k in range(self.valuation, top)],
        }

    @classmethod
    def from_json(cls, data, field="rational"):
        try:
            v = int(data["valuation"])
            n = data["precision"]
            coeffs = [parse_scalar(str(c), field) for c in data["coeffs"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed series record: {data!r}") from exc
        if n is not None:
            n = int(n)
            if len(coeffs) != n - v:
                raise ValueError("series record: coefficient count does not match its window")
        return cls({v + i: c for i, c in enumerate(coeffs)}, v, n)


def _is_scalar(c):
    return isinstance(c, (K1, Rational))


def _convolve(a, b):
    v = a.valuation + b.valuation
    n = _upper_min(_plus(a.valuation, b.precision), _plus(b.valuation, a.precision))
    cells = {}
    bitems = b.items()
    for i, x in a.items():
        for j, y in bitems:
            k = i + j
            if not _below(k, n):
                break
            cells.setdefault(k, []).append((x, y))
    return LaurentSeries(_accumulate(cells), v, n)


def _accumulate(cells):
    """{key: [(x, y), ...]} -> {key: sum of x*y}; scalar sums go through dot."""
    out = {}
    for key, pairs in cells.items():
        if all(_is_scalar(x) and _is_scalar(y) for x, y in pairs):
            out[key] = dot(pairs)
        else:
            total = pairs[0][0] * pairs[0][1]
            for x, y in pairs[1:]:
                total = total + x * y
            out[key] = total
    return out


class LocalForm:
    """A weight-``weight`` tensor ``series * (dz)^weight`` near one marked point."""

    __slots__ = ("series", "weight", "point")

    def __init__(self, series, weight=0, point=PLUS):
        if point not in (PLUS, MINUS):
            raise ValueError(f"unknown point tag {point!r}")
        self.series = series
        self.weight = weight
        self.point = point

    def _check(self, other):
        if not isinstance(other, LocalForm):
            raise TypeError("expected a LocalForm")
        if other.point != self.point:
            raise ValueError("cannot combine expansions at different points")

    def __add__(self, other):
        self._check(other)
        if other.weight != self.weight:
            raise ValueError("cannot add tensors of different weight")
        return LocalForm(self.series + other.series, self.weight, self.point)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return LocalForm(-self.series, self.weight, self.point)

    def __mul__(self, other):
        if isinstance(other, LocalForm):
            self._check(other)
            return LocalForm(self.series * other.series, self.weight + other.weight, self.point)
        return LocalForm(self.series * other, self.weight, self.point)

    def __rmul__(self, other):
        return LocalForm(other * self.series, self.weight, self.point)

    def coeff(self, k):
        return self.series.coeff(k)

    @property
    def valuation(self):
        return self.series.valuation

    @property
    def precision(self):
        return self.series.precision

    def agrees(self, other):
        return self.weight == other.weight and self.point == other.point and self.series.agrees(other.series)

    def __repr__(self):
        return f"LocalForm({self.series!r}, weight={self.weight}, point={self.point!r})"


def ser_add(a, b):
    return a + b


def ser_mul(a, b):
    return a * b


def ser_scale(c, a):
    return c * a


def ser_diff(f: LocalForm) -> LocalForm:
    """d f as a one-form."""
    if f.weight != 0:
        raise ValueError("d is defined on functions (weight 0)")
    return LocalForm(f.series.derivative(), 1, f.point)


def residue(w: LocalForm):
    if w.weight != 1:
        raise ValueError("residue needs a one-form")
    return w.series.coeff(-1)


def lie_derivative(g: LocalForm, zeta: LocalForm) -> LocalForm:
    """zeta(z) g'(z) + weight * g(z) zeta'(z), as a tensor of g's weight."""
    if zeta.weight != -1:
        raise ValueError("Lie derivative along a vector field (weight -1)")
    if g.point != zeta.point:
        raise ValueError("cannot combine expansions at different points")
    s = zeta.series * g.series.derivative()
    if g.weight:
        s = s + g.weight * (g.series * zeta.series.derivative())
    if s.precision is not None and s.precision <= s.valuation:
        raise InsufficientPrecision("Lie derivative has an empty trusted window", deficit=s.valuation - s.precision + 1)
    return LocalForm(s, g.weight, g.point)


class BiSeries:
    """Series in two local coordinates x (at P) and y (at Q).

    Lower bounds: a coefficient (i, j) is known to vanish when i < vx, j < vy
    or i + j < vs (None disables a bound).  Upper bounds: it is exact when
    i < nx, j < ny and i + j < ns (None means no restriction).  ``trust`` is
    an optional object describing extra per-coefficient trust for operator
    coefficients; it must provide ``shifted(dx, dy)`` and ``merge(other)``.
    """

    __slots__ = ("coeffs", "vx", "vy", "vs", "nx", "ny", "ns", "trust")

    def __init__(self, coeffs=None, vx=None, vy=None, vs=None, nx=None, ny=None, ns=None, trust=None):
        self.vx, self.vy, self.vs = vx, vy, vs
        self.nx, self.ny, self.ns = nx, ny, ns
        self.trust = trust
        clean = {}
        for (i, j), c in (coeffs or {}).items():
            if not c or not self.trusted(i, j):
                continue
            if not self.possibly_nonzero(i, j):
                raise ValueError(f"coefficient at {(i, j)} violates the declared lower bounds")
            clean[(i, j)] = c
        self.coeffs = clean

    # windows
    def trusted(self, i, j):
        return _below(i, self.nx) and _below(j, self.ny) and _below(i + j, self.ns)

    def possibly_nonzero(self, i, j):
        return not (
            (self.vx is not None and i < self.vx)
            or (self.vy is not None and j < self.vy)
            or (self.vs is not None and i + j < self.vs)
        )

    def bounds(self):
        return {"vx": self.vx, "vy": self.vy, "vs": self.vs, "nx": self.nx, "ny": self.ny, "ns": self.ns}

    def region(self):
        """All trusted exponents that are not known to vanish (must be finite)."""
        lo_i = self.vx
        if lo_i is None and self.vs is not None and self.ny is not None:
            lo_i = self.vs - self.ny + 1
        lo_j = self.vy
        if lo_j is None and self.vs is not None and self.nx is not None:
            lo_j = self.vs - self.nx + 1
        hi_i = self.nx
        if hi_i is None and self.ns is not None and lo_j is not None:
            hi_i = self.ns - lo_j
        hi_j = self.ny
        if hi_j is None and self.ns is not None and lo_i is not None:
            hi_j = self.ns - lo_i
        if None in (lo_i, lo_j, hi_i, hi_j):
            raise InsufficientPrecision("trusted region of the bi-series is not finite")
        return [
            (i, j)
            for i in range(lo_i, hi_i)
            for j in range(lo_j, hi_j)
            if self.trusted(i, j) and self.possibly_nonzero(i, j)
        ]

    def coeff(self, i, j):
        if not self.possibly_nonzero(i, j):
            return 0
        if not self.trusted(i, j):
            raise InsufficientPrecision(f"coefficient {(i, j)} outside the trusted window {self.bounds()}")
        return self.coeffs.get((i, j), 0)

    def _merge_trust(self, other):
        if self.trust is None:
            return other.trust
        if other.trust is None:
            return self.trust
        return self.trust.merge(other.trust)

    def _shift_trust(self, dx, dy):
        return None if self.trust is None else self.trust.shifted(dx, dy)

    # construction
    @classmethod
    def outer(cls, f, g):
        """f(x) g(y) for univariate series f, g."""
        out = {}
        gitems = g.items()
        for i, a in f.items():
            for j, b in gitems:
                out[(i, j)] = a * b
        return cls(out, vx=f.valuation, vy=g.valuation, vs=f.valuation + g.valuation,
                   nx=f.precision, ny=g.precision)

    def restrict(self, nx=None, ny=None, ns=None):
        return BiSeries(self.coeffs, self.vx, self.vy, self.vs,
                        _upper_min(self.nx, nx), _upper_min(self.ny, ny), _upper_min(self.ns, ns), self.trust)

    def with_lower_bounds(self, vx=None, vy=None, vs=None):
        """Replace the lower bounds; stored data must respect the new ones."""
        return BiSeries(self.coeffs, vx, vy, vs, self.nx, self.ny, self.ns, self.trust)

    # arithmetic
    def __neg__(self):
        return BiSeries({k: -c for k, c in self.coeffs.items()}, self.vx, self.vy, self.vs,
                        self.nx, self.ny, self.ns, self.trust)

    def __add__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return BiSeries(
            out,
            _lower_min(self.vx, other.vx), _lower_min(self.vy, other.vy), _lower_min(self.vs, other.vs),
            _upper_min(self.nx, other.nx), _upper_min(self.ny, other.ny), _upper_min(self.ns, other.ns),
            self._merge_trust(other),
        )

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        if isinstance(c, (LaurentSeries, BiSeries)):
            return NotImplemented
        return BiSeries({k: c * v for k, v in self.coeffs.items()}, self.vx, self.vy, self.vs,
                        self.nx, self.ny, self.ns, self.trust)

    def _mul_axis(self, f, axis):
        """f(x) * B when axis == 0, f(y) * B when axis == 1."""
        vf, nf = f.valuation, f.precision
        own_v = self.vx if axis == 0 else self.vy
        other_v = self.vy if axis == 0 else self.vx
        own_n = self.nx if axis == 0 else self.ny
        other_n = self.ny if axis == 0 else self.nx
        if own_v is None and self.vs is None and not f.is_exact:
            raise InsufficientPrecision("product needs infinitely many coefficients of a truncated factor")
        new_v = None if own_v is None else own_v + vf
        new_vs = None if self.vs is None else self.vs + vf
        new_n = _plus(own_n, vf)
        new_ns = _plus(self.ns, vf)
        if nf is not None:
            if own_v is not None:
                new_n = _upper_min(new_n, nf + own_v)
            else:
                new_ns = _upper_min(new_ns, nf + self.vs)
        if axis == 0:
            vx, vy, nx, ny = new_v, other_v, new_n, other_n
            trust = self._shift_trust(-vf, 0)
        else:
            vx, vy, nx, ny = other_v, new_v, other_n, new_n
            trust = self._shift_trust(0, -vf)
        cells = {}
        fitems = f.items()
        for (i, j), c in self.coeffs.items():
            for k, a in fitems:
                key = (i + k, j) if axis == 0 else (i, j + k)
                if not (_below(key[0], nx) and _below(key[1], ny) and _below(key[0] + key[1], new_ns)):
                    continue
                cells.setdefault(key, []).append((a, c))
        return BiSeries(_accumulate(cells), vx, vy, new_vs, nx, ny, new_ns, trust)

    def mul_x(self, f):
        return self._mul_axis(f, 0)

    def mul_y(self, g):
        return self._mul_axis(g, 1)

    def diff_x(self):
        return BiSeries(
            {(i - 1, j): i * c for (i, j), c in self.coeffs.items() if i},
            None if self.vx is None else self.vx - 1, self.vy, None if self.vs is None else self.vs - 1,
            None if self.nx is None else self.nx - 1, self.ny, None if self.ns is None else self.ns - 1,
            self._shift_trust(1, 0),
        )

    def diff_y(self):
        return BiSeries(
            {(i, j - 1): j * c for (i, j), c in self.coeffs.items() if j},
            self.vx, None if self.vy is None else self.vy - 1, None if self.vs is None else self.vs - 1,
            self.nx, None if self.ny is None else self.ny - 1, None if self.ns is None else self.ns - 1,
            self._shift_trust(0, 1),
        )

    def lie_x(self, zeta, weight):
        """Lie derivative in the first variable of a weight-``weight`` tensor."""
        out = self.diff_x().mul_x(zeta)
        if weight:
            out = out + weight * self.mul_x(zeta.derivative())
        return out

    def lie_y(self, zeta, weight):
        out = self.diff_y().mul_y(zeta)
        if weight:
            out = out + weight * self.mul_y(zeta.derivative())
        return out

    def residue_x(self):
        """Res in the first variable, as a series in the second."""
        return self._residue(0)

    def residue_y(self):
        return self._residue(1)

    def _residue(self, axis):
        own_n = self.nx if axis == 0 else self.ny
        other_v = self.vy if axis == 0 else self.vx
        other_n = self.ny if axis == 0 else self.nx
        if not _below(-1, own_n):
            raise InsufficientPrecision("residue: exponent -1 outside the trusted window", deficit=-own_n)
        lo = other_v
        if self.vs is not None:
            lo = self.vs + 1 if lo is None else max(lo, self.vs + 1)
        if lo is None:
            raise InsufficientPrecision("residue has no lower bound in the other variable")
        top = _upper_min(other_n, _plus(self.ns, 1))
        out = {}
        for (i, j), c in self.coeffs.items():
            if axis == 0 and i == -1:
                out[j] = c
            elif axis == 1 and j == -1:
                out[i] = c
        return LaurentSeries(out, lo, top)

    def agrees(self, other) -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        return all(
            self.coeffs.get(k, 0) == other.coeffs.get(k, 0)
            for k in keys
            if self.trusted(*k) and other.trusted(*k)
        )

    def nonzero_items(self):
        return sorted(self.coeffs.items())

    def __repr__(self):
        return f"<BiSeries {len(self.coeffs)} terms, window {self.bounds()}>"
