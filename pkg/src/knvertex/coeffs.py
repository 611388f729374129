"""Exact scalars.

Genus 0 works over the rationals (``fractions.Fraction``).  Genus 1 works
over the field

    K1 = Frac(Q(g2, g3, c, p)[q] / (q^2 - 4p^3 + g2 p + g3))

where p, q, c stand for the Weierstrass values at the separation of the two
marked points.  Elements are stored as ``(a + b*q) / d`` with a, b, d
polynomials in g2, g3, c, p; the polynomial gcd work is delegated to
python-flint.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from numbers import Rational

import flint

__all__ = [
    "K1",
    "FIELDS",
    "zero",
    "one",
    "parse_scalar",
    "render_scalar",
    "field_of",
    "dot",
]

_CTX = flint.fmpq_mpoly_ctx.get(("g2", "g3", "c", "p"), "degrevlex")
_CTX_Q = flint.fmpq_mpoly_ctx.get(("g2", "g3", "c", "p", "q"), "degrevlex")
_G2, _G3, _C, _P = _CTX.gens()
_ZERO = _CTX.from_dict({})
_ONE = _ZERO + 1
# q^2 rewrites to this
_QQ = 4 * _P**3 - _G2 * _P - _G3


def _poly(x):
    if isinstance(x, flint.fmpq_mpoly):
        return x
    if isinstance(x, Fraction):
        return _ZERO + flint.fmpq(x.numerator, x.denominator)
    return _ZERO + x


def _poly_key(f):
    return tuple(sorted((tuple(k), (int(v.p), int(v.q))) for k, v in f.to_dict().items()))


class K1:
    """Element ``(a + b*q) / d`` of the genus-one constant field."""

    __slots__ = ("a", "b", "d", "_hash")

    def __init__(self, a=0, b=0, d=1, *, _canonical=False):
        a, b, d = _poly(a), _poly(b), _poly(d)
        if not _canonical:
            if d.is_zero():
                raise ZeroDivisionError("K1 element with zero denominator")
            a, b, d = _canonicalize(a, b, d)
        self.a = a
        self.b = b
        self.d = d
        self._hash = None

    # constructors
    @classmethod
    def gen(cls, name: str) -> "K1":
        if name == "q":
            return cls(0, 1)
        try:
            return cls({"g2": _G2, "g3": _G3, "c": _C, "p": _P}[name])
        except KeyError:
            raise ValueError(f"unknown K1 generator {name!r}") from None

    @classmethod
    def coerce(cls, x) -> "K1":
        if isinstance(x, K1):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to K1")

    # predicates
    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def is_rational(self) -> bool:
        return self.b.is_zero() and self.a.is_constant() and self.d.is_constant()

    # arithmetic
    def __neg__(self):
        return K1(-self.a, -self.b, self.d, _canonical=True)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, K1):
            if isinstance(other, (int, Fraction)):
                if not other:
                    return self
                c = _poly(other)
                return K1(self.a + c * self.d, self.b, self.d, _canonical=True)
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.d == other.d:
            return K1(self.a + other.a, self.b + other.b, self.d)
        g = self.d.gcd(other.d)
        s, o = other.d / g, self.d / g
        return K1(self.a * s + other.a * o, self.b * s + other.b * o, self.d * s)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (K1, int, Fraction)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if not isinstance(other, K1):
            if isinstance(other, (int, Fraction)):
                if not other:
                    return K1()
                c = _poly(other)
                return K1(self.a * c, self.b * c, self.d, _canonical=True)
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return K1()
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        if b1.is_zero() and b2.is_zero():
            a, b = a1 * a2, _ZERO
        else:
            a = a1 * a2 + b1 * b2 * _QQ
            b = a1 * b2 + a2 * b1
        return K1(a, b, self.d * other.d)

    __rmul__ = __mul__

    def inv(self) -> "K1":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in K1")
        x, y = self.a, self.b
        norm = x * x - y * y * _QQ
        return K1(x * self.d, -y * self.d, norm)

    def is_integral(self) -> bool:
        """True when the denominator is 1 (an element of the polynomial ring)."""
        return self.d.is_one()

    def exact_div(self, other: "K1") -> "K1":
        """Division in the polynomial ring Q[g2, g3, c, p, q]/(q^2 - R).

        Both operands must have denominator 1 and the quotient must lie in
        the ring; this avoids gcd work and is used by fraction-free
        elimination.
        """
        if not (self.is_integral() and other.is_integral()):
            raise ValueError("exact_div needs ring elements")
        if other.is_zero():
            raise ZeroDivisionError("division by zero in K1")
        c, d = other.a, other.b
        if d.is_zero():
            return K1(self.a / c, self.b / c, _ONE, _canonical=True)
        norm = c * c - d * d * _QQ
        x = self.a * c - self.b * d * _QQ
        y = self.b * c - self.a * d
        return K1(x / norm, y / norm, _ONE, _canonical=True)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero in K1")
            return self * (1 / Fraction(other))
        if isinstance(other, K1):
            return self * other.inv()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inv() * other
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inv() ** (-k)
        result, base = K1(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # comparison
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = K1(other)
        if not isinstance(other, K1):
            return NotImplemented
        return self.a == other.a and self.b == other.b and self.d == other.d

    def __hash__(self):
        if self._hash is None:
            if self.is_rational():
                # keep hash(K1(x)) == hash(x) for rational x
                self._hash = hash(self.to_fraction())
            else:
                self._hash = hash((_poly_key(self.a), _poly_key(self.b), _poly_key(self.d)))
        return self._hash

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("K1 element is not rational")
        c = self.a.leading_coefficient() if not self.a.is_zero() else flint.fmpq(0)
        dc = self.d.leading_coefficient()
        v = c / dc
        return Fraction(int(v.p), int(v.q))

    def __str__(self):
        num = _render_numerator(self.a, self.b)
        if self.d.is_one():
            return num
        return f"({num})/({self.d})"

    def __repr__(self):
        return f"K1({str(self)!r})"


def _canonicalize(a, b, d):
    if a.is_zero() and b.is_zero():
        return _ZERO, _ZERO, _ONE
    if not d.is_constant():
        g = d.gcd(a)
        if not g.is_constant():
            g = g.gcd(b)
        if not g.is_constant():
            a, b, d = a / g, b / g, d / g
    lc = d.leading_coefficient()
    if lc != 1:
        a, b, d = a / lc, b / lc, d / lc
    return a, b, d


_FACTORS = {}


def _factored(d):
    """(constant, {factor string: (factor, exponent)}) for a denominator, cached."""
    key = str(d)
    hit = _FACTORS.get(key)
    if hit is None:
        if d.is_constant():
            hit = (d.leading_coefficient() if not d.is_zero() else 1, {})
        else:
            const, fs = d.factor()
            hit = (const, {str(f): (f, e) for f, e in fs})
        _FACTORS[key] = hit
    return hit


def _power(f, e, cache):
    key = (str(f), e)
    if key not in cache:
        cache[key] = f**e
    return cache[key]


def dot(pairs):
    """sum(x * y for x, y in pairs) with a single normalization for K1.

    Products are accumulated unreduced and grouped by denominator.  The
    common denominator is assembled from cached factorizations, which is
    much cheaper than chained gcds when the denominators are large.
    """
    pairs = [(x, y) for x, y in pairs if x and y]
    if not any(isinstance(x, K1) or isinstance(y, K1) for x, y in pairs):
        return sum((x * y for x, y in pairs), 0)
    groups = {}
    for x, y in pairs:
        x, y = K1.coerce(x), K1.coerce(y)
        cx, fx = _factored(x.d)
        cy, fy = _factored(y.d)
        exps = {k: e for k, (_, e) in fx.items()}
        polys = {k: f for k, (f, _) in fx.items()}
        for k, (f, e) in fy.items():
            exps[k] = exps.get(k, 0) + e
            polys[k] = f
        scale = 1 / (cx * cy)
        a = x.a * y.a
        if not (x.b.is_zero() or y.b.is_zero()):
            a = a + x.b * y.b * _QQ
        b = x.a * y.b + x.b * y.a
        key = tuple(sorted(exps.items()))
        if key in groups:
            g = groups[key]
            g[0] += a * scale
            g[1] += b * scale
        else:
            groups[key] = [a * scale, b * scale, polys]
    if not groups:
        return K1()
    top, polys = {}, {}
    for key, (_, _, ps) in groups.items():
        for k, e in key:
            top[k] = max(top.get(k, 0), e)
            polys[k] = ps[k]
    cache = {}
    num_a, num_b = _ZERO, _ZERO
    for key, (a, b, _) in groups.items():
        if a.is_zero() and b.is_zero():
            continue
        have = dict(key)
        f = _ONE
        for k, e in top.items():
            if e > have.get(k, 0):
                f = f * _power(polys[k], e - have.get(k, 0), cache)
        num_a += a * f
        num_b += b * f
    if num_a.is_zero() and num_b.is_zero():
        return K1()
    lcm = _ONE
    for k, e in top.items():
        lcm = lcm * _power(polys[k], e, cache)
    return K1(num_a, num_b, lcm)


def _render_numerator(a, b):
    if b.is_zero():
        return str(a)
    terms = {tuple(k) + (0,): v for k, v in a.to_dict().items()}
    terms.update({tuple(k) + (1,): v for k, v in b.to_dict().items()})
    return str(_CTX_Q.from_dict(terms))


# Text parsing: the rendering uses ^ for powers and / for rational
# coefficients, so it is evaluated with a tiny whitelisted AST walker.

_K1_NAMES = {"g2", "g3", "c", "p", "q"}


def _eval_node(node, field):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, field)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return Fraction(node.value)
    if isinstance(node, ast.Name):
        if field != "k1" or node.id not in _K1_NAMES:
            raise ValueError(f"unexpected symbol {node.id!r}")
        return K1.gen(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, field)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        left = _eval_node(node.left, field)
        if isinstance(node.op, ast.Pow):
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                raise ValueError("exponent must be an integer literal")
            return left ** node.right.value
        right = _eval_node(node.right, field)
        ops = {ast.Add: lambda x, y: x + y, ast.Sub: lambda x, y: x - y,
               ast.Mult: lambda x, y: x * y, ast.Div: lambda x, y: x / y}
        for kind, fn in ops.items():
            if isinstance(node.op, kind):
                return fn(left, right)
    raise ValueError(f"unsupported syntax in scalar: {ast.dump(node)}")


FIELDS = ("rational", "k1")


def zero(field: str):
    return Fraction(0) if field == "rational" else K1()


def one(field: str):
    return Fraction(1) if field == "rational" else K1(1)


def field_of(x) -> str:
    return "k1" if isinstance(x, K1) else "rational"


def parse_scalar(text: str, field: str = "rational"):
    """Inverse of :func:`render_scalar`."""
    if field not in FIELDS:
        raise ValueError(f"unknown field {field!r}")
    text = text.strip()
    if field == "rational":
        return Fraction(text)
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse scalar {text!r}") from exc
    return K1.coerce(_eval_node(tree, field))


def render_scalar(x) -> str:
    if isinstance(x, K1):
        return str(x)
    if isinstance(x, Rational):
        return str(Fraction(x))
    raise TypeError(f"not a scalar: {x!r}")
