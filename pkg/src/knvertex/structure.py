"""Residue-defined structure constants and the formal delta kernel.

All residues are taken at S+.  Indices are twice-indices throughout:

    gamma(n, m)    = Res(A_m dA_n)
    xi(m, n)       = -Res(<omega^n, e> dA_m)       (nabla omega^n = sum_m xi(m, n) omega^m)
    alpha(u, n, m) = Res(A_u A_n omega^m)
"""

from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field

from .coeffs import dot, parse_scalar, render_scalar
from .errors import InsufficientPrecision, WindowError
from .reports import render, report
from .series import BiSeries, LaurentSeries, PLUS
from .surface import KNModel, fmt_index, twice_range
from .windows import (
    a_valuation,
    delta_bounds,
    delta_margin,
    omega_valuation,
    residue_precisions,
)

__all__ = [
    "Structure",
    "StructureTables",
    "gamma_table",
    "xi_table",
    "alpha_table",
    "iterated_xi",
    "lemma_product",
    "DeltaKernel",
    "delta_kernel",
    "szego_split",
    "check_delta_reproducing",
    "check_delta_antisymmetry",
    "check_annihilation",
    "annihilation_series",
    "gamma_band",
    "all_tables",
    "structure_of",
]


def _res_pair(a: LaurentSeries, b: LaurentSeries):
    """Coefficient of z^-1 in a*b, refusing untrusted input."""
    top_a, top_b = -1 - b.valuation, -1 - a.valuation
    if top_a < a.valuation:
        return 0
    # raise early if either factor is not known far enough
    a.coeff(top_a)
    b.coeff(top_b)
    total = 0
    for i, x in a.coeffs.items():
        if i <= top_a:
            y = b.coeffs.get(-1 - i)
            if y:
                total = total + x * y
    return total


class Structure:
    """Lazily computed, memoized structure constants of one model."""

    def __init__(self, model: KNModel):
        self.model = model
        self.genus = model.genus
        self._gamma = {}
        self._xi = {}
        self._alpha = {}
        self._lock = threading.Lock()

    def _memo(self, table, key, fn):
        with self._lock:
            if key in table:
                return table[key]
        val = fn()
        with self._lock:
            table[key] = val
        return val

    def gamma(self, tn: int, tm: int):
        return self._memo(self._gamma, (tn, tm), lambda: self._compute_gamma(tn, tm))

    def xi(self, tm: int, tn: int):
        return self._memo(self._xi, (tm, tn), lambda: self._compute_xi(tm, tn))

    def alpha(self, tu: int, tn: int, tm: int):
        return self._memo(self._alpha, (tu, tn, tm), lambda: self._compute_alpha(tu, tn, tm))

    def _compute_gamma(self, tn, tm):
        g, mdl = self.genus, self.model
        vm = a_valuation(g, tm)
        vdn = a_valuation(g, tn) - 1
        pm, pdn = residue_precisions([vm, vdn])
        am = mdl.A(tm, pm, PLUS).series
        dan = mdl.A(tn, pdn + 1, PLUS).series.derivative()
        return _res_pair(am, dan)

    def _compute_xi(self, tm, tn):
        g, mdl = self.genus, self.model
        vo = omega_valuation(g, tn)
        vda = a_valuation(g, tm) - 1
        pc, pda = residue_precisions([vo, vda])
        contraction = mdl.omega(tn, pc, PLUS).series * mdl.e(pc - vo, PLUS).series
        da = mdl.A(tm, pda + 1, PLUS).series.derivative()
        return -_res_pair(contraction, da)

    def _compute_alpha(self, tu, tn, tm):
        g, mdl = self.genus, self.model
        vu, vn, vo = a_valuation(g, tu), a_valuation(g, tn), omega_valuation(g, tm)
        pu, pn, po = residue_precisions([vu, vn, vo])
        prod = mdl.A(tu, pu, PLUS).series * mdl.A(tn, pn, PLUS).series
        return _res_pair(prod, mdl.omega(tm, po, PLUS).series)


_STRUCTURES = {}
_STRUCTURES_LOCK = threading.Lock()


def structure_of(model: KNModel) -> Structure:
    """Shared memo per model object."""
    with _STRUCTURES_LOCK:
        s = _STRUCTURES.get(id(model))
        if s is None or s.model is not model:
            s = Structure(model)
            _STRUCTURES[id(model)] = s
        return s


@dataclass
class StructureTables:
    """Finite tables of constants on a twice-index window [lo, hi]."""

    genus: int
    field: str
    lo: int
    hi: int
    gamma_entries: dict = field(default_factory=dict)
    xi_entries: dict = field(default_factory=dict)
    alpha_entries: dict = field(default_factory=dict)

    def _get(self, table, key, name):
        try:
            return table[key]
        except KeyError:
            raise WindowError(f"{name}{tuple(fmt_index(k) for k in key)} is outside the table window") from None

    def gamma(self, tn, tm):
        return self._get(self.gamma_entries, (tn, tm), "gamma")

    def xi(self, tm, tn):
        return self._get(self.xi_entries, (tm, tn), "xi")

    def alpha(self, tu, tn, tm):
        return self._get(self.alpha_entries, (tu, tn, tm), "alpha")

    def same_entries(self, other) -> bool:
        return (
            self.gamma_entries == other.gamma_entries
            and self.xi_entries == other.xi_entries
            and self.alpha_entries == other.alpha_entries
        )

    def rows(self, kind):
        """(key..., value) rows in index order."""
        table = {"gamma": self.gamma_entries, "xi": self.xi_entries, "alpha": self.alpha_entries}[kind]
        return [(*k, v) for k, v in sorted(table.items())]

    def to_json(self, kind):
        cols = ["twice_u", "twice_n", "twice_m"] if kind == "alpha" else ["twice_n", "twice_m"]
        if kind == "xi":
            cols = ["twice_m", "twice_n"]
        return {
            "table": kind,
            "genus": self.genus,
            "field": self.field,
            "window": {"twice_lo": self.lo, "twice_hi": self.hi},
            "columns": cols + ["value"],
            "entries": [[*r[:-1], render_scalar(r[-1] or 0)] for r in self.rows(kind)],
        }

    def to_csv(self, kind) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        data = self.to_json(kind)
        w.writerow(data["columns"])
        w.writerows(data["entries"])
        return buf.getvalue()

    @classmethod
    def from_json(cls, data):
        t = cls(data["genus"], data["field"], data["window"]["twice_lo"], data["window"]["twice_hi"])
        target = {"gamma": t.gamma_entries, "xi": t.xi_entries, "alpha": t.alpha_entries}[data["table"]]
        for *key, val in data["entries"]:
            target[tuple(key)] = parse_scalar(val, t.field)
        return t


def _norm(x):
    return x if x else 0


def _tables(model, lo, hi):
    return StructureTables(model.genus, model.field, lo, hi)


def gamma_table(model: KNModel, lo: int, hi: int, tables=None) -> StructureTables:
    s, t = structure_of(model), tables or _tables(model, lo, hi)
    idx = twice_range(lo, hi, model.genus)
    for tn in idx:
        for tm in idx:
            t.gamma_entries[(tn, tm)] = _norm(s.gamma(tn, tm))
    return t


def xi_table(model: KNModel, lo: int, hi: int, tables=None) -> StructureTables:
    s, t = structure_of(model), tables or _tables(model, lo, hi)
    idx = twice_range(lo, hi, model.genus)
    for tm in idx:
        for tn in idx:
            t.xi_entries[(tm, tn)] = _norm(s.xi(tm, tn))
    return t


def alpha_table(model: KNModel, lo: int, hi: int, tables=None) -> StructureTables:
    s, t = structure_of(model), tables or _tables(model, lo, hi)
    idx = twice_range(lo, hi, model.genus)
    for tu in idx:
        for tn in idx:
            for tm in idx:
                t.alpha_entries[(tu, tn, tm)] = _norm(s.alpha(tu, tn, tm))
    return t


def all_tables(model: KNModel, lo: int, hi: int) -> StructureTables:
    t = gamma_table(model, lo, hi)
    xi_table(model, lo, hi, t)
    return alpha_table(model, lo, hi, t)


def gamma_band(tables: StructureTables):
    """Sorted set of n + m (as twice-index sums) with gamma_nm != 0."""
    return sorted({tn + tm for (tn, tm), v in tables.gamma_entries.items() if v})


def iterated_xi(source, tn: int, k: int, tuk: int, slack: int = 0):
    """Sum over u_1..u_{k-1} of xi(u_1, n) xi(u_2, u_1) ... xi(u_k, u_{k-1}).

    ``source`` is a Structure or StructureTables.  Since xi(m, n) vanishes
    for m > n + 1, the intermediate u_i range over [u_k - (k - i), n + i];
    ``slack`` widens the upper end so that those vanishing entries are
    actually computed rather than assumed.
    """
    if k < 1:
        raise ValueError("k must be positive")
    current = {tn: 1}
    for i in range(1, k + 1):
        if i == k:
            lo_i = hi_i = tuk
        else:
            lo_i = tuk - 2 * (k - i)
            hi_i = tn + 2 * (i + slack)
        nxt = {}
        for tu, val in current.items():
            for tv in range(lo_i, hi_i + 1, 2):
                x = source.xi(tv, tu)
                if x:
                    nxt[tv] = nxt.get(tv, 0) + val * x
        current = {key: v for key, v in nxt.items() if v}
    return current.get(tuk, 0)


def lemma_product(genus: int, tn: int, k: int):
    """(-n + g/2 - 1)(-n + g/2 - 2)...(-n + g/2 - k) as an exact number."""
    from fractions import Fraction

    base = Fraction(genus - tn, 2)
    out = Fraction(1)
    for i in range(1, k + 1):
        out *= base - i
    return out


# ---------------------------------------------------------------------------
# delta kernel


@dataclass
class DeltaKernel:
    series: BiSeries
    lo: int
    hi: int
    genus: int

    @property
    def window(self):
        return {"twice_lo": self.lo, "twice_hi": self.hi, **{k: v for k, v in self.series.bounds().items()}}


def _terms(model, lo, hi, nx, ny, select=None):
    """Sum of A_n(x) omega^n(y) over selected n, trusted on i < nx, j < ny."""
    pieces = []
    for tn in twice_range(lo, hi, model.genus):
        if select is not None and not select(tn):
            continue
        a = model.A(tn, nx, PLUS).series
        w = model.omega(tn, ny, PLUS).series
        pieces.append((a, w))
    cells = {}
    for a, w in pieces:
        witems = [(j, y) for j, y in w.items() if j < ny]
        for i, x in a.items():
            if i >= nx:
                continue
            for j, y in witems:
                cells.setdefault((i, j), []).append((x, y))
    return {key: dot(pairs) for key, pairs in cells.items()}


_KERNELS = {}
_KERNELS_LOCK = threading.Lock()


def delta_kernel(model: KNModel, lo: int, hi: int, nx=None, ny=None) -> DeltaKernel:
    """Sum of A_n(x) omega^n(y) over the twice-window, with its trusted box.

    Coefficients vanish below i + j = -1, which is recorded as the only
    lower bound.  Kernels are cached per model and reused for any smaller
    trusted box.
    """
    bx, by = delta_bounds(model.genus, lo, hi)
    nx = bx if nx is None else min(nx, bx)
    ny = by if ny is None else min(ny, by)
    key = id(model)
    with _KERNELS_LOCK:
        cached = [c for c in _KERNELS.get(key, ()) if c[0] is model and c[1] >= nx and c[2] >= ny]
    if cached:
        coeffs = cached[0][3]
    else:
        coeffs = _terms(model, lo, hi, nx, ny)
        with _KERNELS_LOCK:
            _KERNELS.setdefault(key, []).append((model, nx, ny, coeffs))
    bi = BiSeries(coeffs, None, None, -1, nx, ny, None)
    return DeltaKernel(bi, lo, hi, model.genus)


def szego_split(model: KNModel, lo: int, hi: int, nx=None, ny=None):
    """(sum_{n<g/2} A_n omega^n, -sum_{n>=g/2} A_n omega^n); their sum is Delta."""
    g = model.genus
    bx, by = delta_bounds(g, lo, hi)
    nx = bx if nx is None else min(nx, bx)
    ny = by if ny is None else min(ny, by)
    low = _terms(model, lo, hi, nx, ny, lambda t: t < g)
    high = _terms(model, lo, hi, nx, ny, lambda t: t >= g)
    s_pq = BiSeries(low, None, 0, -1, nx, ny, None)
    s_qp = BiSeries({k: -v for k, v in high.items()}, 0, None, -1, nx, ny, None)
    return s_pq, s_qp


def _first_nonzero(bi: BiSeries):
    for (i, j), c in bi.nonzero_items():
        if bi.trusted(i, j):
            return {"exponent": [i, j], "value": render(c)}
    return None


def _series_witness(a: LaurentSeries, b: LaurentSeries):
    top = a.precision if b.precision is None else (b.precision if a.precision is None else min(a.precision, b.precision))
    for k in sorted(set(a.coeffs) | set(b.coeffs)):
        if top is not None and k >= top:
            break
        if a.coeffs.get(k, 0) != b.coeffs.get(k, 0):
            return {"exponent": k, "lhs": render(a.coeffs.get(k, 0)), "rhs": render(b.coeffs.get(k, 0))}
    return None


def check_delta_reproducing(model: KNModel, tk: int, lo: int, hi: int, weight: int = 0, extra: int = 2):
    """Res_Q(Delta f(Q)) = f(P) for f = A_k, or Res_P(Delta g(P)) = g(Q) for g = omega^k."""
    g = model.genus
    if weight == 0:
        v = a_valuation(g, tk)
        _, by = delta_bounds(g, lo, hi)
        nx = max(v + extra, 1)
        dk = delta_kernel(model, lo, hi, nx=nx)
        f = model.A(tk, nx + extra - v + by, PLUS).series
        lhs = dk.series.mul_y(f).residue_y()
        rhs = model.A(tk, lhs.precision, PLUS).series
        name = "reproducing property Res_Q(Delta(P,Q) A_k(Q)) = A_k(P)"
    else:
        v = omega_valuation(g, tk)
        bx, _ = delta_bounds(g, lo, hi)
        ny = max(v + extra, 1)
        dk = delta_kernel(model, lo, hi, ny=ny)
        f = model.omega(tk, ny + extra - v + bx, PLUS).series
        lhs = dk.series.mul_x(f).residue_x()
        rhs = model.omega(tk, lhs.precision, PLUS).series
        name = "reproducing property Res_P(Delta(P,Q) omega^k(P)) = omega^k(Q)"
    if lhs.precision is None or lhs.precision <= max(v, lhs.valuation):
        raise InsufficientPrecision(f"{name}: empty trusted window", deficit=v + 1 - (lhs.precision or 0))
    witness = _series_witness(lhs, rhs)
    return report(
        name,
        {"genus": g, "twice_k": tk, "weight": weight},
        {"twice_lo": lo, "twice_hi": hi, "valuation": lhs.valuation, "precision": lhs.precision},
        witness is None,
        witness,
    )


def check_delta_antisymmetry(model: KNModel, lo: int, hi: int):
    """nabla_P Delta = -nabla_Q Delta on the trusted box."""
    g = model.genus
    dk = delta_kernel(model, lo, hi)
    e = model.e(max(dk.series.nx, dk.series.ny) + 2, PLUS).series
    left = dk.series.lie_x(e, 0)
    right = -dk.series.lie_y(e, 1)
    diff = left - right
    region = diff.region()
    if not region:
        raise InsufficientPrecision("antisymmetry: empty trusted window")
    bad = [(i, j) for (i, j) in region if diff.coeff(i, j)]
    witness = None
    if bad:
        i, j = bad[0]
        witness = {"exponent": [i, j], "lhs": render(left.coeff(i, j)), "rhs": render(right.coeff(i, j))}
    return report(
        "antisymmetry nabla_P Delta(P,Q) = -nabla_Q Delta(P,Q)",
        {"genus": g},
        {"twice_lo": lo, "twice_hi": hi, **diff.bounds(), "checked": len(region)},
        not bad,
        witness,
    )


def annihilation_series(model: KNModel, tu: int, m: int, n: int, power: int, d_p: bool = True, target: int = 1):
    """F_u^power (nabla_P^m nabla_Q^n d_P Delta) as a BiSeries, with its margin."""
    g = model.genus
    mg = delta_margin(g, tu, power, m, n, target, d_p)
    dk = delta_kernel(model, mg.lo, mg.hi)
    x = dk.series
    e = model.e(mg.nx + mg.ny + m + n + 2, PLUS).series
    if d_p:
        x = x.diff_x()
    weight_p = 1 if d_p else 0
    for _ in range(m):
        x = x.lie_x(e, weight_p)
    for _ in range(n):
        x = x.lie_y(e, 1)
    au = model.A(tu, mg.u_precision, PLUS).series
    for _ in range(power):
        x = x.mul_x(au) - x.mul_y(au)
    return x, mg


def check_annihilation(model: KNModel, tu: int, m: int = 0, n: int = 0, power=None, d_p: bool = True,
                       target: int = 1):
    """All trusted coefficients of F_u^N (nabla_P^m nabla_Q^n d_P Delta) vanish.

    Default power is m + n + 2 (m + n + 1 would be 1 for Delta itself).
    """
    if power is None:
        power = m + n + 2 if d_p else 1
    x, mg = annihilation_series(model, tu, m, n, power, d_p, target)
    region = x.region()
    if not region:
        raise InsufficientPrecision("annihilation check: trusted window is empty", deficit=1)
    bad = [(i, j) for (i, j) in region if x.coeff(i, j)]
    witness = None
    if bad:
        i, j = bad[0]
        witness = {"exponent": [i, j], "value": render(x.coeff(i, j))}
    base = "d_P Delta" if d_p else "Delta"
    return report(
        f"annihilation [A_u(P)-A_u(Q)]^N (nabla_P^m nabla_Q^n {base}) = 0",
        {"genus": model.genus, "twice_u": tu, "m": m, "n": n, "N": power},
        {**mg.as_dict(), **x.bounds(), "checked": len(region)},
        not bad,
        witness,
    )
