"""Comparisons between the genus-0 pipeline and the polynomial oracle.

Each function returns (number of comparisons, first mismatch or None).
"""

from __future__ import annotations

from knvertex.fock import FockSpace, monomial_weight, partitions
from knvertex.structure import structure_of
from knvertex.vertex import vertex_operator

from oracle_heisenberg import Heisenberg


def _clean(d):
    return {k: v for k, v in d.items() if v}


def _same(got: dict, want: dict) -> bool:
    return _clean(got) == _clean(want)


def compare_brackets(space: FockSpace, oracle: Heisenberg, half: int):
    st = structure_of(space.model)
    n_checked = 0
    for n in range(-half, half + 1):
        for m in range(-half, half + 1):
            n_checked += 1
            got, want = st.gamma(2 * n, 2 * m), oracle.bracket(n, m)
            if got != want:
                return n_checked, {"n": n, "m": m, "got": got, "want": want}
    return n_checked, None


def compare_modes(space: FockSpace, oracle: Heisenberg, half: int):
    n_checked = 0
    for n in range(-half, half + 1):
        op = space.mode_matrix(2 * n)
        for js in space.basis():
            n_checked += 1
            want = oracle.to_dict(oracle.truncate(oracle.mode(n, oracle.state(js))))
            if not _same(op.cols.get(js, {}), want):
                return n_checked, {"n": n, "column": js}
    return n_checked, None


def compare_translation(space: FockSpace, oracle: Heisenberg):
    op = space.translation_matrix()
    n_checked = 0
    for js in space.basis():
        n_checked += 1
        if not _same(op.cols.get(js, {}), oracle.to_dict(oracle.T(oracle.state(js)))):
            return n_checked, {"column": js}
    return n_checked, None


def compare_field(space: FockSpace, oracle: Heisenberg, js, precision: int, lowest=None):
    """Every trusted column of every trusted coefficient of Y(js, z)."""
    series = vertex_operator(space, js, precision).series
    n_checked = 0
    for k in series.exponents():
        if lowest is not None and k < lowest:
            continue
        op = series.coeff(k)
        top = min(op.trust, space.wmax)
        for col in space.basis(max(top, -1)) if top >= 0 else ():
            n_checked += 1
            want = oracle.to_dict(oracle.field_coeff(js, k, oracle.state(col)))
            if not _same(op.cols.get(col, {}), want):
                return n_checked, {"state": js, "exponent": k, "column": col}
    return n_checked, None


def compare_vacuum(space: FockSpace, oracle: Heisenberg):
    """Y(a, z)|0> on the pipeline side against the oracle, for all a of weight <= wmax."""
    n_checked = 0
    vac = space.vacuum()
    for w in range(space.wmax + 1):
        for js in partitions(w):
            images = vertex_operator(space, js, 1).series.apply(vac)
            for k, v in images.items():
                top = min(v.trust, space.wmax)
                want = oracle.to_dict(oracle.field_coeff(js, k, oracle.R.one))
                got = {m: c for m, c in v.coeffs.items() if monomial_weight(m) <= top}
                want = {m: c for m, c in want.items() if monomial_weight(m) <= top}
                n_checked += 1
                if not _same(got, want):
                    return n_checked, {"state": js, "exponent": k}
                if k == 0 and top >= w and not _same(got, {js: 1}):
                    return n_checked, {"state": js, "exponent": 0, "reason": "not a"}
    return n_checked, None


def full_comparison(model, wmax: int = 5, half: int = 6, field_level: int = None):
    """Run every comparison; returns {name: (checked, mismatch)}."""
    space = FockSpace(model, wmax)
    oracle = Heisenberg(wmax)
    out = {
        "brackets": compare_brackets(space, oracle, half),
        "modes": compare_modes(space, oracle, half),
        "translation": compare_translation(space, oracle),
        "vacuum": compare_vacuum(space, oracle),
    }
    checked, bad = 0, None
    for w in range(1, wmax + 1):
        for js in partitions(w):
            if field_level is not None and len(js) > field_level:
                continue
            c, b = compare_field(space, oracle, js, wmax + 2)
            checked += c
            if b and bad is None:
                bad = b
    out["fields"] = (checked, bad)
    return out
