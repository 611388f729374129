from __future__ import annotations

import pytest

import oracle_heisenberg
from heisenberg_bridge import compare_field, full_comparison
from knvertex.fock import FockSpace
from oracle_heisenberg import Heisenberg


def test_oracle_sanity():
    h = Heisenberg(4)
    x1, x2 = h.x[0], h.x[1]
    assert h.bracket(2, -2) == 2 and h.bracket(1, 2) == 0
    assert h.T(x1) == x2
    assert h.T(x1**2) == 2 * x1 * x2
    assert h.T(h.R.one) == 0
    # Y(a_{-1}|0>, z) at z^0 on the vacuum
    assert h.field_coeff((1,), 0, h.R.one) == x1


def test_pipeline_matches_oracle(g0):
    result = full_comparison(g0, wmax=5, half=6)
    for name, (checked, mismatch) in result.items():
        assert checked > 0, name
        assert mismatch is None, (name, mismatch)


def test_oracle_detects_a_wrong_binomial(g0, monkeypatch):
    space = FockSpace(g0, 4)
    oracle = Heisenberg(4)
    monkeypatch.setattr(oracle_heisenberg, "binom", lambda top, k: oracle_heisenberg.comb(abs(top), k))
    _, mismatch = compare_field(space, oracle, (2,), 5)
    assert mismatch is not None


@pytest.mark.parametrize("js", [(1, 1), (2, 1), (1, 1, 1)])
def test_oracle_detects_a_wrong_split(g0, monkeypatch, js):
    space = FockSpace(g0, 4)
    oracle = Heisenberg(4)

    def anti_ordered(modes, f):
        for n in modes:
            if n < 0:
                f = oracle.mode(n, f)
        for n in modes:
            if n >= 0:
                f = oracle.mode(n, f)
        return oracle.truncate(f)

    monkeypatch.setattr(oracle, "normal_ordered", anti_ordered)
    _, mismatch = compare_field(space, oracle, js, 5)
    assert mismatch is not None
