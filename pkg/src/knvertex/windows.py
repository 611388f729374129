"""Window and margin bookkeeping shared by every checker.

All index arguments are twice-indices.  Valuations refer to the S+ chart.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import WindowError

__all__ = [
    "a_valuation",
    "omega_valuation",
    "E_VALUATION",
    "residue_precisions",
    "delta_bounds",
    "delta_window",
    "DeltaMargin",
    "delta_margin",
    "gamma_partners",
    "xi_partners",
    "field_valuation",
    "locality_margin",
]

E_VALUATION = 0


def a_valuation(genus: int, twice_n: int) -> int:
    """Order of A_n at S+."""
    return (twice_n - genus) // 2


def omega_valuation(genus: int, twice_n: int) -> int:
    """Order of omega^n at S+."""
    return (genus - twice_n) // 2 - 1


def residue_precisions(valuations):
    """Precisions making the z^-1 coefficient of a product exact.

    Factor i must be known below -1 - sum_{j != i} v_j + 1.
    """
    total = sum(valuations)
    return [-(total - v) for v in valuations]


def delta_bounds(genus: int, lo: int, hi: int):
    """Trusted (nx, ny) of the delta kernel summed over twice-window [lo, hi].

    The (i, j) coefficient of the full sum only involves g/2 - 1 - j <= n <= i + g/2.
    """
    if (lo - genus) % 2 or (hi - genus) % 2:
        raise WindowError("delta window bounds have the wrong parity")
    return (hi - genus) // 2 + 1, (genus - lo) // 2


def delta_window(genus: int, nx: int, ny: int):
    """Smallest twice-window whose delta kernel is trusted on i < nx, j < ny."""
    return genus - 2 * ny, 2 * (nx - 1) + genus


@dataclass(frozen=True)
class DeltaMargin:
    lo: int
    hi: int
    nx: int
    ny: int
    u_precision: int

    def as_dict(self):
        return {"twice_lo": self.lo, "twice_hi": self.hi, "nx": self.nx, "ny": self.ny,
                "u_precision": self.u_precision}


def delta_margin(genus: int, twice_u: int, power: int, m: int = 0, n: int = 0,
                 target: int = 1, d_p: bool = True) -> DeltaMargin:
    """Window for F_u^power * (nabla_P^m nabla_Q^n d_P Delta).

    Each derivative in a variable costs one trusted order in it and each
    factor of F_u costs |v(A_u)| orders in both: a pole eats into the
    trusted box, a zero raises the vanishing line i + j >= vs.  ``target``
    is the number of trusted orders wanted at the end.
    """
    if power < 0 or m < 0 or n < 0:
        raise WindowError("orders must be nonnegative")
    loss = power * abs(a_valuation(genus, twice_u))
    nx = target + loss + m + (1 if d_p else 0)
    ny = target + loss + n
    lo, hi = delta_window(genus, nx, ny)
    # A_u is multiplied against terms with i + j >= -1 - m - n - 1
    u_prec = nx + ny + m + n + 2 + loss
    return DeltaMargin(lo, hi, nx, ny, u_prec)


# Orders at S- follow the generic pattern -n - s_lambda; the middle range of
# functions and the forms dual to it deviate by at most one per factor.
_MINUS_SLACK = 3


def gamma_partners(model, twice_n: int):
    """Twice-indices m for which gamma(n, m) can be nonzero.

    Res_{S+}(A_m dA_n) needs a pole at S+ (n + m <= g) and, being minus the
    residue at S-, a pole there too.
    """
    g = model.genus
    return range(-twice_n - 2 * g - 2 * _MINUS_SLACK, 2 * g - twice_n + 1, 2)


def xi_partners(model, twice_n: int):
    """Twice-indices u with [T, A_n] possibly involving A_u."""
    g = model.genus
    return range(twice_n - 2, twice_n + 6 * g + 2 * _MINUS_SLACK - 1, 2)


def field_valuation(wmax: int, m: int = 0) -> int:
    """Lowest exponent of a level-one field of derivative order m on V_{<= wmax}.

    The deepest annihilator that acts nontrivially is A_{g/2 + wmax}, whose
    coupled form <omega^n, e> starts at z^{-wmax-1}.
    """
    return -wmax - 1 - m


def locality_margin(genus: int, wmax: int, twice_u: int, power: int, va: int, vb: int):
    """Exponent precisions (Na, Nb, Nu) for F_u^power [Y(a,P), Y(b,Q)].

    Coefficient i of a field can only be trusted on columns of weight
    <= wmax - i, so exponents beyond wmax carry nothing checkable; each
    factor of F_u with a pole of order k reaches k exponents further.
    """
    reach = power * max(0, -a_valuation(genus, twice_u))
    na = wmax + 1 + reach
    nb = wmax + 1 + reach
    nu = max(na - va, nb - vb) + power + 1
    return na, nb, nu
