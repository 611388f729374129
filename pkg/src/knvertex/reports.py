"""Uniform check reports (plain dicts, JSON-ready, no timestamps)."""

from __future__ import annotations

from .coeffs import render_scalar

__all__ = ["report", "render"]


def render(x):
    try:
        return render_scalar(x)
    except TypeError:
        return str(x)


def report(check, params, window, ok, witness=None, **extra):
    out = {
        "check": check,
        "params": params,
        "window": window,
        "result": "pass" if ok else "fail",
        "witness": witness,
    }
    out.update(extra)
    return out


def all_pass(reports) -> bool:
    return all(r["result"] == "pass" for r in reports)
