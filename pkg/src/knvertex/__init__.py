"""Exact Krichever-Novikov bases, generalized Heisenberg Fock spaces and KN vertex operators.

Modules:

* ``coeffs``: exact scalars (rationals and the genus-1 field K1)
* ``series``: truncated Laurent series in one and two variables
* ``surface``: KN bases at genus 0 and 1, table models, validation
* ``structure``: gamma, xi, alpha tables and the formal delta kernel
* ``fock``: the induced representation and its mode matrices
* ``vertex``: fields, normal-ordered products and the axiom checks
* ``cli``: the ``kn`` command
"""

from .errors import InsufficientPrecision, KNError, ModelError, WindowError
from .surface import genus0_model, genus1_model, load_model, export_model, validate_model
from .fock import FockSpace
from .vertex import vertex_operator, check_vacuum, check_translation, check_locality, genus0_compare

__version__ = "0.1.0"

__all__ = [
    "InsufficientPrecision",
    "KNError",
    "ModelError",
    "WindowError",
    "genus0_model",
    "genus1_model",
    "load_model",
    "export_model",
    "validate_model",
    "FockSpace",
    "vertex_operator",
    "check_vacuum",
    "check_translation",
    "check_locality",
    "genus0_compare",
]
