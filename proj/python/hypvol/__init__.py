"""Hyperbolic simplex volumes, simplicial-volume gap bounds and smearing experiments.

Scalar functions come straight from the native module; the structured ones
return dictionaries decoded from the same JSON documents the command-line
tool writes.
"""

import json

from . import _hypvol
from ._hypvol import (
    DEFAULT_SEED,
    HypvolError,
    gap_bound,
    gauss_bonnet_area,
    lobachevsky,
    regular_simplex_volume,
    tube_factor,
)

__all__ = [
    "DEFAULT_SEED",
    "HypvolError",
    "gap_bound",
    "gauss_bonnet_area",
    "ideal_regular_volume",
    "inclusion_check",
    "lobachevsky",
    "model",
    "regular_simplex_volume",
    "smear_run",
    "solve_k",
    "tube_factor",
    "validate_certificate",
    "vl_estimate",
]


def ideal_regular_volume(n):
    return json.loads(_hypvol.ideal_regular_volume_json(n))


def vl_estimate(n, L, restarts=8, seed=DEFAULT_SEED):
    return json.loads(_hypvol.vl_estimate_json(n, L, restarts, seed))


def solve_k(n, eta, restarts=8, seed=DEFAULT_SEED):
    """Gap certificate as a dict; pass it to validate_certificate to re-check."""
    return json.loads(_hypvol.solve_k_json(n, eta, restarts, seed))


def validate_certificate(cert):
    text = cert if isinstance(cert, str) else json.dumps(cert)
    return json.loads(_hypvol.validate_certificate_json(text))


def model(name_or_path):
    """Surface model by bundled name ("genus2", "one_holed_torus") or JSON path."""
    return json.loads(_hypvol.model_json(name_or_path))


def smear_run(model, L, samples, seed=DEFAULT_SEED):
    return json.loads(_hypvol.smear_run_json(model, L, samples, seed))


def inclusion_check(model, L, samples, seed=DEFAULT_SEED):
    return json.loads(_hypvol.inclusion_check_json(model, L, samples, seed))
