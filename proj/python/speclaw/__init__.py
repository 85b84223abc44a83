"""QVE solver, random matrix samplers and local-law verification."""

import json

import numpy as np

from . import _core
from ._core import SpeclawError, __version__

__all__ = [
    "SpeclawError",
    "__version__",
    "constant_profile",
    "solve_qve",
    "extract_density",
    "integrate_density",
    "detect_bulk",
    "effective_profile",
    "sample",
    "eigenvalues",
    "eigvec_inf_norms",
    "count_in_interval",
    "schur_discrepancy",
    "verify_local_law",
    "verify_delocalization",
    "projection_test",
    "interlacing_test",
    "run_cli",
]


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def constant_profile(n, value=1.0):
    return {"n": n, "constant": value}


def solve_qve(profile, x, eta, eta_start=0.0, steps=40):
    """Solution at x + i eta as a dict; g and m are complex."""
    raw = json.loads(_core.solve_qve(_text(profile), x, eta, eta_start, steps))
    raw["m"] = complex(*raw["m"])
    raw["g"] = np.array([complex(*g) for g in raw["g"]])
    return raw


def extract_density(profile, grid, eta=1e-6, threads=1):
    return np.asarray(_core.extract_density(_text(profile), list(map(float, grid)), eta, threads))


def integrate_density(profile, lo, hi, points=201):
    return _core.integrate_density(_text(profile), lo, hi, points)


def detect_bulk(profile, grid, eps):
    return json.loads(_core.detect_bulk(_text(profile), list(map(float, grid)), eps))


def effective_profile(ensemble):
    return json.loads(_core.effective_profile(_text(ensemble)))


def sample(ensemble):
    return _core.sample(_text(ensemble))


def eigenvalues(a):
    return _core.eigenvalues(np.asarray(a, dtype=float))


def eigvec_inf_norms(a):
    return _core.eigvec_inf_norms(np.asarray(a, dtype=float))


def count_in_interval(a, lo, hi):
    return _core.count_in_interval(np.asarray(a, dtype=float), lo, hi)


def schur_discrepancy(a, k, x, eta):
    return _core.schur_discrepancy(np.asarray(a, dtype=float), k, x, eta)


def verify_local_law(config):
    return json.loads(_core.verify_local_law(_text(config)))


def verify_delocalization(config):
    return json.loads(_core.verify_delocalization(_text(config)))


def projection_test(spec):
    return json.loads(_core.projection_test(_text(spec)))


def interlacing_test(trials, n, seed=1, max_rank=5):
    return json.loads(_core.interlacing_test(trials, n, seed, max_rank))


def run_cli(*args):
    """Returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
