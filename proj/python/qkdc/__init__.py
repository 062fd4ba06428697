"""Finite-blocklength key and entanglement distillation bounds."""

import json as _json

from . import _qkdc
from ._qkdc import (
    NumericalError,
    binary_entropy,
    chebyshev_constant,
    chebyshev_dh_bound,
    eb_bound,
    hypothesis_test_divergence,
    hypothesis_test_divergence_classical_iid,
    inv_gaussian_cdf,
    rel_entropy,
    run_cli,
    sandwiched_renyi,
    second_order_rate,
)


def dephasing_boundary(gamma, n, eps):
    return _json.loads(_qkdc.dephasing_boundary(gamma, n, eps))


def erasure_boundary(p, n, eps):
    return _json.loads(_qkdc.erasure_boundary(p, n, eps))


def gaussian_bound(kind, param, n, eps, nb=0.0):
    """kind: thermal, pure-loss, amplifier, ql-amplifier or additive; param is eta, G or xi."""
    return _json.loads(_qkdc.gaussian_bound(kind, param, nb, n, eps))
