"""Numerical checks for asymptotically conical coassociative 4-folds."""

import json

from ._core import (
    TopologyError,
    WallCollisionError,
    betti,
    chart_point,
    coassoc_residual,
    find_walls,
    fit_rate,
    g2_forms,
    lincheck,
    z_space,
)

__all__ = [
    "TopologyError",
    "WallCollisionError",
    "betti",
    "chart_point",
    "coassoc_residual",
    "dim_moduli",
    "exact_sequence_check",
    "find_walls",
    "fit_rate",
    "g2_forms",
    "index_ledger",
    "lincheck",
    "z_space",
]


def _walls(walls):
    return "" if walls is None else json.dumps(walls)


def dim_moduli(topology, lam, walls=None, dim_B=None):
    """Moduli report for a topology dict at rate `lam`; bounds that are not exact come back as {lower, upper}."""
    from ._core import dim_moduli_json

    return json.loads(dim_moduli_json(json.dumps(topology), _walls(walls), lam, dim_B))


def index_ledger(topology, lambda1, lambda2, walls=None):
    from ._core import index_ledger_json

    return json.loads(index_ledger_json(json.dumps(topology), _walls(walls), lambda1, lambda2))


def exact_sequence_check(topology):
    from ._core import exact_sequence_check_json

    return json.loads(exact_sequence_check_json(json.dumps(topology)))
