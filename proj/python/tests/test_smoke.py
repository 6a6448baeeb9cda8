import math

import pytest

import coassoc

MC_PLUS = {
    "b_N": [1, 0, 1, 0],
    "b2_plus_N": 0,
    "b_Sigma": [1, 0, 0, 1],
    "ends_nonplanar": 1,
    "components_nonplanar": 1,
}


def test_g2_forms():
    phi, star = coassoc.g2_forms()
    assert "123:+1" in phi
    assert "356:-1" in phi
    assert "4567:+1" in star


def test_coassociative_family():
    res, starphi = coassoc.coassoc_residual("mc:plus:c=1", samples=200, seed=3)
    assert res <= 1e-8
    assert starphi > 0


def test_cone_norm():
    p = coassoc.chart_point("cone:plus", [2.0, 0.4, 0.1, -0.3])
    assert math.isclose(sum(x * x for x in p) ** 0.5, 3.0, rel_tol=1e-12)


def test_rate():
    fit = coassoc.fit_rate("mc:plus:c=1", "cone:plus")
    assert abs(fit["lambda_hat"] + 1.5) <= 0.05


def test_lincheck():
    assert abs(coassoc.lincheck("mc:plus:c=1", seed=2)["slope"] - 2) <= 0.1


def test_betti_and_walls():
    assert coassoc.betti("round:2") == [1, 0, 0, 1]
    walls = coassoc.find_walls("round:2", -1.0, 0.5)
    assert len(walls) == 1
    assert walls[0]["d"] == 4
    assert coassoc.z_space("round:2")["dim"] == 3


def test_moduli():
    assert coassoc.exact_sequence_check(MC_PLUS)["feasible"]
    assert coassoc.dim_moduli(MC_PLUS, -1.5)["dimension"] == 0
    report = coassoc.dim_moduli(MC_PLUS, 0.5, walls={"walls": [], "dim_Z": 7})
    assert report["dimension"] == {"lower": 7, "upper": 8}
    assert coassoc.index_ledger(MC_PLUS, 0.5, -1.0, walls={"walls": [], "dim_Z": 7})["index_jump"] == 8


def test_errors():
    with pytest.raises(coassoc.WallCollisionError):
        coassoc.dim_moduli(MC_PLUS, -1.8, walls={"walls": [{"mu": -1.8, "d": 1}]})
    bad = dict(MC_PLUS, ends_nonplanar=3)
    with pytest.raises(coassoc.TopologyError):
        coassoc.dim_moduli(bad, -1.5)
    with pytest.raises(ValueError):
        coassoc.coassoc_residual("nonsense")
