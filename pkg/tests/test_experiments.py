import math

import numpy as np
import pytest

from gibbslab.experiments import (ExperimentConfig, bootstrap_variance_ci, count_targets,
                                  run_concentration, run_count, run_count_colorings,
                                  run_cover_stats, run_decay, run_edge_vertex, with_overrides)
from gibbslab.graph import load_graph
from oracles import k2_good_count


def test_config_conversion_and_validation(tmp_path):
    cfg = ExperimentConfig(n="4, 8", code="identity,majority", beta="0.3")
    assert cfg.n == [4, 8] and cfg.code == ["identity", "majority"] and cfg.beta == 0.3
    for bad in ({"beta": float("inf")}, {"n": "0"}, {"eps": 0}, {"model": "xy"}):
        with pytest.raises(ValueError):
            ExperimentConfig(**bad)
    f = tmp_path / "c.cfg"
    f.write_text("# comment\nbeta = 0.2\nk-max=3\n")
    assert ExperimentConfig.parse_file(f) == {"beta": "0.2", "k_max": "3"}
    f.write_text("nonsense=1\n")
    with pytest.raises(ValueError):
        ExperimentConfig.parse_file(f)


def test_config_hash_ignores_out():
    a = ExperimentConfig(out="x.csv")
    assert a.config_hash() == ExperimentConfig().config_hash()
    assert a.config_hash() != with_overrides(a, beta=0.1).config_hash()


def test_decay_report():
    rep = run_decay(ExperimentConfig(beta=0.4))
    assert not rep.violation
    assert [r["pass"] for r in rep.rows] == [True] * 8
    lines = rep.to_csv().splitlines()
    assert lines[0].startswith("k,mutual_info,entropy,ratio,bound,pass")
    assert len(lines) == 9


def test_decay_nonunique_flagged():
    rep = run_decay(ExperimentConfig(beta=1.2))
    assert not rep.violation
    assert all(r["flag"] == "nonunique" and r["pass"] is None for r in rep.rows)


def test_decay_potts():
    rep = run_decay(ExperimentConfig(model="potts", q=3, beta=0.2))
    assert all(r["pass"] for r in rep.rows)


def test_edge_vertex_exact_and_tree_base():
    rep = run_edge_vertex(ExperimentConfig(code="identity,constant,majority", method="exact"))
    assert not rep.violation and len(rep.rows) == 3
    tree = run_edge_vertex(ExperimentConfig(graph="P3", code="identity,majority"))
    assert not tree.violation
    assert all(r["slack"] >= -1e-9 for r in tree.rows)


def test_edge_vertex_mc_small():
    cfg = ExperimentConfig(code="identity", method="both", n="200", trials=6, sweeps=30)
    rep = run_edge_vertex(cfg)
    mc = [r for r in rep.rows if r["method"] == "mc"][0]
    assert mc["trials"] == 6 and mc["stderr"] > 0


def test_count_matches_oracle():
    g = load_graph("K2")
    mv, me = count_targets(g, ExperimentConfig(target="uniform"))
    for N in (2, 4, 6):
        res = run_count_colorings(g, N, mv, me, 0.15)
        assert res.count == k2_good_count(N, 0.15)
        assert res.predicted_rate == pytest.approx(math.log(4))


def test_count_targets():
    g = load_graph("K2")
    for target in ("point", "model"):
        mv, me = count_targets(g, ExperimentConfig(target=target))
        assert np.isclose(me[0].sum(), 1)
    rep = run_count(ExperimentConfig(graph="K2", n="2,3", eps=0.5, target="point"))
    assert [r["N"] for r in rep.rows] == [2, 3]


def test_bootstrap_ci_brackets_variance():
    x = np.random.default_rng(0).normal(size=400)
    lo, hi = bootstrap_variance_ci(x, 500, 1)
    assert lo < x.var(ddof=1) < hi


def test_concentration_and_cover_stats_small():
    rep = run_concentration(ExperimentConfig(n="20,80", trials=12, sweeps=20, bootstrap=200))
    assert len(rep.rows) == 2 and all(r["var"] >= 0 for r in rep.rows)
    cs = run_cover_stats(ExperimentConfig(graph="K4", n="50,400", r=2, trials=10))
    assert cs.rows[0]["median_vertex_fraction"] <= cs.rows[1]["median_vertex_fraction"]
