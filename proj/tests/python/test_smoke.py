"""End-to-end smoke checks for the pyssx module."""

import pytest

import pyssx


def test_circulant_lift_counts():
    g = pyssx.circulant(7, [1, 2])
    c = pyssx.build_flag_complex(g, 2)
    assert c.sizes == [7, 14, 7]
    h = pyssx.build_flag_complex(pyssx.circulant(7, [1, 3]), 2)
    assert h.sizes == [7, 14, 0]


def test_euler_series_matches_per_bin_lifts():
    g = pyssx.circulant(7, [1, 3])
    dyn = pyssx.DynDigraph(g, [[1, 1] for _ in range(7)])
    dac = pyssx.lift_dac(dyn, 2)
    assert pyssx.euler_series(dac) == [-7, -7]
    sub = pyssx.functional_subgraph(dyn, 0)
    c = pyssx.build_flag_complex(sub, 2)
    assert c.sizes[0] - c.sizes[1] + c.sizes[2] == -7


def test_invariants_and_topofeat():
    g = pyssx.circulant(6, [1, 2])
    dyn = pyssx.DynDigraph(g, [[1, 1] for _ in range(6)])
    dac = pyssx.lift_dac(dyn, 2)
    series = pyssx.local_series(dac, "size", k=1)
    assert len(series) == 6
    assert all(len(s) == 2 for s in series)
    total = pyssx.global_sum(dac, "size", k=1)
    assert total == [sum(s[t] for s in series) for t in range(2)]
    assert total[0] > 0
    feats = pyssx.topofeat(dac, 2)  # needs exactly two time bins
    assert len(feats) > 0 and all(isinstance(v, float) for v in feats)


def test_wl_fixture_verdicts():
    names = pyssx.fixture_names()
    assert set(["fig6", "fig8", "fig9", "fig11"]) <= set(names)
    left, right = pyssx.fixture_pair("fig8")
    assert not pyssx.dirwl_verdict(left, right, directed=True)["separated"]
    ca = pyssx.build_flag_complex(left, 2)
    cb = pyssx.build_flag_complex(right, 2)
    assert pyssx.sswl_verdict(ca, cb, "D")["separated"]
    assert pyssx.sswl_histogram(ca, "D") != pyssx.sswl_histogram(cb, "D")


def test_edge_list_round_trip():
    g = pyssx.Digraph(4, [(0, 1), (1, 2), (2, 0), (3, 1)])
    text = pyssx.format_edge_list(g)
    back = pyssx.parse_edge_list(text)
    assert back.edges == g.edges
    assert back.num_vertices == 4
    with pytest.raises(ValueError):
        pyssx.parse_edge_list("n=2\n0 5\n")


def test_activations_round_trip():
    rows = [[1, 0], [0, 1], [1, 1]]
    text = pyssx.format_activations(rows)
    assert pyssx.parse_activations(text) == rows
    with pytest.raises(ValueError):
        pyssx.parse_activations("T=1\n0 2\n")


def test_rng_is_deterministic():
    a = pyssx.Rng(42, 7)
    b = pyssx.Rng(42, 7)
    assert [a.unit() for _ in range(5)] == [b.unit() for _ in range(5)]
    assert sorted(pyssx.Rng(1).permutation(10)) == list(range(10))


def test_generator_model_and_training_loop():
    samples = pyssx.generate_synthetic(
        vertices=10, density=0.4, T=2, motif_bias=[0.95, 0.05],
        samples_per_class=6, seed=5)
    assert len(samples) == 12
    assert {s.label for s in samples} == {0, 1}

    model = pyssx.make_task_model("D", 2, 8, 2, seed=3)
    dyn = samples[0].dyn
    dac = pyssx.lift_dac(dyn, 2)
    logits = pyssx.ssn_logits(model, dac)
    assert len(logits) == 2
    assert pyssx.model_param_count(model) > 0

    out = pyssx.train_task(samples, arch="D", epochs=2, batch=4, lr=0.01,
                           seed=1)
    again = pyssx.train_task(samples, arch="D", epochs=2, batch=4, lr=0.01,
                             seed=1)
    assert out["metrics"] == again["metrics"]
    assert 0.0 <= out["accuracy"] <= 1.0
    assert len(out["metrics"]) == 4  # train + eval rows per epoch
