import math

import pytest

import novscope


def test_uniform_pair_surprise_is_log_dim():
    logits = [[0.0] * 4 for _ in range(3)]
    assert novscope.surprise(logits, [0, 1]) == pytest.approx(math.log(4), abs=1e-12)
    assert novscope.surprise(logits, [2]) is None


def test_one_hot_pair_is_unsurprising():
    logits = [[0.0, -1000.0], [0.0, -1000.0]]
    assert novscope.surprise(logits, [0, 1]) == 0.0


def test_log_propensity_adds_salience():
    logits = [[0.0, 0.0], [0.0, 0.0]]
    base = novscope.log_propensity(logits, [0.0, 0.0], [0, 1])
    assert novscope.log_propensity(logits, [0.5, 0.25], [0, 1]) == pytest.approx(base + 0.75)


def test_percentile_rank_ties():
    assert novscope.percentile_rank([5.0, 5.0, 10.0]) == [0.25, 0.25, 1.0]
    assert novscope.percentile_rank([1.0]) is None


def test_disruption_boundaries():
    years = {"F": 2000, "R": 1990, "c0": 2001, "c1": 2002}
    edges = [("F", "R"), ("c0", "F"), ("c1", "F")]
    assert novscope.disruption(edges, years, "F") == 1.0
    edges += [("c0", "R"), ("c1", "R")]
    assert novscope.disruption(edges, years, "F") == -1.0
    assert novscope.two_step_credit(edges, years, "F") is None


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        novscope.disruption([], {"F": 2000}, "nobody")
    with pytest.raises(novscope.ValidationError):
        novscope.surprise([[0.0], [0.0, 1.0]], [0, 1])


def test_default_config_lists_sections():
    text = novscope.default_config()
    for section in ("[paths]", "[fit]", "[synth]"):
        assert section in text


def test_pipeline_round_trip(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[paths]\ndata_dir = data\ncache_dir = cache\noutput_dir = out\n"
        "[synth]\nn_papers = 200\nn_authors = 80\n[fit]\ndim = 3\nmax_epochs = 20\n"
    )
    with pytest.raises(novscope.ValidationError):
        novscope.run_stage(cfg, "build")
    for stage in ("synth", "ingest", "build", "fit", "score"):
        novscope.run_stage(cfg, stage)
    header = (tmp_path / "out" / "scores.csv").read_text().splitlines()[0]
    assert header.startswith("paper_id")
