import math

import pytest

import mna


def test_merger_probability():
    params = mna.ModelParams()
    p = 1.0 / 40000.0
    assert mna.merger_probability(0, params) == p
    assert mna.merger_probability(3, params) == 8 * p
    assert mna.merger_probability(1169, params) == 1.0
    assert mna.merger_probability(1168, params) < 1.0


def test_simulate_two_agents():
    r = mna.simulate(mna.ModelParams(2, 1, base_probability=1.0), seed=7)
    assert r["ancestries"] == [1]
    assert r["cycles_run"] == 1
    assert r["termination"] == "reached_target"


def test_simulate_conserves_and_is_deterministic():
    params = mna.ModelParams(3000, 300, base_probability=1e-3)
    a = mna.simulate(params, seed=11, record_history=True, record_mergers=True)
    b = mna.simulate(params, seed=11, record_history=True, record_mergers=True)
    assert a == b
    assert sum(a["ancestries"]) == a["absorbed_count"] == 3000 - len(a["ancestries"])
    assert len(a["mergers"]) == a["absorbed_count"]


def test_invalid_params_raise():
    with pytest.raises(ValueError):
        mna.simulate(mna.ModelParams(5, 9), seed=1)


def test_ensemble_envelope():
    s = mna.run_ensemble(mna.ModelParams(1000, 200), n_runs=8, master_seed=3, keep_runs=True)
    assert s["n_runs"] == 8
    for rank, lo, band_lo, band_hi, hi in s["rank_envelope"]:
        assert lo <= band_lo <= band_hi <= hi
    assert len(s["runs"]) == 8


def test_zipf():
    assert mna.zipf_series([5, 3, 3]) == [(1, 5), (2, 3), (3, 3)]
    counts = [round(1e15 * r**-2.0) for r in range(1, 101)]
    assert abs(mna.zipf_slope(counts)["slope"] + 2.0) < 1e-9


def test_distribution():
    h = mna.ancestry_distribution([1, 1, 2, 4], "linear:1")
    assert [b[3] for b in h["bins"]] == [2, 1, 1]


def test_genealogy():
    events = [("1990-01-01", "B", "C"), ("1991-01-01", "B", "D"), ("2000-01-01", "A", "B")]
    assert mna.ancestry_count(events, "A", "2005-01-01") == 3
    assert mna.ancestry_table(events, "2001-01-01") == {"A": 3}
    with pytest.raises(mna.DataError):
        mna.ancestry_table([("2000-01-01", "A", "C"), ("2001-01-01", "B", "C")], "2002-01-01")


def test_growth_fixture():
    events = [("1990-01-01", "B", "D"), ("2000-01-01", "A", "B"), ("2005-01-01", "A", "C")]
    panel = [("A", 1992, 100.0), ("B", 1992, 50.0), ("C", 1992, 30.0), ("A", 2013, 720.0)]
    out = mna.organic_growth(events, panel, {1992: 100.0, 2013: 180.0}, 1992, 2013)
    (rec,) = out["records"]
    assert rec["acquisition_count"] == 3
    assert math.isclose(rec["growth_index"], math.log10(720 / (180 * 1.8)), rel_tol=0, abs_tol=1e-12)


def test_market_share():
    panel = [(f"E{i}", 2000, 2.0) for i in range(100)]
    (year,) = mna.market_share_percentiles(panel)
    assert all(math.isclose(s, 0.01, rel_tol=1e-12) for s in year["share"])


def test_rank_forecast():
    events = [("2001-05-01", "A", "Z")]
    r = mna.rank_merger_forecast(events, [("A", 2000, 5.0)], [2000])
    assert r["ancestry"][0][2] == 1.0


def test_cli_and_result_files(tmp_path):
    code, out, err = mna.run_cli(
        ["simulate", "--initial", "2", "--target", "1", "--p", "1", "--seed", "7", "--out", str(tmp_path)]
    )
    assert code == 0, err
    f = mna.read_result(str(tmp_path / "population.csv"))
    assert f["kind"] == "population"
    assert f["rows"] == [["0", "1"]]
    assert ("arg.seed", "7") in f["metadata"]
    assert mna.run_cli(["simulate", "--bogus"])[0] == 1
