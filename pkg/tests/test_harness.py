import numpy as np
import pytest

from polyeiv.bootstrap import TestConfig
from polyeiv.harness import (
    CsvParseError,
    MonteCarloTable,
    ScenarioConfig,
    analyze_csv,
    generate_dataset,
    load_scenario,
    read_pairs_csv,
    read_replicates_csv,
    run_level_table,
    run_power_table,
    sensitivity_sweep,
)
from polyeiv.noise import GaussianNoise, LaplaceNoise

FAST = TestConfig(B=20)


def write_pairs(path, w, y):
    path.write_text("W,Y\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(w, y)))


def test_generate_noiseless():
    sc = ScenarioConfig(noise="gaussian:0", error_variance=0.0, beta=(1.0, 2.0, -0.5))
    s = generate_dataset(sc, np.random.default_rng(0), 50)
    assert np.allclose(s.y, 1 + 2 * s.w - 0.5 * s.w**2)


def test_generate_cos_departure():
    sc = ScenarioConfig(noise="gaussian:0", error_variance=0.0, beta=(0.0, 0.0),
                        departure="cos", c=1.5, x_low=0.0, x_high=0.0)
    s = generate_dataset(sc, np.random.default_rng(0), 5)
    assert np.all(s.y == 1.5)


def test_generate_uniform_mean():
    s = generate_dataset(ScenarioConfig(noise="gaussian:0"), np.random.default_rng(1), 100_000)
    assert abs(s.w.mean() - 0.5) < 0.03


def test_generate_local_and_tabulated():
    sc = ScenarioConfig(noise="gaussian:0", error_variance=0.0, departure="local", c=2.0,
                        gamma=([-10, 10], [1, 1]), x_table=([0, 1, 2], [0, 0.5, 1]))
    s = generate_dataset(sc, np.random.default_rng(2), 400)
    assert np.allclose(s.y - s.w, 2.0 / 20)
    assert 0 <= s.w.min() and s.w.max() <= 2
    assert sc.support == (0.0, 2.0)


def test_scenario_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(departure="sine")
    with pytest.raises(ValueError):
        ScenarioConfig(departure="local")


def test_single_rep_table():
    sc = ScenarioConfig(test=FAST)
    tab = run_level_table(sc, [40], reps=1, workers=1)
    assert set(tab.rates.ravel()) <= {0.0, 1.0}
    with pytest.raises(ValueError):
        run_level_table(ScenarioConfig(departure="cos", c=1.0), [40], reps=1)
    with pytest.raises(ValueError):
        run_power_table(sc, [40], reps=1)


def test_power_with_zero_departure_matches_level():
    lvl = run_level_table(ScenarioConfig(test=FAST), [40], reps=6, seed=3, workers=1)
    pwr = run_power_table(ScenarioConfig(test=FAST, departure="cos", c=0.0), [40],
                          reps=6, seed=3, workers=1)
    assert np.array_equal(lvl.rates, pwr.rates)


def test_table_properties_and_round_trip(tmp_path):
    sc = ScenarioConfig(noise=LaplaceNoise(0.5), test=FAST)
    tab = run_level_table(sc, [30, 50], reps=8, seed=5, workers=1)
    assert np.all((tab.rates >= 0) & (tab.rates <= 1))
    assert np.all(np.diff(tab.rates, axis=1) >= 0)
    assert MonteCarloTable.from_csv(tab.to_csv()) == tab
    again = run_level_table(sc, [30, 50], reps=8, seed=5, workers=1)
    assert again.to_csv() == tab.to_csv()


def test_parallel_matches_serial(monkeypatch):
    sc = ScenarioConfig(test=FAST)
    a = run_level_table(sc, [30], reps=4, seed=1, workers=1)
    monkeypatch.setenv("POLYEIV_THREADS", "2")
    b = run_level_table(sc, [30], reps=4, seed=1)
    assert a == b


def test_large_reps_warn():
    with pytest.warns(RuntimeWarning):
        try:
            run_level_table(ScenarioConfig(test=FAST), [], reps=501, workers=1)
        except ValueError:
            pass


def test_csv_readers(tmp_path):
    p = tmp_path / "d.csv"
    write_pairs(p, [1.0, 2.0], [3.0, 4.0])
    s = read_pairs_csv(p)
    assert s.w.tolist() == [1.0, 2.0] and s.y.tolist() == [3.0, 4.0]
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(CsvParseError):
        read_pairs_csv(tmp_path / "e.csv")
    (tmp_path / "b.csv").write_text("W,Y\n1,2\n3\n")
    with pytest.raises(CsvParseError, match="line 3"):
        read_pairs_csv(tmp_path / "b.csv")
    (tmp_path / "h.csv").write_text("X,Y\n1,2\n")
    with pytest.raises(CsvParseError, match="line 1"):
        read_pairs_csv(tmp_path / "h.csv")
    (tmp_path / "r.csv").write_text("group,W,Y\na,1,2\na,1.5,2\nb,0,1\n")
    reps = read_replicates_csv(tmp_path / "r.csv")
    assert reps.n_groups == 2 and reps.n_pairs == 2


def _quake_like(seed, n=62):
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, 0.6, n)
    y = 0.2 + 0.9 * x + rng.normal(0, 0.3, n)
    return x + rng.normal(0, np.sqrt(0.035), n), y


def test_analyze_null_rarely_rejects(tmp_path):
    noise = "gaussian:0.035"
    ok = 0
    for seed in range(20):
        w, y = _quake_like(seed)
        write_pairs(tmp_path / "q.csv", w, y)
        rep = analyze_csv(tmp_path / "q.csv", TestConfig(B=50), noise=noise, seed=seed)
        ok += rep.p_value > 0.05
    assert ok >= 18


def test_sweep_rows_and_attenuation(tmp_path):
    w, y = _quake_like(0)
    write_pairs(tmp_path / "q.csv", w, y)
    rows = analyze_csv(tmp_path / "q.csv", TestConfig(B=20), noise="gaussian:0.035",
                       sweep=[0.0049, 0.035, 0.065], B_values=[20, 40])
    assert [r["variance"] for r in rows] == [0.0049, 0.035, 0.065]
    assert set(rows[0]) == {"variance", "beta_0", "beta_1", "p(20)", "p(40)"}
    slopes = [r["beta_1"] for r in rows]
    assert slopes[0] < slopes[1] < slopes[2]
    direct = sensitivity_sweep(read_pairs_csv(tmp_path / "q.csv"), GaussianNoise(0.035),
                               [0.035], TestConfig(B=20), [20])
    assert direct[0]["beta_1"] == rows[1]["beta_1"]


def test_load_scenario():
    text = """
    noise = laplace:0.5
    departure = cos
    c = 1.5
    beta = 0, 1
    B = 30
    n_values = 50, 100
    alphas = 0.05, 0.1
    """
    sc, extras = load_scenario("\n".join(l.strip() for l in text.splitlines()), is_text=True)
    assert sc.noise == LaplaceNoise(0.5) and sc.c == 1.5 and sc.test.B == 30
    assert extras == {"n_values": [50, 100], "alphas": [0.05, 0.1]}
    assert sc.test_config().support == (-3.0, 4.0)
    with pytest.raises(ValueError):
        load_scenario("colour = blue", is_text=True)
