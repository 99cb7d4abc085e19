import json

import numpy as np
import pytest

from polyeiv.cli import main


@pytest.fixture
def data(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.uniform(-3, 4, 60)
    w, y = x + rng.normal(size=60), x + rng.normal(size=60)
    p = tmp_path / "d.csv"
    p.write_text("W,Y\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(w, y)))
    u = tmp_path / "u.csv"
    u.write_text("U\n" + "".join(f"{float(v)!r}\n" for v in rng.normal(size=300)))
    r = tmp_path / "r.csv"
    g = np.repeat(np.arange(40), 2)
    xr = np.repeat(rng.uniform(-3, 4, 40), 2)
    r.write_text("group,W,Y\n" + "".join(
        f"{a},{float(b)!r},{float(c)!r}\n" for a, b, c in zip(g, xr + rng.normal(size=80), xr + rng.normal(size=80))))
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_test_command(capsys, data):
    code, out, _ = run(capsys, "test", "--data", data / "d.csv", "-B", 15, "--seed", 2)
    rep = json.loads(out)
    assert code == 0 and rep["B"] == 15 and 0 < rep["p_value"] <= 1


@pytest.mark.parametrize("noise", ["laplace:0.5", "direct:{}", "replicates"])
def test_test_command_noise_kinds(capsys, data, noise):
    path = data / ("r.csv" if noise == "replicates" else "d.csv")
    noise = noise.format(data / "u.csv")
    code, out, _ = run(capsys, "test", "--data", path, "--noise", noise, "-B", 5)
    assert code == 0 and "diagnostics" in json.loads(out)


def test_config_file(capsys, data):
    (data / "c.json").write_text(json.dumps({"degree": 2, "B": 7, "moment_order": 2}))
    code, out, _ = run(capsys, "test", "--data", data / "d.csv", "--config", data / "c.json", "-B", 7)
    rep = json.loads(out)
    assert len(rep["beta_hat"]) == 3 and len(rep["omega_hat"]) == 1


def test_bandwidth_command(capsys, data):
    _, out, _ = run(capsys, "bandwidth", "--data", data / "d.csv", "--noise", "laplace:0.5")
    d = json.loads(out)
    assert d["plug_in"] and d["alpha"] == 2 and d["C"] == 4
    _, out, _ = run(capsys, "bandwidth", "--data", data / "d.csv")
    assert json.loads(out)["h"] == 5.0


def test_analyze_sweep(capsys, data):
    code, out, _ = run(capsys, "analyze", "--data", data / "d.csv", "--sweep", "0.5,1.0", "-B", "10,20")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "variance,beta_0,beta_1,p(10),p(20)" and len(lines) == 3


def test_simulate_commands(capsys, data):
    scen = data / "s.cfg"
    scen.write_text("noise = gaussian:1.0\ndeparture = cos\nc = 1.5\nB = 10\n")
    code, out, _ = run(capsys, "simulate-power", "--scenario", scen, "--n", "30", "--reps", 2)
    assert code == 0 and out.startswith("n,reps,failures,seed")
    code, out, _ = run(capsys, "simulate-level", "--n", "30,40", "--reps", 2, "-B", 10,
                       "--alpha", "0.05,0.1", "--out", data / "t.csv")
    assert code == 0 and (data / "t.csv").read_text().count("\n") == 3


def test_same_seed_same_bytes(capsys, data):
    outs = []
    for _ in range(2):
        run(capsys, "simulate-level", "--n", "30", "--reps", 3, "-B", 10, "--seed", 9,
            "--out", data / "lvl.csv")
        _, rep, _ = run(capsys, "test", "--data", data / "d.csv", "-B", 12, "--seed", 9)
        outs.append(((data / "lvl.csv").read_bytes(), rep))
    assert outs[0] == outs[1]


def test_errors_exit_nonzero(capsys, data):
    (data / "e.csv").write_text("")
    code, _, err = run(capsys, "test", "--data", data / "e.csv")
    assert code == 2 and "empty" in err
    code, _, err = run(capsys, "test", "--data", data / "d.csv", "--noise", "cauchy:1")
    assert code == 2
