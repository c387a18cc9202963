import json
import math
import os

import numpy as np
import pytest

from chaingraph import fileio
from chaingraph.cli import main
from chaingraph.model import ChainGraph


def write_cfg(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    return str(path)


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


# -- file formats ------------------------------------------------------------

def test_matrix_csv_round_trip_exact(tmp_path):
    rng = np.random.default_rng(0)
    m = rng.standard_normal((7, 4)) * np.exp(rng.uniform(-20, 20, size=(7, 4)))
    path = tmp_path / "m.csv"
    fileio.write_matrix_csv(path, m)
    back = fileio.read_matrix_csv(path)
    assert back.shape == m.shape
    assert np.array_equal(back, m)  # %.17g round-trips float64 exactly


def test_matrix_csv_single_row(tmp_path):
    path = tmp_path / "row.csv"
    fileio.write_matrix_csv(path, np.array([1.5, 2.5]))
    back = fileio.read_matrix_csv(path)
    assert back.shape == (1, 2)


def test_graph_json_round_trip(tmp_path):
    graph = ChainGraph.from_edges(5, undirected=[(0, 1), (3, 4)],
                                  directed=[(0, 2), (1, 3)])
    path = tmp_path / "g.json"
    fileio.write_graph_json(path, graph)
    payload = fileio.read_json(path)
    assert payload["schema_version"] == 1
    assert payload["p"] == 5
    assert payload["undirected"] == [[1, 2], [4, 5]]  # 1-based, sorted
    assert payload["directed"] == [[1, 3], [2, 4]]
    back = fileio.read_graph_json(path)
    assert back == graph


def test_graph_payload_errors():
    good = {"schema_version": 1, "p": 3, "undirected": [], "directed": []}
    fileio.graph_from_payload(good)
    for mutate in (
        lambda d: d.pop("p"),
        lambda d: d.update(schema_version=99),
        lambda d: d.update(p=0),
        lambda d: d.update(undirected=[[1, 2, 3]]),
        lambda d: d.update(directed=[[0, 1]]),
        lambda d: d.update(directed=[[1, 4]]),
    ):
        bad = {k: (list(v) if isinstance(v, list) else v) for k, v in good.items()}
        mutate(bad)
        with pytest.raises(ValueError):
            fileio.graph_from_payload(bad)


def test_write_json_deterministic(tmp_path):
    payload = {"b": 1, "a": [1, 2], "c": {"y": 0.5, "x": None}}
    p1, p2 = tmp_path / "1.json", tmp_path / "2.json"
    fileio.write_json(p1, payload)
    fileio.write_json(p2, dict(reversed(payload.items())))
    assert read_bytes(p1) == read_bytes(p2)


# -- simulate ----------------------------------------------------------------

SIM_CFG = {"p": 20, "design": "example1", "n": 40, "seed": 3,
           "undirected_prob": 0.1, "directed_prob": 0.7}


def run_simulate(tmp_path, out_name="sim", seed=None, cfg=None):
    cfg_path = write_cfg(tmp_path / "sim.json", cfg or SIM_CFG)
    out = str(tmp_path / out_name)
    argv = ["simulate", "--config", cfg_path, "--out", out]
    if seed is not None:
        argv += ["--seed", str(seed)]
    assert main(argv) == 0
    return out


def test_simulate_outputs(tmp_path):
    out = run_simulate(tmp_path)
    for name in ("omega.csv", "b.csv", "data.csv", "graph.json",
                 "manifest.json"):
        assert os.path.exists(os.path.join(out, name))
    x = fileio.read_matrix_csv(os.path.join(out, "data.csv"))
    assert x.shape == (40, 20)
    omega = fileio.read_matrix_csv(os.path.join(out, "omega.csv"))
    graph = fileio.read_graph_json(os.path.join(out, "graph.json"))
    assert graph.p == 20
    manifest = fileio.read_json(os.path.join(out, "manifest.json"))
    assert manifest["n"] == 40
    assert manifest["seed"] == 3
    assert manifest["config"]["design"] == "example1"
    # graph.json agrees with the written matrices
    from chaingraph.model import undirected_support

    assert graph.undirected == frozenset(undirected_support(omega))


def test_simulate_deterministic_across_runs(tmp_path):
    out1 = run_simulate(tmp_path, "sim1")
    out2 = run_simulate(tmp_path, "sim2")
    for name in ("omega.csv", "b.csv", "data.csv", "graph.json",
                 "manifest.json"):
        assert read_bytes(os.path.join(out1, name)) == \
            read_bytes(os.path.join(out2, name))


def test_simulate_seed_override(tmp_path):
    out1 = run_simulate(tmp_path, "sim1")
    out2 = run_simulate(tmp_path, "sim2", seed=99)
    assert read_bytes(os.path.join(out1, "data.csv")) != \
        read_bytes(os.path.join(out2, "data.csv"))
    manifest = fileio.read_json(os.path.join(out2, "manifest.json"))
    assert manifest["seed"] == 99


def test_simulate_bad_config(tmp_path):
    cfg_path = write_cfg(tmp_path / "bad.json", {"p": 20, "design": "example1"})
    out = str(tmp_path / "never")
    assert main(["simulate", "--config", cfg_path, "--out", out]) == 2
    assert not os.path.exists(out)  # nothing written on failure
    not_json = tmp_path / "nj.json"
    not_json.write_text("{ nope")
    assert main(["simulate", "--config", str(not_json), "--out", out]) == 2
    assert not os.path.exists(out)


# -- fit ---------------------------------------------------------------------

def test_fit_outputs_and_diagnostics(tmp_path):
    sim = run_simulate(tmp_path, cfg={**SIM_CFG, "n": 300})
    out = str(tmp_path / "fit")
    assert main(["fit", os.path.join(sim, "data.csv"), "--out", out]) == 0
    for name in ("omega.csv", "lowrank.csv", "b.csv", "graph.json",
                 "diagnostics.json"):
        assert os.path.exists(os.path.join(out, name))
    diag = fileio.read_json(os.path.join(out, "diagnostics.json"))
    assert diag["n"] == 300
    assert diag["p"] == 20
    assert diag["lam"] == pytest.approx(300.0 ** (-0.375))
    assert diag["nu"] == pytest.approx(300.0 ** (-0.25))
    assert diag["gamma"] == 2.0
    assert diag["converged"] is True
    assert diag["centered"] is False
    graph = fileio.read_graph_json(os.path.join(out, "graph.json"))
    omega = fileio.read_matrix_csv(os.path.join(out, "omega.csv"))
    from chaingraph.model import undirected_support

    assert graph.undirected == frozenset(undirected_support(omega))
    b_hat = fileio.read_matrix_csv(os.path.join(out, "b.csv"))
    lowrank = fileio.read_matrix_csv(os.path.join(out, "lowrank.csv"))
    assert b_hat.shape == (20, 20)
    assert lowrank.shape == (20, 20)


def test_fit_flag_overrides(tmp_path):
    sim = run_simulate(tmp_path, cfg={**SIM_CFG, "n": 120})
    data = os.path.join(sim, "data.csv")
    out = str(tmp_path / "fit2")
    assert main(["fit", data, "--out", out, "--eta", "0.2",
                 "--gamma", "3.0", "--center"]) == 0
    diag = fileio.read_json(os.path.join(out, "diagnostics.json"))
    assert diag["eta"] == 0.2
    assert diag["gamma"] == 3.0
    assert diag["centered"] is True
    assert diag["lam"] == pytest.approx(120.0 ** (-0.3))


def test_fit_config_file(tmp_path):
    sim = run_simulate(tmp_path, cfg={**SIM_CFG, "n": 120})
    data = os.path.join(sim, "data.csv")
    cfg_path = write_cfg(tmp_path / "fit.json",
                         {"lam": 0.25, "solver": {"max_outer": 500}})
    out = str(tmp_path / "fit3")
    assert main(["fit", data, "--config", cfg_path, "--out", out]) == 0
    diag = fileio.read_json(os.path.join(out, "diagnostics.json"))
    assert diag["lam"] == 0.25
    bad_cfg = write_cfg(tmp_path / "badfit.json", {"solver": {"bogus": 1}})
    out_bad = str(tmp_path / "fit4")
    assert main(["fit", data, "--config", bad_cfg, "--out", out_bad]) == 2
    assert not os.path.exists(out_bad)


def test_fit_rejects_bad_data(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,2.0\nnan,0.5\n")
    out = str(tmp_path / "fitbad")
    assert main(["fit", str(bad), "--out", out]) == 2
    assert not os.path.exists(out)
    assert main(["fit", str(tmp_path / "missing.csv"), "--out", out]) == 2
    assert not os.path.exists(out)


# -- eval --------------------------------------------------------------------

def test_eval_stdout_and_file(tmp_path, capsys):
    g_est = ChainGraph.from_edges(4, undirected=[(0, 1)], directed=[(0, 2)])
    g_tru = ChainGraph.from_edges(4, undirected=[(0, 1), (2, 3)],
                                  directed=[(0, 2), (1, 3)])
    est_path = tmp_path / "est.json"
    tru_path = tmp_path / "tru.json"
    fileio.write_graph_json(est_path, g_est)
    fileio.write_graph_json(tru_path, g_tru)
    assert main(["eval", str(est_path), str(tru_path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["recall_undirected"] == 0.5
    assert payload["precision_undirected"] == 1.0
    assert payload["recall_directed"] == 0.5
    assert payload["shd"] == 2
    out = str(tmp_path / "metrics")
    assert main(["eval", str(est_path), str(tru_path), "--out", out]) == 0
    from_file = fileio.read_json(os.path.join(out, "metrics.json"))
    assert from_file == payload


def test_eval_nan_becomes_null(tmp_path, capsys):
    empty = ChainGraph.from_edges(3, [], [])
    path = tmp_path / "e.json"
    fileio.write_graph_json(path, empty)
    assert main(["eval", str(path), str(path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["recall_undirected"] is None
    assert payload["shd"] == 0


def test_eval_p_mismatch(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    fileio.write_graph_json(a, ChainGraph.from_edges(3, [], []))
    fileio.write_graph_json(b, ChainGraph.from_edges(4, [], []))
    assert main(["eval", str(a), str(b)]) == 2


def test_eval_malformed_graph(tmp_path):
    a = tmp_path / "a.json"
    a.write_text('{"schema_version": 1, "p": 2, "undirected": []}')
    b = tmp_path / "b.json"
    fileio.write_graph_json(b, ChainGraph.from_edges(2, [], []))
    assert main(["eval", str(a), str(b)]) == 2


# -- check -------------------------------------------------------------------

def test_check_on_simulated_params(tmp_path, capsys):
    sim = run_simulate(tmp_path, cfg={**SIM_CFG, "p": 10, "n": 5})
    assert main(["check", sim]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["p"] == 10
    assert payload["cg_feasible"] is True
    assert isinstance(payload["component_ordering"], list)
    assert isinstance(payload["transversal"], bool)
    assert isinstance(payload["subspace_dims"], list)
    assert "incoherence" in payload
    out = str(tmp_path / "chk")
    assert main(["check", sim, "--out", out, "--gamma", "2.0"]) == 0
    file_payload = fileio.read_json(os.path.join(out, "check.json"))
    assert file_payload["p"] == 10


def test_check_rejects_infeasible_params(tmp_path):
    # a directed edge inside an undirected component is not a chain graph
    d = tmp_path / "params"
    d.mkdir()
    omega = np.array([[2.0, 0.5, 0.0], [0.5, 2.0, 0.0], [0.0, 0.0, 1.0]])
    b = np.zeros((3, 3))
    b[1, 0] = 0.7
    fileio.write_matrix_csv(d / "omega.csv", omega)
    fileio.write_matrix_csv(d / "b.csv", b)
    assert main(["check", str(d)]) == 2


def test_check_missing_files(tmp_path):
    assert main(["check", str(tmp_path / "absent")]) == 2


# -- experiment --------------------------------------------------------------

def test_experiment_outputs_and_summary_means(tmp_path):
    cfg_path = write_cfg(tmp_path / "exp.json",
                         {"design": "example1", "p": 10, "n": 200, "reps": 3,
                          "base_seed": 5})
    out = str(tmp_path / "exp")
    assert main(["experiment", "--config", cfg_path, "--out", out]) == 0
    reps = []
    for rep in range(3):
        path = os.path.join(out, f"rep_{rep:04d}.json")
        assert os.path.exists(path)
        payload = fileio.read_json(path)
        assert payload["rep"] == rep
        assert payload["seed"] == 5 + rep
        reps.append(payload)
    with open(os.path.join(out, "summary.csv"), encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        values = fh.readline().strip().split(",")
    row = dict(zip(header, values))
    assert row["design"] == "example1"
    assert int(row["reps"]) == 3
    assert int(row["failures"]) == 0
    for name in ("mcc_undirected", "shd"):
        vals = [float(r[name]) for r in reps if r[name] is not None]
        want = sum(vals) / len(vals)
        assert float(row[f"{name}_mean"]) == pytest.approx(want, abs=1e-12)
        assert int(row[f"{name}_count"]) == len(vals)


def test_experiment_parallel_matches_serial(tmp_path):
    base = {"design": "example2", "p": 10, "n": 150, "reps": 4, "base_seed": 2}
    cfg_path = write_cfg(tmp_path / "exp.json", base)
    out1 = str(tmp_path / "serial")
    out2 = str(tmp_path / "par")
    assert main(["experiment", "--config", cfg_path, "--out", out1]) == 0
    assert main(["experiment", "--config", cfg_path, "--out", out2,
                 "--parallelism", "3"]) == 0
    for rep in range(4):
        name = f"rep_{rep:04d}.json"
        assert read_bytes(os.path.join(out1, name)) == \
            read_bytes(os.path.join(out2, name))
    assert read_bytes(os.path.join(out1, "summary.csv")) == \
        read_bytes(os.path.join(out2, "summary.csv"))


def test_experiment_bad_config(tmp_path):
    cfg_path = write_cfg(tmp_path / "exp.json", {"design": "bogus"})
    out = str(tmp_path / "exp")
    assert main(["experiment", "--config", cfg_path, "--out", out]) == 2
    assert not os.path.exists(out)
