import json
import math

import numpy as np
import pytest

import lmdp_lab

LAMBDA01 = -math.log((1 + math.exp(-1)) / 2)
Q0 = math.e / (math.e + 1)


def uniform2():
    return np.full((2, 2), 0.5)


def test_solve_closed_form():
    sol = lmdp_lab.solve(uniform2(), np.array([0.0, 1.0]))
    assert abs(sol["lambda"] - LAMBDA01) < 1e-10
    assert np.allclose(sol["v"], [0.0, 1.0], atol=1e-10)
    assert np.allclose(sol["policy"][:, 0], Q0, atol=1e-10)
    assert sol["residual"] <= 1e-10


def test_solve_matches_numpy_eigen():
    P = lmdp_lab.generate_instance("random-ergodic", 5, seed=3, min_prob=0.05)
    c = np.linspace(0.0, 1.0, 5)
    eig = np.linalg.eigvals(np.diag(np.exp(-c)) @ P)
    assert abs(lmdp_lab.solve(P, c)["lambda"] + math.log(max(eig.real))) < 1e-9


def test_errors_are_typed():
    with pytest.raises(lmdp_lab.InvalidInput):
        lmdp_lab.solve(uniform2(), np.array([0.0, 2.0]))
    with pytest.raises(lmdp_lab.NotPrimitive):
        lmdp_lab.primitivity_index(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(lmdp_lab.GenerationFailed):
        lmdp_lab.generate_instance("ring-with-jumps", 5, min_prob=0.0)
    assert issubclass(lmdp_lab.NonErgodic, lmdp_lab.LmdpError)


def test_chain_diagnostics():
    d = lmdp_lab.analyze(np.array([[0.9, 0.1], [0.2, 0.8]]))
    assert d["alpha"] == pytest.approx(0.7)
    assert d["tau"] == pytest.approx(2.803673252057129)
    assert np.allclose(d["stationary"], [2 / 3, 1 / 3])
    assert lmdp_lab.tau_upper_bound(0.0, 0.0) == pytest.approx(6.876942579151431)


def test_convex_view():
    P = uniform2()
    c = np.array([0.0, 1.0])
    fw = lmdp_lab.minimize_f(P, c)
    assert abs(fw["value"] - LAMBDA01) <= 1e-3
    sol = lmdp_lab.solve(P, c)
    pi = lmdp_lab.measure_from_policy(P, sol["policy"])
    assert pi[0, 0] == pytest.approx(0.534446645388523)
    assert lmdp_lab.kkt_residual(pi, c, sol["v"], sol["lambda"], P) < 1e-8
    passive = lmdp_lab.measure_from_policy(P, P)
    assert lmdp_lab.bregman_negcondent(pi, passive) >= lmdp_lab.pinsker_lower_bound(pi, passive)
    cyc = lmdp_lab.min_mean_cycle(np.array([[0.2, 0.4], [0.4, 0.5]]), np.ones((2, 2), dtype=bool))
    assert cyc["cycle"] == [0]


def test_run_experiment():
    P = lmdp_lab.generate_instance("random-ergodic", 3, seed=1)
    out = lmdp_lab.run_experiment(P, "sinusoid", T=300, seed=2)
    cols = out["columns"]
    assert list(cols) == list(lmdp_lab.TRACE_COLUMNS)
    assert len(cols["t"]) == 300
    assert np.all(cols["policy_change_l1"] <= cols["lemma4_bound"])
    assert out["summary"]["pass"]
    assert out["summary"]["idealized_regret"] >= 0
    assert lmdp_lab.theoretical_bound(1.0, 0.0, 1) == pytest.approx(48.0)


def test_run_config_and_verify(tmp_path):
    config = {
        "instance": {"matrix": [[0.5, 0.5], [0.5, 0.5]]},
        "adversary": {"kind": "iid-uniform", "seed": 1},
        "T": 10,
        "mode": "exact",
        "seeds": [0, 1],
        "output": str(tmp_path),
    }
    code, aggregate = lmdp_lab.run_config(config)
    assert code == 0
    assert aggregate["all_pass"]
    rows = (tmp_path / "trace_seed0.csv").read_text().splitlines()
    assert rows[0].split(",") == list(lmdp_lab.TRACE_COLUMNS)
    assert len(rows) == 11
    summary = json.loads((tmp_path / "summary_seed1.json").read_text())
    assert set(summary) >= {"idealized_regret", "true_regret_proxy", "fullbound_value", "ledger"}

    ok, report = lmdp_lab.verify(uniform2(), np.array([0.0, 1.0]))
    assert ok and report["lambda"] == pytest.approx(LAMBDA01)
    ok, _ = lmdp_lab.verify(np.eye(2))
    assert not ok
