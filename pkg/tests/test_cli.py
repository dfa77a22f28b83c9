import csv
import json

import pytest

from eosplan import __version__
from eosplan.cli import build_parser, dispatch
from eosplan.embedding import Embedding, embedding_to_dict
from eosplan.model import load_instance, make_instance, save_instance


@pytest.fixture
def tiny_file(tmp_path):
    path = tmp_path / "tiny_a.json"
    save_instance(make_instance([[0, 10], [8, 20]]), path)
    return path


def test_solve_greedy_prints_objective(tiny_file, capsys):
    assert dispatch(["solve", "--method", "greedy", "--in", str(tiny_file)]) == 0
    assert "objective -2" in capsys.readouterr().out


@pytest.mark.parametrize("method", ["bruteforce", "exact-pairwise", "exact-clique", "greedy"])
def test_solve_writes_plan(tiny_file, tmp_path, method):
    out = tmp_path / "plan.json"
    assert dispatch(["solve", "--method", method, "--in", str(tiny_file), "--out", str(out)]) == 0
    plan = json.loads(out.read_text())
    assert set(plan) == {"selected", "objective", "proven_optimal", "nodes", "wall_time_s"}
    assert plan["objective"] == -2.0
    assert plan["wall_time_s"] is None
    assert plan["proven_optimal"] is (method != "greedy")


def test_solve_timings_flag(tiny_file, tmp_path):
    out = tmp_path / "plan.json"
    dispatch(["solve", "--method", "exact-clique", "--in", str(tiny_file), "--out", str(out), "--timings"])
    assert json.loads(out.read_text())["wall_time_s"] >= 0


@pytest.mark.parametrize("method", ["sa", "random"])
def test_solve_samplers(tiny_file, tmp_path, method):
    out = tmp_path / "plan.json"
    argv = ["solve", "--method", method, "--in", str(tiny_file), "--out", str(out), "--seed", "3", "--reads", "200"]
    assert dispatch(argv) == 0
    assert json.loads(out.read_text())["objective"] == -2.0


def test_sampler_requires_seed(tiny_file, capsys):
    assert dispatch(["solve", "--method", "sa", "--in", str(tiny_file)]) == 1
    assert "--seed" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    assert dispatch(["generate", "--requests", "0", "--dt", "15", "--latitude-range", "2", "--seed", "1",
                     "--out", str(tmp_path / "x.json")]) == 1
    assert dispatch(["frobnicate"]) == 1
    assert dispatch([]) == 1
    assert dispatch(["generate", "--dt", "15", "--out", str(tmp_path / "x.json")]) == 1
    assert "usage" in capsys.readouterr().err


def test_domain_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"requests": []}')
    assert dispatch(["solve", "--method", "greedy", "--in", str(bad)]) == 2
    assert dispatch(["solve", "--method", "greedy", "--in", str(tmp_path / "missing.json")]) == 2
    big = tmp_path / "big.json"
    save_instance(make_instance([[1000.0 * r] for r in range(31)]), big)
    assert dispatch(["solve", "--method", "bruteforce", "--in", str(big)]) == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out
    assert dispatch(["--version"]) == 0


def test_generate_single_and_preset(tmp_path):
    out = tmp_path / "g.json"
    assert dispatch(["generate", "--requests", "5", "--dt", "15", "--latitude-range", "2", "--seed", "4",
                     "--out", str(out)]) == 0
    assert len(load_instance(out).requests) == 5
    kin = tmp_path / "kin.json"
    kin.write_text(json.dumps({"pitch_half_angle": 10.0}))
    out2 = tmp_path / "g2.json"
    dispatch(["generate", "--requests", "5", "--dt", "15", "--latitude-range", "2", "--seed", "4",
              "--kinematics", str(kin), "--out", str(out2)])
    assert load_instance(out2).n_vars < load_instance(out).n_vars
    d = tmp_path / "phard"
    assert dispatch(["generate", "--preset", "p-hard", "--seed", "2020", "--out", str(d)]) == 0
    assert len(list(d.glob("*.json"))) == 50


def test_stats(tmp_path, tiny_file):
    out = tmp_path / "stats.csv"
    assert dispatch(["stats", "--instances", str(tiny_file.parent), "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["parameter", "bin", "count"]


def test_qubo_and_embed_pipeline(tmp_path, tiny_file):
    q = tmp_path / "q.json"
    i = tmp_path / "i.json"
    assert dispatch(["qubo", "--in", str(tiny_file), "--out", str(q)]) == 0
    assert json.loads(q.read_text())["quadratic"]["0,1"] == pytest.approx(1.1)
    assert dispatch(["qubo", "--in", str(tiny_file), "--format", "ising-json", "--out", str(i)]) == 0
    emb = tmp_path / "emb.json"
    emb.write_text(json.dumps(embedding_to_dict(Embedding({0: [5], 1: [1], 2: [0, 4], 3: [6]}))))
    phys = tmp_path / "phys.json"
    assert dispatch(["embed", "--ising", str(i), "--embedding", str(emb), "--chimera", "1,1,4",
                     "--out", str(phys)]) == 0
    data = json.loads(phys.read_text())
    assert data["n"] == 8 and data["J"]["0,4"] < 0
    bad = tmp_path / "bad_emb.json"
    bad.write_text(json.dumps({"chains": {"0": [0], "1": [1], "2": [2], "3": [3]}}))
    assert dispatch(["embed", "--ising", str(i), "--embedding", str(bad), "--chimera", "1,1,4",
                     "--out", str(phys)]) == 2
    samples = tmp_path / "samples.json"
    samples.write_text(json.dumps({"samples": [{"0": 1, "4": 1, "5": -1, "1": -1, "6": 1},
                                               {"0": 1, "4": -1, "5": 1, "1": 1, "6": -1}]}))
    out = tmp_path / "logical.json"
    assert dispatch(["unembed", "--samples", str(samples), "--embedding", str(emb), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["samples"] == [[-1, -1, 1, 1], [1, 1, -1, -1]]


def test_hist(tmp_path, tiny_file):
    out = tmp_path / "h.csv"
    assert dispatch(["hist", "--in", str(tiny_file), "--method", "random", "--reads", "500", "--bins", "5",
                     "--seed", "1", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["bin_low", "bin_high", "count"]
    assert sum(int(r[2]) for r in rows[1:]) == 500
    assert dispatch(["hist", "--in", str(tiny_file), "--method", "sa", "--out", str(out)]) == 1


def test_bench_commands(tmp_path, tiny_file):
    rt = tmp_path / "runtime.csv"
    assert dispatch(["bench", "runtime", "--instances", str(tiny_file.parent), "--methods",
                     "exact-pairwise,exact-clique,sa", "--reads", "100", "--sweeps", "50", "--seed", "2",
                     "--out", str(rt)]) == 0
    assert len(rt.read_text().splitlines()) == 4
    assert (tmp_path / "runtime.summary.csv").exists()
    q = tmp_path / "quality.csv"
    assert dispatch(["bench", "quality", "--instances", str(tiny_file.parent), "--budgets-ms", "0.02,2",
                     "--methods", "greedy,sa,random", "--sweeps", "50", "--seed", "2", "--out", str(q)]) == 0
    assert len(q.read_text().splitlines()) == 1 + 1 + 2 + 2
    assert dispatch(["bench", "quality", "--instances", str(tiny_file.parent), "--methods", "nope",
                     "--seed", "1", "--out", str(q)]) == 1
    assert dispatch(["bench", "runtime", "--instances", str(tiny_file.parent), "--methods", "sa",
                     "--out", str(q)]) == 1


def test_bench_jobs_matches_sequential(tmp_path):
    d = tmp_path / "inst"
    d.mkdir()
    for k in range(3):
        save_instance(make_instance([[0, 10], [8 + k, 20 + k], [30, 40]]), d / f"i{k}.json")
    one, many = tmp_path / "one.csv", tmp_path / "many.csv"
    base = ["bench", "quality", "--instances", str(d), "--methods", "greedy,sa", "--sweeps", "20",
            "--seed", "5", "--budgets-ms", "0.2"]
    assert dispatch(base + ["--out", str(one)]) == 0
    assert dispatch(base + ["--out", str(many), "--jobs", "2"]) == 0
    assert one.read_bytes() == many.read_bytes()
