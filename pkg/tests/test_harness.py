"""CLI surface, suite runner, verifier independence (mutation check), and
the agnostic stub round trip."""

import json

import numpy as np
import pytest

from localmq import ContractViolation, Distribution, OracleSession, PLUS_MINUS
from localmq.cli import main
from localmq.generators import random_sparse_poly, random_tree
from localmq.oracles import AUDIT_COUNTS
from localmq.reduction import ReductionSimulator, embed
from localmq.verify import (
    VerifierOracle,
    agnostic_excess,
    agnostic_parity_stub,
    run_lemma_suite,
)
from localmq.targets import ZERO_ONE


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


class TestCliDeterminism:
    def test_gen_target_byte_identical(self, capsys):
        argv = ["gen-target", "--kind", "dnf", "--s", "4", "--n", "14", "--seed", "1"]
        code1, out1 = run_cli(capsys, argv)
        code2, out2 = run_cli(capsys, argv)
        assert code1 == code2 == 0
        assert out1 == out2
        obj = json.loads(out1)
        assert obj["kind"] == "dnf" and len(obj["terms"]) == 4

    def test_learn_run_byte_identical(self, capsys):
        argv = [
            "learn", "--algo", "tree-uniform", "--t", "4", "--eps", "0.08",
            "--seed", "7", "--n", "10", "--test-samples", "400",
            "--est-samples", "1500",
        ]
        _, out1 = run_cli(capsys, argv)
        _, out2 = run_cli(capsys, argv)
        assert out1 == out2

    def test_learn_echoes_parameters(self, capsys):
        code, out = run_cli(
            capsys,
            [
                "learn", "--algo", "tree-uniform", "--t", "4", "--eps", "0.08",
                "--seed", "7", "--n", "10", "--test-samples", "400",
                "--est-samples", "1500",
            ],
        )
        assert code == 0
        obj = json.loads(out)
        params = obj["outcome"]["params"]
        assert params["d"] == 9
        assert params["theta"] == pytest.approx(0.01)
        assert obj["outcome"]["audit"]["violations"] == 0
        assert "wall_time_s" not in obj


class TestCliSubcommands:
    def test_gen_dist_table_reports_alpha(self, capsys):
        code, out = run_cli(
            capsys,
            ["gen-dist", "--kind", "table", "--n", "8", "--alpha", "1.5", "--seed", "2"],
        )
        assert code == 0
        obj = json.loads(out)
        assert obj["kind"] == "table" and obj["alpha_star"] <= 1.5

    def test_learn_from_files(self, tmp_path, capsys):
        tpath = tmp_path / "target.json"
        dpath = tmp_path / "dist.json"
        run_cli(capsys, ["gen-target", "--kind", "decision-tree", "--n", "8",
                         "--leaves", "4", "--seed", "3", "--out", str(tpath)])
        run_cli(capsys, ["gen-dist", "--kind", "uniform", "--n", "8",
                         "--seed", "3", "--out", str(dpath)])
        code, out = run_cli(
            capsys,
            ["learn", "--algo", "tree-uniform", "--t", "4", "--eps", "0.2",
             "--target", str(tpath), "--dist", str(dpath),
             "--test-samples", "300", "--est-samples", "1000", "--seed", "3"],
        )
        assert code == 0
        assert json.loads(out)["outcome"]["error_estimates"]["zero_one"] <= 0.2

    def test_verify_subcommand(self, capsys):
        code, out = run_cli(
            capsys,
            ["verify", "--suite", "parseval", "--n", "8", "--trials", "10", "--seed", "1"],
        )
        assert code == 0
        assert json.loads(out)["passed"] is True

    def test_reduce_subcommand(self, capsys):
        code, out = run_cli(
            capsys, ["reduce", "--n", "5", "--k", "1", "--draws", "2000", "--seed", "4"]
        )
        assert code == 0
        obj = json.loads(out)
        assert obj["base_mq_count"] == 0
        assert obj["max_correlation_residual"] <= 1e-12
        assert obj["beta"] <= 2 / 3

    def test_demo_separation_subcommand(self, capsys):
        code, out = run_cli(
            capsys,
            ["demo-separation", "--variant", "g", "--n", "6", "--examples", "150",
             "--trials", "3", "--prf-samples", "20000", "--seed", "5"],
        )
        assert code == 0
        obj = json.loads(out)
        assert obj["recovery_rate"] == 1.0
        assert obj["prf_gate"]["monobit_pass"]

    def test_audit_roundtrip(self, tmp_path, capsys):
        audit_path = tmp_path / "audit.jsonl"
        code, out = run_cli(
            capsys,
            ["learn", "--algo", "tree-uniform", "--t", "4", "--eps", "0.2",
             "--n", "8", "--test-samples", "200", "--est-samples", "500",
             "--seed", "6", "--audit-out", str(audit_path)],
        )
        assert code == 0
        outcome = json.loads(out)["outcome"]
        code2, out2 = run_cli(capsys, ["audit", "--infile", str(audit_path)])
        assert code2 == 0
        summary = json.loads(out2)
        assert summary["distance_mismatches"] == 0
        assert summary["violations"] == 0
        assert summary["ex_count"] == outcome["audit"]["ex_count"]
        assert summary["mq_count"] == outcome["audit"]["mq_count"]
        assert summary["max_locality_used"] == outcome["audit"]["max_locality_used"]


class TestExitCodes:
    def test_usage_error_is_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["learn"])  # missing required --algo
        assert exc.value.code == 2

    def test_contract_violation_is_3(self, capsys):
        code, _ = run_cli(capsys, ["gen-dist", "--kind", "table", "--n", "25", "--seed", "0"])
        assert code == 3

    def test_budget_exceeded_is_4(self, capsys):
        code, _ = run_cli(
            capsys,
            ["learn", "--algo", "tree-uniform", "--t", "4", "--eps", "0.2", "--n", "8",
             "--test-samples", "200", "--est-samples", "500", "--seed", "1",
             "--cap", "1", "--theta", "0.05"],
        )
        assert code == 4

    def test_failing_suite_is_1(self, capsys, monkeypatch):
        import localmq.verify as verify_mod

        monkeypatch.setitem(
            verify_mod.SUITES,
            "parseval",
            lambda **kw: {"suite": "parseval", "trials": 0, "violations": 1,
                          "worst_margin": -1.0, "passed": False},
        )
        code, _ = run_cli(capsys, ["verify", "--suite", "parseval"])
        assert code == 1


class TestSuiteRunner:
    def test_unknown_suite_rejected(self):
        with pytest.raises(ContractViolation):
            run_lemma_suite("nonsense")

    def test_all_runs_everything(self):
        report = run_lemma_suite("all", trials=5, n=8)
        names = {r["suite"] for r in report["suites"]}
        assert "parseval" in names and "nonzero-lower-bound" in names
        assert all(r["passed"] for r in report["suites"])


class TestVerifierIndependence:
    def test_corrupted_estimator_is_caught(self, monkeypatch):
        # scale the sampled restriction path by 5 percent; the symbolic
        # oracle comparison must notice
        import localmq.fourier as fourier_mod

        rng = np.random.default_rng(0)
        f = random_sparse_poly(10, 5, rng, max_degree=4)
        dist = Distribution.uniform(10, ZERO_ONE)
        session = OracleSession(f, dist, r=4, seed=1, audit_mode=AUDIT_COUNTS)
        idx, masks, _ = session.draw_batch(1)
        subset = 0b101
        honest = fourier_mod.restriction_value_01(session, subset, int(idx[0]))
        symbolic = f.restrict(subset).value_at(int(masks[0]))
        assert honest == pytest.approx(symbolic, abs=1e-9)

        original = fourier_mod.restriction_values_01

        def corrupted(sess, sub, anchors):
            return 1.05 * original(sess, sub, anchors) + 0.01

        monkeypatch.setattr(fourier_mod, "restriction_values_01", corrupted)
        bad = fourier_mod.restriction_values_01(session, subset, np.asarray([int(idx[0])]))[0]
        assert abs(bad - symbolic) > 1e-3  # the oracle flags the mutation


class TestAgnosticStub:
    def test_stub_finds_planted_parity(self):
        # n = 10 keeps the persistent-coin correlation bias (~2^(-m/2))
        # well below the scaled signal 2^(n-m)
        from localmq import SparsePolynomial

        f = SparsePolynomial(10, {0b11: 1.0}, PLUS_MINUS)  # pure parity target
        emb = embed(f, 1, coin_seed=21)
        bs = OracleSession(
            f, Distribution.uniform(10, PLUS_MINUS), r=0, seed=21,
            audit_mode=AUDIT_COUNTS,
        )
        sim = ReductionSimulator(emb, bs, seed=21)
        subset, sign = agnostic_parity_stub(sim, max_size=2, samples=60_000)
        assert subset == 0b11 and sign == 1.0
        achieved, best = agnostic_excess(f, subset, sign)
        assert achieved == best == pytest.approx(1.0)
        assert bs.mq_count == 0
