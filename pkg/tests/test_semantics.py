"""End-to-end checks of the bundled abstract semantics."""
from __future__ import annotations

import json
import pathlib
import random

import pytest
from click.testing import CliRunner

from evmhorn.bytecode import assemble, parse_hex
from evmhorn.cli import main
from evmhorn.concrete import (
    Environment,
    MemoryLimitExceeded,
    StepLimitExceeded,
    run_concrete,
)
from evmhorn.semantics.analyze import (
    analyze_assertions,
    analyze_reentrancy,
    analyze_vmtest,
    solved_precisely,
)
from evmhorn.semantics.program import Contract, OutOfScope, build_selectors
from evmhorn.semantics.soundness import abstract_model, uncovered_states, unmangle

from helpers import random_program

VMTESTS = sorted(pathlib.Path(__file__).parent.glob("vmtests/*.json"))

# A contract that guards an external call with a storage lock: the callee
# cannot re-enter past the SLOAD check.
LOCKED_BANK = assemble([
    ("PUSH1", 0), "SLOAD", ("PUSH1", 33), "JUMPI",
    ("PUSH1", 1), ("PUSH1", 0), "SSTORE",
    *([("PUSH1", 0)] * 7), "CALL",
    "POP", ("PUSH1", 0), ("PUSH1", 0), "SSTORE", "STOP",
    "JUMPDEST", "STOP",
])

# The same call with no lock at all.
OPEN_BANK = assemble([*([("PUSH1", 0)] * 7), "CALL", "STOP"])


class TestReentrancy:
    def test_unguarded_call_is_flagged(self):
        contract = Contract.from_bytecode(0, OPEN_BANK)
        assert analyze_reentrancy([contract]).classification == "vulnerable"

    def test_lock_guarded_call_is_proved_safe(self):
        contract = Contract.from_bytecode(0, LOCKED_BANK)
        assert analyze_reentrancy([contract]).classification == "safe"

    def test_verdict_holds_for_every_folding_mode(self):
        for code, expected in ((OPEN_BANK, "vulnerable"), (LOCKED_BANK, "safe")):
            contract = Contract.from_bytecode(0, code)
            for mode in ("none", "linear", "exhaustive"):
                result = analyze_reentrancy([contract], folding=mode)
                assert result.classification == expected, mode


def checked_div(divisor_op, target: int) -> bytes:
    """DIV guarded by an ISZERO check that jumps to INVALID on zero."""
    return assemble([
        divisor_op, ("PUSH1", 17), "DUP2", "ISZERO",
        ("PUSH1", target), "JUMPI",
        "DIV", ("PUSH1", 0), "SSTORE", "STOP", "JUMPDEST", "INVALID",
    ])


class TestAssertions:
    def test_concrete_divisor_proves_guard_dead(self):
        contract = Contract.from_bytecode(0, checked_div(("PUSH1", 5), 14))
        assert analyze_assertions([contract]).classification == "safe"

    def test_unknown_divisor_reaches_the_guard(self):
        contract = Contract.from_bytecode(0, checked_div("CALLVALUE", 13))
        assert analyze_assertions([contract]).classification == "vulnerable"

    def test_no_invalid_instruction_means_no_goals(self):
        contract = Contract.from_bytecode(0, assemble(["STOP"]))
        result = analyze_assertions([contract])
        assert result.results == [] and result.classification == "safe"


class TestScope:
    def test_computed_jump_is_rejected(self):
        # The jump target comes in from the environment.
        code = assemble(["CALLVALUE", "JUMP", "JUMPDEST", "STOP"])
        contract = Contract.from_bytecode(0, code)
        assert contract.scope_problems()
        with pytest.raises(OutOfScope):
            build_selectors([contract])

    def test_delegatecall_is_rejected(self):
        code = assemble([*([("PUSH1", 0)] * 6), "DELEGATECALL", "STOP"])
        contract = Contract.from_bytecode(0, code)
        assert any("DELEGATECALL" in p for p in contract.scope_problems())


class TestSoundness:
    """Every concrete run must stay inside the derived abstraction."""

    ENVS = [
        Environment(),
        Environment(calldata=bytes(range(36)), caller=7, gas=5, number=9),
        Environment(calldata=b"\xff" * 4, timestamp=2**40, origin=3),
    ]

    @pytest.mark.parametrize("prog", [
        [("PUSH1", 5), ("PUSH1", 3), "ADD", ("PUSH1", 0), "SSTORE", "STOP"],
        ["CALLVALUE", ("PUSH1", 7), "MUL", ("PUSH1", 1), "SSTORE", "STOP"],
        [("PUSH1", 42), ("PUSH1", 0), "MSTORE", ("PUSH1", 0), "MLOAD",
         ("PUSH1", 2), "SSTORE", "STOP"],
        [("PUSH1", 0xAB), ("PUSH1", 30), "MSTORE", ("PUSH1", 30), "MLOAD",
         ("PUSH1", 3), "SSTORE", "STOP"],
        [("PUSH1", 1), ("PUSH1", 9), "JUMPI", ("PUSH1", 9), ("PUSH1", 0),
         "JUMPDEST", "STOP"],
        [("PUSH1", 4), ("PUSH1", 0), "SHA3", ("PUSH1", 0), "SSTORE", "STOP"],
        [("PUSH1", 1), "POP", "POP", "STOP"],          # stack underflow
        [("PUSH1", 0), ("PUSH1", 0), "REVERT"],        # exceptional halt
    ])
    def test_concrete_runs_are_covered(self, prog):
        contract = Contract.from_bytecode(0, assemble(prog), known_storage=True)
        model = abstract_model([contract])
        for env in self.ENVS:
            missing, _ = uncovered_states(contract, env, model)
            assert missing == []

    def test_random_programs_are_covered(self):
        rng = random.Random(0xEC)
        for _ in range(40):
            code = random_program(rng)
            contract = Contract.from_bytecode(0, code)
            model = abstract_model([contract])
            for env in self.ENVS:
                try:
                    missing, _ = uncovered_states(contract, env, model)
                except (MemoryLimitExceeded, StepLimitExceeded):
                    continue  # the run itself is not simulatable
                assert missing == [], code.hex()


class TestVmFixtures:
    def test_fixture_corpus_is_large_enough(self):
        assert len(VMTESTS) >= 20

    @pytest.mark.parametrize("path", VMTESTS, ids=lambda p: p.stem)
    def test_fixture_post_state_matches_oracle(self, path):
        spec = json.loads(path.read_text())
        pre = {int(k): int(v) for k, v in spec.get("pre", {}).items()}
        out = run_concrete(parse_hex(spec["code"]), pre_storage=pre)
        assert out.halted
        assert out.storage == {int(k): int(v) for k, v in spec.get("post", {}).items()}

    @pytest.mark.parametrize("path", VMTESTS[:5], ids=lambda p: p.stem)
    def test_fixture_is_solved_precisely(self, path):
        spec = json.loads(path.read_text())
        contract = Contract.from_bytecode(
            0, parse_hex(spec["code"]),
            pre_storage={int(k): int(v) for k, v in spec.get("pre", {}).items()},
            known_storage=True)
        post = {int(k): int(v) for k, v in spec.get("post", {}).items()}
        assert solved_precisely(analyze_vmtest([contract], {0: post}))

    def test_wrong_post_state_is_refuted(self):
        spec = json.loads(VMTESTS[0].read_text())
        contract = Contract.from_bytecode(
            0, parse_hex(spec["code"]),
            pre_storage={int(k): int(v) for k, v in spec.get("pre", {}).items()},
            known_storage=True)
        post = {int(k): int(v) + 1 for k, v in spec.get("post", {}).items()} or {0: 1}
        assert not solved_precisely(analyze_vmtest([contract], {0: post}))


class TestDecoding:
    def test_unmangle_roundtrip(self):
        assert unmangle("MState_0_14") == ("MState", (0, 14))
        assert unmangle("Halt_3") == ("Halt", (3,))
        assert unmangle("Exc_0") == ("Exc", (0,))
        with pytest.raises(ValueError):
            unmangle("Other_1")


class TestCli:
    def test_analyze_reports_vulnerable(self):
        runner = CliRunner()
        result = runner.invoke(main, ["analyze", OPEN_BANK.hex(),
                                      "--property", "reentrancy"])
        assert result.exit_code == 1
        report = json.loads(result.output)
        assert report["reportVersion"] == 1
        assert report["classification"] == "vulnerable"

    def test_analyze_reports_safe(self):
        runner = CliRunner()
        result = runner.invoke(main, ["analyze", LOCKED_BANK.hex(),
                                      "--property", "reentrancy", "--folding", "all"])
        assert result.exit_code == 0
        assert json.loads(result.output)["classification"] == "safe"

    def test_unresolved_jump_exits_rejected(self):
        code = assemble(["CALLVALUE", "JUMP", "JUMPDEST", "STOP"])
        result = CliRunner().invoke(main, ["analyze", code.hex()])
        assert result.exit_code == 3
        assert json.loads(result.output)["classification"] == "out-of-scope"

    def test_vmtest_command(self):
        result = CliRunner().invoke(main, ["vmtest", str(VMTESTS[0])])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["solved"] == report["total"] == 1

    def test_compile_writes_scripts(self, tmp_path):
        result = CliRunner().invoke(main, [
            "compile", OPEN_BANK.hex(), "--out", str(tmp_path)])
        assert result.exit_code == 0
        scripts = list(tmp_path.glob("*.smt2"))
        assert scripts and "(set-logic HORN)" in scripts[0].read_text()

    def test_check_command_accepts_bundled_spec(self):
        from importlib import resources
        spec = resources.files("evmhorn") / "specs" / "evm-base.hrt"
        with resources.as_file(spec) as path:
            result = CliRunner().invoke(main, ["check", str(path)])
        assert result.exit_code == 0 and "ok" in result.output
