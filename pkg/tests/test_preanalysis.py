from __future__ import annotations

import pytest

from evmhorn.bytecode import assemble, decode
from evmhorn.concrete import run_concrete, word_hash
from evmhorn.preanalysis import CyclicCfg, refine_topological, run_preanalysis


def test_straight_line_constants():
    pa = run_preanalysis(assemble([5, 3, "ADD", 0, "SSTORE", "STOP"]))
    assert pa.resolved
    assert pa.facts.args2[4] == (3, 5)  # ADD sees top=3, below=5
    assert pa.facts.args2[7] == (0, 8)  # SSTORE sees key=0, value=8


def test_diamond_cfg_resolved():
    # 0: PUSH1 cond-from-env; JUMPI to 8; fallthrough stores 2; join at 12.
    code = assemble(
        ["NUMBER", ("PUSH1", 9), "JUMPI",        # block @0 (pcs 0..3)
         2, 0, "SSTORE",                          # block @4 (pcs 4..8)
         "JUMPDEST", 1, 0, "SSTORE",              # @9 (pcs 9..14)
         "JUMPDEST", "STOP"]                      # @15
    )
    pa = run_preanalysis(code)
    assert pa.resolved


def test_jump_edges_and_targets():
    code = assemble([("PUSH1", 4), "JUMP", "STOP", "JUMPDEST", "STOP"])
    pa = run_preanalysis(code)
    assert pa.resolved
    assert pa.cfg.jump_targets[2] == (4,)
    assert (0, 4) in pa.cfg.edges


def test_unknown_jump_target_is_unresolvable():
    code = assemble(["NUMBER", "JUMP", "JUMPDEST", "STOP"])
    pa = run_preanalysis(code)
    assert not pa.resolved
    assert pa.cfg.offending_pcs == (1,)


def test_jump_to_non_jumpdest_is_unresolvable():
    code = assemble([("PUSH1", 3), "JUMP", "STOP", "STOP"])
    pa = run_preanalysis(code)
    assert not pa.resolved


def test_counter_loop_resolves_with_widening():
    # i = 0; while i != 10: i += 1  -- a resolved cyclic CFG.
    code = assemble(
        [0,                                  # 0..1
         ("JUMPDEST",),                      # 2
         "DUP1", ("PUSH1", 10), "EQ",        # 3..6
         ("PUSH1", 16), "JUMPI",             # 7..9
         1, "ADD", ("PUSH1", 2), "JUMP",     # 10..15
         ("JUMPDEST",), "STOP"]              # 16..17
    )
    pa = run_preanalysis(code)
    assert pa.resolved
    assert (2, 16) in pa.cfg.edges and (2, 10) in pa.cfg.edges and (10, 2) in pa.cfg.edges
    assert not pa.cfg.is_acyclic
    with pytest.raises(CyclicCfg):
        refine_topological(pa)


def test_sha3_precomputed_from_block_local_memory():
    # MSTORE 0x2a at offset 0, then SHA3 over those 32 bytes.
    code = assemble([0x2A, 0, "MSTORE", ("PUSH1", 32), 0, "SHA3", 0, "SSTORE", "STOP"])
    pa = run_preanalysis(code)
    sha3_pc = next(i.pc for i in pa.bytecode.instructions if i.name == "SHA3")
    expected = word_hash((0x2A).to_bytes(32, "big"))
    assert pa.facts.results[sha3_pc] == expected
    # The oracle agrees.
    assert run_concrete(code).storage == {0: expected}


def test_exp_precomputed():
    code = assemble([8, 2, "EXP", 0, "SSTORE", "STOP"])  # 2 ** 8
    pa = run_preanalysis(code)
    exp_pc = next(i.pc for i in pa.bytecode.instructions if i.name == "EXP")
    assert pa.facts.results[exp_pc] == 256


def test_environment_values_stay_unknown():
    code = assemble(["NUMBER", 1, "ADD", 0, "SSTORE", "STOP"])
    pa = run_preanalysis(code)
    add_pc = next(i.pc for i in pa.bytecode.instructions if i.name == "ADD")
    assert pa.facts.args2[add_pc] == (1, None)


def test_refine_topological_matches_on_acyclic():
    code = assemble([5, 3, "ADD", 0, "SSTORE", "STOP"])
    pa = run_preanalysis(code)
    refined = refine_topological(pa)
    assert refined.args2 == pa.facts.args2


def _five_block_unresolvable() -> bytes:
    """A five-block program whose loop feeds an unresolvable JUMPI.

    block @0  pushes two zeros and jumps to 7;
    block @7  adds 20 to the top and JUMPIs to it;
    block @12 replaces the operands with a block hash and its number, loops;
    block @20 halts; block @22 would reach a CALL.
    """
    return assemble(
        [0, 0, ("PUSH1", 7), "JUMP",                        # @0: pcs 0..6
         ("JUMPDEST",), ("PUSH1", 20), "ADD", "JUMPI",      # @7: 7,8,10,11
         ("JUMPDEST",), "NUMBER", "DUP1", "BLOCKHASH",      # @12: 12..15
         "SWAP1", ("PUSH1", 7), "JUMP",                     # 16,17,19
         ("JUMPDEST",), "STOP",                              # @20: 20,21
         ("JUMPDEST",), 0, 0, 0, 0, 0, 0, 0, "CALL", "STOP"]  # @22
    )


def test_five_block_loop_is_unresolvable_with_partial_cfg():
    pa = run_preanalysis(_five_block_unresolvable())
    starts = [b.start for b in pa.blocks]
    assert starts == [0, 7, 12, 20, 22]
    assert not pa.resolved
    assert pa.cfg.offending_pcs == (11,)
    required = {(0, 7), (7, 12), (12, 7)}
    assert required <= set(pa.cfg.edges)


def test_fact_soundness_against_oracle_sample():
    """Recorded constant operands must match every concrete execution."""
    code = assemble(
        ["NUMBER", ("PUSH1", 9), "JUMPI",
         5, 0, "SSTORE", "STOP",
         ("JUMPDEST",), 7, 3, "MUL", 1, "SSTORE", "STOP"]
    )
    pa = run_preanalysis(code)
    from evmhorn.concrete import Environment

    for number in (0, 1, 99):
        out = run_concrete(code, Environment(number=number), record=True)
        by_pc = pa.bytecode.by_pc
        for snap in out.visited:
            ins = by_pc.get(snap.pc)
            if ins is None:
                continue
            if snap.pc in pa.facts.args2:
                a, b = pa.facts.args2[snap.pc]
                if a is not None and len(snap.stack) >= 1:
                    assert snap.stack[-1] == a
                if b is not None and len(snap.stack) >= 2:
                    assert snap.stack[-2] == b
