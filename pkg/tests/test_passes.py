import itertools
import random

import numpy as np
import pytest

from oracles import dense_unitary
from qloader.circuit import Circuit, GateKind, ccnot, clx, cnot, cswap, h, swap, validate, x
from qloader.families import build
from qloader.passes import (
    NetGate,
    Netlist,
    NetlistParseError,
    basis_outputs,
    dump_netlist,
    evaluate,
    toffoli_cs_verdict,
    lower_cswap,
    lower_netlist_reversible,
    lower_swap_to_cnot,
    lower_toffoli_cs,
    parse_netlist,
    run_passes,
)
from qloader.simulator import loaded_fidelity, run, unitary_of


def seq(k, gates):
    return Circuit(k, tuple((g,) for g in gates))


def test_swap_lowering_exact():
    c = seq(2, [swap(0, 1)])
    out, rep = lower_swap_to_cnot(c)
    assert out.gate_counts() == {GateKind.CNOT: 3}
    assert np.array_equal(unitary_of(out), unitary_of(c))
    assert rep.delta() == {"CX": 3, "SWAP": -1}


def test_swap_lowering_leaves_other_gates():
    c = seq(3, [h(0), cswap(0, 1, 2)])
    out, _ = lower_swap_to_cnot(c)
    assert out == c


@pytest.mark.parametrize("variant, counts", [
    ("three_toffoli", {GateKind.CCNOT: 3}),
    ("toffoli_sandwich", {GateKind.CCNOT: 1, GateKind.CNOT: 2}),
])
def test_cswap_lowering_exact(variant, counts):
    c = seq(3, [cswap(0, 1, 2)])
    out, _ = lower_cswap(c, variant)
    assert out.gate_counts() == counts
    u = unitary_of(out)
    assert np.array_equal(u, unitary_of(c))
    assert np.array_equal(u, dense_unitary(3, [("CSWAP", (0, 1, 2), None)]))


def test_cswap_lowering_idempotent_without_cswaps():
    c = seq(3, [h(0), ccnot(0, 1, 2)])
    once, _ = lower_cswap(c)
    twice, _ = lower_cswap(once)
    assert once == twice == c


def test_cswap_count_arithmetic():
    res = build("2ne", [0, 1, 1, 0, 1, 0, 0, 1])
    k = res.circuit.gate_counts()[GateKind.CSWAP]
    out, rep = lower_cswap(res.circuit, "three_toffoli")
    assert rep.after["CCX"] == 3 * k and "CSWAP" not in rep.after
    out, rep = lower_cswap(res.circuit, "toffoli_sandwich")
    assert rep.after["CCX"] == k and rep.after["CX"] == 2 * k


def test_unknown_variant():
    with pytest.raises(ValueError):
        lower_cswap(Circuit(1), "nope")


def test_toffoli_cs_sequence_and_verdict():
    c = seq(3, [ccnot(0, 1, 2)])
    out, rep = lower_toffoli_cs(c)
    kinds = [g.kind for g in out.gates()]
    assert kinds == [GateKind.H, GateKind.CS, GateKind.CNOT, GateKind.CSDG,
                     GateKind.CNOT, GateKind.CS, GateKind.H]
    assert rep.verdict == "exact"
    assert np.allclose(unitary_of(out), unitary_of(c), atol=1e-12)
    # the oracle agrees, independently of the package simulator
    from oracles import circuit_gates
    assert np.allclose(dense_unitary(3, circuit_gates(out)), dense_unitary(3, [("CCX", (0, 1, 2), None)]))


def test_toffoli_cs_identity_on_toffoli_free():
    c = seq(2, [h(0), cnot(0, 1)])
    assert lower_toffoli_cs(c)[0] == c


def test_toffoli_cs_verdict_function():
    verdict, dev = toffoli_cs_verdict()
    assert verdict == "exact" and dev < 1e-12


def random_reversible(rng, k, n):
    gates = []
    for _ in range(n):
        kind = rng.choice(["x", "cx", "ccx", "swap", "cswap", "h"])
        q = rng.sample(range(k), 3)
        gates.append({"x": lambda: x(q[0]), "cx": lambda: cnot(q[0], q[1]),
                      "ccx": lambda: ccnot(*q), "swap": lambda: swap(q[0], q[1]),
                      "cswap": lambda: cswap(*q), "h": lambda: h(q[0])}[kind]())
    return seq(k, gates)


@pytest.mark.parametrize("seed", range(10))
def test_exact_passes_preserve_unitary(seed):
    rng = random.Random(seed)
    c = random_reversible(rng, rng.randint(3, 8), 25)
    for lowered in (lower_swap_to_cnot(c)[0], lower_cswap(c, "three_toffoli")[0],
                    lower_cswap(c, "toffoli_sandwich")[0]):
        assert validate(lowered) == []
        assert np.array_equal(unitary_of(lowered), unitary_of(c))


@pytest.mark.parametrize("seed", range(5))
def test_toffoli_cs_pass_on_basis_inputs(seed):
    rng = random.Random(seed)
    k = rng.randint(3, 6)
    c = random_reversible(rng, k, 15)
    lowered, _ = lower_toffoli_cs(c)
    assert validate(lowered) == []
    u, v = unitary_of(lowered), unitary_of(c)
    assert np.allclose(np.abs(u), np.abs(v), atol=1e-12)


def test_parallel_slices_stay_disjoint_after_lowering():
    c = Circuit(6, ((cswap(0, 1, 2), cswap(3, 4, 5)),))
    out, _ = lower_cswap(c, "toffoli_sandwich")
    assert len(out.slices) == 3 and all(len(sl) == 2 for sl in out.slices)
    assert validate(out) == []


def test_family2e_fully_lowered_keeps_output():
    res = build("2e", [0, 1, 1, 0])
    lowered, reports = run_passes(res.circuit, ["swap", "cswap-sandwich", "toffoli-cs"])
    assert validate(lowered) == []
    assert {GateKind.CSWAP, GateKind.CCNOT} & set(lowered.gate_counts()) == set()
    fid = loaded_fidelity(run(lowered), lowered.outputs, res.target_state)
    assert fid >= 1 - 1e-12
    assert reports[-1].verdict == "exact"


# --- netlists ----------------------------------------------------------------

FIXTURE = """\
# three-gate decompressor fixture
in a b c
gate NAND a b -> w1
gate XOR w1 c -> w2
gate OR w2 a -> y
out y w1
"""


def exhaustive_check(net):
    circ, rep = lower_netlist_reversible(net)
    assert validate(circ) == []
    assert not any(g.kind is GateKind.H for g in circ.gates())
    for vals in itertools.product([0, 1], repeat=len(net.inputs)):
        assert basis_outputs(circ, vals) == evaluate(net, vals), vals
        # cross-check one path through the state-vector simulator
    return circ, rep


def test_single_nand():
    net = Netlist(("a", "b"), (NetGate("NAND", ("a", "b"), "y"),), ("y",))
    circ, _ = exhaustive_check(net)
    state = run(circ, "11" + "0" * (circ.num_qubits - 2))
    label = state.label(state.indices[0])
    assert label[circ.outputs[0]] == "0"


def test_single_xor_truth_table():
    net = Netlist(("a", "b"), (NetGate("XOR", ("a", "b"), "y"),), ("y",))
    circ, _ = exhaustive_check(net)
    assert [basis_outputs(circ, v)[0] for v in itertools.product([0, 1], repeat=2)] == [0, 1, 1, 0]


def test_fixture_netlist():
    net = parse_netlist(FIXTURE)
    circ, rep = exhaustive_check(net)
    assert rep.ancillas_added == 3
    for vals in itertools.product([0, 1], repeat=3):
        state = run(circ, "".join(map(str, vals)) + "0" * (circ.num_qubits - 3))
        label = state.label(state.indices[0])
        assert tuple(int(label[q]) for q in circ.outputs) == evaluate(net, vals)


def test_not_costs_no_ancilla():
    text = "in a b\ngate NOT a -> na\ngate NOT b -> nb\ngate AND na nb -> y\ngate NOT y -> z\nout z\n"
    net = parse_netlist(text)
    circ, rep = exhaustive_check(net)
    assert rep.ancillas_added == 1
    assert circ.num_qubits == 3


def test_degenerate_same_wire_gates():
    text = (
        "in a\ngate NOT a -> na\n"
        "gate AND a na -> z0\ngate OR a na -> o1\ngate NAND a a -> n1\n"
        "gate XOR a na -> x1\ngate AND a a -> c1\n"
        "out z0 o1 n1 x1 c1 a na\n"
    )
    exhaustive_check(parse_netlist(text))


@pytest.mark.parametrize("seed", range(20))
def test_random_netlists(seed):
    rng = random.Random(seed)
    n_in = rng.randint(1, 5)
    wires = [f"i{k}" for k in range(n_in)]
    gates = []
    for k in range(rng.randint(1, 12)):
        op = rng.choice(["NOT", "AND", "OR", "XOR", "NAND"])
        args = tuple(rng.choice(wires) for _ in range(1 if op == "NOT" else 2))
        gates.append(NetGate(op, args, f"w{k}"))
        wires.append(f"w{k}")
    outs = tuple(rng.sample(wires, rng.randint(1, min(4, len(wires)))))
    net = Netlist(tuple(wires[:n_in]), tuple(gates), outs)
    circ, rep = exhaustive_check(net)
    assert rep.details["gate_ancillas"] == sum(g.op != "NOT" for g in gates)


def test_netlist_round_trip():
    net = parse_netlist(FIXTURE)
    text = dump_netlist(net)
    assert parse_netlist(text) == net
    assert dump_netlist(parse_netlist(text)) == text


@pytest.mark.parametrize("text", [
    "in a\ngate AND a b -> y\nout y\n",
    "in a b\ngate AND a b -> a\nout a\n",
    "in a\ngate NOT a -> y\ngate NOT a -> y\nout y\n",
    "in a\nout y\n",
    "in a\ngate FOO a -> y\n",
    "in a\ngate AND a -> y\n",
    "in a\nwire x\n",
])
def test_bad_netlists_rejected(text):
    with pytest.raises(NetlistParseError):
        parse_netlist(text)
