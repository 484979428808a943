"""Lowering passes and reversible lowering of classical netlists.

Gate passes replace one gate by a short sequence acting on the same
qubits.  A slice whose gates are replaced is split into sub-slices, the
t-th gate of every replacement landing in sub-slice t, so disjointness
inside a slice survives every pass.

Netlist text format::

    # comment
    in a b c
    gate NAND a b -> w1
    gate NOT c -> w2
    gate XOR w1 w2 -> y
    out y

``in`` and ``out`` may repeat; names are appended in order.  Every wire is
written exactly once (inputs count as written) before it is read.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    Circuit,
    CircuitBuilder,
    Gate,
    GateKind,
    Role,
    ccnot,
    cnot,
    cs,
    csdg,
    h,
    validate,
    x,
)
from .simulator import compare_unitaries, unitary_of

CSWAP_VARIANTS = ("three_toffoli", "toffoli_sandwich")


@dataclass(frozen=True)
class PassReport:
    name: str
    before: dict[str, int]
    after: dict[str, int]
    ancillas_added: int = 0
    verdict: str | None = None
    details: dict = field(default_factory=dict)

    def delta(self) -> dict[str, int]:
        kinds = sorted(set(self.before) | set(self.after))
        return {k: self.after.get(k, 0) - self.before.get(k, 0) for k in kinds}


def _counts(circuit: Circuit) -> dict[str, int]:
    return {k.value: v for k, v in sorted(circuit.gate_counts().items(), key=lambda kv: kv[0].value)}


def _rewrite(circuit: Circuit, rule: Callable[[Gate], Sequence[Gate] | None]) -> Circuit:
    slices: list[tuple[Gate, ...]] = []
    for sl in circuit.slices:
        parts = [rule(g) or (g,) for g in sl]
        width = max(len(p) for p in parts)
        for t in range(width):
            slices.append(tuple(p[t] for p in parts if t < len(p)))
    return circuit.replace(slices=tuple(slices))


def swap_to_cnot(g: Gate) -> list[Gate] | None:
    if g.kind is not GateKind.SWAP:
        return None
    a, b = g.operands
    return [cnot(a, b), cnot(b, a), cnot(a, b)]


def cswap_three_toffoli(g: Gate) -> list[Gate] | None:
    if g.kind is not GateKind.CSWAP:
        return None
    c, a, b = g.operands
    return [ccnot(c, a, b), ccnot(c, b, a), ccnot(c, a, b)]


def cswap_toffoli_sandwich(g: Gate) -> list[Gate] | None:
    # Outer CNOTs run a -> b; the Toffoli uses the control and b to flip a.
    if g.kind is not GateKind.CSWAP:
        return None
    c, a, b = g.operands
    return [cnot(a, b), ccnot(c, b, a), cnot(a, b)]


def toffoli_cs(g: Gate) -> list[Gate] | None:
    """Two-qubit-gate Toffoli: H, controlled-S, CNOT, controlled-S^dag, CNOT, controlled-S, H.

    On the target's |1> branch the controlled phases multiply to
    i^(b - (a xor b) + a) = (-1)^(ab); the Hadamards turn that into the flip.
    """
    if g.kind is not GateKind.CCNOT:
        return None
    a, b, c = g.operands
    return [h(c), cs(b, c), cnot(a, b), csdg(b, c), cnot(a, b), cs(a, c), h(c)]


def _report(name: str, before: Circuit, after: Circuit, **extra) -> PassReport:
    return PassReport(name, _counts(before), _counts(after), **extra)


def lower_swap_to_cnot(circuit: Circuit) -> tuple[Circuit, PassReport]:
    out = _rewrite(circuit, swap_to_cnot)
    return out, _report("swap-to-cnot", circuit, out)


def lower_cswap(circuit: Circuit, variant: str = "three_toffoli") -> tuple[Circuit, PassReport]:
    rules = {"three_toffoli": cswap_three_toffoli, "toffoli_sandwich": cswap_toffoli_sandwich}
    if variant not in rules:
        raise ValueError(f"unknown CSWAP variant {variant!r}; expected one of {CSWAP_VARIANTS}")
    out = _rewrite(circuit, rules[variant])
    return out, _report(f"cswap-{variant}", circuit, out)


def toffoli_cs_verdict() -> tuple[str, float]:
    """Compare the controlled-S sequence with CCNOT on three qubits, brute force."""
    reference = unitary_of(Circuit(3, ((ccnot(0, 1, 2),),)))
    lowered = Circuit(3, tuple((g,) for g in toffoli_cs(ccnot(0, 1, 2))))
    cmp = compare_unitaries(unitary_of(lowered), reference)
    return cmp.verdict, cmp.max_deviation


def lower_toffoli_cs(circuit: Circuit) -> tuple[Circuit, PassReport]:
    out = _rewrite(circuit, toffoli_cs)
    verdict, dev = toffoli_cs_verdict()
    return out, _report("toffoli-cs", circuit, out, verdict=verdict, details={"max_deviation": dev})


PIPELINE_PASSES = {
    "swap": lower_swap_to_cnot,
    "cswap3": lambda c: lower_cswap(c, "three_toffoli"),
    "cswap-sandwich": lambda c: lower_cswap(c, "toffoli_sandwich"),
    "toffoli-cs": lower_toffoli_cs,
}
ALL_PASSES = ("swap", "cswap-sandwich", "toffoli-cs")


def run_passes(circuit: Circuit, names: Sequence[str]) -> tuple[Circuit, list[PassReport]]:
    reports = []
    for name in names:
        if name not in PIPELINE_PASSES:
            raise ValueError(f"unknown pass {name!r}; expected one of {', '.join(PIPELINE_PASSES)}")
        circuit, rep = PIPELINE_PASSES[name](circuit)
        reports.append(rep)
    return circuit, reports


# ---------------------------------------------------------------------------
# classical netlists

NET_ARITY = {"NOT": 1, "AND": 2, "OR": 2, "XOR": 2, "NAND": 2}


@dataclass(frozen=True)
class NetGate:
    op: str
    inputs: tuple[str, ...]
    output: str

    def __str__(self) -> str:
        return f"gate {self.op} {' '.join(self.inputs)} -> {self.output}"


@dataclass(frozen=True)
class Netlist:
    inputs: tuple[str, ...]
    gates: tuple[NetGate, ...]
    outputs: tuple[str, ...]

    def __post_init__(self) -> None:
        problems = check_netlist(self)
        if problems:
            raise ValueError(problems[0])


class NetlistParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def check_netlist(net: Netlist) -> list[str]:
    problems = []
    written: set[str] = set()
    for w in net.inputs:
        if w in written:
            problems.append(f"input {w!r} declared twice")
        written.add(w)
    for i, g in enumerate(net.gates):
        if g.op not in NET_ARITY:
            problems.append(f"gate {i}: unknown op {g.op!r}")
            continue
        if len(g.inputs) != NET_ARITY[g.op]:
            problems.append(f"gate {i}: {g.op} takes {NET_ARITY[g.op]} input(s)")
        for w in g.inputs:
            if w not in written:
                problems.append(f"gate {i}: wire {w!r} read before it is written")
        if g.output in written:
            problems.append(f"gate {i}: wire {g.output!r} written twice")
        written.add(g.output)
    for w in net.outputs:
        if w not in written:
            problems.append(f"output {w!r} is never written")
    return problems


def parse_netlist(text: str) -> Netlist:
    inputs: list[str] = []
    gates: list[NetGate] = []
    outputs: list[str] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "in":
            inputs.extend(rest)
        elif head == "out":
            outputs.extend(rest)
        elif head == "gate":
            if len(rest) < 3 or rest[-2] != "->":
                raise NetlistParseError(line_no, "expected 'gate OP a [b] -> w'")
            op, args, out = rest[0].upper(), tuple(rest[1:-2]), rest[-1]
            if op not in NET_ARITY:
                raise NetlistParseError(line_no, f"unknown op {rest[0]!r}")
            if len(args) != NET_ARITY[op]:
                raise NetlistParseError(line_no, f"{op} takes {NET_ARITY[op]} input(s)")
            gates.append(NetGate(op, args, out))
        else:
            raise NetlistParseError(line_no, f"unknown statement {head!r}")
    try:
        return Netlist(tuple(inputs), tuple(gates), tuple(outputs))
    except ValueError as exc:
        raise NetlistParseError(0, str(exc)) from None


def dump_netlist(net: Netlist) -> str:
    lines = []
    if net.inputs:
        lines.append("in " + " ".join(net.inputs))
    lines.extend(str(g) for g in net.gates)
    if net.outputs:
        lines.append("out " + " ".join(net.outputs))
    return "\n".join(lines) + "\n"


_EVAL = {
    "NOT": lambda a: 1 - a,
    "AND": lambda a, b: a & b,
    "OR": lambda a, b: a | b,
    "XOR": lambda a, b: a ^ b,
    "NAND": lambda a, b: 1 - (a & b),
}


def evaluate(net: Netlist, values: Sequence[int]) -> tuple[int, ...]:
    if len(values) != len(net.inputs):
        raise ValueError(f"expected {len(net.inputs)} input values, got {len(values)}")
    wires = dict(zip(net.inputs, (int(v) for v in values)))
    for g in net.gates:
        wires[g.output] = _EVAL[g.op](*(wires[w] for w in g.inputs))
    return tuple(wires[w] for w in net.outputs)


class _Polarity:
    """Qubit-per-wire bookkeeping for reversible lowering.

    A wire is (qubit, c).  With t the parity of X gates applied to the
    qubit so far, the wire's value is phys(qubit) xor t xor c.  NOT only
    flips c, so it costs neither a gate nor an ancilla; an X is emitted
    lazily when a reader needs the other physical polarity.
    """

    def __init__(self, builder: CircuitBuilder):
        self.b = builder
        self.toggled: dict[int, int] = {}

    def align(self, wire: tuple[int, int], negate: int = 0) -> int:
        q, c = wire
        if self.toggled.get(q, 0) != c ^ negate:
            self.b.add(x(q))
            self.toggled[q] = self.toggled.get(q, 0) ^ 1
        return q

    def offset(self, wire: tuple[int, int]) -> int:
        q, c = wire
        return self.toggled.get(q, 0) ^ c


def lower_netlist_reversible(net: Netlist) -> tuple[Circuit, PassReport]:
    """Compile a netlist into X/CNOT/CCNOT gates, one fresh ancilla per non-NOT gate.

    Inputs are qubits ``0..len(inputs)-1``.  The returned circuit's
    ``outputs`` list the qubits that hold the netlist outputs; inputs are
    left possibly inverted and ancillas are not uncomputed.
    """
    n_in = len(net.inputs)
    b = CircuitBuilder(n_in)
    pol = _Polarity(b)
    wires: dict[str, tuple[int, int]] = {w: (i, 0) for i, w in enumerate(net.inputs)}
    next_q = n_in

    def fresh() -> int:
        nonlocal next_q
        next_q += 1
        b.num_qubits = max(b.num_qubits, next_q)
        return next_q - 1

    for g in net.gates:
        ins = [wires[w] for w in g.inputs]
        if g.op == "NOT":
            q, c = ins[0]
            wires[g.output] = (q, c ^ 1)
            continue
        anc = fresh()
        if g.op == "XOR":
            (qu, _), (qv, _) = ins
            b.add(cnot(qu, anc))
            b.add(cnot(qv, anc))
            wires[g.output] = (anc, pol.offset(ins[0]) ^ pol.offset(ins[1]))
            continue
        u, v = ins
        negate = 1 if g.op == "OR" else 0
        if u[0] == v[0]:
            if u[1] == v[1]:
                # op(w, w) is w for AND and OR, not w for NAND
                b.add(cnot(pol.align(u), anc))
                wires[g.output] = (anc, 1 if g.op == "NAND" else 0)
            else:
                # op(w, not w): AND -> 0, NAND -> 1, OR -> 1
                wires[g.output] = (anc, 0 if g.op == "AND" else 1)
            continue
        qu, qv = pol.align(u, negate), pol.align(v, negate)
        b.add(ccnot(qu, qv, anc))
        if g.op == "AND":
            wires[g.output] = (anc, 0)
        else:
            # NAND: not(u and v); OR: not(not u and not v)
            b.add(x(anc))
            pol.toggled[anc] = 1
            wires[g.output] = (anc, 1)

    gate_ancillas = next_q - n_in
    outputs: list[int] = []
    for w in net.outputs:
        q, c = wires[w]
        if q in outputs:
            # q is already fixed as an earlier output; copy it and correct the copy
            copy = fresh()
            b.add(cnot(q, copy))
            if pol.offset((q, c)):
                b.add(x(copy))
            q = copy
        else:
            pol.align((q, c))
        outputs.append(q)

    roles = {q: Role.DATA for q in range(n_in)}
    roles.update({q: Role.ANCILLA for q in range(n_in, next_q)})
    circuit = b.build(roles=roles, outputs=tuple(outputs))
    problems = validate(circuit)
    assert not problems, problems
    before = dict(sorted(Counter(g.op for g in net.gates).items()))
    return circuit, PassReport(
        "netlist-reversible",
        before,
        _counts(circuit),
        ancillas_added=next_q - n_in,
        details={"gate_ancillas": gate_ancillas, "output_copies": next_q - n_in - gate_ancillas},
    )


def basis_outputs(circuit: Circuit, inputs: Sequence[int]) -> tuple[int, ...]:
    """Run a permutation circuit on a basis input and read ``circuit.outputs``.

    Inputs fill the first qubits; the rest start at 0.  Pure bit arithmetic,
    so it scales to any width.
    """
    state = np.zeros(circuit.num_qubits, dtype=np.int8)
    state[: len(inputs)] = inputs
    for g in circuit.gates():
        ops = g.operands
        if g.kind is GateKind.X:
            state[ops[0]] ^= 1
        elif g.kind is GateKind.CLX:
            state[ops[0]] ^= g.bit
        elif g.kind is GateKind.CNOT:
            state[ops[1]] ^= state[ops[0]]
        elif g.kind is GateKind.CCNOT:
            state[ops[2]] ^= state[ops[0]] & state[ops[1]]
        elif g.kind is GateKind.SWAP:
            state[[ops[0], ops[1]]] = state[[ops[1], ops[0]]]
        elif g.kind is GateKind.CSWAP:
            if state[ops[0]]:
                state[[ops[1], ops[2]]] = state[[ops[2], ops[1]]]
        else:
            raise ValueError(f"{g.kind.value} is not a classical reversible gate")
    return tuple(int(state[q]) for q in circuit.outputs)
