import pytest

from qloader.circuit import (
    Circuit,
    CircuitBuilder,
    CircuitParseError,
    Gate,
    GateKind,
    Role,
    ccnot,
    clx,
    cnot,
    cs,
    cswap,
    dumps,
    h,
    loads,
    serialized_depth,
    slice_depth,
    swap,
    validate,
    x,
)
from qloader.families import build


def test_arity_is_checked():
    with pytest.raises(ValueError):
        Gate(GateKind.CSWAP, (0, 1))
    with pytest.raises(ValueError):
        Gate(GateKind.H, (0, 1))


def test_operands_distinct():
    with pytest.raises(ValueError):
        cnot(2, 2)
    with pytest.raises(ValueError):
        cswap(0, 1, 0)


def test_classical_bit_only_on_clx():
    with pytest.raises(ValueError):
        Gate(GateKind.CLX, (0,))
    with pytest.raises(ValueError):
        Gate(GateKind.CLX, (0,), 2)
    with pytest.raises(ValueError):
        Gate(GateKind.X, (0,), 1)


def test_disjoint_slice_is_valid():
    c = Circuit(4, ((cswap(0, 1, 2), h(3)),))
    assert validate(c) == []


def test_overlap_reported_once():
    c = Circuit(4, ((cswap(0, 1, 2), x(1)),))
    problems = validate(c)
    assert len(problems) == 1
    assert problems[0].slice_index == 0 and problems[0].gate_index == 1
    assert "qubit 1" in problems[0].reason


def test_out_of_range_operand():
    problems = validate(Circuit(2, ((cnot(0, 2),),)))
    assert problems and "out of range" in problems[0].reason


@pytest.mark.parametrize("family", ["1", "2ne", "2e", "3"])
def test_builder_output_valid_for_n4(family):
    assert validate(build(family, [0, 1, 1, 0]).circuit) == []


def test_depths_of_empty_circuit():
    c = Circuit(3)
    assert slice_depth(c) == 0
    assert serialized_depth(c) == 0


def test_serialized_depth_shared_control():
    k = 5
    # shared control in one slice: invalid as a slice, but the reschedule serializes it
    c = Circuit(1 + 2 * k, (tuple(cswap(0, 1 + 2 * i, 2 + 2 * i) for i in range(k)),))
    assert serialized_depth(c) == k
    assert slice_depth(c) == 1


def test_serialized_depth_disjoint():
    c = Circuit(9, (tuple(cswap(3 * i, 3 * i + 1, 3 * i + 2) for i in range(3)),))
    assert serialized_depth(c) == 1


def test_serialized_never_exceeds_slice_depth_on_valid_circuits():
    for fam in ("1", "2ne", "2e", "3"):
        c = build(fam, [1, 0, 0, 1, 1, 1, 0, 1]).circuit
        assert serialized_depth(c) <= slice_depth(c)


def test_builder_asap_and_barrier():
    b = CircuitBuilder()
    assert b.add(h(0)) == 0
    assert b.add(h(1)) == 0
    assert b.add(cnot(0, 1)) == 1
    assert b.add(x(2)) == 0
    b.barrier()
    assert b.add(x(3)) == 2
    c = b.build()
    assert c.num_qubits == 4 and slice_depth(c) == 3


def test_empty_slices_dropped():
    c = Circuit(2, ((), (x(0),), ()))
    assert len(c.slices) == 1


def test_text_round_trip_exact():
    c = Circuit(
        5,
        ((h(0), clx(1, 1), clx(0, 2)), (cswap(0, 1, 2), cs(3, 4)), (ccnot(0, 1, 2), swap(3, 4))),
        roles={0: Role.ADDRESS, 1: Role.DATA, 2: Role.DISCARDED, 3: Role.ANCILLA},
        free_pool=frozenset({4}),
        outputs=(0, 1),
    )
    text = dumps(c)
    assert loads(text) == c
    assert dumps(loads(text)) == text


def test_family_circuit_round_trip():
    c = build("2e", [1, 0, 1, 1, 0, 0, 1, 0]).circuit
    assert loads(dumps(c)) == c


def test_parse_comments_and_blank_lines():
    c = loads("# header\n\nqubits 2  # two\nH 0\n---\nCX 0 1\n")
    assert c.slices == ((h(0),), (cnot(0, 1),))


@pytest.mark.parametrize(
    "text, line",
    [
        ("H 0\n", 1),
        ("qubits 2\nFOO 1\n", 2),
        ("qubits 2\nCX 0 0\n", 2),
        ("qubits 2\nH 5\n", 2),
        ("qubits 2\nH 0\noutputs 0\n", 3),
        ("qubits 2\nCLX 2 0\n", 2),
        ("qubits 2\nH x\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(CircuitParseError) as err:
        loads(text)
    assert err.value.line_no == line
    assert str(err.value).startswith(f"line {line}:")
