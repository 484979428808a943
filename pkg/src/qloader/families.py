"""Data-loading circuit families.

* Family #1 loads each bit into its own qubit with one classically
  controlled X: depth one, one qubit per bit.
* Family #2 builds a bottom-up tree of controlled swaps.  Stage ``s`` pairs
  up the registers left by stage ``s-1`` (each ``s-1`` qubits wide plus the
  data qubit), puts a fresh control into |+> and swaps the pair position by
  position.  The surviving register is ``[c_root, ..., c_1, data]`` and
  holds sum_i |i>|b_i> with uniform amplitudes.  The erasure variant runs
  the parity disentangler F after every swap and recycles qubits whose
  values are classically known afterwards.
* Family #3 is family #2 with each stage's control fanned out into a cat
  state by a CNOT tree so that the stage's swaps share one time slice.

Bit strings are padded with zeros up to a power of two.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, CircuitBuilder, Role, ccnot, clx, cnot, cswap, h
from .simulator import MAX_QUBITS, StateVector

FAMILIES = ("1", "2ne", "2e", "3")


def parse_bits(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        raise ValueError("empty bit string")
    if set(text) - {"0", "1"}:
        raise ValueError(f"bit string may contain only 0 and 1: {text!r}")
    return tuple(int(c) for c in text)


def bits_from_bytes(data: bytes) -> tuple[int, ...]:
    """Raw bytes to bits, most significant bit of each byte first."""
    if not data:
        raise ValueError("empty bit file")
    return tuple(int(b) for b in np.unpackbits(np.frombuffer(data, dtype=np.uint8)))


def address_bits(n_bits: int) -> int:
    """Number of address qubits n = ceil(log2 N); 0 for a single bit."""
    if n_bits < 1:
        raise ValueError("need at least one bit")
    return (n_bits - 1).bit_length()


def pad_bits(bits: Sequence[int]) -> tuple[int, ...]:
    n = address_bits(len(bits))
    return tuple(bits) + (0,) * (2**n - len(bits))


def target_state(bits: Sequence[int]) -> StateVector:
    """sum_i 2^(-n/2) |i>|b_i> over the padded bits, address MSB first."""
    padded = pad_bits(bits)
    n = address_bits(len(padded))
    amp = 2.0 ** (-n / 2)
    return StateVector.from_mapping(n + 1, {(i << 1) | b: amp for i, b in enumerate(padded)})


@dataclass(frozen=True)
class Erasure:
    """One application of the disentangler F after a swap."""

    stage: int
    control: int
    keep: int
    discard: int
    ancilla: int
    f_slice: int  # slice holding the Toffoli of F
    pooled: bool
    discard_value: int | None = None  # classical values reset away when pooled
    ancilla_value: int | None = None


@dataclass(frozen=True)
class Release:
    """Qubits returned to the free pool once ``slice_index`` has run."""

    stage: int
    qubits: tuple[int, ...]
    slice_index: int


@dataclass(frozen=True)
class StageInfo:
    stage: int
    width: int  # swaps per control
    controls: tuple[int, ...]
    hadamard: range
    fanout: range = range(0)
    cswap: range = range(0)
    unfan: range = range(0)
    cats: tuple[tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class LoadResult:
    family: str
    bits: tuple[int, ...]
    padded: tuple[int, ...]
    n: int
    circuit: Circuit
    output_qubits: tuple[int, ...]
    discarded_qubits: tuple[int, ...]
    target_state: StateVector | None
    erasures: tuple[Erasure, ...] = ()
    releases: tuple[Release, ...] = ()
    stages: tuple[StageInfo, ...] = ()
    clx_resets: int = 0
    loads: int = field(default=0)

    @property
    def peak_qubits(self) -> int:
        return self.circuit.num_qubits

    @property
    def final_qubits(self) -> int:
        return self.circuit.num_qubits - len(self.circuit.free_pool)


class QubitAllocator:
    """Hands out qubits known to be |0>, preferring recycled ones."""

    def __init__(self, first_fresh: int):
        self.next_fresh = first_fresh
        self.pool: list[int] = []
        self.clean: set[int] = set()

    def take(self) -> int:
        if self.pool:
            q = self.pool.pop(0)
        else:
            q = self.next_fresh
            self.next_fresh += 1
            self.clean.add(q)
        return q

    def give_back(self, qubits: Sequence[int]) -> None:
        self.pool.extend(qubits)
        self.pool.sort()
        self.clean.update(qubits)

    def dirty(self, q: int) -> None:
        self.clean.discard(q)


def disentangle_pair(
    builder: CircuitBuilder,
    control: int,
    keep: int,
    discard: int,
    ancilla: int,
    allocator: QubitAllocator | None = None,
) -> int:
    """Append F: CNOT keep->a, CNOT discard->a, Toffoli (control, a) -> discard.

    Meant to follow ``CSWAP(control; keep, discard)`` directly.  When the
    swapped values were classical bits (v_keep, v_discard), afterwards the
    ancilla holds v_keep XOR v_discard and the discarded qubit holds
    v_discard, both independent of the control.  Returns the Toffoli's slice.
    """
    if allocator is not None:
        if ancilla not in allocator.clean:
            raise ValueError(f"ancilla {ancilla} is not a fresh |0> qubit")
        allocator.dirty(ancilla)
    builder.add(cnot(keep, ancilla))
    builder.add(cnot(discard, ancilla))
    return builder.add(ccnot(control, ancilla, discard))


def build_family1(bits: Sequence[int]) -> LoadResult:
    bits = tuple(bits)
    if not bits:
        raise ValueError("need at least one bit")
    b = CircuitBuilder(len(bits))
    for q, bit in enumerate(bits):
        b.add(clx(bit, q))
    outputs = tuple(range(len(bits)))
    circuit = b.build(roles={q: Role.DATA for q in outputs}, outputs=outputs)
    return LoadResult(
        family="1",
        bits=bits,
        padded=bits,
        n=0,
        circuit=circuit,
        output_qubits=outputs,
        discarded_qubits=(),
        # past 62 qubits the label no longer fits the simulator's integers
        target_state=StateVector.basis(bits) if len(bits) <= MAX_QUBITS else None,
        loads=len(bits),
    )


def _tree_layout(n_bits: int, n: int) -> tuple[list[int], list[list[int]], int]:
    """Place data and control qubits the way the N=4 drawing does.

    Stage-1 blocks take consecutive triples ``[control, d_2j, d_2j+1]``;
    controls of later stages follow in stage order with the root last.
    Returns (data qubits, controls per stage, number of qubits used).
    """
    if n == 0:
        return [0], [], 1
    data: list[int] = []
    controls: list[list[int]] = [[]]
    for j in range(n_bits // 2):
        base = 3 * j
        controls[0].append(base)
        data.extend([base + 1, base + 2])
    nxt = 3 * (n_bits // 2)
    for s in range(2, n + 1):
        count = n_bits >> s
        controls.append(list(range(nxt, nxt + count)))
        nxt += count
    return data, controls, nxt


class _Known:
    """Tracks which qubits hold a classically known basis value."""

    def __init__(self):
        self.value: dict[int, int] = {}

    def get(self, q: int) -> int | None:
        return self.value.get(q)

    def set(self, q: int, v: int | None) -> None:
        if v is None:
            self.value.pop(q, None)
        else:
            self.value[q] = v


def _cat_rounds(size: int) -> list[list[tuple[int, int]]]:
    """CNOT doubling tree over positions 0..size-1 (size a power of two).

    Round r copies position i onto position 2^r - 1 - i for i < 2^(r-1),
    so position 0 first feeds 1, then 0 feeds 3 and 1 feeds 2, and so on.
    """
    rounds = []
    r = 1
    while (1 << (r - 1)) < size:
        half = 1 << (r - 1)
        rounds.append([(i, (1 << r) - 1 - i) for i in range(half)])
        r += 1
    return rounds


def _build_tree(bits: Sequence[int], family: str) -> LoadResult:
    bits = tuple(bits)
    if not bits:
        raise ValueError("need at least one bit")
    padded = pad_bits(bits)
    n_bits = len(padded)
    n = address_bits(n_bits)
    erase = family == "2e"
    fanout = family == "3"

    data, controls, used = _tree_layout(n_bits, n)
    alloc = QubitAllocator(used)
    b = CircuitBuilder(used)
    known = _Known()
    roles: dict[int, Role] = {q: Role.DATA for q in data}
    erasures: list[Erasure] = []
    releases: list[Release] = []
    stages: list[StageInfo] = []
    resets = 0

    for q, bit in zip(data, padded):
        b.add(clx(bit, q))
        known.set(q, bit)
    registers = [[q] for q in data]

    for s in range(1, n + 1):
        if s > 1:
            b.barrier()
        ctrl = controls[s - 1]
        h_slices = [b.add(h(c)) for c in ctrl]
        for c in ctrl:
            roles[c] = Role.ADDRESS
        hadamard = range(min(h_slices), max(h_slices) + 1)
        width = s  # register width entering this stage
        pending: list[int] = []
        cats: list[list[int]] = []
        fan_sl: list[int] = []
        swap_sl: list[int] = []
        unfan_sl: list[int] = []

        if fanout:
            size = 1 << (width - 1).bit_length() if width > 1 else 1
            rounds = _cat_rounds(size)
            for c in ctrl:
                cat = [c] + [alloc.take() for _ in range(size - 1)]
                for a in cat[1:]:
                    alloc.dirty(a)
                    roles[a] = Role.ANCILLA
                cats.append(cat)
            for rnd in rounds:
                for cat in cats:
                    fan_sl.extend(b.add(cnot(cat[i], cat[t])) for i, t in rnd)

        new_registers = []
        for j, c in enumerate(ctrl):
            reg_a, reg_b = registers[2 * j], registers[2 * j + 1]
            for i in range(width):
                qa, qb = reg_a[i], reg_b[i]
                va, vb = known.get(qa), known.get(qb)
                sw_ctrl = cats[j][i] if fanout else c
                swap_sl.append(b.add(cswap(sw_ctrl, qa, qb)))
                same = va is not None and va == vb
                known.set(qa, va if same else None)
                known.set(qb, vb if same else None)
                roles[qb] = Role.DISCARDED
                if erase:
                    anc = alloc.take()
                    roles[anc] = Role.ANCILLA
                    f_slice = disentangle_pair(b, c, qa, qb, anc, alloc)
                    pooled = va is not None and vb is not None
                    if pooled:
                        b.add(clx(vb, qb))
                        b.add(clx(va ^ vb, anc))
                        resets += 2
                        pending.extend([qb, anc])
                    erasures.append(
                        Erasure(
                            stage=s,
                            control=c,
                            keep=qa,
                            discard=qb,
                            ancilla=anc,
                            f_slice=f_slice,
                            pooled=pooled,
                            discard_value=vb if pooled else None,
                            ancilla_value=(va ^ vb) if pooled else None,
                        )
                    )
            new_registers.append([c] + reg_a)

        if fanout:
            for rnd in reversed(_cat_rounds(len(cats[0]))):
                for cat in cats:
                    unfan_sl.extend(b.add(cnot(cat[i], cat[t])) for i, t in rnd)
            for cat in cats:
                pending.extend(cat[1:])

        if pending:
            last = b.depth - 1
            releases.append(Release(s, tuple(sorted(pending)), last))
            alloc.give_back(pending)
        registers = new_registers
        stages.append(
            StageInfo(
                stage=s,
                width=width,
                controls=tuple(ctrl),
                hadamard=hadamard,
                fanout=range(min(fan_sl), max(fan_sl) + 1) if fan_sl else range(0),
                cswap=range(min(swap_sl), max(swap_sl) + 1),
                unfan=range(min(unfan_sl), max(unfan_sl) + 1) if unfan_sl else range(0),
                cats=tuple(tuple(cat) for cat in cats),
            )
        )

    outputs = tuple(registers[0])
    pool = frozenset(alloc.pool)
    for q in pool:
        roles[q] = Role.ANCILLA
    circuit = b.build(roles=roles, free_pool=pool, outputs=outputs)
    out_set = set(outputs)
    discarded = tuple(q for q in range(circuit.num_qubits) if q not in out_set and q not in pool)
    return LoadResult(
        family=family,
        bits=bits,
        padded=padded,
        n=n,
        circuit=circuit,
        output_qubits=outputs,
        discarded_qubits=discarded,
        target_state=target_state(padded),
        erasures=tuple(erasures),
        releases=tuple(releases),
        stages=tuple(stages),
        clx_resets=resets,
        loads=n_bits,
    )


def build_family2(bits: Sequence[int], erasure: bool = False) -> LoadResult:
    return _build_tree(bits, "2e" if erasure else "2ne")


def build_family3(bits: Sequence[int]) -> LoadResult:
    return _build_tree(bits, "3")


def build(family: str, bits: Sequence[int]) -> LoadResult:
    if family == "1":
        return build_family1(bits)
    if family == "2ne":
        return build_family2(bits, erasure=False)
    if family == "2e":
        return build_family2(bits, erasure=True)
    if family == "3":
        return build_family3(bits)
    raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")


def stage_slice_bound(n: int, include_unfan: bool = False) -> int:
    """Family #3 slice count: sum over stages of 2 + ceil(log2 k), optionally doubled tree."""
    total = 0
    for k in range(1, n + 1):
        lg = math.ceil(math.log2(k)) if k > 1 else 0
        total += 2 + lg + (lg if include_unfan else 0)
    return total
