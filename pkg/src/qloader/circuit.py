"""Gate-level circuit IR: gates, time slices, qubit roles, and the text format.

A circuit is an ordered list of time slices.  Gates inside one slice are
meant to run simultaneously, so their qubit supports must be disjoint;
``validate`` reports every place where that does not hold instead of
refusing to build the circuit.

Text format (one gate per line, slices separated by ``---``)::

    # comment
    qubits 3
    outputs 2 0 1
    role address 0 2
    role data 1
    pool
    H 0
    CLX 1 1
    ---
    CSWAP 0 1 2

``qubits K`` must come first.  ``outputs``, ``role`` and ``pool`` lines are
optional header directives and must precede the first gate.  Gate mnemonics
are ``H X S SDG CX CCX SWAP CSWAP CS CSDG`` followed by qubit indices, and
``CLX bit q`` for an X gate controlled by the literal classical bit.
"""

from __future__ import annotations

import enum
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field


class GateKind(enum.Enum):
    X = "X"
    H = "H"
    S = "S"
    SDG = "SDG"
    CNOT = "CX"
    CCNOT = "CCX"
    SWAP = "SWAP"
    CSWAP = "CSWAP"
    CS = "CS"
    CSDG = "CSDG"
    CLX = "CLX"

    @property
    def arity(self) -> int:
        return _ARITY[self]


_ARITY = {
    GateKind.X: 1,
    GateKind.H: 1,
    GateKind.S: 1,
    GateKind.SDG: 1,
    GateKind.CLX: 1,
    GateKind.CNOT: 2,
    GateKind.SWAP: 2,
    GateKind.CS: 2,
    GateKind.CSDG: 2,
    GateKind.CCNOT: 3,
    GateKind.CSWAP: 3,
}

# Gates that map computational basis states to basis states.
PERMUTATION_KINDS = frozenset(
    {GateKind.X, GateKind.CLX, GateKind.CNOT, GateKind.CCNOT, GateKind.SWAP, GateKind.CSWAP}
)


class Role(enum.Enum):
    DATA = "data"
    ADDRESS = "address"
    ANCILLA = "ancilla"
    DISCARDED = "discarded"


@dataclass(frozen=True, slots=True)
class Gate:
    """One gate application.

    ``operands`` lists qubit indices; for controlled kinds the controls come
    first and the target(s) last (``CSWAP`` is ``(control, a, b)``).  Only
    ``CLX`` carries ``bit``, the classical control value.
    """

    kind: GateKind
    operands: tuple[int, ...]
    bit: int | None = None

    def __post_init__(self) -> None:
        if len(self.operands) != self.kind.arity:
            raise ValueError(
                f"{self.kind.value} takes {self.kind.arity} operand(s), got {len(self.operands)}"
            )
        if len(set(self.operands)) != len(self.operands):
            raise ValueError(f"{self.kind.value} operands must be distinct: {self.operands}")
        if any(q < 0 for q in self.operands):
            raise ValueError(f"negative qubit index in {self.operands}")
        if self.kind is GateKind.CLX:
            if self.bit not in (0, 1):
                raise ValueError("CLX needs a classical bit of 0 or 1")
        elif self.bit is not None:
            raise ValueError(f"{self.kind.value} takes no classical bit")

    def __str__(self) -> str:
        if self.kind is GateKind.CLX:
            return f"CLX {self.bit} {self.operands[0]}"
        return " ".join([self.kind.value, *map(str, self.operands)])


# Short constructors, used heavily by builders and tests.
def x(q: int) -> Gate:
    return Gate(GateKind.X, (q,))


def h(q: int) -> Gate:
    return Gate(GateKind.H, (q,))


def s(q: int) -> Gate:
    return Gate(GateKind.S, (q,))


def sdg(q: int) -> Gate:
    return Gate(GateKind.SDG, (q,))


def cnot(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (control, target))


def ccnot(c1: int, c2: int, target: int) -> Gate:
    return Gate(GateKind.CCNOT, (c1, c2, target))


def swap(a: int, b: int) -> Gate:
    return Gate(GateKind.SWAP, (a, b))


def cswap(control: int, a: int, b: int) -> Gate:
    return Gate(GateKind.CSWAP, (control, a, b))


def cs(control: int, target: int) -> Gate:
    return Gate(GateKind.CS, (control, target))


def csdg(control: int, target: int) -> Gate:
    return Gate(GateKind.CSDG, (control, target))


def clx(bit: int, q: int) -> Gate:
    return Gate(GateKind.CLX, (q,), bit)


@dataclass(frozen=True)
class Circuit:
    """Immutable circuit.  Empty slices are dropped on construction."""

    num_qubits: int
    slices: tuple[tuple[Gate, ...], ...] = ()
    roles: Mapping[int, Role] = field(default_factory=dict)
    free_pool: frozenset[int] = frozenset()
    outputs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.num_qubits < 0:
            raise ValueError("num_qubits must be non-negative")
        slices = tuple(tuple(sl) for sl in self.slices if len(sl))
        object.__setattr__(self, "slices", slices)
        object.__setattr__(self, "roles", dict(sorted(self.roles.items())))
        object.__setattr__(self, "free_pool", frozenset(self.free_pool))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    def gates(self) -> Iterator[Gate]:
        for sl in self.slices:
            yield from sl

    def gate_counts(self) -> Counter[GateKind]:
        return Counter(g.kind for g in self.gates())

    def __len__(self) -> int:
        return sum(len(sl) for sl in self.slices)

    def replace(self, **changes) -> Circuit:
        fields = dict(
            num_qubits=self.num_qubits,
            slices=self.slices,
            roles=self.roles,
            free_pool=self.free_pool,
            outputs=self.outputs,
        )
        fields.update(changes)
        return Circuit(**fields)

    def then(self, other: Circuit) -> Circuit:
        """Run ``self`` then ``other`` on a shared qubit numbering.

        Roles, pool and outputs are taken from ``other``.
        """
        return Circuit(
            max(self.num_qubits, other.num_qubits),
            self.slices + other.slices,
            roles=other.roles,
            free_pool=other.free_pool,
            outputs=other.outputs,
        )


@dataclass(frozen=True)
class Violation:
    slice_index: int
    gate_index: int | None
    reason: str

    def __str__(self) -> str:
        where = f"slice {self.slice_index}"
        if self.gate_index is not None:
            where += f", gate {self.gate_index}"
        return f"{where}: {self.reason}"


def validate(circuit: Circuit) -> list[Violation]:
    out: list[Violation] = []
    for si, sl in enumerate(circuit.slices):
        owner: dict[int, int] = {}
        for gi, g in enumerate(sl):
            for q in g.operands:
                if q >= circuit.num_qubits:
                    out.append(Violation(si, gi, f"qubit {q} out of range (K={circuit.num_qubits})"))
                if q in owner:
                    out.append(Violation(si, gi, f"qubit {q} already used by gate {owner[q]}"))
                else:
                    owner[q] = gi
    for q in sorted(set(circuit.roles) | circuit.free_pool | set(circuit.outputs)):
        if q >= circuit.num_qubits:
            out.append(Violation(-1, None, f"bookkeeping names qubit {q} out of range"))
    if len(set(circuit.outputs)) != len(circuit.outputs):
        out.append(Violation(-1, None, "repeated output qubit"))
    if circuit.free_pool & set(circuit.outputs):
        out.append(Violation(-1, None, "output qubit listed in free pool"))
    return out


def slice_depth(circuit: Circuit) -> int:
    return sum(1 for sl in circuit.slices if sl)


def serialized_depth(circuit: Circuit) -> int:
    """Critical path after an ASAP reschedule.

    Gates are taken in slice order; any two gates touching a common qubit
    run one after the other, each costing one layer.  Slice boundaries are
    not barriers, so this can be smaller than ``slice_depth`` for a loosely
    packed circuit and larger for one whose slices overlap.
    """
    level: dict[int, int] = {}
    depth = 0
    for g in circuit.gates():
        d = 1 + max((level.get(q, 0) for q in g.operands), default=0)
        for q in g.operands:
            level[q] = d
        depth = max(depth, d)
    return depth


class CircuitBuilder:
    """Append-only builder that packs gates into the earliest legal slice.

    A gate lands in the first slice after the last one touching any of its
    qubits and never before ``floor``.  ``barrier()`` moves the floor past
    every existing slice.  Per-qubit gate order is preserved, so the built
    circuit implements the gates in the order they were added.
    """

    def __init__(self, num_qubits: int = 0):
        self.num_qubits = num_qubits
        self._slices: list[list[Gate]] = []
        self._ready: dict[int, int] = {}
        self.floor = 0

    def add(self, gate: Gate) -> int:
        at = max([self.floor, *(self._ready.get(q, 0) for q in gate.operands)])
        while len(self._slices) <= at:
            self._slices.append([])
        self._slices[at].append(gate)
        for q in gate.operands:
            self._ready[q] = at + 1
        self.num_qubits = max(self.num_qubits, 1 + max(gate.operands))
        return at

    def extend(self, gates: Iterable[Gate]) -> list[int]:
        return [self.add(g) for g in gates]

    def barrier(self) -> int:
        self.floor = len(self._slices)
        return self.floor

    @property
    def depth(self) -> int:
        return len(self._slices)

    def build(self, **bookkeeping) -> Circuit:
        return Circuit(self.num_qubits, tuple(tuple(sl) for sl in self._slices), **bookkeeping)


# ---------------------------------------------------------------------------
# text format

_MNEMONICS = {k.value: k for k in GateKind}


class CircuitParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def dumps(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.num_qubits}"]
    if circuit.outputs:
        lines.append("outputs " + " ".join(map(str, circuit.outputs)))
    by_role: dict[Role, list[int]] = {}
    for q, r in circuit.roles.items():
        by_role.setdefault(r, []).append(q)
    for r in Role:
        if r in by_role:
            lines.append(f"role {r.value} " + " ".join(map(str, sorted(by_role[r]))))
    if circuit.free_pool:
        lines.append("pool " + " ".join(map(str, sorted(circuit.free_pool))))
    for i, sl in enumerate(circuit.slices):
        if i:
            lines.append("---")
        lines.extend(str(g) for g in sl)
    return "\n".join(lines) + "\n"


def _ints(tokens: Sequence[str], line_no: int) -> list[int]:
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise CircuitParseError(line_no, f"expected integers, got {' '.join(tokens)!r}") from None
    if any(v < 0 for v in vals):
        raise CircuitParseError(line_no, "indices must be non-negative")
    return vals


def loads(text: str) -> Circuit:
    num_qubits: int | None = None
    outputs: tuple[int, ...] = ()
    roles: dict[int, Role] = {}
    pool: set[int] = set()
    slices: list[list[Gate]] = [[]]
    in_body = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head, args = tokens[0], tokens[1:]
        if num_qubits is None:
            if head != "qubits" or len(args) != 1:
                raise CircuitParseError(line_no, "first statement must be 'qubits K'")
            (num_qubits,) = _ints(args, line_no)
            continue
        if head in ("qubits", "outputs", "role", "pool"):
            if in_body:
                raise CircuitParseError(line_no, f"'{head}' must precede the first gate")
            if head == "qubits":
                raise CircuitParseError(line_no, "duplicate 'qubits' header")
            if head == "outputs":
                outputs = tuple(_ints(args, line_no))
            elif head == "pool":
                pool.update(_ints(args, line_no))
            else:
                if not args:
                    raise CircuitParseError(line_no, "role needs a name")
                try:
                    role = Role(args[0])
                except ValueError:
                    raise CircuitParseError(line_no, f"unknown role {args[0]!r}") from None
                for q in _ints(args[1:], line_no):
                    roles[q] = role
            continue
        in_body = True
        if line == "---":
            slices.append([])
            continue
        kind = _MNEMONICS.get(head)
        if kind is None:
            raise CircuitParseError(line_no, f"unknown gate {head!r}")
        vals = _ints(args, line_no)
        try:
            if kind is GateKind.CLX:
                if len(vals) != 2:
                    raise ValueError("CLX takes 'bit qubit'")
                gate = Gate(kind, (vals[1],), vals[0])
            else:
                gate = Gate(kind, tuple(vals))
        except ValueError as exc:
            raise CircuitParseError(line_no, str(exc)) from None
        if max(gate.operands) >= num_qubits:
            raise CircuitParseError(line_no, f"qubit index beyond 'qubits {num_qubits}'")
        slices[-1].append(gate)

    if num_qubits is None:
        raise CircuitParseError(0, "missing 'qubits K' header")
    if any(not sl for sl in slices) and len(slices) > 1:
        # keep the round trip honest: dumps() never writes an empty slice
        empty = [i for i, sl in enumerate(slices) if not sl]
        raise CircuitParseError(0, f"empty slice at position {empty[0]}")
    return Circuit(num_qubits, tuple(tuple(sl) for sl in slices), roles, frozenset(pool), outputs)
