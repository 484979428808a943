"""Closed-form resource counts, empirical tallies, and the entropy savings model."""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field

from .circuit import Circuit, GateKind, serialized_depth, slice_depth
from .families import FAMILIES, LoadResult, address_bits, build, stage_slice_bound

COUNT_KINDS = ("CLX", "H", "CNOT", "CCNOT", "SWAP", "CSWAP")
_KIND_NAME = {
    GateKind.CLX: "CLX",
    GateKind.H: "H",
    GateKind.CNOT: "CNOT",
    GateKind.CCNOT: "CCNOT",
    GateKind.SWAP: "SWAP",
    GateKind.CSWAP: "CSWAP",
    GateKind.X: "X",
    GateKind.S: "S",
    GateKind.SDG: "SDG",
    GateKind.CS: "CS",
    GateKind.CSDG: "CSDG",
}


@dataclass
class ResourceReport:
    """Resource tallies.  ``None`` marks a quantity with no closed form."""

    family: str
    n_bits: int
    n: int
    counts: dict[str, int | None] = field(default_factory=dict)
    slice_depth: int | None = None
    serialized_depth: int | None = None
    stage_count: int | None = None
    depth_bound: int | None = None
    depth_bound_with_unfan: int | None = None
    final_state_qubits: int | None = None
    final_ancilla_qubits: int | None = None
    final_total_qubits: int | None = None
    peak_total_qubits: int | None = None
    clx_resets: int = 0

    def __post_init__(self) -> None:
        for k, v in self.as_dict().items():
            if isinstance(v, int) and v < 0:
                raise ValueError(f"{k} is negative")
        parts = (self.final_state_qubits, self.final_ancilla_qubits, self.final_total_qubits)
        if None not in parts and parts[0] + parts[1] != parts[2]:
            raise ValueError("final_total must equal final_state + final_ancilla")

    def as_dict(self) -> dict:
        return asdict(self)


def _require_power_of_two(family: str, n_bits: int) -> int:
    if n_bits < 1:
        raise ValueError("need at least one bit")
    n = address_bits(n_bits)
    if family != "1" and 2**n != n_bits:
        raise ValueError(f"family {family} needs a power-of-two bit count, got {n_bits}")
    return n


def formula_report(family: str, n_bits: int) -> ResourceReport:
    """Closed forms for ``n_bits`` = N classical bits."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    n = _require_power_of_two(family, n_bits)
    N = n_bits
    if family == "1":
        return ResourceReport(
            family, N, n,
            counts={"CLX": N, "H": 0, "CNOT": 0, "CCNOT": 0, "SWAP": 0, "CSWAP": 0},
            slice_depth=1, serialized_depth=1, stage_count=1,
            final_state_qubits=N, final_ancilla_qubits=0, final_total_qubits=N, peak_total_qubits=N,
        )
    tree_depth = n + n * (n + 1) // 2  # one Hadamard layer plus k swap layers per stage
    if family in ("2ne", "2e"):
        counts = {"CLX": N, "H": N - 1, "CNOT": 0, "CCNOT": 0, "SWAP": 0, "CSWAP": 2 * N - n - 2}
        if family == "2ne":
            return ResourceReport(
                family, N, n, counts=counts, stage_count=n, depth_bound=tree_depth,
                final_state_qubits=n, final_ancilla_qubits=2 * N - 2 - n, final_total_qubits=2 * N - 2,
            )
        counts.update(CNOT=2 * (2 * N - 2 - n), CCNOT=2 * N - 2 - n)
        return ResourceReport(
            family, N, n, counts=counts, stage_count=n,
            final_state_qubits=n, final_ancilla_qubits=0, final_total_qubits=n,
        )
    return ResourceReport(
        family, N, n,
        counts={k: None for k in COUNT_KINDS},
        stage_count=n,
        depth_bound=stage_slice_bound(n),
        depth_bound_with_unfan=stage_slice_bound(n, include_unfan=True),
    )


def gate_tally(circuit: Circuit) -> dict[str, int]:
    tally = {k: 0 for k in COUNT_KINDS}
    for kind, v in circuit.gate_counts().items():
        name = _KIND_NAME[kind]
        tally[name] = tally.get(name, 0) + v
    return tally


def empirical_report(circuit: Circuit, family: str = "?", n_bits: int = 0, clx_resets: int = 0) -> ResourceReport:
    """Count what the circuit actually contains.

    Qubits in ``circuit.free_pool`` are not in use at the end; every other
    qubit is, and those in ``circuit.outputs`` make up the state register.
    ``clx_resets`` CLX gates are moved out of the CLX column.
    """
    counts = gate_tally(circuit)
    counts["CLX"] -= clx_resets
    total = circuit.num_qubits - len(circuit.free_pool)
    state = len(circuit.outputs)
    return ResourceReport(
        family,
        n_bits,
        address_bits(n_bits) if n_bits else 0,
        counts=counts,
        slice_depth=slice_depth(circuit),
        serialized_depth=serialized_depth(circuit),
        final_state_qubits=state,
        final_ancilla_qubits=total - state,
        final_total_qubits=total,
        peak_total_qubits=circuit.num_qubits,
        clx_resets=clx_resets,
    )


def load_report(result: LoadResult) -> ResourceReport:
    rep = empirical_report(result.circuit, result.family, len(result.padded), result.clx_resets)
    rep.stage_count = len(result.stages) if result.family != "1" else 1
    return rep


def compare_reports(formula: ResourceReport, empirical: ResourceReport) -> dict[str, tuple]:
    """Columns where the closed form exists and disagrees: name -> (formula, measured)."""
    out = {}
    for k, v in formula.counts.items():
        if v is not None and empirical.counts.get(k, 0) != v:
            out[k] = (v, empirical.counts.get(k, 0))
    for k in ("final_state_qubits", "final_ancilla_qubits", "final_total_qubits", "peak_total_qubits"):
        v = getattr(formula, k)
        if v is not None and getattr(empirical, k) != v:
            out[k] = (v, getattr(empirical, k))
    return out


# ---------------------------------------------------------------------------
# entropy model


@dataclass(frozen=True)
class CompressionPlan:
    p: float
    L: float
    N: int
    M: int
    savings: int


def entropy_L(p: float) -> float:
    """Binary entropy in bits, with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    if p == 0.5:
        return 1.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def savings(p: float, N: int) -> CompressionPlan:
    if N < 1:
        raise ValueError("N must be at least 1")
    L = entropy_L(p)
    # guard against L*N landing a hair above an integer through rounding
    M = min(N, math.ceil(L * N - 1e-9))
    return CompressionPlan(p, L, N, M, N - M)


def geometric_qubit_sum(n: int) -> int:
    """sum_{k=1..n} N / 2^(k-1) for N = 2^n, by explicit loop."""
    N = 2**n
    return sum(N // 2 ** (k - 1) for k in range(1, n + 1))


def depth_scaling_table(family: str, n_values, seed: int = 0) -> list[dict]:
    """Measured depths against the closed-form bounds, one row per n."""
    if family not in ("2ne", "2e", "3"):
        raise ValueError("depth scaling applies to families 2ne, 2e and 3")
    rng = random.Random(seed)
    rows = []
    for n in n_values:
        if not 1 <= n <= 20:
            raise ValueError("n must lie in 1..20")
        N = 2**n
        bits = [rng.randint(0, 1) for _ in range(N)]
        res = build(family, bits)
        row = {
            "N": N,
            "n": n,
            "log2log2N": math.log2(n),
            "slice_depth": slice_depth(res.circuit),
            "serialized_depth": serialized_depth(res.circuit),
            "cswap_layers": n * (n + 1) // 2,
        }
        if family == "3":
            row["bound"] = stage_slice_bound(n)
            row["bound_with_unfan"] = stage_slice_bound(n, include_unfan=True)
            row["construction_slices"] = sum(
                len(st.hadamard) + len(st.fanout) + len(st.cswap) for st in res.stages
            )
        else:
            row["bound"] = n + n * (n + 1) // 2
        rows.append(row)
    return rows


def entropy_curve(points: int = 101) -> list[tuple[float, float]]:
    return [(i / (points - 1), entropy_L(i / (points - 1))) for i in range(points)]


def loglog_curve(n_max: int = 20) -> list[tuple[int, float]]:
    return [(2**n, math.log2(n)) for n in range(1, n_max + 1)]
