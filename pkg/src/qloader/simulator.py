"""Exact state-vector simulation on a sparse basis-label representation.

Qubit 0 is the most significant bit of a basis label, so the label of a
K-qubit basis state reads left to right as qubits 0..K-1, the same way a
ket is written.  Internally a label is an integer whose bit ``K-1-q`` holds
qubit ``q``.

States are stored as (sorted unique labels, complex amplitudes).  Every
circuit built here produces at most a few thousand nonzero amplitudes even
on 60-odd qubits, so this is exact and cheap where a dense 2^K vector would
not fit in memory.  ``to_dense`` converts when K is small.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, GateKind

MAX_QUBITS = 62
UNITARY_MAX_QUBITS = 12
_PRUNE = 1e-15
_INV_SQRT2 = 1.0 / np.sqrt(2.0)


class DimensionError(ValueError):
    pass


def _label_to_int(bits: Sequence[int] | str) -> int:
    value = 0
    for b in bits:
        b = int(b)
        if b not in (0, 1):
            raise ValueError(f"basis label entries must be 0 or 1, got {b}")
        value = (value << 1) | b
    return value


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    indices: np.ndarray  # int64, sorted, unique
    amplitudes: np.ndarray  # complex128, same length

    @classmethod
    def basis(cls, bits: Sequence[int] | str) -> StateVector:
        k = len(bits)
        if k > MAX_QUBITS:
            raise DimensionError(f"at most {MAX_QUBITS} qubits supported")
        return cls(k, np.array([_label_to_int(bits)], dtype=np.int64), np.ones(1, dtype=np.complex128))

    @classmethod
    def zeros(cls, num_qubits: int) -> StateVector:
        return cls.basis([0] * num_qubits)

    @classmethod
    def from_mapping(cls, num_qubits: int, amps: dict) -> StateVector:
        """Build from ``{label: amplitude}`` where a label is a bit string or int."""
        keys = [k if isinstance(k, (int, np.integer)) else _label_to_int(k) for k in amps]
        return _canonical(num_qubits, np.array(keys, dtype=np.int64), np.array(list(amps.values()), dtype=np.complex128))

    @classmethod
    def from_dense(cls, vec: np.ndarray) -> StateVector:
        vec = np.asarray(vec, dtype=np.complex128)
        k = int(round(np.log2(vec.size)))
        if 2**k != vec.size:
            raise DimensionError("dense vector length must be a power of two")
        nz = np.flatnonzero(np.abs(vec) > _PRUNE)
        return cls(k, nz.astype(np.int64), vec[nz].copy())

    def to_dense(self) -> np.ndarray:
        if self.num_qubits > 24:
            raise DimensionError("dense form limited to 24 qubits")
        out = np.zeros(2**self.num_qubits, dtype=np.complex128)
        out[self.indices] = self.amplitudes
        return out

    def label(self, index: int) -> str:
        return format(int(index), f"0{self.num_qubits}b") if self.num_qubits else ""

    def items(self) -> Iterator[tuple[str, complex]]:
        for i, a in zip(self.indices, self.amplitudes):
            yield self.label(i), complex(a)

    def amplitude(self, bits: Sequence[int] | str) -> complex:
        key = _label_to_int(bits)
        pos = np.searchsorted(self.indices, key)
        if pos < self.indices.size and self.indices[pos] == key:
            return complex(self.amplitudes[pos])
        return 0j

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def bit_values(self, qubit: int) -> np.ndarray:
        return (self.indices >> (self.num_qubits - 1 - qubit)) & 1

    def __len__(self) -> int:
        return int(self.indices.size)


def _canonical(k: int, idx: np.ndarray, amp: np.ndarray) -> StateVector:
    """Sort labels, merge duplicates and drop numerically-zero amplitudes."""
    if idx.size:
        order = np.argsort(idx, kind="stable")
        idx, amp = idx[order], amp[order]
        new = np.empty(idx.size, dtype=bool)
        new[0] = True
        np.not_equal(idx[1:], idx[:-1], out=new[1:])
        if not new.all():
            starts = np.flatnonzero(new)
            idx, amp = idx[starts], np.add.reduceat(amp, starts)
        keep = np.abs(amp) > _PRUNE
        if not keep.all():
            idx, amp = idx[keep], amp[keep]
    return StateVector(k, idx.astype(np.int64, copy=False), amp.astype(np.complex128, copy=False))


def _mask(k: int, q: int) -> np.int64:
    return np.int64(1) << np.int64(k - 1 - q)


def _has(idx: np.ndarray, m: np.int64) -> np.ndarray:
    return (idx & m) != 0


def _apply(k: int, idx: np.ndarray, amp: np.ndarray, g: Gate) -> tuple[np.ndarray, np.ndarray]:
    kind, ops = g.kind, g.operands
    m = [_mask(k, q) for q in ops]
    if kind is GateKind.X:
        return idx ^ m[0], amp
    if kind is GateKind.CLX:
        return (idx ^ m[0], amp) if g.bit else (idx, amp)
    if kind is GateKind.CNOT:
        return np.where(_has(idx, m[0]), idx ^ m[1], idx), amp
    if kind is GateKind.CCNOT:
        return np.where(_has(idx, m[0]) & _has(idx, m[1]), idx ^ m[2], idx), amp
    if kind is GateKind.SWAP:
        differ = _has(idx, m[0]) != _has(idx, m[1])
        return np.where(differ, idx ^ (m[0] | m[1]), idx), amp
    if kind is GateKind.CSWAP:
        differ = _has(idx, m[1]) != _has(idx, m[2])
        return np.where(_has(idx, m[0]) & differ, idx ^ (m[1] | m[2]), idx), amp
    if kind in (GateKind.S, GateKind.SDG):
        phase = 1j if kind is GateKind.S else -1j
        return idx, np.where(_has(idx, m[0]), amp * phase, amp)
    if kind in (GateKind.CS, GateKind.CSDG):
        phase = 1j if kind is GateKind.CS else -1j
        return idx, np.where(_has(idx, m[0]) & _has(idx, m[1]), amp * phase, amp)
    if kind is GateKind.H:
        one = _has(idx, m[0])
        base = idx & ~m[0]
        scaled = amp * _INV_SQRT2
        new_idx = np.concatenate([base, base | m[0]])
        new_amp = np.concatenate([scaled, np.where(one, -scaled, scaled)])
        st = _canonical(k, new_idx, new_amp)
        return st.indices, st.amplitudes
    raise NotImplementedError(kind)


def _slice_order(sl: Iterable[Gate]) -> list[Gate]:
    # Gates in a valid slice commute; a fixed order makes the floating-point
    # result independent of how the slice happens to be listed.
    return sorted(sl, key=lambda g: (min(g.operands), g.operands, g.kind.value, g.bit or 0))


def _coerce_initial(circuit: Circuit, initial) -> StateVector:
    if initial is None:
        return StateVector.zeros(circuit.num_qubits)
    if not isinstance(initial, StateVector):
        initial = StateVector.basis(initial)
    if initial.num_qubits != circuit.num_qubits:
        raise DimensionError(
            f"initial state has {initial.num_qubits} qubits, circuit has {circuit.num_qubits}"
        )
    return initial


def iter_run(circuit: Circuit, initial=None) -> Iterator[StateVector]:
    """Yield the state after each slice."""
    if circuit.num_qubits > MAX_QUBITS:
        raise DimensionError(f"at most {MAX_QUBITS} qubits supported")
    st = _coerce_initial(circuit, initial)
    k, idx, amp = st.num_qubits, st.indices, st.amplitudes
    for sl in circuit.slices:
        for g in _slice_order(sl):
            idx, amp = _apply(k, idx, amp, g)
        st = _canonical(k, idx, amp)
        idx, amp = st.indices, st.amplitudes
        yield st


def run(circuit: Circuit, initial=None) -> StateVector:
    """Run ``circuit`` from a basis label (default all zeros) or a given state."""
    st = _coerce_initial(circuit, initial)
    for st in iter_run(circuit, st):
        pass
    return st


def run_gates(gates: Iterable[Gate], initial: StateVector) -> StateVector:
    k, idx, amp = initial.num_qubits, initial.indices, initial.amplitudes
    for g in gates:
        if max(g.operands) >= k:
            raise DimensionError(f"gate {g} outside {k}-qubit state")
        idx, amp = _apply(k, idx, amp, g)
    return _canonical(k, idx, amp)


def inner(a: StateVector, b: StateVector) -> complex:
    if a.num_qubits != b.num_qubits:
        raise DimensionError(f"{a.num_qubits}-qubit state vs {b.num_qubits}-qubit state")
    common, ia, ib = np.intersect1d(a.indices, b.indices, assume_unique=True, return_indices=True)
    return complex(np.sum(np.conj(a.amplitudes[ia]) * b.amplitudes[ib]))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|, so 1 means equal up to a global phase."""
    return min(1.0, abs(inner(a, b)))


def _split(state: StateVector, qubits: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Return (sub-label, environment label) for every stored amplitude."""
    k = state.num_qubits
    sub = np.zeros(state.indices.size, dtype=np.int64)
    env = state.indices.copy()
    for q in qubits:
        bit = (state.indices >> (k - 1 - q)) & 1
        sub = (sub << 1) | bit
        env &= ~_mask(k, q)
    return sub, env


def _check_subset(state: StateVector, qubits: Sequence[int]) -> list[int]:
    qubits = list(qubits)
    if not qubits:
        raise ValueError("subset must be nonempty")
    if len(set(qubits)) != len(qubits):
        raise ValueError("subset has repeated qubits")
    if any(q < 0 or q >= state.num_qubits for q in qubits):
        raise ValueError(f"subset {qubits} outside {state.num_qubits} qubits")
    return qubits


def reduced_density_matrix(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Partial trace onto ``qubits`` (in the given order, first is MSB)."""
    qubits = _check_subset(state, qubits)
    if len(qubits) > 14:
        raise DimensionError("reduced density matrix limited to 14 qubits")
    sub, env = _split(state, qubits)
    env_ids, row = np.unique(env, return_inverse=True)
    mat = np.zeros((env_ids.size, 2 ** len(qubits)), dtype=np.complex128)
    mat[row, sub] = state.amplitudes
    return mat.T @ mat.conj()


def purity_of_subset(state: StateVector, qubits: Iterable[int]) -> float:
    """tr(rho^2) of the reduced state on ``qubits``."""
    qubits = _check_subset(state, list(qubits))
    if len(qubits) == state.num_qubits:
        raise ValueError("subset must be a proper subset")
    # For a pure global state both sides have the same purity.  Index the
    # matrix by labels that actually occur, so its size is bounded by the
    # number of stored amplitudes rather than by 2^|subset|.
    sub, env = _split(state, qubits)
    sub_ids, col = np.unique(sub, return_inverse=True)
    env_ids, row = np.unique(env, return_inverse=True)
    if sub_ids.size * env_ids.size > 2**26:
        raise DimensionError("state too spread out for an exact purity")
    mat = np.zeros((env_ids.size, sub_ids.size), dtype=np.complex128)
    mat[row, col] = state.amplitudes
    if env_ids.size < sub_ids.size:
        gram = mat @ mat.conj().T
    else:
        gram = mat.T @ mat.conj()
    return float(np.real(np.sum(np.abs(gram) ** 2)))


def marginal_branches(state: StateVector, qubits: Sequence[int]) -> dict[int, float]:
    """Squared norm of the state projected onto each label of ``qubits``."""
    sub, _ = _split(state, _check_subset(state, qubits))
    weights = np.bincount(sub, weights=np.abs(state.amplitudes) ** 2)
    return {int(i): float(w) for i, w in enumerate(weights) if w > 0}


def loaded_fidelity(state: StateVector, qubits: Sequence[int], target: StateVector) -> float:
    """Best overlap of ``state`` with ``target`` on ``qubits`` times any leftover.

    Equals max |<target (x) g | state>| over states g of the remaining qubits
    that may depend on the ``qubits`` label.  Leftover qubits entangled with
    the label (garbage) are allowed; wrong magnitudes or missing labels are
    not.  Phases of ``target`` are ignored, so check them separately when
    they matter.
    """
    if target.num_qubits != len(qubits):
        raise DimensionError("target width differs from the register")
    branches = marginal_branches(state, qubits)
    total = 0.0
    for label, amp in zip(target.indices, target.amplitudes):
        total += abs(amp) * np.sqrt(branches.get(int(label), 0.0))
    return min(1.0, float(total))


def register_fidelity(state: StateVector, qubits: Sequence[int], target: StateVector) -> float:
    """sqrt(<t|rho|t>) for the reduced state on ``qubits``; 1 iff it is pure and equal."""
    rho = reduced_density_matrix(state, qubits)
    t = target.to_dense()
    return float(np.sqrt(max(0.0, np.real(np.conj(t) @ rho @ t))))


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Dense matrix whose column j is the circuit applied to basis state j."""
    k = circuit.num_qubits
    if k > UNITARY_MAX_QUBITS:
        raise DimensionError(f"unitary_of is limited to {UNITARY_MAX_QUBITS} qubits, got {k}")
    dim = 2**k
    out = np.zeros((dim, dim), dtype=np.complex128)
    gates = [g for sl in circuit.slices for g in _slice_order(sl)]
    for j in range(dim):
        st = run_gates(gates, StateVector(k, np.array([j], dtype=np.int64), np.ones(1, dtype=np.complex128)))
        out[st.indices, j] = st.amplitudes
    return out


@dataclass(frozen=True)
class UnitaryComparison:
    exact: bool
    global_phase: complex | None
    max_deviation: float

    @property
    def verdict(self) -> str:
        if self.exact:
            return "exact"
        if self.global_phase is not None:
            return "global-phase"
        return "deviates"


def compare_unitaries(u: np.ndarray, v: np.ndarray, atol: float = 1e-12) -> UnitaryComparison:
    """Compare ``u`` to reference ``v``: exact, equal up to one phase, or neither."""
    if u.shape != v.shape:
        raise DimensionError(f"shapes {u.shape} and {v.shape}")
    diff = float(np.max(np.abs(u - v))) if u.size else 0.0
    if diff <= atol:
        return UnitaryComparison(True, 1.0 + 0j, diff)
    pivot = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(u[pivot]) > atol:
        phase = u[pivot] / v[pivot]
        phase /= abs(phase)
        if np.max(np.abs(u - phase * v)) <= atol:
            return UnitaryComparison(False, complex(phase), diff)
    return UnitaryComparison(False, None, diff)


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalizes -0.0
    return format(x, ".15g")


def dump_lines(state: StateVector, qubits: Sequence[int] | None = None) -> list[str]:
    """``bitstring re im`` per nonzero amplitude, sorted by bitstring.

    With ``qubits`` the dump is of that register alone and is only defined
    when the register is unentangled with the rest (otherwise ``ValueError``);
    use ``branch_lines`` for the garbage-tolerant view.
    """
    if qubits is None:
        return [f"{lab} {_fmt(a.real)} {_fmt(a.imag)}" for lab, a in state.items()]
    qubits = _check_subset(state, qubits)
    if len(qubits) < state.num_qubits and purity_of_subset(state, qubits) < 1 - 1e-10:
        raise ValueError("register is entangled with the remaining qubits")
    sub, env = _split(state, qubits)
    # Pure register: pick any environment label and read the amplitudes there.
    pick = env == env[np.argmax(np.abs(state.amplitudes))]
    amps = state.amplitudes[pick]
    amps = amps / np.linalg.norm(amps)
    ref = amps[np.argmax(np.abs(amps))]
    amps = amps * (abs(ref) / ref)  # fix global phase so the largest entry is real positive
    reg = StateVector(len(qubits), sub[pick], amps)
    reg = _canonical(len(qubits), reg.indices, reg.amplitudes)
    return dump_lines(reg)


def branch_lines(state: StateVector, qubits: Sequence[int]) -> list[str]:
    """``bitstring weight`` for the register's labels: sqrt of branch probability."""
    k = len(qubits)
    return [
        f"{format(lab, f'0{k}b')} {_fmt(np.sqrt(w))} 0"
        for lab, w in sorted(marginal_branches(state, qubits).items())
    ]
