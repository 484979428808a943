"""Classical block compression with a quantum-side decompressor.

The code is enumerative over bounded-weight words: every N-bit word with
at most ``max_weight`` ones gets a rank (by weight, then lexicographically
among words of that weight) and the rank is written in M bits.  The
all-zero word always has rank 0.

The decoder is emitted as a classical netlist (one AND-chain minterm per
codeword, OR-ed into each output bit), lowered to reversible gates and run
after a family #1 load of the M codeword bits.

Spec files hold ``key = value`` lines (``#`` comments)::

    scheme = enumerative
    n = 8
    max_weight = 1
    p = 0.03        # optional, for the savings context
    m = 4           # optional, must be at least the minimum
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

from .circuit import Circuit, GateKind, serialized_depth
from .families import build_family1
from .passes import NetGate, Netlist, lower_netlist_reversible
from .resources import CompressionPlan, savings
from .simulator import run

SCHEMES = ("enumerative", "identity")
MAX_NETLIST_BITS = 16


class InadmissibleInput(ValueError):
    pass


@dataclass(frozen=True)
class CodecSpec:
    scheme: str
    n: int
    max_weight: int
    p: float | None = None
    m: int | None = None

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.n < 1:
            raise ValueError("block length must be at least 1")
        if self.scheme == "identity":
            object.__setattr__(self, "max_weight", self.n)
        if not 0 <= self.max_weight <= self.n:
            raise ValueError(f"max_weight must lie in 0..{self.n}")
        if self.p is not None and not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        need = self.min_codeword_bits
        if self.m is None:
            object.__setattr__(self, "m", need)
        elif self.m < need:
            raise ValueError(f"m={self.m} cannot index {self.admissible_count} words; need {need}")

    @cached_property
    def _offsets(self) -> list[int]:
        # _offsets[w] = number of admissible words of weight < w
        out = [0]
        for j in range(self.max_weight + 1):
            out.append(out[-1] + math.comb(self.n, j))
        return out

    @property
    def admissible_count(self) -> int:
        if self.scheme == "identity":
            return 2**self.n
        return self._offsets[-1]

    @property
    def min_codeword_bits(self) -> int:
        if self.scheme == "identity":
            return self.n
        return max(1, math.ceil(math.log2(self.admissible_count)))

    @classmethod
    def for_source(cls, p: float, n: int, tail: float = 1e-3, max_weight: int | None = None) -> CodecSpec:
        """Smallest weight bound whose Binomial(n, p) tail mass is at most ``tail``."""
        if max_weight is None:
            mass, max_weight = 0.0, n
            for w in range(n + 1):
                mass += math.comb(n, w) * p**w * (1 - p) ** (n - w)
                if 1 - mass <= tail:
                    max_weight = w
                    break
        return cls("enumerative", n, max_weight, p=p)


def parse_spec(text: str) -> CodecSpec:
    fields: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in ("scheme", "n", "max_weight", "p", "m"):
            raise ValueError(f"line {line_no}: unknown key {key!r}")
        fields[key] = value
    try:
        n = int(fields["n"])
        scheme = fields.get("scheme", "enumerative")
        weight = int(fields.get("max_weight", n if scheme == "identity" else 1))
        p = float(fields["p"]) if "p" in fields else None
        m = int(fields["m"]) if "m" in fields else None
    except KeyError as exc:
        raise ValueError(f"spec is missing {exc.args[0]!r}") from None
    return CodecSpec(scheme, n, weight, p=p, m=m)


def _int_to_bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def _bits_to_int(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def rank(bits: Sequence[int], spec: CodecSpec) -> int:
    bits = tuple(int(b) for b in bits)
    if len(bits) != spec.n:
        raise InadmissibleInput(f"expected {spec.n} bits, got {len(bits)}")
    if spec.scheme == "identity":
        return _bits_to_int(bits)
    w = sum(bits)
    if w > spec.max_weight:
        raise InadmissibleInput(f"weight {w} exceeds the code's bound {spec.max_weight}")
    # lexicographic rank among weight-w words, 0 before 1 at each position
    r, left = 0, w
    for i, b in enumerate(bits):
        if b:
            r += math.comb(spec.n - i - 1, left)
            left -= 1
    return spec._offsets[w] + r


def unrank(index: int, spec: CodecSpec) -> tuple[int, ...]:
    if not 0 <= index < spec.admissible_count:
        raise ValueError(f"codeword {index} is not assigned (code has {spec.admissible_count} words)")
    if spec.scheme == "identity":
        return _int_to_bits(index, spec.n)
    w = max(j for j in range(spec.max_weight + 1) if spec._offsets[j] <= index)
    r, left = index - spec._offsets[w], w
    out = []
    for i in range(spec.n):
        zeros_first = math.comb(spec.n - i - 1, left)
        if left and r >= zeros_first:
            out.append(1)
            r -= zeros_first
            left -= 1
        else:
            out.append(0)
    return tuple(out)


def encode(bits: Sequence[int], spec: CodecSpec) -> tuple[int, ...]:
    return _int_to_bits(rank(bits, spec), spec.m)


def decode(codeword: Sequence[int], spec: CodecSpec) -> tuple[int, ...]:
    if len(codeword) != spec.m:
        raise ValueError(f"expected {spec.m} codeword bits, got {len(codeword)}")
    return unrank(_bits_to_int(codeword), spec)


def decode_netlist(spec: CodecSpec) -> Netlist:
    if spec.n > MAX_NETLIST_BITS:
        raise ValueError(f"decoder netlists are limited to N <= {MAX_NETLIST_BITS}")
    m = spec.m
    inputs = tuple(f"c{i}" for i in range(m))
    if spec.scheme == "identity":
        return Netlist(inputs, (), inputs[m - spec.n :])

    gates: list[NetGate] = []
    negated: dict[str, str] = {}

    def literal(i: int, bit: int) -> str:
        if bit:
            return inputs[i]
        if inputs[i] not in negated:
            negated[inputs[i]] = f"n{i}"
            gates.append(NetGate("NOT", (inputs[i],), f"n{i}"))
        return negated[inputs[i]]

    minterm: dict[int, str] = {}
    for idx in range(1, spec.admissible_count):  # word 0 sets no output
        code = _int_to_bits(idx, m)
        acc = literal(0, code[0])
        for i in range(1, m):
            nxt = f"t{idx}_{i}" if i < m - 1 else f"m{idx}"
            gates.append(NetGate("AND", (acc, literal(i, code[i])), nxt))
            acc = nxt
        minterm[idx] = acc

    outputs = []
    for j in range(spec.n):
        terms = [minterm[idx] for idx in range(1, spec.admissible_count) if unrank(idx, spec)[j]]
        if not terms:
            name = f"y{j}"
            gates.append(NetGate("AND", (inputs[0], literal(0, 0)), name))
            outputs.append(name)
            continue
        acc = terms[0]
        for k, t in enumerate(terms[1:], start=1):
            nxt = f"y{j}" if k == len(terms) - 1 else f"o{j}_{k}"
            gates.append(NetGate("OR", (acc, t), nxt))
            acc = nxt
        outputs.append(acc)
    return Netlist(inputs, tuple(gates), tuple(outputs))


@dataclass(frozen=True)
class PipelineReport:
    bits: tuple[int, ...]
    codeword: tuple[int, ...]
    recovered: tuple[int, ...]
    n: int
    m: int
    load_qubits: int
    total_qubits: int
    decompressor_gates: int
    decompressor_depth: int
    decompressor_uses_h: bool
    log2_n: float
    plan: CompressionPlan | None

    @property
    def ok(self) -> bool:
        return self.recovered == self.bits


def pipeline_circuit(codeword: Sequence[int], spec: CodecSpec) -> tuple[Circuit, Circuit]:
    """(full circuit, decompressor part) for loading ``codeword`` and decoding it."""
    load = build_family1(codeword).circuit
    decomp, _ = lower_netlist_reversible(decode_netlist(spec))
    return load.then(decomp), decomp


def run_pipeline(bits: Sequence[int], spec: CodecSpec) -> PipelineReport:
    bits = tuple(int(b) for b in bits)
    codeword = encode(bits, spec)
    full, decomp = pipeline_circuit(codeword, spec)
    state = run(full)
    if len(state) != 1 or abs(abs(state.amplitudes[0]) - 1) > 1e-12:
        raise RuntimeError("decompressor output is not a single basis state")
    label = state.label(state.indices[0])
    recovered = tuple(int(label[q]) for q in full.outputs)
    return PipelineReport(
        bits=bits,
        codeword=codeword,
        recovered=recovered,
        n=spec.n,
        m=spec.m,
        load_qubits=spec.m,
        total_qubits=full.num_qubits,
        decompressor_gates=len(decomp),
        decompressor_depth=serialized_depth(decomp),
        decompressor_uses_h=any(g.kind is GateKind.H for g in decomp.gates()),
        log2_n=math.log2(spec.n) if spec.n > 1 else 0.0,
        plan=savings(spec.p, spec.n) if spec.p is not None else None,
    )
