"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from pathlib import Path

from . import circuit as ir
from .compressor import CodecSpec, InadmissibleInput, encode, parse_spec, run_pipeline
from .families import FAMILIES, bits_from_bytes, build, parse_bits, target_state
from .passes import (
    ALL_PASSES,
    PIPELINE_PASSES,
    cswap_three_toffoli,
    cswap_toffoli_sandwich,
    run_passes,
    swap_to_cnot,
    toffoli_cs,
)
from .resources import (
    COUNT_KINDS,
    entropy_curve,
    entropy_L,
    formula_report,
    load_report,
    loglog_curve,
    savings,
)
from .simulator import (
    StateVector,
    branch_lines,
    compare_unitaries,
    dump_lines,
    loaded_fidelity,
    run,
    unitary_of,
)

FIDELITY_TOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _read_bits(args) -> tuple[int, ...]:
    if getattr(args, "bits_file", None):
        return bits_from_bytes(Path(args.bits_file).read_bytes())
    if args.bits is None:
        raise UsageError("give --bits or --bits-file")
    return parse_bits(args.bits)


def _table(rows: list[dict], fmt: str) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    if fmt == "json":
        return json.dumps(rows, sort_keys=True, indent=2)
    cell = lambda v: "-" if v is None else (format(v, ".6g") if isinstance(v, float) else str(v))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow(["" if r[c] is None else cell(r[c]) for c in cols])
        return buf.getvalue()
    widths = {c: max(len(c), *(len(cell(r[c])) for r in rows)) for c in cols}
    lines = ["  ".join(c.rjust(widths[c]) for c in cols)]
    lines += ["  ".join(cell(r[c]).rjust(widths[c]) for c in cols) for r in rows]
    return "\n".join(lines)


def _report_row(rep, source: str) -> dict:
    row = {"source": source, "family": rep.family, "N": rep.n_bits, "n": rep.n}
    row.update({k: rep.counts.get(k) for k in COUNT_KINDS})
    for k in (
        "clx_resets",
        "slice_depth",
        "serialized_depth",
        "stage_count",
        "depth_bound",
        "depth_bound_with_unfan",
        "final_state_qubits",
        "final_ancilla_qubits",
        "final_total_qubits",
        "peak_total_qubits",
    ):
        row[k] = getattr(rep, k)
    return row


def cmd_build(args) -> int:
    bits = _read_bits(args)
    result = build(args.family, bits)
    circ = result.circuit
    passes = _pass_list(args.passes)
    circ, pass_reports = run_passes(circ, passes)
    text = ir.dumps(circ)
    rep = load_report(result)
    summary = [
        f"family {result.family}",
        f"bits {len(result.bits)} (padded {len(result.padded)})",
        f"qubits {circ.num_qubits}",
        f"outputs {' '.join(map(str, circ.outputs))}",
        f"final_total_qubits {rep.final_total_qubits}",
        f"slice_depth {ir.slice_depth(circ)}",
        f"serialized_depth {ir.serialized_depth(circ)}",
        "gates " + " ".join(f"{k}={v}" for k, v in sorted(_kind_counts(circ).items())),
    ]
    if result.clx_resets:
        summary.append(f"clx_resets {result.clx_resets}")
    for pr in pass_reports:
        line = f"pass {pr.name}"
        if pr.verdict:
            line += f" verdict={pr.verdict}"
        summary.append(line)
    if args.output:
        Path(args.output).write_text(text)
        _emit("\n".join(summary))
    else:
        _emit(text.rstrip("\n"))
        sys.stderr.write("\n".join(summary) + "\n")
    return 0


def _kind_counts(circ: ir.Circuit) -> dict[str, int]:
    return {k.value: v for k, v in circ.gate_counts().items()}


def _pass_list(spec: str | None) -> list[str]:
    if not spec:
        return []
    names = [s.strip() for s in spec.split(",") if s.strip()]
    if names == ["all"]:
        return list(ALL_PASSES)
    bad = [n for n in names if n not in PIPELINE_PASSES]
    if bad:
        raise UsageError(f"unknown pass {bad[0]!r}; expected one of {', '.join(PIPELINE_PASSES)} or all")
    return names


def cmd_sim(args) -> int:
    circ = ir.loads(Path(args.file).read_text())
    problems = ir.validate(circ)
    if problems:
        raise UsageError(f"invalid circuit: {problems[0]}")
    initial = None
    if args.initial:
        initial = StateVector.basis(parse_bits(args.initial))
    state = run(circ, initial)
    status = 0
    if args.dump:
        if args.register == "outputs":
            if not circ.outputs:
                raise UsageError("circuit file declares no outputs")
            lines = branch_lines(state, circ.outputs)
        else:
            lines = dump_lines(state)
        _emit("\n".join(lines))
    if args.assert_target:
        family, _, bits_text = args.assert_target.partition(":")
        if family not in FAMILIES or not bits_text:
            raise UsageError("--assert-target takes FAMILY:BITS, e.g. 2e:0110")
        bits = parse_bits(bits_text)
        target = StateVector.basis(bits) if family == "1" else target_state(bits)
        outputs = circ.outputs or tuple(range(circ.num_qubits))
        if len(outputs) != target.num_qubits:
            _emit(f"FAIL register has {len(outputs)} qubits, target has {target.num_qubits}")
            return 1
        fid = loaded_fidelity(state, outputs, target)
        ok = fid >= 1 - FIDELITY_TOL
        _emit(f"{'PASS' if ok else 'FAIL'} fidelity {fid:.15f}")
        status = 0 if ok else 1
    return status


def cmd_resources(args) -> int:
    if args.n is None and args.n_max is None:
        raise UsageError("give --n or --n-max")
    if args.n is not None and not 0 <= args.n <= 20:
        raise UsageError("--n must lie in 0..20")
    if args.n_max is not None and not 1 <= args.n_max <= 12:
        raise UsageError("--n-max must lie in 1..12")
    ns = [args.n] if args.n is not None else list(range(1, args.n_max + 1))
    rows = []
    rng = random.Random(args.seed)
    for n in ns:
        N = 2**n
        rows.append(_report_row(formula_report(args.family, N), "formula"))
        if n <= 12:
            bits = [rng.randint(0, 1) for _ in range(N)]
            rows.append(_report_row(load_report(build(args.family, bits)), "measured"))
    _emit(_table(rows, args.format))
    return 0


def cmd_entropy(args) -> int:
    L = entropy_L(args.p)
    if args.n is None:
        rows = [{"p": args.p, "L": L}]
    else:
        plan = savings(args.p, args.n)
        rows = [{"p": plan.p, "L": plan.L, "N": plan.N, "M": plan.M, "savings": plan.savings}]
    if args.format == "table":
        _emit("\n".join(f"{k}={v!r}" for k, v in rows[0].items()))
    else:
        _emit(_table(rows, args.format))
    return 0


def _decomp_cases():
    ccnot, cswap, swap = ir.ccnot, ir.cswap, ir.swap

    def seq(k, gates):
        return ir.Circuit(k, tuple((g,) for g in gates))

    return {
        "swap-3cnot": (seq(2, swap_to_cnot(swap(0, 1))), seq(2, [swap(0, 1)])),
        "cswap-3toffoli": (seq(3, cswap_three_toffoli(cswap(0, 1, 2))), seq(3, [cswap(0, 1, 2)])),
        "cswap-sandwich": (seq(3, cswap_toffoli_sandwich(cswap(0, 1, 2))), seq(3, [cswap(0, 1, 2)])),
        "toffoli-cs": (seq(3, toffoli_cs(ccnot(0, 1, 2))), seq(3, [ccnot(0, 1, 2)])),
    }


DECOMP_GATES = ("swap-3cnot", "cswap-3toffoli", "cswap-sandwich", "toffoli-cs")


def cmd_verify_decomp(args) -> int:
    cases = _decomp_cases()
    names = DECOMP_GATES if args.gate == "all" else (args.gate,)
    status = 0
    for name in names:
        lowered, ref = cases[name]
        cmp = compare_unitaries(unitary_of(lowered), unitary_of(ref))
        line = f"{name} {cmp.verdict} max_deviation={cmp.max_deviation:.3e}"
        if cmp.verdict == "global-phase":
            line += f" phase={cmp.global_phase.real:.6g}{cmp.global_phase.imag:+.6g}j"
        _emit(line)
        # the controlled-S Toffoli is a claim under test: any verdict is a result, not a failure
        if name != "toffoli-cs" and not cmp.exact:
            status = 1
    return status


def cmd_compress(args) -> int:
    bits = parse_bits(args.bits)
    if len(bits) != args.n:
        raise UsageError(f"--bits has {len(bits)} bits but --n is {args.n}")
    spec = CodecSpec.for_source(args.p, args.n, max_weight=args.max_weight)
    code = encode(bits, spec)
    plan = savings(args.p, args.n)
    rows = [
        ("scheme", spec.scheme),
        ("N", spec.n),
        ("max_weight", spec.max_weight),
        ("M", spec.m),
        ("codeword", "".join(map(str, code))),
        ("L", repr(plan.L)),
        ("entropy_M", plan.M),
        ("entropy_savings", plan.savings),
        ("code_savings", spec.n - spec.m),
    ]
    _emit("\n".join(f"{k} {v}" for k, v in rows))
    return 0


def cmd_pipeline(args) -> int:
    spec = parse_spec(Path(args.spec).read_text())
    rep = run_pipeline(parse_bits(args.bits), spec)
    lines = [
        f"input {''.join(map(str, rep.bits))}",
        f"codeword {''.join(map(str, rep.codeword))}",
        f"recovered {''.join(map(str, rep.recovered))}",
        f"loaded_qubits {rep.load_qubits} (uncompressed {rep.n})",
        f"total_qubits {rep.total_qubits}",
        f"decompressor_gates {rep.decompressor_gates}",
        f"decompressor_depth {rep.decompressor_depth} (log2 N = {rep.log2_n:.4g})",
    ]
    if rep.plan is not None:
        lines.append(f"entropy_plan M={rep.plan.M} savings={rep.plan.savings}")
    lines.append("PASS" if rep.ok else "FAIL")
    _emit("\n".join(lines))
    return 0 if rep.ok else 1


def cmd_plot_data(args) -> int:
    if args.points < 2 or not 1 <= args.n_max <= 60:
        raise UsageError("--points must be at least 2 and --n-max in 1..60")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.which == "entropy":
        w.writerow(["p", "L"])
        for p, L in entropy_curve(args.points):
            w.writerow([format(p, ".6g"), format(L, ".12g")])
    else:
        w.writerow(["N", "log2log2N"])
        for N, v in loglog_curve(args.n_max):
            w.writerow([N, format(v, ".12g")])
    sys.stdout.write(buf.getvalue())
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qloader", description="Build, lower and simulate bit-loading circuits.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    b = sub.add_parser("build", help="build a loading circuit")
    b.add_argument("--family", required=True, choices=FAMILIES)
    b.add_argument("--bits")
    b.add_argument("--bits-file")
    b.add_argument("--passes", help="comma list of " + ", ".join(PIPELINE_PASSES) + ", or all")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("sim", help="simulate a circuit file")
    s.add_argument("file")
    s.add_argument("--dump", action="store_true")
    s.add_argument("--register", choices=("all", "outputs"), default="all")
    s.add_argument("--assert-target", metavar="FAMILY:BITS")
    s.add_argument("--initial", metavar="BITS")
    s.set_defaults(func=cmd_sim)

    r = sub.add_parser("resources", help="closed-form and measured resource table")
    r.add_argument("--family", required=True, choices=FAMILIES)
    r.add_argument("--n", type=int)
    r.add_argument("--n-max", type=int)
    r.add_argument("--format", choices=("table", "csv", "json"), default="table")
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_resources)

    e = sub.add_parser("entropy", help="binary entropy and qubit savings")
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--n", type=int)
    e.add_argument("--format", choices=("table", "csv", "json"), default="table")
    e.set_defaults(func=cmd_entropy)

    v = sub.add_parser("verify-decomp", help="brute-force check of gate decompositions")
    v.add_argument("--gate", choices=(*DECOMP_GATES, "all"), default="all")
    v.set_defaults(func=cmd_verify_decomp)

    c = sub.add_parser("compress", help="encode a block with the bounded-weight code")
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--bits", required=True)
    c.add_argument("--max-weight", type=int)
    c.set_defaults(func=cmd_compress)

    pl = sub.add_parser("pipeline", help="compress, load, decompress and check")
    pl.add_argument("--spec", required=True)
    pl.add_argument("--bits", required=True)
    pl.set_defaults(func=cmd_pipeline)

    pd = sub.add_parser("plot-data", help="CSV series for the entropy and log-log curves")
    pd.add_argument("which", choices=("entropy", "loglog"))
    pd.add_argument("--points", type=int, default=101)
    pd.add_argument("--n-max", type=int, default=20)
    pd.set_defaults(func=cmd_plot_data)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, InadmissibleInput, ValueError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        sys.stderr.write(f"qloader: error: {msg}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
