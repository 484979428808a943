import json
import subprocess
import sys

import pytest

from qloader.circuit import loads
from qloader.cli import main


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_build_family2ne(tmp_path, capsys):
    path = tmp_path / "c.txt"
    code, out, _ = call(capsys, "build", "--family", "2ne", "--bits", "0110", "-o", str(path))
    assert code == 0
    circ = loads(path.read_text())
    assert circ.num_qubits == 7  # N data qubits plus N-1 controls
    assert "qubits 7" in out


def test_build_family1_single_bit(capsys):
    code, out, _ = call(capsys, "build", "--family", "1", "--bits", "0")
    assert code == 0
    circ = loads(out)
    assert circ.num_qubits == 1 and len(circ) == 1


def test_build_bits_file(tmp_path, capsys):
    raw = tmp_path / "bits.bin"
    raw.write_bytes(b"\x96")
    code, out, _ = call(capsys, "build", "--family", "1", "--bits-file", str(raw))
    assert code == 0
    assert "CLX 1 0" in out and "CLX 0 1" in out


def test_family3_sim_assert(tmp_path, capsys):
    path = tmp_path / "c.txt"
    call(capsys, "build", "--family", "3", "--bits", "00001111", "-o", str(path))
    code, out, _ = call(capsys, "sim", str(path), "--assert-target", "3:00001111")
    assert code == 0 and out.startswith("PASS")
    code, out, _ = call(capsys, "sim", str(path), "--assert-target", "3:00001110")
    assert code == 1 and out.startswith("FAIL")


def test_sim_dump_output_register(tmp_path, capsys):
    path = tmp_path / "c.txt"
    call(capsys, "build", "--family", "2ne", "--bits", "0110", "-o", str(path))
    code, out, _ = call(capsys, "sim", str(path), "--dump", "--register", "outputs")
    assert code == 0
    assert out.splitlines() == ["000 0.5 0", "011 0.5 0", "101 0.5 0", "110 0.5 0"]


def test_sim_empty_circuit(tmp_path, capsys):
    path = tmp_path / "e.txt"
    path.write_text("qubits 3\n")
    code, out, _ = call(capsys, "sim", str(path), "--dump")
    assert code == 0 and out == "000 1 0\n"


def test_lowered_family2e_passes_assertion(tmp_path, capsys):
    path = tmp_path / "c.txt"
    code, out, _ = call(capsys, "build", "--family", "2e", "--bits", "10110010",
                        "--passes", "all", "-o", str(path))
    assert code == 0 and "verdict=exact" in out
    code, out, _ = call(capsys, "sim", str(path), "--assert-target", "2e:10110010")
    assert code == 0


def test_sim_parse_error_has_line(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("qubits 2\nH 0\nBOGUS 1\n")
    code, _, err = call(capsys, "sim", str(path), "--dump")
    assert code == 2
    assert "line 3" in err and len(err.strip().splitlines()) == 1


def test_resources_row(capsys):
    code, out, _ = call(capsys, "resources", "--family", "2e", "--n", "3", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    formula = [r for r in rows if r["source"] == "formula"][0]
    assert formula["CNOT"] == 22 and formula["CCNOT"] == 11


def test_resources_formats(capsys):
    for fmt in ("table", "csv"):
        code, out, _ = call(capsys, "resources", "--family", "3", "--n-max", "3", "--format", fmt)
        assert code == 0 and "depth_bound" in out.splitlines()[0]


def test_entropy(capsys):
    code, out, _ = call(capsys, "entropy", "--p", "0.5")
    assert code == 0 and "L=1.0" in out
    code, out, _ = call(capsys, "entropy", "--p", "0.03", "--n", "100")
    assert "M=20" in out and "savings=80" in out


def test_entropy_range_error(capsys):
    code, _, err = call(capsys, "entropy", "--p", "2")
    assert code == 2 and err.count("\n") == 1


def test_verify_decomp(capsys):
    code, out, _ = call(capsys, "verify-decomp", "--gate", "toffoli-cs")
    assert code == 0 and out.startswith("toffoli-cs exact")
    code, out, _ = call(capsys, "verify-decomp")
    assert code == 0 and len(out.splitlines()) == 4


def test_compress(capsys):
    code, out, _ = call(capsys, "compress", "--p", "0.03", "--n", "4", "--bits", "0010", "--max-weight", "1")
    assert code == 0
    fields = dict(line.split(" ", 1) for line in out.splitlines())
    assert fields["M"] == "3" and len(fields["codeword"]) == 3


def test_compress_rejects_heavy_word(capsys):
    code, _, err = call(capsys, "compress", "--p", "0.03", "--n", "4", "--bits", "1110", "--max-weight", "1")
    assert code == 2 and "weight" in err


def test_pipeline(tmp_path, capsys):
    spec = tmp_path / "spec.txt"
    spec.write_text("scheme = enumerative\nn = 4\nmax_weight = 1\n")
    code, out, _ = call(capsys, "pipeline", "--spec", str(spec), "--bits", "0010")
    assert code == 0 and out.rstrip().endswith("PASS") and "recovered 0010" in out


def test_plot_data(capsys):
    code, out, _ = call(capsys, "plot-data", "loglog", "--n-max", "16")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "N,log2log2N" and lines[-1] == "65536,4"
    code, out, _ = call(capsys, "plot-data", "entropy", "--points", "3")
    assert out.splitlines() == ["p,L", "0,0", "0.5,1", "1,0"]


@pytest.mark.parametrize("argv", [
    ["build", "--family", "9", "--bits", "01"],
    ["build", "--family", "1"],
    ["build", "--family", "1", "--bits", "012"],
    ["build", "--family", "2ne", "--bits", "01", "--passes", "nope"],
    ["resources", "--family", "2ne"],
    ["sim", "/nonexistent/file"],
    [],
])
def test_usage_errors(argv, capsys):
    code, _, err = call(capsys, *argv)
    assert code == 2
    assert len(err.strip().splitlines()) == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qloader", "entropy", "--p", "0.5"],
                         capture_output=True, text=True, check=True)
    assert "L=1.0" in out.stdout
