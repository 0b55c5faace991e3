import json
import math

import numpy as np
import pytest

from romkit.cli import main
from romkit.io import read_overlap_records, read_state
from romkit.pauli import pauli_decompose
from romkit.stabilizers import count_stabilizer_states, overlap_table
from romkit.states import F_STATE, H_STATE


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    lines = out.out.strip().splitlines()
    payload = json.loads(lines[0]) if lines else None
    assert len(lines) <= 1
    return code, payload, out.err


@pytest.fixture
def h1(tmp_path, capsys):
    path = tmp_path / "h1.qpv"
    code, _, _ = run(capsys, "gen", "--kind", "h-state", "--out", path)
    assert code == 0
    return path


def test_gen_h_and_f(tmp_path, capsys, h1):
    assert np.array_equal(read_state(h1)[1], H_STATE)
    code, out, _ = run(capsys, "gen", "--kind", "f-state", "--out", tmp_path / "f.qpv", "--json")
    assert code == 0 and out["n"] == 1
    assert np.array_equal(read_state(tmp_path / "f.qpv")[1], F_STATE)


def test_gen_is_deterministic(tmp_path, capsys):
    for name in ("a.qdm", "b.qdm"):
        run(capsys, "gen", "--kind", "haar-mixed", "--n", 2, "--seed", 42, "--out", tmp_path / name)
    assert (tmp_path / "a.qdm").read_bytes() == (tmp_path / "b.qdm").read_bytes()
    run(capsys, "gen", "--kind", "haar-mixed", "--n", 2, "--seed", 43, "--out", tmp_path / "c.qdm")
    assert (tmp_path / "a.qdm").read_bytes() != (tmp_path / "c.qdm").read_bytes()


def test_gen_copies_and_stabilizer(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "--kind", "h-state", "--copies", 3, "--out", tmp_path / "h3.qpv")
    assert code == 0 and out["n"] == 3
    run(capsys, "gen", "--kind", "stabilizer-random", "--n", 3, "--seed", 1, "--out", tmp_path / "s.qpv")
    code, out, _ = run(capsys, "info", "--in", tmp_path / "s.qpv")
    assert out["st_norm"] == pytest.approx(1.0)


def test_convert_roundtrip(tmp_path, capsys):
    run(capsys, "gen", "--kind", "haar-mixed", "--n", 2, "--seed", 3, "--out", tmp_path / "a.qdm")
    assert run(capsys, "convert", "--in", tmp_path / "a.qdm", "--out", tmp_path / "a.qpv")[0] == 0
    run(capsys, "convert", "--in", tmp_path / "a.qpv", "--out", tmp_path / "b.qdm")
    run(capsys, "convert", "--in", tmp_path / "a.qpv", "--out", tmp_path / "b.json", "--to", "qdm")
    rho = read_state(tmp_path / "a.qdm")[1]
    assert np.max(np.abs(read_state(tmp_path / "b.qdm")[1] - rho)) <= 1e-12
    assert np.max(np.abs(read_state(tmp_path / "b.json")[1] - rho)) <= 1e-12


def test_info_and_validate(tmp_path, capsys, h1):
    code, out, _ = run(capsys, "info", "--in", h1, "--json")
    assert out["st_norm"] == pytest.approx((1 + math.sqrt(2)) / 2)
    assert run(capsys, "validate", "--in", h1, "--psd")[0] == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 1, "entries": [1.0, 1.0, 1.0, 0.0]}))
    code, out, _ = run(capsys, "validate", "--in", bad, "--psd")
    assert code == 1 and out["passed"] is False


def test_fidelity_and_rom_examples(tmp_path, capsys, h1):
    _, out, _ = run(capsys, "fidelity", "--in", h1, "--json")
    assert out["fidelity_sq"] == pytest.approx(0.8535533905932737, abs=1e-12)
    _, out, _ = run(capsys, "rom", "--method", "naive", "--in", h1, "--json")
    assert out["value"] == pytest.approx(math.sqrt(2), abs=1e-9) and out["exact"] is True
    for key in ("value", "exact", "lower_bound", "iterations", "n_columns_final", "seconds"):
        assert key in out
    run(capsys, "gen", "--kind", "stabilizer-random", "--n", 2, "--seed", 5, "--out", tmp_path / "stab.qpv")
    _, out, _ = run(capsys, "rom", "--method", "cg", "--in", tmp_path / "stab.qpv")
    assert out["value"] == pytest.approx(1.0) and out["exact"] is True and out["iterations"] == 0


def test_rom_methods_agree(tmp_path, capsys):
    path = tmp_path / "m.qdm"
    run(capsys, "gen", "--kind", "haar-mixed", "--n", 3, "--seed", 7, "--out", path)
    naive = run(capsys, "rom", "--method", "naive", "--in", path)[1]["value"]
    cg = run(capsys, "rom", "--method", "cg", "--in", path, "--max-new", "50", "--k", "0.02")[1]
    assert cg["value"] == pytest.approx(naive, abs=1e-6) and cg["exact"]
    top = run(capsys, "rom", "--method", "top", "--k", "0.05", "--in", path)[1]
    fw = run(capsys, "rom", "--method", "fwht", "--in", path)[1]
    assert naive - 1e-9 <= top["value"] <= fw["value"] + 1e-9
    assert run(capsys, "rom", "--method", "cg", "--backend", "highs", "--in", path)[1]["value"] == pytest.approx(naive, abs=1e-6)


def test_top_requires_k(h1):
    with pytest.raises(SystemExit) as exc:
        main(["rom", "--method", "top", "--in", str(h1)])
    assert exc.value.code == 2


def test_guard_refusal_and_format_errors(tmp_path, capsys, caplog):
    path = tmp_path / "h5.qpv"
    run(capsys, "gen", "--kind", "h-state", "--n", 5, "--out", path)
    code, out, _ = run(capsys, "rom", "--method", "naive", "--in", path)
    assert code == 2 and out is None and "column_generation" in caplog.text
    trunc = tmp_path / "t.qpv"
    trunc.write_bytes(path.read_bytes()[:100])
    code, out, _ = run(capsys, "info", "--in", trunc)
    assert code == 1 and out is None and "offset 100" in caplog.text
    assert run(capsys, "info", "--in", tmp_path / "missing.qpv")[0] == 1


def test_overlaps_top_and_dump(tmp_path, capsys):
    path = tmp_path / "r.qdm"
    run(capsys, "gen", "--kind", "haar-mixed", "--n", 2, "--seed", 9, "--out", path)
    b = pauli_decompose(read_state(path)[1])
    table = overlap_table(b).reshape(-1)
    _, top, _ = run(capsys, "overlaps", "--in", path, "--top", 3)
    assert [t["overlap"] for t in top] == pytest.approx(sorted(table)[::-1][:3])
    assert all(set(t) == {"block", "delta", "overlap"} for t in top)
    dumps = []
    for threads in (1, 3):
        dump = tmp_path / f"o{threads}.bin"
        _, out, _ = run(capsys, "--threads", threads, "overlaps", "--in", path, "--dump", dump)
        assert out["count"] == count_stabilizer_states(2)
        dumps.append(dump.read_bytes())
    assert dumps[0] == dumps[1]
    rec = read_overlap_records(tmp_path / "o1.bin")
    assert np.allclose(rec["overlap"], table)
    assert rec["block"].tolist() == (np.arange(60) >> 2).tolist()


def test_thread_count_does_not_change_rom(tmp_path, capsys):
    path = tmp_path / "p.qdm"
    run(capsys, "gen", "--kind", "haar-pure", "--n", 3, "--seed", 11, "--out", path)
    outs = [run(capsys, "--threads", t, "rom", "--method", "cg", "--in", path)[1] for t in (1, 2)]
    assert outs[0]["value"] == outs[1]["value"]
    assert outs[0]["iterations"] == outs[1]["iterations"]


def test_fwht_feasible(tmp_path, capsys, h1):
    _, out, _ = run(capsys, "fwht-feasible", "--in", h1, "--json")
    assert out["blocks"] == 3 and out["residual_inf"] <= 1e-12
    assert out["r_fwht"] >= (1 + math.sqrt(2)) / 2


def test_rom_copies_and_partition(tmp_path, capsys, h1):
    _, out, _ = run(capsys, "rom-copies", "--state", "h", "--n", 4, "--k", 2)
    assert len(out["values"]) == 4 and out["exact"] == [True, True, False, False]
    assert out["values"][0] == pytest.approx(math.sqrt(2))
    _, out2, _ = run(capsys, "rom-copies", "--state", str(h1), "--n", 4, "--k", 2)
    assert out2["values"] == pytest.approx(out["values"])
    _, out, _ = run(capsys, "rom-partition", "--in", h1, h1, "--max-group", 2, "--method", "naive")
    assert out["best_partition"] == [[0, 1]] and len(out["per_group_values"]) == 1
    assert out["value"] <= 2 + 1e-9
