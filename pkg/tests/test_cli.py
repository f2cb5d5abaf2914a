import json

import numpy as np
import pytest

from dmelodies import MANIFEST_VERSION, cardinality
from dmelodies.cli import parse_range, read_codes_csv, run, write_codes_csv
from dmelodies.dataset_io import CSV_HEADER
from dmelodies.factor_space import FACTOR_NAMES, index_to_codes


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    first, _, rest = out.partition("\n")
    assert first == MANIFEST_VERSION
    return code, (json.loads(rest) if code == 0 else None), err


def _error(err):
    line = err.strip().splitlines()[-1]
    return json.loads(line)


def test_index_to_factors(capsys):
    code, body, _ = _run(capsys, "index", "--to-factors", "0")
    assert code == 0
    assert body["index"] == 0
    assert body["factors"] == {"tonic": 0, "octave": 4, "scale": 0, "rhythm_bar1": 0, "rhythm_bar2": 0,
                               "arp_chord1": 0, "arp_chord2": 0, "arp_chord3": 0, "arp_chord4": 0}
    assert body["names"]["scale"] == "MAJOR"


def test_index_round_trip(capsys):
    last = cardinality() - 1
    _, body, _ = _run(capsys, "index", "--to-factors", str(last))
    codes = ",".join(str(body["factors"][n]) for n in FACTOR_NAMES)
    code, back, _ = _run(capsys, "index", "--from-factors", codes)
    assert code == 0 and back["index"] == last


def test_index_errors(capsys):
    code, _, err = _run(capsys, "index", "--to-factors", str(cardinality()))
    assert code == 1 and _error(err)["error"] == "bad_index"
    code, _, err = _run(capsys, "index", "--from-factors", "0,3,0,0,0,0,0,0,0")
    assert code == 1 and _error(err)["error"] == "bad_factors"


def test_unknown_flag_is_machine_readable(capsys):
    code, _, err = _run(capsys, "stats", "--bogus", "1")
    assert code == 2
    e = _error(err)
    assert e["error"] == "usage" and "bogus" in e["message"]
    code, _, err = _run(capsys)
    assert code == 2 and _error(err)["error"] == "usage"


def test_stats(capsys):
    code, body, _ = _run(capsys, "stats")
    assert code == 0
    assert body["cardinality"] == 1_354_752
    assert body["vocabulary_size"] == len(body["vocabulary"]) == 87
    assert len(body["rhythm_dictionary"]) == 28
    assert body["rhythm_dictionary"]["0"] == {"onsets": [0, 1, 2, 3, 4, 5], "pattern": "xxxxxx.."}


def test_generate_and_verify(tmp_path, capsys):
    out = tmp_path / "ds"
    code, body, _ = _run(capsys, "generate", "--out", str(out), "--range", "1000..1300",
                          "--formats", "csv,tokens,midi", "--workers", "2")
    assert code == 0 and body["range"] == [1000, 1300]
    assert len(list((out / "midi").glob("*.mid"))) == 300
    code, report, _ = _run(capsys, "verify", "--out", str(out))
    assert code == 0 and report["ok"]
    # tamper with one token line
    lines = (out / "tokens.txt").read_text().splitlines()
    lines[5] = lines[6]
    (out / "tokens.txt").write_text("\n".join(lines) + "\n")
    code, _, err = _run(capsys, "verify", "--out", str(out))
    assert code == 1 and _error(err)["error"] == "verification_failed"


def test_generate_errors(tmp_path, capsys):
    code, _, err = _run(capsys, "generate", "--out", str(tmp_path), "--formats", "wav", "--range", "0..2")
    assert code == 1 and _error(err)["error"] == "bad_format"
    code, _, err = _run(capsys, "generate", "--out", str(tmp_path), "--range", "5..2")
    assert code == 1 and _error(err)["error"] == "bad_range"
    code, _, err = _run(capsys, "verify", "--out", str(tmp_path / "nothing"))
    assert code == 1 and _error(err)["error"] == "missing_file"


def test_parse_range():
    assert parse_range(None) == (0, cardinality())
    assert parse_range("3..9") == (3, 9)
    for bad in ("3-9", "a..b", "-1..4", f"0..{cardinality() + 1}"):
        with pytest.raises(Exception):
            parse_range(bad)


def test_codes_csv_round_trip(tmp_path, rng):
    z = rng.normal(size=(7, 3))
    write_codes_csv(z, tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == "z0,z1,z2"
    np.testing.assert_array_equal(read_codes_csv(tmp_path / "c.csv"), z)


def test_evaluate(tmp_path, capsys, rng):
    gen = tmp_path / "ds"
    gen.mkdir()
    idx = np.sort(rng.choice(cardinality(), 3000, replace=False))
    factors = index_to_codes(idx)
    rows = [",".join(map(str, [i] + list(r))) for i, r in zip(idx.tolist(), factors.tolist())]
    (gen / "factors.csv").write_text(CSV_HEADER + "\n" + "\n".join(rows) + "\n")
    write_codes_csv(factors + rng.normal(scale=0.01, size=factors.shape), tmp_path / "codes.csv")
    rep = tmp_path / "rep.json"
    code, body, _ = _run(capsys, "evaluate", "--codes", str(tmp_path / "codes.csv"),
                          "--factors", str(gen / "factors.csv"), "--report", str(rep))
    assert code == 0
    assert json.loads(rep.read_text()) == body
    assert body["config"]["bins"] == 20 and body["config"]["n"] == 3000
    write_codes_csv(factors[:10].astype(float), tmp_path / "short.csv")
    code, _, err = _run(capsys, "evaluate", "--codes", str(tmp_path / "short.csv"),
                        "--factors", str(gen / "factors.csv"))
    assert code == 1 and _error(err)["error"] == "bad_input"


BENCH = ("--subset", "512", "--epochs", "2", "--hidden", "16", "--latent-dim", "4", "--batch", "64",
         "--anneal-iters", "4", "--warmup-epochs", "0")


@pytest.mark.parametrize("method,hp", [("beta", "4.0"), ("annealed", "25"), ("factor", "10")])
def test_bench(tmp_path, capsys, method, hp):
    out = tmp_path / method
    code, body, _ = _run(capsys, "bench", "--method", method, "--hp", hp, "--seed", "0", "--out", str(out), *BENCH)
    assert code == 0
    for name in ("codes.csv", "factors.csv", "history.csv", "report.json"):
        assert (out / name).exists()
    assert json.loads((out / "report.json").read_text()) == body
    assert read_codes_csv(out / "codes.csv").shape == (512, 4)
    assert len((out / "history.csv").read_text().splitlines()) == 3
    assert (body["discriminator"] is None) == (method != "factor")
    assert {"mig", "modularity", "sap"} <= set(body["metrics"])


def test_bench_bad_config(tmp_path, capsys):
    code, _, err = _run(capsys, "bench", "--method", "beta", "--hp", "1", "--seed", "0",
                        "--out", str(tmp_path), "--lr", "-1")
    assert code == 1 and _error(err)["error"] == "bad_config"
    code, _, err = _run(capsys, "bench", "--method", "vq", "--hp", "1", "--seed", "0", "--out", str(tmp_path))
    assert code == 2
