import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sscensus.cli import CENSUS_FIELDS, PrimeSetSpecError, RunConfig, main, parse_prime_set, run
from sscensus.constants import PrimeSet, PrimeSetError


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "spec,m,res",
    [
        ("all", 1, {0}),
        ("1 mod 3", 3, {1}),
        ("1,4 mod 5", 5, {1, 4}),
        (" 2 , 3 mod 7 ", 7, {2, 3}),
        ("split:Q(sqrt:5)", 5, {1, 4}),
        ("split:Q(sqrt:-3)", 3, {1}),
        ("split:Q(zeta:15)", 15, {1}),
    ],
)
def test_parse_prime_set(spec, m, res):
    ps = parse_prime_set(spec)
    assert (ps.m, set(ps.residues)) == (m, res)


def test_parse_prime_set_errors():
    with pytest.raises(PrimeSetError):
        parse_prime_set("2 mod 4")
    with pytest.raises(PrimeSetSpecError) as exc:
        parse_prime_set("1;2 mod 5")
    assert exc.value.pos == 1
    with pytest.raises(PrimeSetSpecError):
        parse_prime_set("split:K(sqrt:5)")
    with pytest.raises(PrimeSetSpecError):
        parse_prime_set("primes")


def test_constants_json(capsys):
    code, out, _ = _run(["constants", "--set", "1 mod 3"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["K"] == pytest.approx(0.548311355616, abs=1e-12)
    assert obj["C"] == pytest.approx(math.pi / 9, rel=1e-11)
    assert obj["C_exact_hint"] == "pi/9"


def test_constants_split_field(capsys):
    code, out, _ = _run(["constants", "--set", "split:Q(sqrt:-5)"], capsys)
    assert json.loads(out)["C_exact_hint"] == "19*pi/120"


def test_usage_errors_exit_one(capsys):
    assert _run(["constants", "--set", "2 mod 4"], capsys)[0] == 1
    assert _run(["census", "--A", "0", "--B", "3", "--x", "10"], capsys)[0] == 1
    assert _run(["census", "--A", "3", "--B", "3", "--x-grid", "100,50"], capsys)[0] == 1
    assert _run(["census", "--A", "3", "--B", "3"], capsys)[0] == 1
    assert _run(["hurwitz", "--D=-5"], capsys)[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1


def test_census_csv_header_and_rows(capsys):
    code, out, _ = _run(["census", "--set", "1 mod 3", "--A", "15", "--B", "12", "--x-grid", "50,100", "--workers", "1"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == CENSUS_FIELDS
    assert [r[0] for r in rows[1:]] == ["50", "100"]
    # 12 significant digits
    assert all(len(v.replace(".", "").replace("-", "").lstrip("0")) <= 12 for v in rows[1][4:])


def test_census_json_and_gnuplot(capsys):
    base = ["census", "--set", "all", "--A", "10", "--B", "10", "--x-grid", "30,60", "--workers", "1"]
    _, out, _ = _run(base + ["--format", "json"], capsys)
    data = json.loads(out)
    assert isinstance(data, list) and list(data[0]) == list(CENSUS_FIELDS)
    _, out, _ = _run(base + ["--format", "gnuplot"], capsys)
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert len(lines) == 2 and all(len(ln.split()) == 3 for ln in lines)


def test_census_output_independent_of_workers(capsys, tmp_path):
    base = ["census", "--set", "1,2 mod 3", "--A", "30", "--B", "30", "--x-grid", "100,200", "--minimal"]
    outs = []
    for w in ("1", "2"):
        path = tmp_path / f"w{w}.csv"
        assert main(base + ["--workers", w, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_census_cm_column(capsys):
    _, out, _ = _run(["census", "--A", "40", "--B", "40", "--x", "50", "--cm", "--workers", "1"], capsys)
    header = out.splitlines()[0].split(",")
    assert header[-1] == "cm_count"


def test_hurwitz_values(capsys):
    code, out, _ = _run(["hurwitz", "--D=-20,-28,-12,-16"], capsys)
    assert code == 0
    assert out.splitlines()[1:] == ["-20,2/1", "-28,2/1", "-12,4/3", "-16,3/2"]


def test_hurwitz_average_with_cross_check(capsys):
    code, out, _ = _run(["hurwitz", "--set", "all", "--x", "7", "--cross", "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)[0]["hurwitz_avg"] == pytest.approx(12 / 35, abs=1e-12)


def test_lsum(capsys):
    code, out, _ = _run(["lsum", "--set", "1 mod 3", "--x-grid", "1000,10000"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[1]["ratio"]) == pytest.approx(0.9958, abs=1e-3)


def test_heuristic(capsys):
    code, out, _ = _run(["heuristic", "--set", "2 mod 3", "--p", "1000003", "--M", "12"], capsys)
    obj = json.loads(out)
    assert code == 0
    assert obj["predicted_constant"] == pytest.approx(math.pi / 3, rel=1e-11)
    assert obj["bias_ratio"] == pytest.approx(4 / 3, rel=1e-11)
    assert obj["normalizer_times_2sqrtp"] == pytest.approx(1, abs=1e-2)


def test_verify_passes(capsys):
    code, out, _ = _run(["verify"], capsys)
    assert code == 0
    assert out.count("PASS") == len(out.splitlines())


def test_invariant_violation_exit_two(monkeypatch, capsys):
    from sscensus import cli
    from sscensus.verify import Check

    monkeypatch.setattr(cli, "run_checks", lambda: [Check("broken", False, "forced")])
    assert run(RunConfig("verify")) == 2
    monkeypatch.setattr(cli, "cross_identity_check", lambda ps, x: (1.0, 2.0))
    assert main(["hurwitz", "--x", "50", "--cross"]) == 2


def test_demos(capsys):
    code, out, _ = _run(["demo", "torsion", "--x", "3000"], capsys)
    assert code == 0 and "E_(-2,1)" in out
    ps = [int(r.split(",")[0]) for r in out.splitlines()[2:]]
    assert ps and all(p % 4 == 3 for p in ps if p > 37)
    code, out, _ = _run(["demo", "sato-tate", "--x", "2000", "--bins", "5"], capsys)
    assert code == 0 and len(out.splitlines()) == 1 + 1 + 5
    assert _run(["demo", "sato-tate", "--a", "0", "--b", "1", "--x", "100"], capsys)[0] == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sscensus", "constants", "--set", "all"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["C_exact_hint"] == "pi/3"


def test_prime_set_label_roundtrip():
    ps = parse_prime_set("4,6 mod 5")
    assert ps == PrimeSet.of(5, 1, 4)
    assert ps.label == "1,4 mod 5"
