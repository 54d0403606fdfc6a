import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from cuspflow.cli import ConfigError, Table, _floats, _int, _region, build_config, main, parse_pairs, read_config_file
from cuspflow.lattice import Interval


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def meta(text):
    return dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))


def test_targets(capsys):
    code, out, _ = run_cli(capsys, "targets", "k=2", "n=2")
    assert code == 0
    assert {r["set"]: float(r["dimension"]) for r in rows(out)} == {"B": 1.5, "D": 5.5}
    code, out, _ = run_cli(capsys, "targets", "k=1", "n=2", "--format", "json")
    data = json.loads(out)
    assert [r["dimension"] for r in data["rows"]] == ["0.5", "2.5"]


def test_spectrum_ends_at_rational(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "x=2/7", "theta=1")
    assert code == 0
    rs = rows(out)
    assert [r["cusp"] for r in rs] == ["0/1", "1/3", "2/7"]
    assert rs[-1]["t_peak"] == "inf"


def test_count_single_and_fit(capsys):
    code, out, _ = run_cli(capsys, "count", "t=1.3862943611198906")
    assert code == 0 and rows(out)[0]["count"] == "10"
    code, out, _ = run_cli(capsys, "count", "t_grid=4:14:11")
    assert code == 0 and 0.9 <= float(meta(out)["slope"]) <= 1.1


def test_net_and_witness(capsys):
    code, out, _ = run_cli(capsys, "net", "N=25", "region=0:1]")
    assert code == 0 and {"0/1", "1/2", "1/1"} <= {r["cusp"] for r in rows(out)}
    code, out, _ = run_cli(capsys, "witness", "x=pi-3", "X=1e4")
    assert code == 0 and rows(out)[0]["cusp"] == "1/7"


def test_cantor_and_dimbox(capsys):
    code, out, _ = run_cli(capsys, "cantor", "kind=ddelta", "depth=3", "delta=1")
    assert code == 0 and len(rows(out)) == 4
    code, out, _ = run_cli(capsys, "dimbox", "set=segment")
    assert code == 0 and abs(float(meta(out)["slope"]) - 1) < 0.05


def test_cover_crossing(capsys):
    code, out, _ = run_cli(capsys, "cover", "mode=crossing", "seed_cusps=1/11,0/1", "i=0", "j=1",
                           "delta=1/10", "truncation=1e4")
    assert code == 0 and abs(float(rows(out)[0]["s_star"]) - 1.452) < 2e-3


def test_classify(capsys):
    code, out, _ = run_cli(capsys, "classify", "xs=golden,golden", "t_window=30")
    assert code == 0 and meta(out)["status"] == "recurrent"


def test_verify(capsys):
    code, out, _ = run_cli(capsys, "verify")
    assert code == 0
    assert all(r["ok"] == "True" for r in rows(out)) and meta(out)["failed"] == "0"


def test_exit_codes(capsys):
    assert run_cli(capsys, "bogus")[0] == 2
    assert run_cli(capsys, "spectrum")[0] == 2  # missing x
    assert run_cli(capsys, "net", "N=abc")[0] == 2
    assert run_cli(capsys, "count", "t=30", "budget=100")[0] == 3
    assert run_cli(capsys, "spectrum", "x=1/2", "h_max=-1")[0] == 2
    assert run_cli(capsys, "spectrum", "x=1/2", "noequals")[0] == 2
    assert run_cli(capsys, "witness", "x=1/2", "X=2")[0] == 2


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nx = 2/7\ntheta = 2   # stricter\nformat = json\n")
    assert read_config_file(str(cfg)) == {"x": "2/7", "theta": "2", "format": "json"}
    code, out, _ = run_cli(capsys, "spectrum", "--config", str(cfg), "theta=1", "--format", "csv")
    assert code == 0 and meta(out)["theta"] == "1"
    assert run_cli(capsys, "spectrum", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_parsers():
    assert _int("1e6") == _int("10**6") == 10**6
    with pytest.raises(ValueError):
        _int("1.5e0")
    assert _region("0:1]") == Interval(0, 1, True) and _region("-1/2:1/2") == Interval(Fraction(-1, 2), Fraction(1, 2))
    assert _floats("0:1:3") == [0.0, 0.5, 1.0] and _floats("1,2.5") == [1.0, 2.5]
    assert parse_pairs(["--a=1", "b = 2"]) == {"a": "1", "b": "2"}
    cfg = build_config({"delta": "1/4", "h_max": "1e4", "extra_key": "v"})
    assert cfg.delta == Fraction(1, 4) and cfg.h_max == 10**4 and cfg.get("extra_key") == "v"
    with pytest.raises(ConfigError):
        build_config({"delta": "0"})
    with pytest.raises(ConfigError):
        build_config({"model": "gaussian"})
    with pytest.raises(ConfigError):
        build_config({"format": "xml"})


def test_table_render():
    t = Table(["a", "b"], [[Fraction(1, 3), 0.1234567890123456]], {"k": Fraction(2)})
    assert t.render("csv") == "# k=2\na,b\n1/3,0.123456789012\n"
    assert json.loads(t.render("json")) == {"meta": {"k": "2"}, "rows": [{"a": "1/3", "b": "0.123456789012"}]}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cuspflow", "targets", "k=2", "n=2"], capture_output=True, text=True)
    assert res.returncode == 0 and "B,1.5" in res.stdout
