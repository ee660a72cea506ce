import csv
import io

import pytest

from twotier import cli
from twotier.cli import ConfigError, SweepSpec, parse_config
from twotier.params import DEFAULTS, ParameterError


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_empty_config_is_defaults(tmp_path):
    f = tmp_path / "empty.cfg"
    f.write_text("")
    assert cli.load_config(f) == DEFAULTS
    assert parse_config("# only a comment\n\n") == DEFAULTS
    assert DEFAULTS.kappa == 0.1 and DEFAULTS.n_h == 256 and DEFAULTS.sigma_sq == 1.0


def test_config_values_and_errors():
    p = parse_config("kappa = 0.2\nn_h=128  # fewer carriers\nT = 4\n")
    assert (p.kappa, p.n_h, p.T) == (0.2, 128, 4.0)
    with pytest.raises(ConfigError, match=r":2: unknown key 'kapa'"):
        parse_config("T = 1\nkapa = 0.2\n")
    with pytest.raises(ConfigError, match=r":3: cannot parse"):
        parse_config("T = 1\n\nmu_m = lots\n")
    with pytest.raises(ConfigError, match=r":1: expected key = value"):
        parse_config("kappa 0.2\n")
    with pytest.raises(ConfigError):
        parse_config("n_h = 2.5\n")


@pytest.mark.parametrize("line,key", [("kappa = 1.0", "kappa"), ("alpha = 2", "alpha")])
def test_domain_rules(line, key):
    with pytest.raises(ParameterError) as e:
        parse_config(line)
    assert e.value.key == key


def test_cli_reports_offending_key(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("alpha = 2\n")
    code, out, err = _run("outage-mbs", "--config", str(f), "--trials", "10")
    assert code == 2 and out == "" and "alpha" in err
    code, _, err = _run("outage-fap", "--d_f", "1500", "--trials", "10")
    assert code == 2 and "d_f" in err
    code, _, err = _run("outage-mbs", "--bogus")
    assert code != 0


def test_sweep_spec():
    assert SweepSpec.parse("T", "0.5,1,2", None).values == (0.5, 1.0, 2.0)
    assert SweepSpec.parse("t", None, "4,16,3,log").values == (4, 8, 16)
    assert SweepSpec.parse("kappa", None, "0.1,0.3,3,linear").values == pytest.approx((0.1, 0.2, 0.3))
    for args in (("alpha", "3", None), ("T", None, None), ("T", "1", "1,2,2,linear"), ("n_h", "1.5", None)):
        with pytest.raises(ConfigError):
            SweepSpec.parse(*args)


def test_outage_csv_schema_and_determinism():
    code, first, _ = _run("outage-mbs", "--T", "2", "--trials", "3000", "--seed", "1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(first)))
    assert tuple(rows[0]) == cli.CSV_HEADER
    assert len(rows) == 2
    row = dict(zip(rows[0], rows[1]))
    assert row["estimator"] == "mbs" and row["effective_trials"] == "3000"
    assert float(row["bound_lower"]) <= float(row["bound_upper"])
    _, again, _ = _run("outage-mbs", "--T", "2", "--trials", "3000", "--seed", "1", "--threads", "3")
    assert again == first


def test_sweep_rows(tmp_path):
    out = tmp_path / "sweep.csv"
    code, stdout, _ = _run("sweep", "--param", "T", "--values", "0.5,2,8", "--trials", "2000",
                           "--seed", "3", "--estimator", "fap", "--estimator", "mbs", "--out", str(out))
    assert code == 0 and stdout == ""
    rows = list(csv.DictReader(out.open()))
    assert [(r["value"], r["estimator"]) for r in rows] == [
        ("0.5", "fap"), ("0.5", "mbs"), ("2.0", "fap"), ("2.0", "mbs"), ("8.0", "fap"), ("8.0", "mbs")
    ]
    fap = [float(r["p_hat"]) for r in rows if r["estimator"] == "fap"]
    assert fap == sorted(fap)


def test_failed_sweep_leaves_no_output(tmp_path):
    out = tmp_path / "sweep.csv"
    code, stdout, err = _run("sweep", "--param", "kappa", "--values", "0.1,1.5", "--trials", "50", "--out", str(out))
    assert code == 2 and "kappa" in err and not out.exists() and stdout == ""


def test_areas_report():
    code, out, _ = _run("areas", "--d_f", "700", "--t", "8", "--samples", "1000000")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][0] == "band" and len(rows) == 1 + 17 + 2
    assert rows[-1][0] == "max_rel_err" and float(rows[-1][1]) <= 0.005


def test_laplace_report():
    code, out, _ = _run("laplace", "--s", "0,1", "--trials", "2000", "--seed", "2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["mc_mean"]) == 1.0 and float(rows[0]["bound_lower"]) == 1.0


def test_validate_subset():
    code, out, _ = _run("validate", "--only", "A7")
    assert code == 0 and out.splitlines()[0].startswith("A7: PASS")
    code, _, err = _run("validate", "--only", "A99")
    assert code == 2 and "A99" in err
