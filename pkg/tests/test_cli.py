import csv

from tandem_curb.cli import main
from tandem_curb.experiments import bundled_config

HK = bundled_config("hong_kong.toml")
LATE = bundled_config("late_example.toml")


def test_validate(capsys):
    assert main(["validate", "--config", HK]) == 0
    out = capsys.readouterr().out
    assert "parameters valid" in out


def test_validate_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text(open(HK).read().replace("beta = 100.0", "beta = 130.0"))
    assert main(["validate", "--config", str(bad)]) == 1
    assert "validation error" in capsys.readouterr().err


def test_classify(capsys):
    assert main(["classify", "--config", HK]) == 0
    out = capsys.readouterr().out
    assert "S5" in out and "curb-only" in out and "both-overlapping" in out


def test_solve_with_curves(tmp_path, capsys):
    out_csv = tmp_path / "curves.csv"
    assert main(["solve", "--config", HK, "--out", str(out_csv)]) == 0
    out = capsys.readouterr().out
    assert "scenario S5" in out and "7:58" in out
    with open(out_csv, encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    assert header == ["time_h", "A_H", "D_H", "A_CR", "D_CR", "A_CP", "D_CP",
                      "w_H", "w_CR", "w_CP"]


def test_solve_late(capsys):
    assert main(["solve", "--config", LATE, "--late"]) == 0
    out = capsys.readouterr().out
    assert "ordering case c" in out


def test_simulate_csv(tmp_path, capsys):
    out_csv = tmp_path / "queues.csv"
    assert main(["simulate", "--config", HK, "--dt", "0.002",
                 "--out", str(out_csv)]) == 0
    with open(out_csv, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["time_h", "q_H", "q_CR", "q_CP"]
    assert len(rows) > 100
    assert "." in rows[500][1] or rows[500][1] == "0"


def test_price_and_fees_csv(tmp_path, capsys):
    out_csv = tmp_path / "fees.csv"
    assert main(["price", "--config", HK, "--out", str(out_csv)]) == 0
    out = capsys.readouterr().out
    assert "N^R" in out
    with open(out_csv, encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    assert header == ["time_h", "fee_rv", "fee_pv"]


def test_price_single_mode_exit_code(tmp_path, capsys):
    cfg = tmp_path / "solo.toml"
    cfg.write_text(open(HK).read().replace("pv_fixed_cost = 200.0",
                                           "pv_fixed_cost = 2000.0"))
    assert main(["price", "--config", str(cfg)]) == 2
    assert "out of scope" in capsys.readouterr().err


def test_verify(capsys):
    assert main(["verify", "--config", HK, "--dt", "0.002"]) == 0
    assert "overall: pass" in capsys.readouterr().out


def test_sweep_map(tmp_path, capsys):
    out_csv = tmp_path / "map.csv"
    code = main(["sweep", "--config", bundled_config("synthetic.toml"),
                 "--mode", "map", "--x-param", "s_curb_rv", "--x-range",
                 "400:2400:6", "--y-param", "s_curb_pv", "--y-range",
                 "400:2400:6", "--out", str(out_csv)])
    assert code == 0
    with open(out_csv, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "scenario"]
    assert len(rows) == 37


def test_case_hk(capsys):
    assert main(["case-hk"]) == 0
    out = capsys.readouterr().out
    assert "ride-hailing users" in out
    assert "ref" in out


def test_simulate_with_explicit_profile(tmp_path, capsys):
    prof = tmp_path / "profile.csv"
    prof.write_text("mode,start_h,end_h,rate\nrv,-1.0,0.0,1500\npv,-0.5,0.0,1000\n",
                    encoding="utf-8")
    assert main(["simulate", "--config", HK, "--profile", str(prof),
                 "--dt", "0.002"]) == 0
    assert "max queues" in capsys.readouterr().out


def test_solve_curves_alias(tmp_path):
    out_csv = tmp_path / "c.csv"
    assert main(["solve", "--config", HK, "--curves", str(out_csv)]) == 0
    assert out_csv.exists()


def test_late_mode_requires_gamma(capsys):
    # the Hong Kong config has no gamma; late mode must fail validation
    assert main(["solve", "--config", HK, "--late"]) == 1
    assert "gamma" in capsys.readouterr().err


def test_outside_late_regime_exit_code(tmp_path, capsys):
    cfg = tmp_path / "wide_gap.toml"
    cfg.write_text(open(LATE).read().replace("pv_fixed_cost = 10.6",
                                             "pv_fixed_cost = 16.0"))
    assert main(["solve", "--config", str(cfg), "--late"]) == 2
    assert "outside L7 regime" in capsys.readouterr().err
