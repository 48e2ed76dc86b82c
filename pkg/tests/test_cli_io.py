import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lp_lab import cantor_triadic, dyadic_set, from_gaps, generated_set, GapSequence
from lp_lab.cli import RunConfig, main, run, write_bundle
from lp_lab.exceptions import ValidationError
from lp_lab.io import SCHEMA_VERSION, config_hash, dumps, load_set, save_set


def strip_timestamp(text):
    data = json.loads(text)
    data.pop("timestamp", None)
    return data


# ---------------------------------------------------------------- set files


@pytest.mark.parametrize("S", [cantor_triadic(3), dyadic_set(-4, 4), generated_set(GapSequence.geometric(0.9), 7)])
def test_set_file_round_trip(tmp_path, S):
    path = save_set(S, tmp_path / "s.json")
    back = load_set(path)
    assert back.same_as(S)
    assert back.resolution == S.resolution


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=30, unique=True))
@settings(max_examples=50, deadline=None)
def test_round_trip_bit_exact(tmp_path_factory, xs):
    from lp_lab.sets import from_points

    S = from_points(xs)
    back = load_set(save_set(S, tmp_path_factory.mktemp("rt") / "s.json"))
    assert back.same_as(S)


def test_load_rejects_overlap(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"schema_version": SCHEMA_VERSION, "window": [0, 1], "gaps": [[0.1, 0.5], [0.4, 0.6]]}))
    with pytest.raises(ValidationError):
        load_set(p)


def test_load_missing_file_names_path(tmp_path):
    with pytest.raises(ValidationError, match="nope.json"):
        load_set(tmp_path / "nope.json")


def test_load_schema_mismatch(tmp_path):
    p = tmp_path / "old.json"
    p.write_text(json.dumps({"schema_version": 0, "window": [0, 1], "gaps": []}))
    with pytest.raises(ValidationError, match="expected 1, found 0"):
        load_set(p)


def test_load_rejects_non_finite(tmp_path):
    p = tmp_path / "nan.json"
    p.write_text('{"schema_version": 1, "window": [0, 1], "gaps": [[0.2, NaN]]}')
    with pytest.raises(ValidationError):
        load_set(p)


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1.5, 2]}) == config_hash({"b": [1.5, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


# ---------------------------------------------------------------- run()


def test_boxdim_config():
    b = run({"command": "thickness", "family": "cantor", "depth": 2, "analysis": "boxdim"})
    assert b.report["results"]["boxdim"]["slope"] == pytest.approx(math.log(2) / math.log(3), abs=0.01)
    header, rows = b.tables["boxdim"]
    assert header == ("scale", "count", "reliable")
    assert rows[0][1] == 2


def test_frame_config_p2():
    b = run({"command": "probe", "probe": "frame", "family": "dyadic", "k_max": 6, "p": 2, "trials": 5})
    s = b.report["results"]["scalars"]
    assert s["c1_hat"] == pytest.approx(1, abs=1e-9) and s["c2_hat"] == pytest.approx(1, abs=1e-9)


def test_report_embeds_reproducibility_fields():
    b = run({"command": "thickness", "family": "cantor", "depth": 4, "analysis": "measure"})
    r = b.report
    for key in ("config_hash", "seed", "residual", "reliability"):
        assert key in r
    assert r["residual"] == pytest.approx((2 / 3) ** 4)


def test_run_is_deterministic_including_threads(monkeypatch):
    cfg = {"command": "probe", "probe": "frame", "family": "cantor", "depth": 3, "freq_scale": 81.0,
           "M": 1024, "p": 1.5, "trials": 16, "seed": 4}
    monkeypatch.setenv("LP_LAB_THREADS", "1")
    a = dumps(run(cfg).report)
    monkeypatch.setenv("LP_LAB_THREADS", "4")
    b = dumps(run(cfg).report)
    assert a == b


@pytest.mark.parametrize("bad,field", [({"depth": -1}, "depth"), ({"p": 0.5}, "p"), ({"M": 100}, "M"),
                                        ({"bogus": 1}, "bogus"), ({"family": "nope"}, "family")])
def test_config_validation_names_field(bad, field):
    cfg = {"command": "construct", "family": "cantor", **bad}
    with pytest.raises(ValidationError) as err:
        run(cfg)
    assert err.value.field == field


# ---------------------------------------------------------------- main()


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["construct", "--family", "cantor", "--depth", "-1", "--out-dir", out]) == 2
    assert "depth" in capsys.readouterr().err
    # every delta below the reliable floor of a shallow Cantor set
    assert main(["thickness", "--family", "cantor", "--depth", "1", "--analysis", "measure",
                 "--deltas", "0.01,0.001", "--out-dir", out]) == 3
    assert main(["construct", "--family", "cantor", "--depth", "3", "--out-dir", out, "--quiet"]) == 0
    assert load_set(tmp_path / "set.json").same_as(cantor_triadic(3))


def test_cli_config_overrides_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "cantor", "depth": 2, "analysis": "boxdim"}))
    assert main(["thickness", "--family", "dyadic", "--depth", "5", "--config", str(cfg),
                 "--out-dir", str(tmp_path), "--quiet"]) == 0
    rep = json.loads((tmp_path / "thickness.json").read_text())
    assert rep["config"]["family"] == "cantor" and rep["config"]["depth"] == 2


def test_cli_csv_tables(tmp_path):
    assert main(["thickness", "--family", "generated", "--depth", "8", "--analysis", "measure",
                 "--format", "csv", "--out-dir", str(tmp_path), "--quiet"]) == 0
    lines = (tmp_path / "thickness_thickness.csv").read_text().splitlines()
    assert lines[0] == "delta,measure,bound,reliable"
    assert lines[1].split(",")[3] in ("true", "false")
    assert main(["probe", "--probe", "growth", "--p", "4/3", "--format", "csv",
                 "--out-dir", str(tmp_path), "--quiet"]) == 0
    assert (tmp_path / "probe_norms.csv").read_text().splitlines()[0] == "n_or_N,p,value,stderr,seed"


def test_cli_rerun_identical_modulo_timestamp(tmp_path):
    args = ["probe", "--probe", "khintchine", "--coeffs", "1,2,3,4,5,6,7,8,9,10,11,12,13,14",
            "--p", "1.5", "--trials", "5000", "--seed", "9", "--quiet"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    a = strip_timestamp((tmp_path / "a" / "probe.json").read_text())
    b = strip_timestamp((tmp_path / "b" / "probe.json").read_text())
    assert a == b


@pytest.mark.parametrize("argv", [
    ["split", "--family", "dyadic", "--k-max", "3", "--ap", "0.5,1,7"],
    ["split", "--family", "cantor", "--depth", "1", "--points", "1/3", "--delta", "0.1"],
    ["chain", "--points", "0,1,2,3", "--n", "2"],
    ["chain", "--points", "0.2,0.8", "--n", "1", "--family", "cantor", "--depth", "2"],
    ["probe", "--probe", "dirichlet", "--p", "4/3"],
    ["probe", "--probe", "rademacher", "--N", "64"],
    ["probe", "--probe", "chain", "--n", "2", "--p", "1"],
    ["probe", "--probe", "norm", "--k-list", "0,1", "--p", "1"],
    ["thickness", "--family", "theorem3", "--analysis", "all"],
    ["thickness", "--family", "dyadic", "--k-min", "-12", "--k-max", "0", "--analysis", "theorem2",
     "--interval", "0,1", "--deltas", "2^-4,2^-5,2^-6,2^-7,2^-8,2^-9,2^-10", "--p", "4/3"],
    ["construct", "--family", "generated", "--b", "0.5", "--tau", "0.7"],
])
def test_cli_commands_succeed(tmp_path, argv):
    assert main(argv + ["--out-dir", str(tmp_path), "--quiet"]) == 0
    assert main(["report", "--out-dir", str(tmp_path), "--quiet"]) == 0


def test_split_shift_report(tmp_path):
    assert main(["split", "--family", "cantor", "--depth", "1", "--points", "1/3", "--delta", "0.1",
                 "--out-dir", str(tmp_path), "--quiet"]) == 0
    rep = json.loads((tmp_path / "split.json").read_text())
    assert rep["results"]["points"]["shift"] == pytest.approx(0.05)
    assert rep["results"]["points"]["shifted_certificate"]["valid"]


def test_write_bundle_without_timestamp(tmp_path):
    b = run({"command": "construct", "family": "cantor", "depth": 1})
    p = write_bundle(b, tmp_path, timestamp=False)[0]
    assert "timestamp" not in json.loads(p.read_text())


def test_set_file_implies_file_family(tmp_path):
    save_set(cantor_triadic(4), tmp_path / "set.json")
    assert main(["thickness", "--set-file", str(tmp_path / "set.json"), "--analysis", "boxdim",
                 "--out-dir", str(tmp_path), "--quiet"]) == 0
