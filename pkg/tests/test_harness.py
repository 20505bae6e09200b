import json

import pytest

from qramsey.errors import InvalidInput
from qramsey.harness import ExperimentConfig, main, parse_cli, run


def test_parse_witness_happy_path():
    cfg = parse_cli("witness --n 1 --ground-sizes 64,64 --injection-rule identity --space dyadic "
                    "--interval 0,1 --K 8 --out r.json".split())
    assert cfg.task == "witness" and cfg.n == 1 and cfg.ground_sizes == [64, 64]
    assert cfg.interval == ["0", "1"] and cfg.K == 8 and cfg.out == "r.json"
    cfg.validate()


def test_verify_setmap_cli_counts_quadruples():
    cfg = parse_cli("verify-setmap --n 2 --ground-sizes 20,20,20".split())
    rep = run(cfg)
    assert rep.payload["checked"] == 4845 and rep.payload["violations"] == []
    assert rep.exit_status == 0


def test_mod_colors_rejects_zero_modulus(capsys):
    with pytest.raises(InvalidInput):
        run(parse_cli("mod-colors --l 0".split()))
    assert main("mod-colors --l 0".split()) == 2
    assert "'l'" in capsys.readouterr().err


@pytest.mark.parametrize("argv", ["witness --bogus 1", "frobnicate", "witness --n x"])
def test_unknown_flags_and_type_errors(argv):
    with pytest.raises(SystemExit):
        parse_cli(argv.split())


def test_run_examples(tmp_path):
    out = tmp_path / "r.json"
    rep = run(parse_cli(f"verify-setmap --n 1 --ground-sizes 10,10 --out {out}".split()))
    assert rep.payload["checked"] == 120 and rep.exit_status == 0
    saved = json.loads(out.read_text())
    assert saved["payload"] == rep.payload and saved["exit_status"] == 0

    rep = run(parse_cli("witness --n 0 --space dyadic --interval 0,1 --K 8".split()))
    ws = rep.payload["witnesses"]
    assert [w["k"] for w in ws] == list(range(9)) and all(w["verified"] for w in ws)
    assert ws[1]["indices"] == [1, 10] and ws[1]["points"] == ["1/4", "7/16"]
    assert rep.exit_status == 0


def test_color_point_not_enumerated(capsys):
    assert main(["color", "--points", "1/2;1/3", "--budget", "2000"]) == 2
    assert "not among" in capsys.readouterr().err


def test_color_by_points_and_trace(tmp_path):
    trace = tmp_path / "t.jsonl"
    rep = run(parse_cli(["color", "--points", "3/4;7/16", "--trace", str(trace), "--l", "3"]))
    assert rep.payload["indices"] == [2, 10] and rep.payload["color"] == 1 and rep.payload["color_mod"] == 1
    lines = [json.loads(x) for x in trace.read_text().splitlines()]
    assert [r["matched"] for r in lines] == [0, "halt"]


def test_color_arity_checked():
    with pytest.raises(InvalidInput):
        run(parse_cli("color --n 1 --tuple 1,2".split()))


def test_extract_and_dense_exit_codes():
    assert run(parse_cli("extract --K 20".split())).exit_status == 0
    rep = run(parse_cli("extract --K 3 --space integer-grid".split()))
    assert rep.exit_status == 1 and rep.payload["error"] == "budget-exhausted" and rep.payload["step"] == 2
    rep = run(parse_cli("dense-check --space integer-grid --prefix 10 --eps 1/2".split()))
    assert rep.exit_status == 1 and len(rep.payload["failures"]) == 10
    assert run(parse_cli("dense-check --prefix 50 --eps 1/10,1/100".split())).exit_status == 0


def test_mod_colors_payload():
    rep = run(parse_cli("mod-colors --n 1 --l 3".split()))
    assert rep.payload["residues"] == [0, 1, 2] and rep.exit_status == 0


def test_custom_list_space():
    rep = run(parse_cli(["color", "--space", "custom-list", "--custom-points", "0;1/2;1/4;3/4;1/8",
                         "--ground-sizes", "5", "--tuple", "1,4"]))
    assert rep.payload["points"] == ["1/2", "1/8"]


def test_config_file_with_flag_override(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n": 1, "K": 3, "filter": "even", "ground-sizes": [10**6, 10**6]}))
    cfg = parse_cli(["witness", "--config", str(path), "--K", "2"])
    assert cfg.n == 1 and cfg.K == 2 and cfg.filter == "even" and cfg.ground_sizes == [10**6, 10**6]
    yml = tmp_path / "c.yaml"
    yml.write_text("n: 2\nK: 1\n")
    assert parse_cli(["witness", "--config", str(yml)]).n == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": 1}))
    with pytest.raises(InvalidInput):
        parse_cli(["witness", "--config", str(bad)])


def test_jobs_match_serial():
    serial = run(parse_cli("verify-setmap --n 2 --ground-sizes 14,14,14 --injection-rule random --seed 3".split()))
    para = run(parse_cli("verify-setmap --n 2 --ground-sizes 14,14,14 --injection-rule random --seed 3 --jobs 3".split()))
    assert serial.payload_json() == para.payload_json()


@pytest.mark.parametrize("argv", [
    "verify-setmap --n 1 --ground-sizes 12,12 --injection-rule random --seed 5",
    "witness --n 2 --K 5",
    "extract --K 30 --filter odd",
    "dense-check --prefix 20 --eps 1/50",
])
def test_report_round_trip(argv, tmp_path):
    first = run(parse_cli(argv.split()))
    echo = dict(first.config)
    rerun = run(ExperimentConfig(**echo))
    assert rerun.payload_json() == first.payload_json()
    assert rerun.timings.keys() == first.timings.keys()


def test_validation_messages_name_fields():
    with pytest.raises(InvalidInput, match="ground_sizes"):
        run(parse_cli("witness --n 2 --ground-sizes 10,10".split()))
    with pytest.raises(InvalidInput, match="K"):
        run(parse_cli("extract --K 1".split()))
    with pytest.raises(InvalidInput, match="points"):
        run(parse_cli("dense-check --space custom-list".split()))
