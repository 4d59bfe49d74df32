from collections.abc import Generator
from collections.abc import Iterator
from contextlib import contextmanager
import csv
import json
import logging
from pathlib import Path

import pytest

import prbox
from prbox import config
from prbox.cli import main


@contextmanager
def _forced_log_propagation(logger_name: str) -> Generator[None, None, None]:
    try:
        # Local fix for https://github.com/pytest-dev/pytest/issues/3697
        logging.getLogger(logger_name).propagate = True
        yield
    finally:
        logging.getLogger(logger_name).propagate = False


@pytest.fixture(autouse=True)
def workdir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Iterator[Path]:
    monkeypatch.chdir(tmp_path)
    yield tmp_path
    config.set_verbosity(logging.INFO)


def test_box_commands(workdir: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["box", "make", "--n", "1", "--eps", "1/8"]) == 0
    assert (workdir / "isotropic-n1.json").exists()
    assert main(["box", "check", "isotropic-n1.json"]) == 0
    argv = ["box", "tensor", "isotropic-n1.json", "isotropic-n1.json", "--out", "two.json"]
    assert main(argv) == 0
    assert json.loads((workdir / "two.json").read_text())["shape"] == [4, 4, 4, 4]
    assert main(["box", "export", "two.json"]) == 0
    assert (workdir / "two.csv").exists()

    capsys.readouterr()
    assert main(["box", "weight", "isotropic-n1.json", "--strategy", "[0 0; 0 0]"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "1/16"


def test_box_out_of_range(workdir: Path) -> None:
    assert main(["box", "make", "--n", "1", "--eps", "1/2"]) == 2
    assert main(["--force", "box", "make", "--n", "1", "--eps", "1/2", "--out", "b.json"]) == 0
    assert (workdir / "b.json").exists()


def test_box_check_detects_signalling(workdir: Path) -> None:
    main(["box", "make", "--n", "1", "--eps", "1/8", "--out", "box.json"])
    data = json.loads((workdir / "box.json").read_text())
    data["table"][0][0][0][0] = "1/2"
    data["table"][1][1][0][0] = "0/1"
    (workdir / "box.json").write_text(json.dumps(data))
    assert main(["box", "check", "box.json"]) == 1


def test_solve_and_audit(workdir: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code = main(
        ["localpart", "solve", "--n", "2", "--eps", "1/8", "--decomposition", "dec.json"]
    )
    assert code == 0
    assert capsys.readouterr().out.splitlines()[-1] == "1/2"
    report = json.loads((workdir / "dec.json").read_text())
    assert report["local_weight"] == "1/2"
    assert main(["localpart", "audit", "certificate.json"]) == 0

    data = json.loads((workdir / "certificate.json").read_text())
    data["objective"] = "3/5"
    (workdir / "certificate.json").write_text(json.dumps(data))
    assert main(["localpart", "audit", "certificate.json"]) == 1


def test_solve_biased_from_box_file(capsys: pytest.CaptureFixture[str]) -> None:
    main(["box", "make", "--family", "biased", "--n", "1", "--delta", "1/10", "--out", "b.json"])
    capsys.readouterr()
    assert main(["localpart", "solve", "--box", "b.json", "--out", "c.json"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "3/10"


@pytest.mark.parametrize(
    "argv",
    [
        ["localpart", "solve", "--eps", "1/8"],
        ["localpart", "solve", "--n", "1"],
        ["localpart", "solve", "--n", "1", "--eps", "one"],
        ["--budget", "1000", "localpart", "solve", "--n", "2", "--eps", "1/8", "--mode", "full"],
        ["localpart", "audit", "missing.json"],
        ["snk", "--n", "5", "--k", "1"],
        ["localpart", "bounds", "--eps", "1/8"],
    ],
)
def test_usage_errors(argv: list[str]) -> None:
    assert main(argv) == 2


def test_invalid_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("PRBOX_THREADS", "many")
    assert main(["localpart", "bounds", "--n", "1", "--eps", "1/8"]) == 2


def test_bounds(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["localpart", "bounds", "--n", "3", "--eps", "1/8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1] == "pairing lower bound: 1/4"
    assert main(["localpart", "bounds", "--family", "biased", "--n", "2", "--delta", "1/10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-3:] == [
        "local part: 9/100",
        "lose-all-rounds mass: 9/100",
        "nonzero lose-all-rounds cells: 9",
    ]


def test_sweep(workdir: Path) -> None:
    argv = ["--quiet", "localpart", "sweep", "--n", "1", "--grid", "0,1/16,1/8", "--no-refine"]
    assert main(argv) == 0
    assert (workdir / "sweep" / "sweep.csv").exists()
    assert len(list((workdir / "sweep" / "certificates").iterdir())) == 3
    pieces = json.loads((workdir / "sweep" / "pieces.json").read_text())
    assert pieces["pieces"][0]["polynomial_text"] == "4*eps"

    with (workdir / "sweep" / "sweep.csv").open() as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 3
    assert all((workdir / "sweep" / row["certificate_file"]).is_file() for row in rows)
    assert main(["localpart", "audit", f"sweep/{rows[1]['certificate_file']}"]) == 0


@pytest.mark.parametrize("suite", ["eq3", "eq5", "lemma3"])
def test_verify_suites(suite: str) -> None:
    assert main(["--quiet", "verify", suite]) == 0


def test_verify_lemmas() -> None:
    argv = ["--quiet", "verify", "lemmas", "--n", "2", "--samples", "100", "--trials", "5"]
    assert main(argv) == 0


def test_snk(workdir: Path) -> None:
    assert main(["--quiet", "snk", "--n", "1", "--k", "1"]) == 0
    report = json.loads((workdir / "snk-1-1.json").read_text())
    assert report["fraction"] == "1/1"
    assert (workdir / "snk-1-1-certificate.json").exists()


def test_seed_is_logged(caplog: pytest.LogCaptureFixture) -> None:
    with _forced_log_propagation(logger_name=prbox.__name__):
        main(["--seed", "7", "localpart", "bounds", "--n", "1", "--eps", "1/8"])
    assert "Seed in effect: 7." in caplog.text


def test_solve_two_biased_boxes(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["localpart", "solve", "--family", "biased", "--n", "2", "--delta", "1/10"]
    assert main(argv) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "9/100"
