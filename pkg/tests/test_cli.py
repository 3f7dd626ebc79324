import pytest

from tomo_app.cli import EXIT_ERROR, EXIT_OK, build_parser, main

BASE = ["--no-log-file", "--log-level", "WARNING"]


def test_spectrum(tmp_path):
    code = main(BASE + ["spectrum", "--preset", "smoke", "--max-abs", "2", "--tol", "1e-9",
                        "--operators", "P+", "P-", "--output", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "smoke" / "spectrum.csv").exists()


def test_verify_single_item(tmp_path):
    assert main(BASE + ["verify", "--preset", "smoke", "--items", "4", "--output", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "acceptance.csv").exists()


def test_simulate_then_reconstruct_from_files(tmp_path):
    overrides = ["--set", "phantom=zero", "--set", "attenuation=constant", "--set", "name=files"]
    assert main(BASE + ["simulate", "--preset", "smoke", *overrides, "--output", str(tmp_path)]) == EXIT_OK
    run = tmp_path / "files"
    assert (run / "sinogram.atf").exists()
    assert (run / "attenuation.atf").exists()
    assert (run / "config.txt").exists()

    out = tmp_path / "recon"
    code = main(BASE + ["reconstruct", "--preset", "smoke", "--sinogram", str(run / "sinogram.atf"),
                        "--attenuation", str(run / "attenuation.atf"), "--output", str(out)])
    assert code == EXIT_OK
    assert (out / "report.json").exists()
    assert (out / "reconstruction" / "manifest.json").exists()


def test_gauge(tmp_path):
    assert main(BASE + ["gauge", "--preset", "smoke", "--output", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "smoke" / "gauge" / "manifest.json").exists()


def test_errors_become_exit_codes(tmp_path):
    missing = tmp_path / "nothing.atf"
    assert main(BASE + ["reconstruct", "--preset", "smoke", "--sinogram", str(missing)]) == EXIT_ERROR
    # the smoke preset is attenuated
    assert main(BASE + ["fbp", "--preset", "smoke", "--output", str(tmp_path)]) == EXIT_ERROR
    assert main(BASE + ["spectrum", "--preset", "smoke", "--set", "bogus=1"]) == EXIT_ERROR


def test_parser_rejects_bad_arguments():
    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["spectrum", "--preset", "nope"])
    with pytest.raises(SystemExit):
        parser.parse_args(["simulate", "--preset", "smoke", "--config", "x.cfg"])
    with pytest.raises(SystemExit):
        parser.parse_args([])
