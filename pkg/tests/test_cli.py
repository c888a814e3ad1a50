import csv
import hashlib
import json

import pytest
import yaml

from molspin.cli import SCHEMA, ConfigError, main, validate_config


def write_config(path, data):
    path.write_text(yaml.safe_dump(data))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


YO_SPECTRUM = {"molecule": "YO", "scenario": "spectrum",
               "sweep": {"E": 5.0, "B": [8500.0, 8700.0, 21]}, "basis": {"N_max": 3}}
GAP = {"molecule": "KRb", "scenario": "gap",
       "gap": {"L": 43, "J_perp_nn": 50.0, "delta_E_updown": 1.0}}


def test_print_schema(capsys):
    assert main(["--print-schema"]) == 0
    out = capsys.readouterr().out
    assert out == SCHEMA
    for scenario in ("spectrum", "dipoles", "alc", "dressed", "couplings", "cluster", "squeeze", "gap"):
        assert scenario in out
    yaml.safe_load(out)  # the schema itself is a valid example


def test_schema_example_validates():
    raw = yaml.safe_load(SCHEMA)
    validate_config(raw)


@pytest.mark.parametrize("mutate, path", [
    (lambda c: c.pop("scenario"), "scenario"),
    (lambda c: c.update(scenario="banana"), "scenario"),
    (lambda c: c.update(molecule="CaF"), "molecule"),
    (lambda c: c["sweep"].update(B=[8500.0, 8700.0, 0]), "sweep.B"),
    (lambda c: c["basis"].pop("N_max"), "basis.N_max"),
    (lambda c: c.update(colour="red"), "colour"),
])
def test_validation_errors_name_the_field(tmp_path, caplog, mutate, path):
    cfg = json.loads(json.dumps(YO_SPECTRUM))
    mutate(cfg)
    with pytest.raises(ConfigError, match=path.replace(".", r"\.")):
        validate_config(cfg)
    rc = main(["run", "--config", write_config(tmp_path / "c.yaml", cfg), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert path in caplog.text
    assert not (tmp_path / "o" / "manifest.json").exists()


def test_empty_sweep_range_is_validation_error(tmp_path):
    cfg = dict(YO_SPECTRUM, sweep={"E": [0.0, 10.0, 0], "B": 400.0})
    assert main(["run", "--config", write_config(tmp_path / "c.yaml", cfg), "--out", str(tmp_path)]) == 2


def test_site_cap_is_validation_error(tmp_path):
    cfg = {"molecule": "KRb", "scenario": "cluster", "lattice": {"dims": 2, "L": 5, "a": 500.0},
           "encoding": {"kind": "explicit", "d_up": 0.4, "d_down": 0.0, "d_cross": 0.0}}
    assert main(["run", "--config", write_config(tmp_path / "c.yaml", cfg), "--out", str(tmp_path)]) == 2


def test_missing_config_file_is_io_error(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == 4


def test_bracketing_failure_is_numerical_error(tmp_path):
    # far below the YO crossing there is nothing to bracket
    cfg = {"molecule": "YO", "scenario": "couplings", "lattice": {"dims": 1, "L": 3, "a": 500.0},
           "encoding": {"kind": "yo-alc", "E": 200.0}}
    assert main(["run", "--config", write_config(tmp_path / "c.yaml", cfg), "--out", str(tmp_path)]) == 3


def test_gap_run_and_manifest(tmp_path):
    cfg_path = write_config(tmp_path / "gap.yaml", GAP)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg_path, "--out", str(out)]) == 0
    report = json.loads((out / "gap.json").read_text())
    assert report["L_max"] == 43 and report["protected"]
    man = json.loads((out / "manifest.json").read_text())
    text = (tmp_path / "gap.yaml").read_text()
    assert man["config_sha256"] == hashlib.sha256(text.encode()).hexdigest()
    assert man["registry_version"] == 1
    assert man["tool_version"] == "0.1.0"
    assert man["outputs"] == {"report": "gap.json"}


def test_outputs_are_byte_identical(tmp_path):
    cfg = {"molecule": "KRb", "scenario": "cluster", "lattice": {"dims": 1, "L": 5, "a": 500.0},
           "encoding": {"kind": "explicit", "d_up": 0.39, "d_down": 0.015, "d_cross": 0.0},
           "noise": {"gamma_d": 2.0, "delta_E_updown": 30.0, "n_samples": 4, "profile": "gaussian"}, "seed": 17}
    cfg_path = write_config(tmp_path / "c.yaml", cfg)
    blobs = []
    for name in ("a", "b"):
        assert main(["run", "--config", cfg_path, "--out", str(tmp_path / name)]) == 0
        blobs.append({p.name: p.read_bytes() for p in (tmp_path / name).iterdir()})
    assert blobs[0] == blobs[1]
    assert main(["run", "--config", cfg_path, "--out", str(tmp_path / "c"), "--seed", "18"]) == 0
    assert (tmp_path / "c" / "cluster.csv").read_bytes() != blobs[0]["cluster.csv"]


def test_yo_spectrum_shows_the_level_pair(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--config", write_config(tmp_path / "c.yaml", YO_SPECTRUM), "--out", str(out)]) == 0
    rows = read_csv(out / "spectrum.csv")
    header = rows[0]
    assert header[:2] == ["E_kV_per_cm", "B_G"]
    assert all(h.endswith("[MHz]") for h in header[2:])
    assert len(rows) == 22
    a = header.index("|0~,0,1/2,-1/2> [MHz]")
    b = header.index("|1~,1,-1/2,-1/2> [MHz]")
    gaps = [abs(float(r[a]) - float(r[b])) for r in rows[1:]]
    # the pair closes to tens of MHz inside the window and is > 100 MHz apart at its edges
    assert min(gaps) < 30.0 and gaps[0] > 100.0 and gaps[-1] > 100.0


def test_every_csv_header_has_units(tmp_path):
    for fig in ("fig2b", "fig4bcd"):
        out = tmp_path / fig
        assert main([fig, "--out", str(out)]) == 0
        for path in out.glob("*.csv"):
            header = read_csv(path)[0]
            for col in header:
                assert any(u in col for u in ("_D", "_G", "_Hz", "MHz", "_kV_per_cm", "_over_", "beta_E")), col


def test_krb_cluster_report(tmp_path):
    cfg = {"molecule": "KRb", "scenario": "cluster", "lattice": {"dims": 1, "L": 6, "a": 500.0},
           "encoding": {"kind": "krb-ising", "E": 20.0, "B": 400.0},
           "noise": {"gamma_d": 1 / 0.470}}
    out = tmp_path / "o"
    assert main(["run", "--config", write_config(tmp_path / "c.yaml", cfg), "--out", str(out)]) == 0
    rep = json.loads((out / "cluster.json").read_text())
    assert rep["t_c_s"] == pytest.approx(2.95e-3, rel=0.15)
    for s in rep["stabilizers"]:
        assert s["K"] / s["F"] == pytest.approx(0.9969, abs=2e-4)
