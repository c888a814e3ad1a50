"""Command-line front end.

    molspin run --config run.yaml --out results/
    molspin fig4bcd --out results/
    molspin --print-schema
"""

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .angular import build_basis
from .couplings import LatticeGeometry, coupling_constants, coupling_map
from .effective import BracketError
from .manybody import (
    NoiseModel,
    SimulationError,
    SpinState,
    cluster_time,
    evolve_ising,
    evolve_xxz,
    gap_protection,
    ising_frame_angles,
    optimal_squeezing_time,
    squeezing_parameter,
    stabilizer_expectation,
    stabilizer_with_dephasing,
    static_noise_ensemble,
    timeseries_csv,
)
from .molecule import (
    FieldPoint,
    StructureError,
    TrackingError,
    get_molecule,
    registry_version,
    spec_from_dict,
    sweep_and_track,
)
from . import scenarios

log = logging.getLogger("molspin")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
SCENARIOS = ("spectrum", "dipoles", "alc", "dressed", "couplings", "cluster", "squeeze", "gap")

SCHEMA = """\
# RunConfig (YAML). Units: E kV/cm, B Gauss, a nm, rates 1/s, energies Hz unless noted.
molecule: KRb                # registry name, or a mapping with the registry entry fields plus 'name'
scenario: spectrum           # spectrum | dipoles | alc | dressed | couplings | cluster | squeeze | gap
sweep:                       # spectrum, dipoles, alc, dressed
  E: [0.0, 20.0, 41]         # scalar, or [start, stop, n_points] (n_points >= 1)
  B: 400.0
basis:
  N_max: 3
  M_F: -3.5                  # optional single M_F block
  seeds: []                  # optional labels to track, e.g. "|0~,0,-4,1/2>"
lattice:                     # couplings, cluster, squeeze
  dims: 1
  L: 6
  a: 500.0
  field_orientation: [0, 0, 1]
encoding:                    # couplings, cluster, squeeze: krb-ising | yo-alc | krb-dressed | explicit
  kind: krb-ising
  E: 20.0
  B: 400.0
  d_up: 0.0                  # explicit only, Debye
  d_down: 0.0
  d_cross: 0.0
noise:
  gamma_d: 2.127659574       # 1/T2
  delta_E_updown: 0.0
  kind: static
  profile: harmonic
  n_samples: 1
  echo: false
squeeze:
  t_max: 0.005               # s
  n_times: 11
gap:
  L: 43
  J_perp_nn: 50.0
  delta_E_updown: 1.0
seed: 1
"""


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")


@dataclass
class RunConfig:
    molecule: object
    scenario: str
    sweep: dict = field(default_factory=dict)
    basis: dict = field(default_factory=dict)
    lattice: dict = field(default_factory=dict)
    encoding: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)
    squeeze: dict = field(default_factory=dict)
    gap: dict = field(default_factory=dict)
    seed: int = 1


def _axis(value, path):
    if isinstance(value, (int, float)):
        return np.array([float(value)])
    if isinstance(value, list) and len(value) == 3:
        start, stop, n = value
        if not isinstance(n, int) or n < 1:
            raise ConfigError(path, "empty sweep range (n_points must be >= 1)")
        return np.linspace(float(start), float(stop), n)
    raise ConfigError(path, "expected a number or [start, stop, n_points]")


def _need(d, key, path, kind=(int, float)):
    if key not in d:
        raise ConfigError(f"{path}.{key}", "required field missing")
    if kind is not None and not isinstance(d[key], kind):
        raise ConfigError(f"{path}.{key}", f"expected {kind}")
    return d[key]


def validate_config(raw):
    """Check structure and scenario-required fields before any computation."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    known = set(RunConfig.__dataclass_fields__)
    extra = set(raw) - known
    if extra:
        raise ConfigError(sorted(extra)[0], "unknown field")
    for key in ("molecule", "scenario"):
        if key not in raw:
            raise ConfigError(key, "required field missing")
    if raw["scenario"] not in SCENARIOS:
        raise ConfigError("scenario", f"must be one of {', '.join(SCENARIOS)}")
    cfg = RunConfig(**raw)
    if isinstance(cfg.molecule, str):
        try:
            get_molecule(cfg.molecule)
        except KeyError as exc:
            raise ConfigError("molecule", str(exc)) from None
    elif isinstance(cfg.molecule, dict):
        try:
            entry = dict(cfg.molecule)
            spec_from_dict(entry.pop("name", "inline"), entry)
        except (StructureError, TypeError, KeyError, ValueError) as exc:
            raise ConfigError("molecule", str(exc)) from None
    else:
        raise ConfigError("molecule", "expected a registry name or a mapping")
    if not isinstance(cfg.seed, int):
        raise ConfigError("seed", "expected an integer")

    s = cfg.scenario
    if s in ("spectrum", "dipoles"):
        _axis(_need(cfg.sweep, "E", "sweep", None), "sweep.E")
        _axis(_need(cfg.sweep, "B", "sweep", None), "sweep.B")
        _need(cfg.basis, "N_max", "basis", int)
    if s == "dipoles":
        seeds = cfg.basis.get("seeds") or []
        if len(seeds) != 2:
            raise ConfigError("basis.seeds", "dipoles needs exactly two labels (up, down)")
    if s in ("alc", "dressed"):
        _axis(_need(cfg.sweep, "B", "sweep", None), "sweep.B")
        _need(cfg.sweep, "E", "sweep")
    if s in ("couplings", "cluster", "squeeze"):
        for k in ("dims", "L", "a"):
            _need(cfg.lattice, k, "lattice")
        kind = _need(cfg.encoding, "kind", "encoding", str)
        if kind not in ("krb-ising", "yo-alc", "krb-dressed", "explicit"):
            raise ConfigError("encoding.kind", "unknown encoding")
        if kind == "explicit":
            for k in ("d_up", "d_down", "d_cross"):
                _need(cfg.encoding, k, "encoding")
        try:
            LatticeGeometry(cfg.lattice["dims"], cfg.lattice["L"], float(cfg.lattice["a"]),
                            tuple(cfg.lattice.get("field_orientation", (0, 0, 1))))
        except ValueError as exc:
            raise ConfigError("lattice", str(exc)) from None
        n = cfg.lattice["L"] ** cfg.lattice["dims"]
        if s != "couplings" and n > 16:
            raise ConfigError("lattice", f"{n} sites exceeds the 16-site statevector cap")
    if s in ("cluster", "squeeze") and cfg.noise:
        try:
            NoiseModel(float(cfg.noise.get("gamma_d", 0.0)),
                       float(cfg.noise.get("delta_E_updown", 0.0)),
                       cfg.noise.get("kind", "static"), cfg.noise.get("profile", "harmonic"))
        except SimulationError as exc:
            raise ConfigError("noise", str(exc)) from None
        if int(cfg.noise.get("n_samples", 1)) < 1:
            raise ConfigError("noise.n_samples", "must be >= 1")
    if s == "gap":
        for k in ("L", "J_perp_nn", "delta_E_updown"):
            _need(cfg.gap, k, "gap")
    return cfg


def _spec(cfg):
    if isinstance(cfg.molecule, str):
        return get_molecule(cfg.molecule)
    entry = dict(cfg.molecule)
    return spec_from_dict(entry.pop("name", "inline"), entry)


def _write(out_dir, name, text):
    path = Path(out_dir) / name
    with open(path, "w", newline="") as fh:
        fh.write(text)
    log.info("wrote %s", path)
    return path.name


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# scenarios


def _sweep_points(cfg):
    Es = _axis(cfg.sweep["E"], "sweep.E")
    Bs = _axis(cfg.sweep["B"], "sweep.B")
    if len(Es) > 1 and len(Bs) > 1:
        raise ConfigError("sweep", "sweep one field at a time")
    return [FieldPoint(float(E), float(B)) for E in Es for B in Bs]


def _track(cfg):
    spec = _spec(cfg)
    basis = build_basis(spec, cfg.basis["N_max"], cfg.basis.get("M_F"))
    seeds = cfg.basis.get("seeds") or None
    return sweep_and_track(spec, basis, _sweep_points(cfg), seeds=seeds,
                           threshold=float(cfg.basis.get("threshold", 0.5)))


def run_spectrum(cfg, out):
    return {"spectrum": _write(out, "spectrum.csv", _track(cfg).to_csv())}


def run_dipoles(cfg, out):
    from .molecule import dipole_elements

    tr = _track(cfg)
    up, down = cfg.basis["seeds"]
    rows = []
    for p, pt in enumerate(tr.sweep):
        d = dipole_elements(tr, up, down, p)
        rows.append((pt.E, pt.B, d.d_up, d.d_down, d.d_cross))
    text = _csv(["E_kV_per_cm", "B_G", "d_up_D", "d_down_D", "d_cross_D"], rows)
    return {"dipoles": _write(out, "dipoles.csv", text)}


def run_alc(cfg, out):
    spec = _spec(cfg)
    E = float(cfg.sweep["E"])
    Bs = _axis(cfg.sweep["B"], "sweep.B")
    N_max = int(cfg.basis.get("N_max", 3))
    effs = scenarios.yo_alc_scan(Bs, E, N_max, spec=spec)
    rows = []
    for B, eff in zip(Bs, effs):
        c = coupling_constants(eff)
        rows.append((B, eff.gap, eff.dipoles.d_up, eff.dipoles.d_down, eff.dipoles.d_cross,
                     scenarios.nn_hz(c.J_z), scenarios.nn_hz(c.J_perp)))
    files = {"alc": _write(out, "alc.csv", _csv(
        ["B_G", "gap_MHz", "d_up_D", "d_down_D", "d_cross_D", "Jz_nn_Hz_at_500nm",
         "Jperp_nn_Hz_at_500nm"], rows))}
    c = scenarios.yo_crossing(E, N_max, spec=spec)
    from .effective import crossing_field_analytic

    files["crossing"] = _write(out, "crossing.json", json.dumps(
        {"E_kV_per_cm": E, "B_c_numeric_G": c.B_c, "gap_MHz": c.gap,
         "B_c_analytic_G": crossing_field_analytic(spec, E)}, indent=2) + "\n")
    return files


def run_dressed(cfg, out):
    spec = _spec(cfg)
    E = float(cfg.sweep["E"])
    Omega = float(cfg.sweep.get("Omega", 2.1))
    Bs = _axis(cfg.sweep["B"], "sweep.B")
    rows = []
    for B, model, V, eff in scenarios.krb_dressed_scan(Bs, E, Omega, spec=spec):
        rows.append((B, model.e_up, model.e_down, V * 1e3, eff.dipoles.d_up, eff.dipoles.d_down,
                     eff.dipoles.d_cross))
    return {"dressed": _write(out, "dressed.csv", _csv(
        ["B_G", "E_minus_MHz", "E_bare_MHz", "V_kHz", "d_up_D", "d_down_D", "d_cross_D"], rows))}


def _encoding(cfg):
    enc = cfg.encoding
    kind = enc["kind"]
    if kind == "explicit":
        from .molecule import DipoleTriple

        return DipoleTriple(float(enc["d_up"]), float(enc["d_down"]), float(enc["d_cross"]))
    if kind == "krb-ising":
        E, B = float(enc.get("E", 20.0)), float(enc.get("B", 400.0))
        tr = scenarios.krb_ising_track([E], B)
        return scenarios.krb_ising_encoding(tr, 0).dipoles
    if kind == "yo-alc":
        E = float(enc.get("E", 5.0))
        B = enc.get("B")
        if B is None:
            B = scenarios.yo_crossing(E).B_c
        return scenarios.yo_alc_scan([float(B)], E)[0].dipoles
    B_c, enc_states, _, _ = scenarios.krb_dressed_setup(float(enc.get("E", 0.0)),
                                                        float(enc.get("Omega", 2.1)))
    from .effective import spin_half_from_dressed

    return spin_half_from_dressed(enc_states, float(enc.get("Omega", 2.1))).dipoles


def _map(cfg):
    lat = cfg.lattice
    geom = LatticeGeometry(lat["dims"], lat["L"], float(lat["a"]),
                           tuple(lat.get("field_orientation", (0, 0, 1))))
    return coupling_map(geom, coupling_constants(_encoding(cfg)))


def run_couplings(cfg, out):
    from .couplings import mean_couplings

    cmap = _map(cfg)
    jz, jp = cmap.nearest_neighbor()
    mz, mp = mean_couplings(cmap)
    files = {"couplings": _write(out, "couplings.csv", cmap.to_csv())}
    files["summary"] = _write(out, "couplings.json", json.dumps(
        {"Jz_nn_Hz": jz, "Jperp_nn_Hz": jp, "Jz_mean_Hz": mz, "Jperp_mean_Hz": mp}, indent=2) + "\n")
    return files


def run_cluster(cfg, out):
    cmap = _map(cfg)
    tc = cluster_time(cmap)
    n = cmap.n_sites
    psi = evolve_ising(cmap, SpinState.product_x(n), tc)
    frame = ising_frame_angles(cmap, tc)
    gamma = float(cfg.noise.get("gamma_d", 0.0))
    rows = []
    report = {"t_c_s": tc, "Jz_nn_Hz": cmap.nearest_neighbor()[0], "gamma_d_per_s": gamma,
              "stabilizers": []}
    for j in range(n):
        F = stabilizer_expectation(psi, j, cmap.geometry, frame_angles=frame)
        K = stabilizer_with_dephasing(F, gamma, tc)
        rows.append((tc, f"K_{j}", K, None))
        report["stabilizers"].append({"site": j, "F": F, "K": K})
    noise = cfg.noise
    if noise and float(noise.get("delta_E_updown", 0.0)) > 0:
        model = NoiseModel(gamma, float(noise["delta_E_updown"]), "static",
                           noise.get("profile", "harmonic"))
        ens = static_noise_ensemble(cmap, SpinState.product_x(n), model, tc,
                                    int(noise.get("n_samples", 1)), cfg.seed,
                                    echo=bool(noise.get("echo", False)), frame_angles=frame)
        for j, (k, e) in enumerate(zip(ens.stabilizers, ens.stabilizer_err)):
            rows.append((tc, f"K_static_{j}", stabilizer_with_dephasing(k, gamma, tc), e))
    files = {"timeseries": _write(out, "cluster.csv", timeseries_csv(rows))}
    files["report"] = _write(out, "cluster.json", json.dumps(report, indent=2) + "\n")
    return files


def run_squeeze(cfg, out):
    cmap = _map(cfg)
    n = cmap.n_sites
    sq = cfg.squeeze
    times = np.linspace(0.0, float(sq.get("t_max", 5e-3)), int(sq.get("n_times", 11)))
    psi0 = SpinState.product_x(n)
    rows = []
    for t in times:
        rep = squeezing_parameter(evolve_xxz(cmap, psi0, t))
        rows.append((t, "xi2", rep.xi2, None))
    jp = cmap.nearest_neighbor()[1]
    report = {"Jperp_nn_Hz": jp}
    if jp > 0:
        report["t_opt_xx_s"] = optimal_squeezing_time(jp, 0.0)
    files = {"timeseries": _write(out, "squeeze.csv", timeseries_csv(rows))}
    files["report"] = _write(out, "squeeze.json", json.dumps(report, indent=2) + "\n")
    return files


def run_gap(cfg, out):
    g = cfg.gap
    rep = gap_protection(int(g["L"]), float(g["J_perp_nn"]), float(g["delta_E_updown"]))
    data = {"L": int(g["L"]), "delta_h_Hz": rep.delta_h,
            "delta_h_asymptotic_Hz": rep.delta_h_asymptotic, "delta_MB_nn_Hz": rep.delta_MB_nn,
            "L_max": rep.L_max, "protected": rep.protected}
    return {"report": _write(out, "gap.json", json.dumps(data, indent=2) + "\n")}


RUNNERS = {
    "spectrum": run_spectrum, "dipoles": run_dipoles, "alc": run_alc, "dressed": run_dressed,
    "couplings": run_couplings, "cluster": run_cluster, "squeeze": run_squeeze, "gap": run_gap,
}


# ---------------------------------------------------------------------------
# figure tables


def fig2b(out, **_):
    betas = np.linspace(0.0, 8.0, 81)
    du, dd, jz = scenarios.rotor_jz_curve(betas)
    return {"fig2b": _write(out, "fig2b.csv", _csv(
        ["beta_E", "d_up_over_d", "d_down_over_d", "Jz_over_d2"], zip(betas, du, dd, jz)))}


def fig3bc(out, **_):
    Es = np.arange(0.0, 30.01, 0.5)
    tr = scenarios.krb_ising_track(Es)
    rows = []
    for p, E in enumerate(Es):
        eff = scenarios.krb_ising_encoding(tr, p)
        c = coupling_constants(eff)
        rows.append((E, scenarios.krb_stark_shift(tr, p) * 1e3, eff.dipoles.d_up,
                     eff.dipoles.d_down, scenarios.nn_hz(c.J_z)))
    return {"fig3bc": _write(out, "fig3bc.csv", _csv(
        ["E_kV_per_cm", "stark_shift_kHz", "d_up_D", "d_down_D", "Jz_nn_Hz_at_500nm"], rows))}


def fig4bcd(out, **_):
    cfg = RunConfig("YO", "alc", sweep={"E": 5.0, "B": [8500.0, 8700.0, 101]}, basis={"N_max": 3})
    files = run_alc(cfg, out)
    return {"fig4bcd": files["alc"], "crossing": files["crossing"]}


def fig5bcd(out, **_):
    cfg = RunConfig("KRb", "dressed", sweep={"E": 0.0, "B": [215.0, 235.0, 81]})
    files = run_dressed(cfg, out)
    return {"fig5bcd": files["dressed"]}


FIGURES = {"fig2b": fig2b, "fig3bc": fig3bc, "fig4bcd": fig4bcd, "fig5bcd": fig5bcd}


# ---------------------------------------------------------------------------


def _manifest(out, command, config_text, files, seed):
    data = {
        "command": command,
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "registry_version": registry_version(),
        "tool_version": __version__,
        "seed": seed,
        "outputs": files,
    }
    _write(out, "manifest.json", json.dumps(data, indent=2, sort_keys=True) + "\n")


def build_parser():
    p = argparse.ArgumentParser(prog="molspin", description=__doc__.splitlines()[0])
    p.add_argument("--print-schema", action="store_true", help="print the RunConfig schema")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")
    r = sub.add_parser("run", help="run a YAML configuration")
    r.add_argument("--config", required=True)
    for sp in [r] + [sub.add_parser(name, help=f"write {name} figure data") for name in FIGURES]:
        sp.add_argument("--out", default=".")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None,
                        help="BLAS threads (set before numerical work)")
    return p


def _set_threads(n):
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)
        try:
            from threadpoolctl import threadpool_limits
        except ImportError:
            return
        threadpool_limits(n)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if args.print_schema:
        sys.stdout.write(SCHEMA)
        return EXIT_OK
    if args.command is None:
        build_parser().print_usage(sys.stderr)
        return EXIT_VALIDATION
    _set_threads(args.threads)

    config_text = ""
    try:
        if args.command == "run":
            config_text = Path(args.config).read_text()
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO

    try:
        if args.command == "run":
            raw = yaml.safe_load(config_text)
            if isinstance(raw, dict) and args.seed is not None:
                raw["seed"] = args.seed
            cfg = validate_config(raw)
            files = RUNNERS[cfg.scenario](cfg, args.out)
            seed = cfg.seed
        else:
            config_text = args.command
            files = FIGURES[args.command](args.out)
            seed = args.seed
        _manifest(args.out, args.command, config_text, files, seed)
    except (ConfigError, yaml.YAMLError, KeyError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_VALIDATION
    except (TrackingError, BracketError, SimulationError, StructureError,
            np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
