"""Command-line front end: ``packetscatter run|validate``.

Exit status: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import amplitudes as amp
from . import config as cfgmod
from . import correction as corr
from . import oracle as orc
from . import packets as pk
from . import wigner as wg
from .errors import NumericalFailure, PacketScatterError
from .kinematics import sqrt_s_for_momentum

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
ASYMMETRY_COLUMNS = corr.CorrectionReport.COLUMNS
SCALING_COLUMNS = ("sigma_p", "sigma_p_over_m", "oracle_ratio_minus_1", "oracle_err",
                   "first_order_ratio", "wkb_remainder")


class ConfigError(Exception):
    def __init__(self, problems):
        super().__init__("\n".join(problems))
        self.problems = list(problems)


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"<file>: cannot read {path}: {exc.strerror}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"<file>: invalid JSON at line {exc.lineno}: {exc.msg}"]) from exc
    problems = cfgmod.validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def _weights(raw):
    if raw is None:
        return (1.0, 1.0)
    return tuple(complex(w[0], w[1]) if isinstance(w, list) else complex(w) for w in raw)


def build_packet(spec: dict, u: cfgmod.Units, where: str) -> pk.WavePacket:
    dim = spec["dim"]
    sigma = u.e(spec["sigma"]) if "sigma" in spec else None
    if sigma is None:
        sx = u.x(spec["sigma_x"])
        sigma = [1.0 / v for v in sx] if isinstance(sx, list) else 1.0 / sx
    mean_p = u.e(spec.get("mean_p"))
    shift_b = u.x(spec.get("shift_b"))
    try:
        if spec["kind"] == "cat":
            return pk.cat(u.x(spec["separation"]), dim=dim, sigma=sigma,
                          weights=_weights(spec.get("weights")), axis=spec.get("axis", 0),
                          mean_p=mean_p, shift_b=shift_b)
        return pk.make_packet(spec["kind"], dim, sigma, mean_p, shift_b,
                              kappa=u.e(spec.get("kappa", 0.0)), ell=spec.get("ell", 0),
                              xi=u.x(spec.get("xi")), label=where)
    except PacketScatterError as exc:
        if isinstance(exc, NumericalFailure):
            raise
        raise ConfigError([f"{where}: {exc}"]) from exc


def build_model(spec: dict, u: cfgmod.Units) -> amp.AmplitudeModel:
    e2 = u.energy ** 2
    coeffs = tuple(tuple(c / e2 ** (m + n) for n, c in enumerate(row))
                   for m, row in enumerate(spec.get("coeffs", [])))
    try:
        return amp.AmplitudeModel(
            spec["kind"], A=spec.get("A", 1.0), power=spec.get("power"),
            zeta0=spec.get("zeta0", 0.0), eta=spec.get("eta", 0.0),
            lambda2=spec.get("lambda2", 1.0 / e2) * e2, coeffs=coeffs,
            size=u.x(spec.get("size", 0.0)),
            table_t=tuple(t * e2 for t in spec.get("table_t", [])),
            table_phase=tuple(spec.get("table_phase", [])),
            table_modulus=tuple(spec.get("table_modulus", [])))
    except PacketScatterError as exc:
        raise ConfigError([f"amplitude: {exc}"]) from exc


def build_scenario(cfg: dict) -> tuple[corr.ScatteringScenario, cfgmod.Units]:
    u = cfgmod.Units(cfg["units"])
    parts = cfg["particles"]
    m1, m2 = u.e(parts["m1"]), u.e(parts["m2"])
    p1 = build_packet(parts["packet1"], u, "particles.packet1")
    p2 = build_packet(parts["packet2"], u, "particles.packet2")
    coll = cfg["collision"]
    if "sqrt_s" in coll:
        sqrt_s = u.e(coll["sqrt_s"])
    else:
        sqrt_s = sqrt_s_for_momentum(u.e(coll["beam_momentum"]), m1, m2)
    obs = cfg["observables"]
    try:
        sc = corr.ScatteringScenario(
            m1, m2, p1, p2, build_model(cfg["amplitude"], u), sqrt_s,
            impact=u.x(coll.get("impact")), thetas=tuple(obs["thetas"]),
            n_phi=obs.get("n_phi", 16), phi_offset=obs.get("phi_offset", 0.0))
    except PacketScatterError as exc:
        if isinstance(exc, NumericalFailure):
            raise
        raise ConfigError([f"scenario: {exc}"]) from exc
    return sc, u


def oracle_config(cfg: dict):
    block = cfg["observables"].get("oracle")
    if block is None:
        return None
    return orc.OracleConfig(method=block["method"], nodes=block.get("nodes", 64),
                            samples=block.get("samples", 100_000), seed=cfg["seed"],
                            target=block.get("target"), max_nodes=block.get("max_nodes", 512))


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _atomic_write_text(path, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_wigner(w, path):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    os.close(fd)
    try:
        wg.write_csv(w, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def compute(cfg: dict, threads=None):
    """Run every requested observable; returns (report dict, {filename: writer})."""
    sc, u = build_scenario(cfg)
    obs = cfg["observables"]
    ocfg = oracle_config(cfg)
    outputs = {}
    counts = {"oracle_evaluations": 0, "wigner_cells": 0}
    report = {}

    atom = u.x(obs.get("atom_size"))
    par = sc.paraxiality(atom)
    report["paraxiality"] = par.as_dict()

    wig = {}
    for g in obs.get("wigner", []):
        packet = sc.in_packets[0] if g["packet"] == "packet1" else sc.in_packets[1]
        r_lo, r_hi = u.x(g["r_range"])
        p_lo, p_hi = u.e(g["p_range"])
        grid = wg.PhaseSpaceGrid(packet.dim, r_lo, r_hi, g["n_r"], p_lo, p_hi, g["n_p"])
        w = wg.wigner_transform(packet, grid, threads=threads)
        counts["wigner_cells"] += int(np.prod(grid.shape))
        fname = f"wigner_{g['name']}.csv"
        outputs[fname] = ("wigner", w)
        wig[g["name"]] = {"file": fname, "negativity_volume": wg.negativity_volume(w),
                          "normalization": w.normalization, "min": float(w.values.min()),
                          "imag_residual": w.imag_residual,
                          "boundary_ratio": w.metadata.get("boundary_ratio")}
    report["wigner"] = wig

    if "negativity_scan" in obs:
        scan = wg.negativity_scale(obs["negativity_scan"]["separations"],
                                   sigma=sc.packet1.sigma[0], threads=threads,
                                   dim=sc.dim)
        report["negativity_scan"] = {"separations_over_sigma_x": scan.separations,
                                     "negativity": scan.negativity,
                                     "threshold": scan.threshold, "onset": scan.onset}

    rows = []
    asym = {}
    for theta in sc.thetas:
        res = corr.azimuthal_asymmetry(sc, theta)
        _, dirs, _ = sc.phi_bins()
        flows = []
        for phi, d, pw, r in zip(res.phi, dirs, res.pw_dsigma_dt, res.ratio):
            o_ratio = o_err = None
            if ocfg is not None:
                o = orc.averaged_bilinear(sc, theta, phi, ocfg, n_perp=d, threads=threads)
                counts["oracle_evaluations"] += o.evaluations
                o_ratio, o_err = o.ratio, o.ratio_err
            flows.append(corr.first_order_terms(sc, theta, phi, d).flow)
            rows.append((theta, phi, pw, r, o_ratio, o_err))
        asym[repr(float(theta))] = {"A": res.A, "degenerate_dipole": res.degenerate,
                                    "max_modulus_flow_term": max(abs(f) for f in flows)}
    outputs["asymmetry.csv"] = ("text", _csv(ASYMMETRY_COLUMNS, rows))
    report["correction"] = {"asymmetry": asym,
                            "effective_dipole": corr.effective_dipole(sc),
                            "dipole_gradient": sc.dipole_gradient,
                            "small_parameter": sc.small_parameter,
                            "sqrt_s": sc.sqrt_s}

    if atom is not None:
        res = corr.atom_scale_asymmetry(sc, atom)
        report["atom_scale"] = {"A": res.A, "A_point_scale": res.A_point,
                                "a_over_sigma_x": res.scale,
                                "lambda_c_over_sigma_x": res.point_scale}

    if "sigma_p_sweep" in obs:
        sw = obs["sigma_p_sweep"]
        theta = sw.get("theta", sc.thetas[0])
        phi = sw.get("phi", 0.0)
        probe = orc.scaling_probe(sc, u.e(sw["values"]), theta, phi, ocfg, threads=threads)
        srows = [(sp, x, y, e, f, abs(y - f)) for sp, x, y, e, f in probe.table]
        outputs["scaling.csv"] = ("text", _csv(SCALING_COLUMNS, srows))
        report["scaling"] = {"slope": probe.slope, "quadratic": probe.quadratic,
                             "quadratic_residual": probe.quadratic_residual,
                             "theta": theta, "phi": phi}
    report["counts"] = counts
    return report, outputs


def _base_report(cfg, path):
    return {"tool": "packetscatter", "version": __version__, "config_path": str(path),
            "config": cfg, "config_sha256": cfgmod.config_hash(cfg),
            "seed": cfg["seed"],
            "started": datetime.now(timezone.utc).isoformat(timespec="seconds")}


def run(config_path, out_dir, threads=None) -> int:
    try:
        cfg = load_config(config_path)
        build_scenario(cfg)  # surfaces construction errors before any output
    except ConfigError as exc:
        for p in exc.problems:
            print(p, file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure while building the scenario: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    os.makedirs(out_dir, exist_ok=True)
    report = _base_report(cfg, config_path)
    report["threads"] = threads
    t0 = time.perf_counter()
    try:
        body, outputs = compute(cfg, threads=threads)
    except NumericalFailure as exc:
        report.update(status="numerical_failure", error=type(exc).__name__, diagnostic=str(exc),
                      wall_seconds=time.perf_counter() - t0)
        _atomic_write_text(os.path.join(out_dir, "report.json"),
                           json.dumps(_jsonable(report), indent=2) + "\n")
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        for p in exc.problems:
            print(p, file=sys.stderr)
        return EXIT_CONFIG
    for name, (kind, payload) in outputs.items():
        path = os.path.join(out_dir, name)
        if kind == "wigner":
            _atomic_write_wigner(payload, path)
        else:
            _atomic_write_text(path, payload)
    report.update(body)
    report.update(status="ok", outputs=sorted(outputs) + ["report.json"],
                  wall_seconds=time.perf_counter() - t0)
    _atomic_write_text(os.path.join(out_dir, "report.json"),
                       json.dumps(_jsonable(report), indent=2) + "\n")
    return EXIT_OK


def validate_file(config_path) -> tuple[int, list[str]]:
    try:
        load_config(config_path)
    except ConfigError as exc:
        return EXIT_CONFIG, exc.problems
    return EXIT_OK, []


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: all cores)")
    ap = argparse.ArgumentParser(prog="packetscatter", parents=[common],
                                 description="Wave-packet scattering corrections and Wigner functions.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run a scenario")
    r.add_argument("config")
    r.add_argument("--out", required=True, help="output directory")
    v = sub.add_parser("validate", parents=[common], help="check a config without computing")
    v.add_argument("config")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        code, problems = validate_file(args.config)
        for p in problems:
            print(p)
        return code
    return run(args.config, args.out, threads=threads)


if __name__ == "__main__":
    sys.exit(main())
