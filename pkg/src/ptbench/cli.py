"""Command-line front end.

Every command prints one JSON report on stdout.  Exit codes: 0 success,
1 a checked property failed, 2 invalid input, 3 numerical failure.
"""
import argparse
import csv
import io
import json
import sys

import numpy as np

from . import report
from .complex_continuation import algebra_report
from .correlators import reality_certificate, two_point_euclidean
from .errors import NoSymmetryError, NumericalFailure, ValidationError
from .linalg_core import eigen_system
from .pais_uhlenbeck import (
    LatticeSpec,
    PUParams,
    fit_correlator,
    ground_energy,
    lattice_correlator,
    wedge_scan,
)
from .pt_analysis import construct_V, find_antilinear_symmetry, hermitianize, secular_reality
from .validation import as_matrix

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
ALGEBRA_TOL = 1e-13
FIT_TOL = 0.02


def _entries_to_matrix(n, entries, source):
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"{source}: n must be a positive integer")
    if len(entries) != n * n:
        raise ValidationError(f"{source}: expected {n * n} entries, got {len(entries)}")
    try:
        vals = np.array([complex(float(re), float(im)) for re, im in entries])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{source}: entries must be [re, im] pairs") from exc
    return as_matrix(vals.reshape(n, n), source)


def parse_matrix(data, source="matrix"):
    """MatrixFile bytes: JSON ``{"n", "entries"}`` or CSV of ``re,im`` rows."""
    text = data.decode("utf-8")
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{source}: invalid JSON ({exc})") from exc
        if "n" not in obj or "entries" not in obj:
            raise ValidationError(f"{source}: needs keys 'n' and 'entries'")
        return _entries_to_matrix(obj["n"], obj["entries"], source)
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and rows[0][0].strip().lower() in ("re", "real"):
        rows = rows[1:]
    if any(len(r) != 2 for r in rows):
        raise ValidationError(f"{source}: CSV rows must be 're,im' pairs")
    n = int(round(np.sqrt(len(rows))))
    return _entries_to_matrix(n, rows, source)


def matrix_file(h):
    """MatrixFile JSON text for a square matrix."""
    h = np.asarray(h, dtype=np.complex128)
    entries = [[float(z.real), float(z.imag)] for z in h.ravel()]
    return report.dumps({"n": h.shape[0], "entries": entries})


def _read(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc


def _need(args, name):
    val = getattr(args, name)
    if val is None:
        raise ValidationError(f"--{name.replace('_', '-')} is required for {args.command}")
    return val


def _load_matrix(args, name, blobs):
    data = _read(_need(args, name))
    blobs.append(data)
    return parse_matrix(data, f"--{name}")


def _tau_grid(args, default_max, default_step, start=0.0):
    tmax = default_max if args.tau_max is None else args.tau_max
    step = default_step if args.tau_step is None else args.tau_step
    if not step > 0 or tmax < start:
        raise ValidationError("need tau-step > 0 and tau-max >= tau start")
    count = int(np.floor((tmax - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _symmetry_payload(sym):
    if sym is None:
        return None
    return {"A": sym.A, "involution_defect": sym.involution_defect,
            "residual": sym.residual, "involutive": sym.involutive}


def cmd_classify(args, blobs):
    h = _load_matrix(args, "matrix", blobs)
    spec = eigen_system(h, tol=args.tol)
    sec = secular_reality(h)
    result = {
        "class": spec.spectral_class,
        "eigenvalues": [e.value for e in spec.eigenvalues],
        "algebraic": [e.algebraic for e in spec.eigenvalues],
        "geometric": [e.geometric for e in spec.eigenvalues],
        "pairing": spec.pairing,
        "pairing_violated": spec.pairing_violated,
        "cluster_tol": spec.cluster_tol,
        "char_poly": sec.coeffs,
        "secular_max_imag": sec.max_imag,
        "best_effort": spec.best_effort,
    }
    return result, True


def cmd_find_pt(args, blobs):
    h = _load_matrix(args, "matrix", blobs)
    sym = find_antilinear_symmetry(h, args.tol)
    return {"symmetry": _symmetry_payload(sym)}, sym is not None


def cmd_build_v(args, blobs):
    h = _load_matrix(args, "matrix", blobs)
    try:
        v = construct_V(h, args.tol)
    except NoSymmetryError as exc:
        return {"V": None, "reason": str(exc)}, False
    return {"V": v.V, "residual": v.residual, "construction": v.construction,
            "hermitian_positive": v.is_hermitian_positive}, True


def cmd_disguise(args, blobs):
    h = _load_matrix(args, "matrix", blobs)
    herm = hermitianize(h, args.tol)
    if herm is None:
        spec = eigen_system(h, tol=args.tol)
        return {"S": None, "class": spec.spectral_class}, False
    return {"S": herm.S, "hermitian_form": herm.hermitian_form, "defect": herm.defect,
            "spectrum": np.linalg.eigvalsh(herm.hermitian_form)}, True


def cmd_two_point(args, blobs):
    h = _load_matrix(args, "matrix", blobs)
    phi = _load_matrix(args, "phi", blobs)
    tau = _tau_grid(args, 5.0, 0.25)
    cert = reality_certificate(h, phi, tau, args.tol)
    result = {"tau": tau, "certificate": {"passed": cert.passed, "max_imag": cert.max_imag,
                                          "sectors": cert.sectors}}
    if cert.witness is not None:
        term, label = cert.witness
        result["certificate"]["witness"] = {"vacuum": label, "state": term.state,
                                            "energy": term.raw_energy, "amplitude": term.amplitude}
    try:
        series, max_imag = two_point_euclidean(h, phi, tau, args.tol)
    except ValidationError as exc:
        result["default_vacuum"] = {"error": str(exc)}
    else:
        result["default_vacuum"] = {
            "label": series.vacuum_label, "energy_shift": series.energy_shift,
            "terms": [{"state": t.state, "amplitude": t.amplitude, "energy": t.energy}
                      for t in series.terms],
            "G": series.evaluate(tau), "max_imag": max_imag,
        }
    return result, cert.passed


def _pu_params(args):
    return PUParams(_need(args, "omega1"), _need(args, "omega2"), args.gamma,
                    args.eps if args.eps is not None else 0.0)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format(float(x), ".17g") for x in row])


def cmd_pu_energy(args, blobs):
    p = _pu_params(args)
    dt = 0.01 if args.delta_tau is None else args.delta_tau
    n = 2000 if args.n_sites is None else args.n_sites
    est = ground_energy(p, dt, n * dt)
    if args.csv:
        _write_csv(args.csv, ["T", "F", "E0_estimate"], [(t, f, est.e0) for t, f in est.free_energies])
    result = {"E0": est.e0, "E0_refined": est.e0_refined, "achieved": est.achieved,
              "converged": est.converged, "free_energies": est.free_energies,
              "delta_tau": dt, "total_time": n * dt}
    return result, bool(est.converged)


def cmd_pu_correlator(args, blobs):
    p = _pu_params(args)
    lat = LatticeSpec(200 if args.n_sites is None else args.n_sites,
                      0.1 if args.delta_tau is None else args.delta_tau)
    tau = _tau_grid(args, 4.0, lat.delta_tau, start=0.5)
    g = lattice_correlator(p, lat, tau)
    fit = fit_correlator(tau, g, p.omega1, p.omega2)
    if args.csv:
        _write_csv(args.csv, ["tau", "value"], zip(tau, g))
    ok = fit.model == "none" or fit.rel_residual < FIT_TOL
    return {"tau": tau, "G": g, "fit": fit}, bool(ok)


def cmd_wedge(args, blobs):
    if args.eps is None:
        raise ValidationError("--eps is required for wedge")
    p = _pu_params(args)
    rep = wedge_scan(p, _need(args, "theta_z"), _need(args, "theta_zdot"))
    result = {"theta_z": rep.theta_z, "theta_zdot": rep.theta_zdot, "re_z": rep.re_z,
              "re_zdot": rep.re_zdot, "z": rep.damping_z, "zdot": rep.damping_zdot,
              "damped": rep.damped}
    return result, True


def cmd_algebra_check(args, blobs):
    defects = algebra_report()
    return {"defects": defects, "threshold": ALGEBRA_TOL}, max(defects.values()) <= ALGEBRA_TOL


COMMANDS = {
    "classify": cmd_classify,
    "find-pt": cmd_find_pt,
    "build-v": cmd_build_v,
    "disguise": cmd_disguise,
    "two-point": cmd_two_point,
    "pu-energy": cmd_pu_energy,
    "pu-correlator": cmd_pu_correlator,
    "wedge": cmd_wedge,
    "algebra-check": cmd_algebra_check,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--matrix")
    common.add_argument("--phi")
    common.add_argument("--tau-max", type=float)
    common.add_argument("--tau-step", type=float)
    common.add_argument("--omega1", type=float)
    common.add_argument("--omega2", type=float)
    common.add_argument("--gamma", type=float, default=1.0)
    common.add_argument("--eps", type=float)
    common.add_argument("--n-sites", type=int)
    common.add_argument("--delta-tau", type=float)
    common.add_argument("--theta-z", type=float)
    common.add_argument("--theta-zdot", type=float)
    common.add_argument("--csv", help="also write tabular output to this path")

    parser = argparse.ArgumentParser(prog="ptbench", description=__doc__.splitlines()[0])
    parser.add_argument("--tol", type=float, default=1e-9, help="global tolerance (default 1e-9)")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True,
                                help=", ".join(COMMANDS))
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _flags(args):
    skip = {"command", "csv"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def run(argv=None, stdout=None, stderr=None):
    """Parse ``argv``, run one command and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    blobs = []
    try:
        if not args.tol > 0:
            raise ValidationError("--tol must be positive")
        result, passed = COMMANDS[args.command](args, blobs)
    except ValidationError as exc:
        print(f"{parser.prog}: error: {exc}", file=stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"{parser.prog}: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    rep = report.make_report(args.command, _flags(args), blobs, args.tol, result, passed)
    print(report.dumps(rep), file=stdout)
    return EXIT_OK if passed else EXIT_FAIL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
