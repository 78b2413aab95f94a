"""Batch command-line interface.

Subcommands wire descriptor, generator and experiment files to the library
and emit machine-readable JSON or CSV.  Exit codes: 0 every certification
passed, 2 precondition violated, 3 a certification failed its tolerance,
4 I/O failure.  Output is deterministic for a fixed config and seed: keys
are sorted, numbers use shortest round-trip formatting with '.' decimal.

File formats ([re, im] pairs at complex leaves):
  descriptor  {dim, labels, mult, unit, invol, coproduct, counit, rep_blocks}
  functional  {"coeffs": [...]}
  kernel map  {"target_dim": m, "blocks": [...]}
  step fn     {"breakpoints": [...], "values": [[...], ...]}
  spec        {"algebra": path, "gamma": path} or {"algebra": path, "phi": path}
              (paths resolved relative to the spec file)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fixtures
from .bialgebra import Bialgebra, load_descriptor, validate
from .cocycle import (CocycleSpec, StepFunction, cocycle_matrix_element,
                      cp_gram_witness, verify_cocycle_identity, zero_step)
from .convolution import KernelMap, conv_exp
from .errors import ParseError, PreconditionError, QlevyError
from .levy import DiscreteLevyProcess, semigroup_of_states, verify_wqlp_axioms
from .schurmann import (assemble_structure_map, classify_generator,
                        extract_implementing_pair, gns_triple)
from .serialize import decode_complex, encode_complex
from .walk import convergence_table, walk_map, walk_matrix_element, walk_scheme

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_CERTIFICATION = 3
EXIT_IO = 4


# -- file loading -------------------------------------------------------------


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_functional(path) -> np.ndarray:
    obj = _load_json(path)
    if "coeffs" not in obj:
        raise ParseError(f"{path}: functional files need a 'coeffs' key")
    return decode_complex(obj["coeffs"])


def load_kernel(path) -> KernelMap:
    return KernelMap.from_dict(_load_json(path))


def load_step(path) -> StepFunction:
    return StepFunction.from_dict(_load_json(path))


def load_spec(path):
    """Resolve an experiment spec into (algebra, phi, pi, xi, gamma)."""
    obj = _load_json(path)
    base = Path(path).parent
    if "algebra" not in obj:
        raise ParseError(f"{path}: spec files need an 'algebra' key")
    B = load_descriptor(base / obj["algebra"])
    if "phi" in obj:
        phi = load_kernel(base / obj["phi"])
        pair = extract_implementing_pair(B, phi)
        return B, phi, pair.pi, pair.xi, None
    if "gamma" in obj:
        gamma = load_functional(base / obj["gamma"])
        triple = gns_triple(B, gamma)
        phi = assemble_structure_map(B, triple)
        xi = triple.xi if triple.xi is not None else np.zeros(triple.noise_dim, complex)
        return B, phi, triple.pi, xi, gamma
    raise ParseError(f"{path}: spec files need a 'gamma' or 'phi' key")


def parse_element(B: Bialgebra, token: str) -> np.ndarray:
    if token == "unit":
        return B.unit_element()
    if token in B.labels:
        return B.basis_element(B.labels.index(token))
    try:
        return B.basis_element(int(token))
    except ValueError:
        pass
    obj = _load_json(token)
    return decode_complex(obj["coeffs"])


def parse_grid(spec: str) -> list[float]:
    """'a:b:step' (inclusive within snap) or a comma list."""
    if ":" in spec:
        a, b, step = (float(Fraction(x)) for x in spec.split(":"))
        if step <= 0:
            raise PreconditionError("grid step must be positive")
        n = int(np.floor((b - a) / step + 1e-9))
        return [a + k * step for k in range(n + 1)]
    return [float(Fraction(x)) for x in spec.split(",")]


def parse_hgrid(spec: str) -> list[float]:
    """'2^-2..2^-7' (halving) or a comma list of numbers/fractions."""
    if ".." in spec:
        lo, hi = spec.split("..")

        def pow2(tok: str) -> int:
            tok = tok.strip()
            if not tok.startswith("2^"):
                raise PreconditionError(f"bad h-grid endpoint {tok!r}")
            return int(tok[2:])
        a, b = pow2(lo), pow2(hi)
        if a < b:
            a, b = b, a
        return [2.0 ** k for k in range(a, b - 1, -1)]
    return [float(Fraction(x)) for x in spec.split(",")]


# -- output -------------------------------------------------------------------


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v
                             for k, v in row.items()})
    return buf.getvalue()


def emit_report(payload: dict, fmt: str, out: str | None) -> None:
    """Write the result payload as JSON or CSV (rows key), locale-free."""
    if fmt == "csv":
        rows = payload.get("rows", [])
        header = payload.get("csv_header")
        if not rows and header:
            text = ",".join(header) + "\n"
        else:
            text = _csv_text(rows)
    else:
        text = json.dumps(payload, indent=1, sort_keys=True, default=_json_default)
        text += "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.ndarray):
        return encode_complex(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x)}")


# -- handlers -----------------------------------------------------------------


def _cmd_validate(args):
    B = load_descriptor(args.algebra)
    report = validate(B, tol=args.tol)
    rows = [{"residual": name, "value": float(val), "tol": args.tol,
             "pass": val <= args.tol}
            for name, val in sorted(report.residuals.items())]
    return {"passed": report.passed, "tol": args.tol, "rows": rows}, report.passed


def _cmd_conv_exp(args):
    B = load_descriptor(args.algebra)
    gamma = load_functional(args.gamma)
    phi_t = conv_exp(B, gamma, args.t, algorithm=args.algorithm)
    rows = [{"basis": B.labels[i], "re": float(phi_t[i].real), "im": float(phi_t[i].imag)}
            for i in range(B.dim)]
    return {"t": args.t, "algorithm": args.algorithm,
            "coeffs": encode_complex(phi_t), "rows": rows}, True


def _cmd_schurmann(args):
    B = load_descriptor(args.algebra)
    gamma = load_functional(args.gamma)
    triple = gns_triple(B, gamma, tol=args.tol)
    phi = assemble_structure_map(B, triple)
    payload = {
        "noise_dim": triple.noise_dim,
        "pi": encode_complex(triple.pi),
        "delta": encode_complex(triple.delta),
        "gamma": encode_complex(triple.gamma),
        "xi": None if triple.xi is None else encode_complex(triple.xi),
        "gram": encode_complex(triple.gram),
        "structure_map": phi.to_dict(),
    }
    return payload, True


def _cmd_classify(args):
    B = load_descriptor(args.algebra)
    phi = load_kernel(args.phi)
    witnesses = None
    if args.witness:
        wobj = _load_json(args.witness)
        if "psi" in wobj:
            witnesses = (KernelMap.from_dict(wobj["psi"]), decode_complex(wobj["zeta"]))
        elif "rho" in wobj:
            witnesses = (decode_complex(wobj["rho"]), decode_complex(wobj["D"]),
                         decode_complex(wobj["xi"]))
        else:
            raise ParseError("witness files need either psi/zeta or rho/D/xi keys")
    result = classify_generator(B, phi, witnesses=witnesses, tol=args.tol)
    cert = {k: (encode_complex(v) if isinstance(v, np.ndarray) else v)
            for k, v in result.certificate.items()}
    return {"class": result.kind, "certificate": cert}, result.kind != "unclassified"


def _spec_and_steps(args, need_fg=True):
    B, phi, pi, xi, gamma = load_spec(args.spec)
    spec = CocycleSpec(B, phi)
    if not need_fg:
        return B, spec, pi, xi, None, None
    f = load_step(args.f) if args.f else zero_step(phi.noise_dim)
    g = load_step(args.g) if args.g else zero_step(phi.noise_dim)
    if f.noise_dim != phi.noise_dim or g.noise_dim != phi.noise_dim:
        raise PreconditionError("step functions must take values in the noise space")
    return B, spec, pi, xi, f, g


def _cmd_evolve(args):
    B, spec, _, _, f, g = _spec_and_steps(args)
    b = parse_element(B, args.b)
    if args.grid:
        times = parse_grid(args.grid)
    else:
        if args.t is None:
            raise PreconditionError("evolve needs --t or --grid")
        times = [args.t]
    if any(t < 0 for t in times):
        raise PreconditionError("times must be nonnegative")
    rows = []
    for t in times:
        val = cocycle_matrix_element(spec, f, g, t, b, t_max=args.tmax)
        rows.append({"t": float(t), "re": float(val.real), "im": float(val.imag)})
    return {"rows": rows}, True


def _cmd_verify_cocycle(args):
    B, spec, _, _, f, g = _spec_and_steps(args)
    residual = verify_cocycle_identity(spec, f, g, args.s, args.t)
    ok = residual <= args.tol
    return {"residual": residual, "tol": args.tol, "pass": ok,
            "rows": [{"s": args.s, "t": args.t, "residual": residual,
                      "tol": args.tol, "pass": ok}]}, ok


def _cmd_cp_witness(args):
    B, spec, _, _, _, _ = _spec_and_steps(args, need_fg=False)
    n = spec.noise_dim
    rng = np.random.default_rng(args.seed)
    fs, elements = [], []
    for _ in range(args.random):
        nbp = int(rng.integers(0, 3))
        bp = np.sort(rng.uniform(0.05, 0.95 * max(args.t, 1.0), nbp))
        vals = 0.5 * (rng.standard_normal((nbp + 1, n))
                      + 1j * rng.standard_normal((nbp + 1, n)))
        fs.append(StepFunction(bp, vals))
        elements.append(rng.standard_normal(B.dim) + 1j * rng.standard_normal(B.dim))
    if not fs:
        fs = [zero_step(n)]
        elements = [B.unit_element()]
    min_eig = cp_gram_witness(spec, args.t, fs, elements)
    ok = min_eig >= -args.tol
    return {"t": args.t, "witnesses": len(fs), "min_eig": min_eig,
            "tol": args.tol, "pass": ok,
            "rows": [{"t": args.t, "min_eig": min_eig, "pass": ok}]}, ok


def _cmd_walk(args):
    B, spec, pi, xi, f, g = _spec_and_steps(args)
    scheme = walk_scheme(B, pi, xi, args.step)
    V = scheme.interaction
    unitarity = float(np.max(np.abs(V.conj().T @ V - np.eye(V.shape[1]))))
    payload = {
        "h": args.step,
        "steps": args.steps,
        "unitarity_defect": unitarity,
        "interaction": encode_complex(V),
        "psi_blocks": scheme.psi.to_dict(),
    }
    if args.b is not None:
        b = parse_element(B, args.b)
        val = walk_matrix_element(B, scheme.psi, args.step, args.steps, f, g, b,
                                  t_max=args.tmax)
        payload["value"] = [val.real, val.imag]
        payload["rows"] = [{"t": args.steps * args.step,
                            "re": float(val.real), "im": float(val.imag)}]
    return payload, unitarity <= 1e-12


def _cmd_walk_converge(args):
    B, spec, pi, xi, f, g = _spec_and_steps(args)
    if args.b:
        elements = [parse_element(B, tok) for tok in args.b.split(",")]
    else:
        elements = [B.basis_element(i) for i in range(B.dim)]
    h_grid = parse_hgrid(args.hgrid)
    rows_data = convergence_table(B, spec.phi, pi, xi, args.T, f, g, elements, h_grid)
    rows = [{"h": r.h, "err": r.err, "ratio": r.ratio} for r in rows_data]
    errs = [r.err for r in rows_data]
    nonincreasing = all(e2 <= e1 + 1e-15 for e1, e2 in zip(errs, errs[1:]))
    return {"T": args.T, "nonincreasing": nonincreasing, "rows": rows}, nonincreasing


def _cmd_levy_verify(args):
    B, spec, pi, xi, _, _ = _spec_and_steps(args, need_fg=False)
    psi = walk_map(B, pi, xi, args.step)
    process = DiscreteLevyProcess(B, psi, args.N)
    report = verify_wqlp_axioms(process, tol=args.tol)
    rows = [{"axiom": name, "residual": float(val), "tol": args.tol,
             "pass": val <= args.tol}
            for name, val in sorted(report.residuals.items())]
    rows.append({"axiom": "one_step_distance", "residual": report.one_step_distance,
                 "tol": float("nan"), "pass": True})
    return {"N": args.N, "h": args.step, "passed": report.passed,
            "one_step_distance": report.one_step_distance, "rows": rows}, report.passed


def _cmd_states(args):
    B = load_descriptor(args.algebra)
    gamma = load_functional(args.gamma)
    grid = parse_grid(args.grid)
    states, report = semigroup_of_states(B, gamma, grid, tol=args.tol)
    rows = []
    for k, (t, lam) in enumerate(zip(report.times, states)):
        row = {"t": float(t)}
        for i, label in enumerate(B.labels):
            row[f"{label}_re"] = float(lam[i].real)
            row[f"{label}_im"] = float(lam[i].imag)
        row["unit_defect"] = float(report.unit_defects[k])
        row["gram_min_eig"] = float(report.gram_min_eigs[k])
        row["is_state"] = (report.unit_defects[k] <= args.tol
                           and report.gram_min_eigs[k] >= -args.tol)
        rows.append(row)
    return {"passed": report.passed, "rows": rows}, report.passed


def _cmd_make_fixtures(args):
    written = fixtures.write_packaged(args.dir)
    return {"written": [str(p) for p in written]}, True


# -- parser -------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, tol_default: float = 1e-9) -> None:
    p.add_argument("--tol", type=float, default=tol_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlevy",
        description="quantum Levy processes on finite-dimensional bialgebras")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check every bialgebra axiom of a descriptor")
    p.add_argument("--algebra", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("conv-exp", help="convolution exponential of a functional")
    p.add_argument("--algebra", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--algorithm", choices=("rmap", "series"), default="rmap")
    _add_common(p)
    p.set_defaults(handler=_cmd_conv_exp)

    p = sub.add_parser("schurmann", help="GNS triple of a generating functional")
    p.add_argument("--algebra", required=True)
    p.add_argument("--gamma", required=True)
    _add_common(p, tol_default=1e-10)
    p.set_defaults(handler=_cmd_schurmann)

    p = sub.add_parser("classify", help="classify a stochastic generator")
    p.add_argument("--algebra", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--witness", default=None)
    _add_common(p, tol_default=1e-8)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("evolve", help="cocycle matrix elements over time")
    p.add_argument("--spec", required=True)
    p.add_argument("--f", default=None)
    p.add_argument("--g", default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--b", required=True)
    p.add_argument("--tmax", type=float, default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_evolve)

    p = sub.add_parser("verify-cocycle", help="residual of the cocycle identity")
    p.add_argument("--spec", required=True)
    p.add_argument("--f", default=None)
    p.add_argument("--g", default=None)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_verify_cocycle)

    p = sub.add_parser("cp-witness", help="PSD witness matrix of a cocycle")
    p.add_argument("--spec", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--random", type=int, default=3,
                   help="number of seeded random witness rows")
    _add_common(p)
    p.set_defaults(handler=_cmd_cp_witness)

    p = sub.add_parser("walk", help="one-step walk data and matrix element")
    p.add_argument("--spec", required=True)
    p.add_argument("--h", dest="step", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--f", default=None)
    p.add_argument("--g", default=None)
    p.add_argument("--b", default=None)
    p.add_argument("--tmax", type=float, default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_walk)

    p = sub.add_parser("walk-converge", help="walk-vs-cocycle error sweep")
    p.add_argument("--spec", required=True)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--hgrid", default="2^-2..2^-7")
    p.add_argument("--f", default=None)
    p.add_argument("--g", default=None)
    p.add_argument("--b", default=None, help="comma list of elements (default: basis)")
    _add_common(p)
    p.set_defaults(handler=_cmd_walk_converge)

    p = sub.add_parser("levy-verify", help="discrete Levy-process axiom suite")
    p.add_argument("--spec", required=True)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--h", dest="step", type=float, default=0.25)
    _add_common(p, tol_default=1e-10)
    p.set_defaults(handler=_cmd_levy_verify)

    p = sub.add_parser("states", help="convolution semigroup of states on a grid")
    p.add_argument("--algebra", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--grid", default="0:1:0.1")
    _add_common(p)
    p.set_defaults(handler=_cmd_states)

    p = sub.add_parser("make-fixtures", help="write the packaged example files")
    p.add_argument("--dir", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_make_fixtures)

    return parser


def _emit_error(args, code: str, message: str, residual: float | None = None) -> None:
    record = {"error": {"code": code, "message": message}}
    if residual is not None:
        record["error"]["residual"] = residual
    out = getattr(args, "out", None)
    text = json.dumps(record, indent=1, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError:
            sys.stderr.write(text)
    sys.stderr.write(f"qlevy: {code}: {message}\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, certified = args.handler(args)
    except PreconditionError as exc:
        _emit_error(args, "PRECONDITION", str(exc))
        return EXIT_PRECONDITION
    except QlevyError as exc:
        _emit_error(args, "PRECONDITION", str(exc))
        return EXIT_PRECONDITION
    except OSError as exc:
        _emit_error(args, "IO", str(exc))
        return EXIT_IO
    try:
        emit_report(payload, args.format, args.out)
    except OSError as exc:
        _emit_error(args, "IO", str(exc))
        return EXIT_IO
    if not certified:
        sys.stderr.write("qlevy: CERTIFICATION_FAIL: a certification missed its tolerance\n")
        return EXIT_CERTIFICATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
