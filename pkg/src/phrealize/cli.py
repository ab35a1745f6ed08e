"""Command line front end.

Subcommands::

    phrealize analyze  SYSTEM [--passive-only]
    phrealize realize  SYSTEM [-o OUT] [--passive-only]
    phrealize spectrum SYSTEM
    phrealize generate {scrambled-ph,brake,notepass,scalar} [...]

Exit codes: 0 analyzed / success, 1 infeasible, 2 input error,
3 numerical failure.
"""

import argparse
import sys as _sys
import time

import numpy as np

from .errors import InfeasibleError, InputError, NotStable, NumericalError, PHError
from .io import load_system, system_to_dict, write_json
from .lyapunov import solve_lyapunov_inequality
from .ph_transform import (
    brake_squeal_instance, passivity_certificate, random_ph_realization,
    realize_general, scramble,
)
from .riccati_even import build_even_pencil, build_hamiltonian, pencil_spectrum
from .system_model import LtiSystem, lmi_residual, ph_to_lti, transform_system
from .tolerances import from_env

__all__ = ["main", "build_parser", "analyze", "realize", "spectrum"]

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


def _tolerances(args):
    return from_env().replace(rank_tol=getattr(args, "rank_tol", None),
                              tol_psd=getattr(args, "psd_tol", None),
                              axis_tol=getattr(args, "axis_tol", None))


def _sym_residuals(ph):
    return {
        "J_skew": float(np.linalg.norm(ph.J + ph.J.T)),
        "R_sym": float(np.linalg.norm(ph.R - ph.R.T)),
        "S_sym": float(np.linalg.norm(ph.S - ph.S.T)),
        "N_skew": float(np.linalg.norm(ph.N + ph.N.T)),
    }


def analyze(sys, tol, passive_only=False):
    """Stability, passivity and PH verdicts as a report dict."""
    reasons = []
    residuals = {}
    stable = asym = passive = ph_ok = False
    try:
        lyap = solve_lyapunov_inequality(sys.A, tol) if sys.n else None
        stable = True
        asym = lyap is None or lyap.split.n2 == 0
    except NotStable as exc:
        reasons.append(exc.as_reason())
    if stable:
        try:
            cert = passivity_certificate(sys, tol)
            passive = True
            residuals["passive_lmi_lambda_max"] = cert.lmi_residual
        except InfeasibleError as exc:
            reasons.append(exc.as_reason())
    evaluated = stable and not passive_only
    if evaluated:
        try:
            tr, ph, trace = realize_general(sys, tol)
            ph_ok = True
            residuals["lmi_lambda_max"] = trace.lmi_residual
            residuals["lmi_scale"] = trace.lmi_scale
            residuals["constraint_residual"] = trace.constraint_residual
            residuals["sym_residuals"] = _sym_residuals(ph)
        except InfeasibleError as exc:
            reasons.append(exc.as_reason())
    # ph_realizable => passive => stable
    passive = (passive or ph_ok) and stable
    ph_ok = ph_ok and passive
    return {
        "verdicts": {"stable": stable, "asymptotically_stable": bool(asym and stable),
                     "passive": passive, "ph_realizable": ph_ok},
        "ph_evaluated": evaluated,
        "failure_reasons": reasons,
        "residuals": residuals,
        "tolerances_used": tol.as_dict(),
        "dimensions": {"n": sys.n, "m": sys.m},
    }


def realize(sys, tol, passive_only=False):
    """Realization bundle; raises on infeasibility."""
    if passive_only:
        cert = passivity_certificate(sys, tol)
        return {"status": "passive", "Q": cert.Q, "kind": cert.kind,
                "residuals": {"lmi_lambda_max": cert.lmi_residual, "lmi_scale": cert.scale}}
    tr, ph, trace = realize_general(sys, tol)
    back = ph_to_lti(ph)
    ref = transform_system(sys, tr.T, tr.V)
    recon = max(float(np.linalg.norm(getattr(back, k) - getattr(ref, k)))
                for k in "ABCD")
    return {
        "status": "ph_realizable",
        "T": tr.T, "V": tr.V, "J": ph.J, "R": ph.R, "Q": ph.Q, "F": ph.F, "P": ph.P,
        "S": ph.S, "N": ph.N, "cond_T": tr.cond_T,
        "residuals": {"lmi_lambda_max": trace.lmi_residual, "lmi_scale": trace.lmi_scale,
                      "constraint_residual": trace.constraint_residual,
                      "reconstruction": recon,
                      "orthogonality_V": tr.orthogonality_residual(),
                      "sym_residuals": _sym_residuals(ph)},
        "steps": list(trace.steps),
    }


def _pairing(ev):
    if ev.size == 0:
        return 0.0
    d = np.abs(ev[:, None] + ev.conj()[None, :]).min(axis=1)
    return float(d.max() / max(1.0, np.abs(ev).max()))


def spectrum(sys, tol):
    """Eigenvalues of A, of the Hamiltonian (S > 0) and of the even pencil."""
    ev = np.linalg.eigvals(sys.A) if sys.n else np.zeros(0, complex)
    out = {"A_eigenvalues": np.sort_complex(ev)}
    S = sys.S
    wS = np.linalg.eigvalsh(S) if sys.m else np.zeros(0)
    spd = bool(sys.m == 0 or wS[0] > tol.rank_tol * max(sys.norm(), 1.0))
    warnings = []
    if spd:
        H = build_hamiltonian(sys.A, sys.B, sys.C, S)
        evH = np.sort_complex(np.linalg.eigvals(H.H))
        out["H_eigenvalues"] = evH
        out["H_pairing_residual"] = _pairing(evH)
        out["H_structure_residual"] = H.structure_residual()
    else:
        out["H_eigenvalues"] = None
        warnings.append("S = D + D^T is singular: the even pencil may have Jordan "
                        "blocks of size larger than one at infinity (higher index)")
    ps = pencil_spectrum(build_even_pencil(sys))
    out["pencil"] = {"finite": ps["finite"], "n_infinite": ps["n_infinite"],
                     "pairing_residual": ps["pairing_residual"],
                     "index_one": bool(spd and ps["n_infinite"] == sys.m)}
    out["warnings"] = warnings
    return out


def _generate(args):
    kind = args.kind
    if kind == "scrambled-ph":
        ph = random_ph_realization(args.n, args.m, seed=args.seed, lossless=args.lossless,
                                   singular_S=args.singular_s)
        sys, _, _ = scramble(ph_to_lti(ph), seed=args.seed)
        return system_to_dict(sys)
    if kind == "brake":
        sys, rep = brake_squeal_instance(args.nq, omega_ratio=args.omega_ratio,
                                         rank_n=args.rank_n, seed=args.seed,
                                         n_scale=args.n_scale)
        out = system_to_dict(sys)
        out["report"] = {"lambda_min_R": rep["lambda_min_R"],
                         "max_real_part": rep["max_real_part"],
                         "substitution_residual": rep["substitution_residual"]}
        return out
    if kind == "notepass":
        return system_to_dict(LtiSystem([[-1.0]], [[2.0]], [[0.0]], [[0.0]]))
    a = args.alpha
    return system_to_dict(LtiSystem([[-1.0 - a]], [[1.0]], [[-1.0]], [[0.5]]))


def build_parser():
    p = argparse.ArgumentParser(prog="phrealize",
                                description="Passivity and port-Hamiltonian realization of LTI systems")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-tol", type=float, default=None)
    common.add_argument("--psd-tol", type=float, default=None)
    common.add_argument("--axis-tol", type=float, default=None)
    common.add_argument("-o", "--output", default=None, help="write JSON here instead of stdout")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("analyze", "realize", "spectrum"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("input")
        if name != "spectrum":
            sp.add_argument("--passive-only", action="store_true",
                            help="semidefinite storage only, no PH realization")
    g = sub.add_parser("generate", parents=[common])
    g.add_argument("kind", choices=["scrambled-ph", "brake", "notepass", "scalar"])
    g.add_argument("--n", type=int, default=6)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--lossless", action="store_true")
    g.add_argument("--singular-s", action="store_true")
    g.add_argument("--nq", type=int, default=10)
    g.add_argument("--rank-n", type=int, default=0)
    g.add_argument("--n-scale", type=float, default=1.0)
    g.add_argument("--omega-ratio", type=float, default=1.0)
    g.add_argument("--alpha", type=float, default=2.0)
    return p


def main(argv=None, stdout=None):
    stdout = _sys.stdout if stdout is None else stdout
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        tol = _tolerances(args)
        if args.command == "generate":
            out = _generate(args)
        else:
            sys = load_system(args.input)
            if args.command == "analyze":
                out = analyze(sys, tol, args.passive_only)
            elif args.command == "spectrum":
                out = spectrum(sys, tol)
            else:
                try:
                    out = realize(sys, tol, args.passive_only)
                except InfeasibleError as exc:
                    out = {"status": "infeasible", "reason": exc.as_reason()}
                    code = EXIT_INFEASIBLE
    except InputError as exc:
        out, code = {"status": "input_error", "reason": exc.as_reason()}, EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError) as exc:
        reason = exc.as_reason() if isinstance(exc, PHError) else {"message": str(exc)}
        out, code = {"status": "numerical_failure", "reason": reason}, EXIT_NUMERICAL
    if args.timing:
        out["timing"] = {"seconds": time.perf_counter() - t0}
    write_json(out, args.output, stdout)
    return code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
