"""Command-line interface: scenarios in, analysis-ready JSON/CSV artifacts out.

Subcommands: solve-dual, evolve, reconstruct, oracle, validate, and run
(the full pipeline a scenario requests).  Exit codes: 0 success, 2 invalid
input, 3 solver non-convergence, 4 internal-consistency failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import serialization as ser
from .constants import Constants, require_valid_constants
from .dualsolver import DualSolution, duality_gap, solve_dual
from .exceptions import (AxivortError, ConvergenceError, InternalConsistencyError,
                         ValidationError)
from .forcing import ForcingSpec
from .freeboundary import MonotoneProfile
from .measures import DensitySpec, DiscreteMeasure, make_measure, sample_density
from .oracles import brute_primal
from .physical import boundary_diagnostics, reconstruct_fields, zeta_of_rho
from .stepping import EvolutionConfig, check_hypotheses, evolve

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_INCONSISTENCY = 4


@dataclass
class Scenario:
    """Parsed scenario: constants, initial measure, optional evolution and outputs."""

    constants: Constants
    initial: DiscreteMeasure
    evolution: EvolutionConfig | None
    solver: dict
    reconstruct: dict | None
    oracle: dict | None
    raw: dict

    @property
    def sha(self) -> str:
        return ser.scenario_hash(self.raw)


def _parse_constants(d: dict) -> Constants:
    cd = d.get("constants", {})
    c = Constants(r0=float(cd.get("r0", 0.5)), H=float(cd.get("H", 1.0)),
                  Omega=float(cd.get("Omega", 1.0)), beta=float(cd.get("beta", 1.0)),
                  R0=float(cd.get("R0", 4.0)))
    return require_valid_constants(c)


def _parse_initial(d: dict, c: Constants) -> DiscreteMeasure:
    init = d.get("initial")
    if not isinstance(init, dict):
        raise ValidationError("scenario needs an 'initial' object")
    if "atoms" in init:
        return make_measure(init["atoms"], init["weights"], c)
    if "density" in init:
        dd = init["density"]
        spec = DensitySpec(kind=dd.get("kind", "uniform-box"),
                           box=tuple(map(tuple, dd.get("box", ((0, 1), (0, 1))))),
                           shape=tuple(dd.get("shape", (2.0, 2.0, 2.0, 2.0))))
        return sample_density(spec, int(init.get("n", 16)), c)
    raise ValidationError("'initial' must hold 'atoms'+'weights' or 'density'+'n'")


def parse_scenario(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ValidationError("scenario file must hold a JSON object")
    c = _parse_constants(raw)
    initial = _parse_initial(raw, c)
    solver = {
        "tol": float(raw.get("solver", {}).get("tol", 1e-7)),
        "max_iter": int(raw.get("solver", {}).get("max_iter", 100_000)),
        "nz": int(raw.get("solver", {}).get("Nz", 257)),
    }
    evolution = None
    if "evolution" in raw:
        ev = raw["evolution"]
        forcing = ForcingSpec.from_dict(ev.get("forcing", {"kind": "zero"}))
        L0 = ev.get("L0")
        if L0 is None:
            L0 = initial.support_bound()
            if ev.get("regime") == "A":
                L0 = max(L0, 1.0 + 1e-9)
        evolution = EvolutionConfig(regime=str(ev.get("regime", "B")),
                                    T=float(ev.get("T", 1.0)), N=int(ev.get("N", 20)),
                                    forcing=forcing, L0=float(L0),
                                    tol=solver["tol"], max_iter=solver["max_iter"],
                                    nz=solver["nz"])
        bad = check_hypotheses(evolution, c)
        if bad:
            raise ValidationError("; ".join(bad))
    return Scenario(constants=c, initial=initial, evolution=evolution, solver=solver,
                    reconstruct=raw.get("reconstruct"), oracle=raw.get("oracle"), raw=raw)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ValidationError(f"cannot read scenario {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ValidationError(f"scenario {path} is not valid JSON: {err}") from err
    return parse_scenario(raw)


def _solution_payload(measure, sol: DualSolution, c: Constants) -> dict:
    gap = duality_gap(measure, sol, c)
    payload = sol.to_dict()
    payload["I"] = gap.I_value
    payload["gap"] = gap.gap
    payload["u_branch"] = "+"
    return payload


def _write_solution(scn: Scenario, sol: DualSolution, out_dir: str) -> dict:
    payload = _solution_payload(scn.initial, sol, scn.constants)
    ser.write_json(os.path.join(out_dir, "solution.json"), payload, scn.sha)
    zeta = zeta_of_rho(sol.profile, scn.constants)
    ser.write_csv(os.path.join(out_dir, "boundary.csv"), ser.BOUNDARY_HEADER,
                  ser.boundary_rows(sol.profile, zeta), scn.sha)
    return payload


def _print_stage(stage: str, payload: dict) -> None:
    print(f"[{stage}] J={payload['J']:.9g} gap={payload['gap']:.3e} "
          f"grad_norm={payload['grad_norm']:.3e} support={payload.get('support', '-')}")


def cmd_validate(args) -> int:
    scn = load_scenario(args.scenario)
    print(f"[validate] scenario ok (sha256 {scn.sha[:12]}..., "
          f"{scn.initial.n_atoms} atoms, evolution={'yes' if scn.evolution else 'no'})")
    return EXIT_OK


def cmd_solve_dual(args) -> int:
    scn = load_scenario(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    sol = solve_dual(scn.initial, scn.constants, **scn.solver)
    payload = _write_solution(scn, sol, args.out)
    _print_stage("solve-dual", payload)
    return EXIT_OK


def _evolve(scn: Scenario, out_dir: str):
    traj = evolve(scn.initial, scn.evolution, scn.constants)
    ser.write_jsonl(os.path.join(out_dir, "trajectory.jsonl"),
                    ser.trajectory_records(traj), scn.sha)
    ser.write_csv(os.path.join(out_dir, "trajectory.csv"), ser.TRAJECTORY_HEADER,
                  ser.trajectory_rows(traj), scn.sha)
    last = traj.solutions[-1]
    print(f"[evolve] steps={traj.n_steps} J={last.J_value:.9g} "
          f"gap={traj.gaps[-1]:.3e} grad_norm={last.grad_norm:.3e} "
          f"support={traj.support_bounds[-1]:.6g}")
    return traj


def cmd_evolve(args) -> int:
    scn = load_scenario(args.scenario)
    if scn.evolution is None:
        raise ValidationError("scenario has no 'evolution' section")
    os.makedirs(args.out, exist_ok=True)
    _evolve(scn, args.out)
    return EXIT_OK


def _reconstruct(scn: Scenario, sol: DualSolution, out_dir: str, opts: dict) -> None:
    fields = reconstruct_fields(sol, scn.initial, scn.constants,
                                n_r=int(opts.get("nr", 65)), n_z=int(opts.get("nz", 65)),
                                r_max=opts.get("r_max"))
    ser.write_csv(os.path.join(out_dir, "fields.csv"), ser.FIELDS_HEADER,
                  ser.fields_rows(fields), scn.sha)
    diag = boundary_diagnostics(sol, scn.initial, scn.constants)
    ser.write_json(os.path.join(out_dir, "diagnostics.json"), {
        "z_star": diag.z_star, "lip_a": diag.lip_a,
        "c0_boundary": diag.c0_boundary, "bc_residual": diag.bc_residual,
        "z_lower_bound_ok": diag.z_lower_bound_ok, "u_branch": "+",
    }, scn.sha)
    print(f"[reconstruct] grid={fields.u.shape[1]}x{fields.u.shape[0]} "
          f"bc_residual={diag.bc_residual:.3e} z_star={diag.z_star:.6g}")


def cmd_reconstruct(args) -> int:
    scn = load_scenario(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    if args.solution:
        sol = load_solution(args.solution, scn)
    else:
        sol = solve_dual(scn.initial, scn.constants, **scn.solver)
    opts = dict(scn.reconstruct or {})
    if args.nr:
        opts["nr"] = args.nr
    if args.nz:
        opts["nz"] = args.nz
    _reconstruct(scn, sol, args.out, opts)
    return EXIT_OK


def load_solution(path: str, scn: Scenario) -> DualSolution:
    """Rebuild a DualSolution from its JSON artifact (for oracle/reconstruct runs)."""
    with open(path) as fh:
        d = json.load(fh)
    from .dualsolver import dual_state
    psi = np.asarray(d["psi"], dtype=float)
    z_nodes = np.asarray(d["z_nodes"], dtype=float)
    sol = dual_state(scn.initial, psi, scn.constants, z_nodes=z_nodes)
    if sol.grad_norm > max(10 * scn.solver["tol"], 1e-6):
        raise ValidationError(
            f"stored solution has gradient residual {sol.grad_norm:.3e}; it does not "
            "solve this scenario's measure"
        )
    return sol


def cmd_oracle(args) -> int:
    scn = load_scenario(args.scenario)
    if args.oracle_cmd != "gap":
        raise ValidationError(f"unknown oracle subcommand {args.oracle_cmd!r}")
    if args.solution:
        sol = load_solution(args.solution, scn)
    else:
        sol = solve_dual(scn.initial, scn.constants, **scn.solver)
    cert = brute_primal(scn.initial, sol, scn.constants, n_s=args.grid, n_z=args.grid)
    payload = {"I_lp": cert.I_lp, "gap_cert": cert.gap_cert, "delta": cert.delta,
               "lp_value": cert.lp_value, "grid": list(cert.grid)}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        ser.write_json(os.path.join(args.out, "oracle.json"), payload, scn.sha)
    print(f"[oracle] I_lp={cert.I_lp:.9g} gap_cert={cert.gap_cert:.3e} "
          f"delta={cert.delta:.3e}")
    return EXIT_OK


def cmd_run(args) -> int:
    scn = load_scenario(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    sol = solve_dual(scn.initial, scn.constants, **scn.solver)
    payload = _write_solution(scn, sol, args.out)
    _print_stage("solve-dual", payload)
    final_sol = sol
    if scn.evolution is not None:
        traj = _evolve(scn, args.out)
        final_sol = traj.solutions[-1]
    if scn.reconstruct is not None:
        _reconstruct(scn, final_sol, args.out, scn.reconstruct)
    if scn.oracle is not None:
        grid = int(scn.oracle.get("grid", 32))
        cert = brute_primal(scn.initial, sol, scn.constants, n_s=grid, n_z=grid)
        ser.write_json(os.path.join(args.out, "oracle.json"),
                       {"I_lp": cert.I_lp, "gap_cert": cert.gap_cert,
                        "delta": cert.delta, "grid": list(cert.grid)}, scn.sha)
        print(f"[oracle] I_lp={cert.I_lp:.9g} gap_cert={cert.gap_cert:.3e} "
              f"delta={cert.delta:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axivort",
        description="Free-boundary dual solves and delayed particle evolution "
                    "for forced axisymmetric vortex flows.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="cap internal parallelism (results are identical for any value)")

    p = sub.add_parser("solve-dual", help="solve the dual problem for the initial measure")
    common(p)
    p = sub.add_parser("evolve", help="run the delayed time-stepping scheme")
    common(p)
    p = sub.add_parser("reconstruct", help="reconstruct physical fields on a grid")
    common(p)
    p.add_argument("--solution", default=None, help="existing solution.json to reuse")
    p.add_argument("--nr", type=int, default=None)
    p.add_argument("--nz", type=int, default=None)
    p = sub.add_parser("oracle", help="brute-force verification of a solution")
    p.add_argument("oracle_cmd", choices=["gap"], help="oracle to run")
    p.add_argument("--scenario", required=True)
    p.add_argument("--solution", default=None)
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    p = sub.add_parser("validate", help="validate a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--threads", type=int, default=None)
    p = sub.add_parser("run", help="run every stage the scenario requests")
    common(p)
    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "solve-dual": cmd_solve_dual,
    "evolve": cmd_evolve,
    "reconstruct": cmd_reconstruct,
    "oracle": cmd_oracle,
    "run": cmd_run,
}


def run_scenario(path: str, out_dir: str = ".") -> int:
    """Programmatic equivalent of `axivort run --scenario path --out out_dir`."""
    return main(["run", "--scenario", path, "--out", out_dir])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = getattr(args, "threads", None)
    if threads is not None and threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as err:
        print(f"error (validation): {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as err:
        print(f"error (non-convergence): {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except InternalConsistencyError as err:
        print(f"error (internal consistency): {err}", file=sys.stderr)
        return EXIT_INCONSISTENCY


if __name__ == "__main__":
    sys.exit(main())
