"""Deterministic JSON/CSV emission with atomic writes and scenario hashing."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np

from . import __version__ as _version


def canonical_json(obj) -> str:
    """Stable textual form used both for hashing and for output files."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def scenario_hash(scenario_dict: dict) -> str:
    return hashlib.sha256(canonical_json(scenario_dict).encode()).hexdigest()


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file and rename, so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta(scenario_sha: str) -> dict:
    return {"scenario_sha256": scenario_sha, "version": _version}


def write_json(path: str, payload: dict, scenario_sha: str) -> None:
    body = dict(payload)
    body["meta"] = _meta(scenario_sha)
    atomic_write_text(path, json.dumps(body, sort_keys=True, indent=1) + "\n")


def write_csv(path: str, header: list[str], rows, scenario_sha: str) -> None:
    lines = [f"# scenario_sha256={scenario_sha} version={_version}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_jsonl(path: str, records, scenario_sha: str) -> None:
    lines = [canonical_json({"meta": _meta(scenario_sha)})]
    lines.extend(canonical_json(rec) for rec in records)
    atomic_write_text(path, "\n".join(lines) + "\n")


def trajectory_records(traj) -> list[dict]:
    out = []
    for k, t in enumerate(traj.times):
        sol = traj.solutions[k]
        out.append({
            "step": k,
            "t": float(t),
            "atoms": traj.measures[k].atoms.tolist(),
            "weights": traj.measures[k].weights.tolist(),
            "psi": sol.psi.tolist(),
            "velocities": traj.velocities[k].v.tolist(),
            "gap": float(traj.gaps[k]),
            "grad_norm": float(traj.grad_norms[k]),
            "support_bound": float(traj.support_bounds[k]),
            "w1_increment": float(traj.w1_increments[k]),
        })
    return out


def trajectory_rows(traj):
    """Flat per-atom rows: step, atom, coordinates, weight, velocity, diagnostics."""
    for k, t in enumerate(traj.times):
        meas = traj.measures[k]
        vel = traj.velocities[k].v
        for i in range(meas.n_atoms):
            yield (k, i, meas.atoms[i, 0], meas.atoms[i, 1], meas.weights[i],
                   vel[i, 0], vel[i, 1], traj.gaps[k], traj.w1_increments[k],
                   traj.support_bounds[k])


TRAJECTORY_HEADER = ["step", "atom", "Upsilon", "Z", "w", "V1", "V2",
                     "gap", "W1_increment", "L"]


def fields_rows(fields):
    for iz, z in enumerate(fields.z):
        for ir, r in enumerate(fields.r):
            inside = bool(fields.inside[iz, ir])
            yield (r, z, int(inside),
                   fields.u[iz, ir] if inside else "",
                   fields.theta[iz, ir] if inside else "",
                   fields.phi[iz, ir] if inside else "")


FIELDS_HEADER = ["r", "z", "inside", "u", "theta", "phi"]


def boundary_rows(profile, zeta):
    for z, rho, zt in zip(profile.z_nodes, profile.values, zeta):
        yield (z, rho, zt)


BOUNDARY_HEADER = ["z", "rho", "zeta"]
