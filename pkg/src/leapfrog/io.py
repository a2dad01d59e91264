"""JSON formats for instances, verdicts, certificates and plans.

Integers are written as decimal strings (they outgrow doubles quickly) and
scalars as expression strings such as ``"1/2 + sqrt(3)"``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import IO, Iterable

from . import goodmat as gm
from .kinematics import Configuration, Move, Plan
from .lattice import DensityVerdict, Effort
from .planner import PlanCertificate
from .scalar import Scalar, as_scalar

PLAN_FORMAT = "leapfrog-plan/1"


class FormatError(ValueError):
    pass


def _expr(x) -> str:
    if isinstance(x, Scalar):
        return x.to_expr()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return as_scalar(x).to_expr()


def _ints(v) -> list:
    return [str(x) for x in v]


def _int_matrix(m) -> list:
    return [_ints(r) for r in m]


def _parse_int(s) -> int:
    if isinstance(s, bool):
        raise FormatError("booleans are not integers")
    if isinstance(s, int):
        return s
    try:
        return int(s)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"expected an integer, got {s!r}") from exc


def _parse_scalar(s) -> Scalar:
    if isinstance(s, float):
        raise FormatError("write reals as strings (\"0.1\", \"sqrt(2)\"), not JSON floats")
    try:
        return as_scalar(s)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def _parse_points(raw) -> list:
    pts = []
    for p in raw:
        if isinstance(p, list):
            pts.append([_parse_scalar(x) for x in p])
        else:
            pts.append([_parse_scalar(p)])
    return pts


# --------------------------------------------------------------------------
# instances


EFFORT_KEYS = {"radius", "max_radius", "precision", "max_nodes", "max_retries", "time_limit"}


@dataclass
class Instance:
    initial: Configuration
    targets: Configuration | None
    eps: Scalar | None
    effort: Effort
    name: str = ""

    @property
    def d(self) -> int:
        return self.initial.d

    @property
    def n(self) -> int:
        return self.initial.n

    @property
    def P(self) -> list:
        return self.initial.difference_matrix()

    @property
    def p0(self) -> list:
        return list(self.initial.positions[0])


def instance_from_dict(data: dict, name: str = "") -> Instance:
    if "positions" not in data:
        raise FormatError("instance needs 'positions'")
    pts = _parse_points(data["positions"])
    initial = Configuration(pts)
    if "d" in data and _parse_int(data["d"]) != initial.d:
        raise FormatError(f"d={data['d']} but positions have dimension {initial.d}")
    if "n" in data and _parse_int(data["n"]) != initial.n:
        raise FormatError(f"n={data['n']} but there are {initial.n + 1} positions")
    targets = None
    if data.get("targets") is not None:
        targets = Configuration(_parse_points(data["targets"]))
        if targets.n != initial.n or targets.d != initial.d:
            raise FormatError("targets do not match the positions' shape")
    eps = _parse_scalar(data["eps"]) if data.get("eps") is not None else None
    if eps is not None and eps.sign() <= 0:
        raise FormatError("eps must be positive")
    raw_effort = dict(data.get("effort") or {})
    unknown = set(raw_effort) - EFFORT_KEYS
    if unknown:
        raise FormatError(f"unknown effort settings: {sorted(unknown)}")
    kwargs = {k: (float(v) if k == "time_limit" else _parse_int(v)) for k, v in raw_effort.items()}
    if "precision" in data:
        kwargs["precision"] = _parse_int(data["precision"])
    try:
        effort = Effort(**kwargs)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return Instance(initial, targets, eps, effort, name or data.get("name", ""))


def instance_to_dict(inst: Instance) -> dict:
    out = {
        "d": inst.d,
        "n": inst.n,
        "positions": [[_expr(x) for x in p] for p in inst.initial.positions],
    }
    if inst.targets is not None:
        out["targets"] = [[_expr(x) for x in p] for p in inst.targets.positions]
    if inst.eps is not None:
        out["eps"] = _expr(inst.eps)
    e = inst.effort
    out["effort"] = {"radius": e.radius, "max_radius": str(e.max_radius), "max_nodes": e.max_nodes,
                     "max_retries": e.max_retries}
    out["precision"] = e.precision
    return out


def load_instance(path: str) -> Instance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    return instance_from_dict(data, name=path)


def with_overrides(inst: Instance, eps=None, precision=None, radius=None, steps=None) -> Instance:
    effort = inst.effort
    if precision is not None:
        effort = replace(effort, precision=precision)
    if radius is not None:
        effort = replace(effort, max_radius=radius)
    if steps is not None:
        effort = replace(effort, max_retries=steps)
    return replace(inst, effort=effort, eps=as_scalar(eps) if eps is not None else inst.eps)


# --------------------------------------------------------------------------
# verdicts and certificates


def verdict_to_dict(v: DensityVerdict) -> dict:
    out = {"verdict": {"dense": "Dense", "not_dense": "NotDense", "unknown": "Unknown"}[v.kind],
           "reason": v.reason}
    if v.proof:
        out["proof"] = v.proof
    if v.w is not None:
        out["w"] = [_expr(x) for x in v.w]
        out["wTP"] = [_expr(x) for x in v.wTP]
    if v.evidence:
        out["evidence"] = [{"target": [_expr(x) for x in ev["target"]], "v": _ints(ev["v"]),
                            "distance": _expr(ev["distance"]),
                            "distance_approx": float(ev["distance"]),
                            "tolerance": _expr(ev["tolerance"])} for ev in v.evidence]
    if v.effort:
        out["effort"] = {k: str(x) for k, x in v.effort.items()}
    return out


def certificate_to_dict(c: PlanCertificate) -> dict:
    b = c.budget
    return {
        "P": [[_expr(x) for x in row] for row in c.P],
        "p0": [_expr(x) for x in c.p0],
        "targets": [[_expr(x) for x in q] for q in c.targets],
        "eps": _expr(c.eps),
        "A0": _int_matrix(c.A0),
        "a0_runs": [[s.row, s.col, s.value, str(k)] for s, k in c.a0_runs],
        "w0": _ints(c.w0),
        "w_prime": _ints(c.w_prime),
        "predicted": [[_expr(x) for x in p] for p in c.predicted],
        "budget": {
            "translation": _expr(b["translation"]),
            "translation_achieved": _expr(b["translation_achieved"]),
            "matrix_entry_tol": _expr(b["matrix_entry_tol"]),
            "matrix_achieved": _expr(b["matrix_achieved"]),
            "recursion_eps": [_expr(x) for x in b["recursion_eps"]],
        },
    }


def certificate_from_dict(data: dict) -> PlanCertificate:
    try:
        P = [[_parse_scalar(x) for x in row] for row in data["P"]]
        n = len(P[0])
        runs = [(gm.Step(n, int(r), int(c), int(v)), _parse_int(k)) for r, c, v, k in data["a0_runs"]]
        b = data.get("budget", {})
        return PlanCertificate(
            P=P,
            p0=[_parse_scalar(x) for x in data["p0"]],
            targets=[[_parse_scalar(x) for x in q] for q in data["targets"]],
            eps=_parse_scalar(data["eps"]).as_fraction(),
            A0=[[_parse_int(x) for x in row] for row in data["A0"]],
            a0_runs=runs,
            w0=[_parse_int(x) for x in data["w0"]],
            w_prime=[_parse_int(x) for x in data["w_prime"]],
            predicted=[[_parse_scalar(x) for x in p] for p in data["predicted"]],
            budget={k: (v if isinstance(v, list) else _parse_scalar(v)) for k, v in b.items()},
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"malformed certificate: {exc}") from exc


# --------------------------------------------------------------------------
# plans


def write_plan(plan: Plan, fh: IO[str], chunk: int = 4096) -> int:
    """Stream a plan as JSON; the move array is written last, in chunks."""
    cert = plan.certificate
    header = {
        "format": PLAN_FORMAT,
        "n": plan.n,
        "d": plan.d,
        "order": plan.order,
        "initial": [[_expr(x) for x in p] for p in plan.initial.positions],
        "counts": plan.counts(),
        "phases": plan.phase_summary(),
    }
    if cert is not None:
        header["eps"] = _expr(cert.eps)
        header["targets"] = [[_expr(x) for x in q] for q in cert.targets]
        header["certificate"] = certificate_to_dict(cert)
    text = json.dumps(header, indent=1)
    fh.write(text[:-2] + ',\n "moves": [')
    buf: list = []
    count = 0
    for m in plan.moves():
        buf.append('{"jumper":%d,"over":%d}' % (m.jumper, m.over))
        count += 1
        if len(buf) >= chunk:
            fh.write(("," if count > len(buf) else "") + ",".join(buf))
            buf = []
    if buf:
        fh.write(("," if count > len(buf) else "") + ",".join(buf))
    fh.write("]\n}\n")
    return count


@dataclass
class PlanFile:
    header: dict
    initial: Configuration
    targets: Configuration | None
    eps: Scalar | None
    moves: list
    certificate: PlanCertificate | None


def read_plan(fh: IO[str]) -> PlanFile:
    try:
        data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"plan is not valid JSON: {exc}") from exc
    if data.get("format") != PLAN_FORMAT:
        raise FormatError(f"not a plan file (format {data.get('format')!r})")
    initial = Configuration(_parse_points(data["initial"]))
    targets = Configuration(_parse_points(data["targets"])) if data.get("targets") else None
    eps = _parse_scalar(data["eps"]) if data.get("eps") is not None else None
    moves = []
    for m in data.get("moves", []):
        try:
            moves.append(Move(_parse_int(m["jumper"]), _parse_int(m["over"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad move {m!r}: {exc}") from exc
    cert = certificate_from_dict(data["certificate"]) if data.get("certificate") else None
    return PlanFile(data, initial, targets, eps, moves, cert)


def moves_to_list(moves: Iterable[Move]) -> list:
    return [{"jumper": m.jumper, "over": m.over} for m in moves]
