"""Batch front-end: `qms <command> --scenario <file> --out <dir>`.

Commands: check-kernel, solve, znorm, criteria, capacity, dirichlet1d,
battery.  Each run loads one scenario JSON, executes the pipeline, and
writes a JSON report (plus CSV witness tables) into the output
directory.  Exit codes: 0 success, 2 certified-failure verdicts
(quasi-metric violation, certified unsolvability), 1 input errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .capacity import capacity, capacity_condition_constant
from .criteria import verdict
from .kernel import KernelModel, make_kernel
from .solver import picard_solve, znorm, zprime_norm
from .space import AtomicMeasure, QuasiMetricViolation, estimate_kappa, load_space_file
from .dirichlet import solve_bvp_1d, theorem_7_7_battery, uniform_problem


class ScenarioError(ValueError):
    pass


def _load_scenario(path):
    try:
        with open(path) as fh:
            text = fh.read()
        doc = json.loads(text)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}")
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON (line {exc.lineno}, "
                            f"column {exc.colno}): {exc.msg}")
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    digest = hashlib.sha256(text.encode()).hexdigest()
    return doc, digest


def _build_kernel(doc):
    spec = doc.get("kernel")
    if spec is None:
        raise ScenarioError("scenario needs a 'kernel' object")
    family = spec.get("family")
    measures = {}
    if family == "custom":
        if "space" not in doc:
            raise ScenarioError("custom kernels need a top-level 'space' object")
        space, measures = load_space_file(doc["space"])
        kern = KernelModel(space, "custom")
    else:
        params = {k: v for k, v in spec.items() if k != "family"}
        try:
            kern = make_kernel(family, **params)
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"bad kernel spec: {exc}")
    for name, weights in doc.get("measures", {}).items():
        measures[name] = AtomicMeasure(kern.space, np.asarray(weights, float))
    return kern, measures


def _measure(measures, doc, key, scenario_field):
    name = doc.get(scenario_field)
    if name is None:
        raise ScenarioError(f"scenario needs '{scenario_field}'")
    if name not in measures:
        raise ScenarioError(f"measure {name!r} ({key}) is not defined")
    return measures[name]


def _q(doc):
    if "q" in doc:
        q = float(doc["q"])
    elif "p" in doc:
        p = float(doc["p"])
        if p <= 1:
            raise ScenarioError("p must exceed 1")
        q = p / (p - 1.0)
    else:
        raise ScenarioError("scenario needs 'q' or 'p'")
    if q <= 1:
        raise ScenarioError("q must exceed 1")
    return q


def _data_f(kern, measures, doc):
    """Right-hand side f: explicit vector or a scaled potential of a
    named measure."""
    if "f" in doc:
        f = np.asarray(doc["f"], float)
        if f.shape != (kern.space.n,):
            raise ScenarioError("'f' length must match the point count")
        return f
    if "omega" in doc:
        om = _measure(measures, doc, "omega", "omega")
        return float(doc.get("epsilon", 1.0)) * kern.potential(om.weights)
    raise ScenarioError("scenario needs 'f' or 'omega' (+ optional 'epsilon')")


def _jsonable(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj.ravel()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_report(out_dir, name, payload, digest):
    os.makedirs(out_dir, exist_ok=True)
    payload = dict(payload)
    payload["scenarioHash"] = digest
    payload["version"] = __version__
    path = os.path.join(out_dir, name + ".json")
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(out_dir, name, header, rows):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name + ".csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _cmd_check_kernel(doc, digest, out_dir, seed):
    try:
        kern, _ = _build_kernel(doc)
    except QuasiMetricViolation as exc:
        _write_report(out_dir, "check-kernel", {
            "ok": False, "kappaHat": exc.kappa_hat, "declared": exc.declared,
            "witness": list(exc.triple)}, digest)
        return 2
    kap, exact, witness = estimate_kappa(kern.space)
    _write_report(out_dir, "check-kernel", {
        "ok": True, "kappaHat": kap, "exact": exact,
        "witness": list(witness), "n": kern.space.n,
        "family": kern.family}, digest)
    return 0


def _cmd_solve(doc, digest, out_dir, seed):
    kern, measures = _build_kernel(doc)
    q = _q(doc)
    sig = _measure(measures, doc, "sigma", "sigma")
    f = _data_f(kern, measures, doc)
    rep = picard_solve(kern, sig, q, f,
                       tol=float(doc.get("tol", 1e-10)),
                       max_iter=int(doc.get("max_iter", 10000)))
    payload = {"status": rep.status, "iterations": rep.iterations,
               "residual": rep.residual, "certificates": rep.certificates}
    if rep.u is not None:
        payload["u"] = rep.u
        _write_csv(out_dir, "solution",
                   ["point", "f", "u"],
                   [[str(kern.space.ids[i]), repr(float(f[i])), repr(float(rep.u[i]))]
                    for i in range(len(f))])
    _write_report(out_dir, "solve", payload, digest)
    return 0


def _cmd_znorm(doc, digest, out_dir, seed):
    kern, measures = _build_kernel(doc)
    q = _q(doc)
    sig = _measure(measures, doc, "sigma", "sigma")
    f = _data_f(kern, measures, doc)
    br = znorm(kern, sig, q, f, tol=float(doc.get("tol", 1e-3)))
    zp = None
    if "g" in doc:
        zp = zprime_norm(kern, sig, q, np.asarray(doc["g"], float))
    payload = {"lower": br.lower, "upper": br.upper, "method": br.method,
               "localNorm": br.local, "iteratedLimit": br.iterated}
    if zp is not None:
        payload["zprime"] = {
            "rawInfimum": zp.raw, "scaled": zp.scaled,
            "stationarity": zp.stationarity, "converged": zp.converged,
            "note": ("constant placement between the raw infimum and the "
                     "dual norm is an open question; both scalings reported")}
    _write_report(out_dir, "znorm", payload, digest)
    return 0


def _cmd_criteria(doc, digest, out_dir, seed):
    kern, measures = _build_kernel(doc)
    q = _q(doc)
    sig = _measure(measures, doc, "sigma", "sigma")
    omg = _measure(measures, doc, "omega", "omega")
    rep = verdict(kern, sig, q, omg)
    payload = {"pointwiseC": rep.pointwise_C, "infinitesimalC": rep.infinitesimal_C,
               "testingC": rep.testing_C, "weightedC": rep.weighted_C,
               "weightedExact": rep.weighted_exact, "structural": rep.structural,
               "verdict": rep.verdict, "threshold": rep.threshold,
               "details": rep.details}
    _write_report(out_dir, "criteria", payload, digest)
    _write_csv(out_dir, "criteria-witness", ["condition", "value"],
               [["pointwise", repr(rep.pointwise_C)],
                ["infinitesimal", repr(rep.infinitesimal_C)],
                ["testing", repr(rep.testing_C)],
                ["weighted", repr(rep.weighted_C)]]
               + [[f"structural:{k}", repr(v)] for k, v in rep.structural.items()])
    return 2 if rep.verdict == "unsolvable-certified" else 0


def _cmd_capacity(doc, digest, out_dir, seed):
    kern, measures = _build_kernel(doc)
    p = float(doc.get("p", 2.0))
    sig = _measure(measures, doc, "sigma", "sigma")
    if "E" in doc:
        E = [kern.space.index(e) for e in doc["E"]]
        weight = doc.get("weight")
        res = capacity(kern, sig, p, E,
                       weight=None if weight is None else np.asarray(weight, float))
        payload = {"value": res.value, "dualBound": res.dual_bound,
                   "kktResidual": res.kkt_residual, "status": res.status,
                   "gStar": {str(kern.space.ids[i]): float(res.g_star[i])
                             for i in np.flatnonzero(res.g_star > 1e-12)}}
        _write_report(out_dir, "capacity", payload, digest)
        _write_csv(out_dir, "g-star", ["point", "g"],
                   [[str(kern.space.ids[i]), repr(float(v))]
                    for i, v in enumerate(res.g_star)])
    elif "omega" in doc:
        omg = _measure(measures, doc, "omega", "omega")
        best, witness = capacity_condition_constant(
            kern, sig, p, omg, family=doc.get("family", "balls+atoms"), seed=seed)
        _write_report(out_dir, "capacity", {
            "conditionConstant": best, "witnessSet": witness,
            "family": doc.get("family", "balls+atoms")}, digest)
    else:
        raise ScenarioError("capacity scenario needs 'E' or 'omega'")
    return 0


def _make_density(spec):
    if spec is None:
        return None
    if isinstance(spec, (int, float)):
        return lambda x, c=float(spec): c * np.ones_like(x)
    if isinstance(spec, dict) and "poly" in spec:
        coef = [float(c) for c in spec["poly"]]
        return lambda x: np.polyval(coef, x)
    raise ScenarioError("density spec must be a constant or {'poly': [...]} ")


def _cmd_dirichlet1d(doc, digest, out_dir, seed):
    prob = uniform_problem(
        n_cells=int(doc.get("n_cells", 512)),
        sigma_density=_make_density(doc.get("sigma_density")),
        omega_density=_make_density(doc.get("omega_density")),
        q=float(doc.get("q", 2.0)),
        epsilon=float(doc.get("epsilon", 1.0)))
    rep = solve_bvp_1d(prob)
    payload = {"status": rep.solve.status, "fdResidual": rep.fd_residual,
               "transformGap": rep.transform_gap, "richardson": rep.richardson,
               "iterations": rep.solve.iterations}
    if rep.u is not None:
        _write_csv(out_dir, "bvp-solution", ["x", "u"],
                   [[repr(float(x)), repr(float(u))]
                    for x, u in zip(prob.grid, rep.u)])
    if doc.get("battery"):
        payload["battery"] = theorem_7_7_battery(prob)
    _write_report(out_dir, "dirichlet1d", payload, digest)
    return 0


def _cmd_battery(doc, digest, out_dir, seed):
    code = _cmd_criteria(doc, digest, out_dir, seed)
    kern, measures = _build_kernel(doc)
    p = _q(doc) / (_q(doc) - 1.0)
    sig = _measure(measures, doc, "sigma", "sigma")
    omg = _measure(measures, doc, "omega", "omega")
    best, witness = capacity_condition_constant(kern, sig, p, omg, seed=seed)
    _write_report(out_dir, "battery-capacity", {
        "conditionConstant": best, "witnessSet": witness}, digest)
    return code


_COMMANDS = {
    "check-kernel": _cmd_check_kernel,
    "solve": _cmd_solve,
    "znorm": _cmd_znorm,
    "criteria": _cmd_criteria,
    "capacity": _cmd_capacity,
    "dirichlet1d": _cmd_dirichlet1d,
    "battery": _cmd_battery,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qms",
        description="superlinear integral equations on atomic measures")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--scenario", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("QMS_THREADS", "0")))
    args = parser.parse_args(argv)
    if args.threads > 0:
        os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    try:
        doc, digest = _load_scenario(args.scenario)
        return _COMMANDS[args.command](doc, digest, args.out, args.seed)
    except (ScenarioError, QuasiMetricViolation) as exc:
        if isinstance(exc, QuasiMetricViolation):
            print(f"qms: quasi-metric violation: {exc}", file=sys.stderr)
            return 2
        print(f"qms: {exc}", file=sys.stderr)
        return 1
    except (KeyError, ValueError) as exc:
        print(f"qms: invalid scenario: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
