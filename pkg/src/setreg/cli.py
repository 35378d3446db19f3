"""Command-line front end.

Input mode runs checks on a problem file; corpus mode runs the built-in
examples. Progress goes to stderr, stdout carries only the report path.
Exit codes: 0 success, 2 config error, 3 input error, 4 verdict mismatch.
"""

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import corpus as corpus_mod
from .linops import as_matrix, subreg_modulus, verify_chain
from .regmoduli import (DIRECTIONS, KINDS, PARAMETRIC_KINDS, NbhdConfig, TheoremConfig,
                        check_around_triad, check_at1_triad, check_at2_triad, check_parametric,
                        check_property, estimate_modulus, estimate_parametric)
from .implicit import verify_thm_main
from .setcore import FiniteMultifunction, ParametricMultifunction, jsonable, lattice
from .sumstab import check_sum_stability, verify_calm_sum
from .vecopt import VectorProblem, _load_G, check_weak_pareto, verify_penalization

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_MISMATCH = 0, 2, 3, 4
DEFAULT_REPORT = "setreg_report.json"
CORPUS_CHECKS = ("classification", "implications")
TRIADS = {"triad:around": check_around_triad, "triad:at1": check_at1_triad,
          "triad:at2": check_at2_triad}


class ConfigError(Exception):
    pass


class InputError(Exception):
    pass


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


def _floats(text, what):
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{what}: not a list of numbers: {text!r}") from exc


def build_parser():
    p = argparse.ArgumentParser(prog="setreg", description=__doc__.splitlines()[0])
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="problem JSON file")
    src.add_argument("--corpus", help="'all' or comma-separated built-in entry ids")
    p.add_argument("--check", action="append", default=[],
                   help="operation id; repeat or comma-separate for several")
    p.add_argument("--point", help="base point coordinates, x then p (if any) then y")
    p.add_argument("--L", type=float, default=1.0, help="constant or rate to check")
    p.add_argument("--resolution", help="grid step(s), comma-separated")
    p.add_argument("--window", type=float, help="neighborhood radius for U, V, W and eps")
    p.add_argument("--tolerance", type=float, help="absolute slack in the inequalities")
    p.add_argument("--N", type=int, default=corpus_mod.DEFAULT_N, help="sequence truncation")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized instances")
    p.add_argument("--report", default=DEFAULT_REPORT, help="report output path")
    return p


def _nbhd(args):
    kw = {}
    if args.window is not None:
        if not args.window > 0:
            raise ConfigError("--window must be positive")
        kw.update(r_U=args.window, r_V=args.window, r_W=args.window, eps=args.window)
    if args.tolerance is not None:
        if args.tolerance < 0:
            raise ConfigError("--tolerance must be nonnegative")
        kw["tol"] = args.tolerance
    return NbhdConfig(**kw)


def _checks(args):
    out = []
    for c in args.check:
        out.extend(s.strip() for s in c.split(",") if s.strip())
    return out


def _config_echo(args):
    return {"input": args.input, "corpus": args.corpus, "checks": _checks(args),
            "point": args.point, "L": args.L, "resolution": args.resolution,
            "window": args.window, "tolerance": args.tolerance, "N": args.N, "seed": args.seed}


# Input mode.

def load_problem(path):
    """Read and validate a problem file. Recognized keys: F, G (relations,
    or {"linear": ...} specs), H (parametric relation), A (matrix) and
    problem (vector optimization problem)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("problem file must hold a JSON object")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"schema_version must be {SCHEMA_VERSION}")
    known = {"schema_version", "F", "G", "H", "A", "problem"}
    extra = sorted(set(data) - known)
    if extra:
        raise InputError(f"unknown keys: {extra}")
    if not set(data) - {"schema_version"}:
        raise InputError("problem file defines nothing to check")
    out = {}
    try:
        for key in ("F", "G"):
            if key in data:
                out[key] = _load_G(data[key])
        if "H" in data:
            out["H"] = ParametricMultifunction.from_dict(data["H"])
        if "A" in data:
            out["A"] = as_matrix(data["A"])
        if "problem" in data:
            spec = data["problem"]
            out["problem"] = VectorProblem.from_dict(spec)
            out["problem_spec"] = spec
    except KeyError as exc:
        raise InputError(f"schema violation: missing key {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"schema violation: {exc}") from exc
    return out


def _split(coords, dims, what):
    if len(coords) != sum(dims):
        raise ConfigError(f"--point needs {sum(dims)} coordinates for {what}, got {len(coords)}")
    parts, k = [], 0
    for d in dims:
        parts.append(coords[k:k + d])
        k += d
    return parts


def _need(prob, key, check):
    if key not in prob:
        raise ConfigError(f"check {check!r} needs {key!r} in the problem file")
    return prob[key]


PARAM_CHECKS = tuple(f"{pre}{k}_{d}" for pre in ("", "estimate:") for k in PARAMETRIC_KINDS
                     for d in DIRECTIONS)
OTHER_CHECKS = ("main_i", "main_ii", "sum_stable", "clm_sum", "chain", "subreg_modulus",
                "penalization", "weak_pareto")


def known_check(check):
    return (check in KINDS or check in TRIADS or check in PARAM_CHECKS or check in OTHER_CHECKS
            or (check.startswith("estimate:") and check.split(":", 1)[1] in KINDS))


def run_check(check, prob, args, nb):
    coords = _floats(args.point, "--point") if args.point else []
    L = args.L
    if check in PARAM_CHECKS:
        H = _need(prob, "H", check)
        x, p, y = _split(coords, (H.dim_x, H.dim_p, H.dim_y), "(x, p, y)")
        name = check.split(":", 1)[-1]
        d = next(d for d in DIRECTIONS if name.endswith(d))
        kind = name[:-len(d) - 1]
        if check.startswith("estimate:"):
            return estimate_parametric(H, d, kind, x, p, y, nb)
        return check_parametric(H, d, kind, x, p, y, L, nb)
    if check in KINDS or check.startswith("estimate:") or check in TRIADS:
        F = _need(prob, "F", check)
        x, y = _split(coords, (F.dim_x, F.dim_y), "(x, y)")
        if check in TRIADS:
            return TRIADS[check](F, x, y, L, nb)
        if check in KINDS:
            return check_property(F, x, y, check, L, nb)
        return estimate_modulus(F, x, y, check.split(":", 1)[1], nb)
    if check in ("main_i", "main_ii"):
        H = _need(prob, "H", check)
        # a trailing y (the zero of H) is accepted and ignored
        if len(coords) == H.dim_x + H.dim_p + H.dim_y:
            coords = coords[:H.dim_x + H.dim_p]
        x, p = _split(coords, (H.dim_x, H.dim_p), "(x, p)")
        return verify_thm_main(H, x, p, L, check.split("_")[1], TheoremConfig(nbhd=nb))
    if check in ("sum_stable", "clm_sum"):
        F, G = _need(prob, "F", check), _need(prob, "G", check)
        x, y, z = _split(coords, (F.dim_x, F.dim_y, G.dim_y), "(x, y, z)")
        if check == "sum_stable":
            return check_sum_stability(F, G, x, y, z)
        return verify_calm_sum(F, G, x, y, z, TheoremConfig(nbhd=nb))
    if check == "chain":
        h = _floats(args.resolution, "--resolution")[-1] if args.resolution else 0.05
        return verify_chain(_need(prob, "A", check), h=h)
    if check == "subreg_modulus":
        return {"subreg_modulus": subreg_modulus(_need(prob, "A", check))}
    if check in ("penalization", "weak_pareto"):
        pr = _need(prob, "problem", check)
        spec = prob["problem_spec"]
        x, q = _split(coords, (pr.G.dim_x, pr.Q.dimension), "(x, q)")
        e = spec.get("e")
        if check == "weak_pareto":
            mask = pr.feasible_mask()
            A = np.array([pr.objective(u) for u in pr.G.domain[mask]])
            return check_weak_pareto(A, pr.objective(x), pr.K, e)
        if "q_grid" not in spec:
            raise ConfigError("penalization needs problem.q_grid = {lo, hi, h}")
        qg = spec["q_grid"]
        return verify_penalization(pr, x, q, lattice(qg["lo"], qg["hi"], qg["h"]), nb, e)
    raise ConfigError(f"unknown check {check!r}")


def run_input(args):
    checks = _checks(args)
    if not checks:
        raise ConfigError("input mode needs at least one --check")
    unknown = [c for c in checks if not known_check(c)]
    if unknown:
        raise ConfigError(f"unknown checks: {unknown}")
    nb = _nbhd(args)
    prob = load_problem(args.input)
    results = []
    for check in checks:
        _log(f"check {check}")
        try:
            rep = run_check(check, prob, args, nb)
        except ConfigError:
            raise
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"check {check!r}: {exc}") from exc
        results.append({"check": check, "report": rep})
    return {"mode": "input", "results": results}, EXIT_OK


# Corpus mode.

def run_corpus_mode(args):
    checks = _checks(args) or ["classification"]
    bad = [c for c in checks if c not in CORPUS_CHECKS]
    if bad:
        raise ConfigError(f"corpus mode accepts checks {CORPUS_CHECKS}, got {bad}")
    ids = None if args.corpus == "all" else [s.strip() for s in args.corpus.split(",")]
    try:
        entries = corpus_mod.get_entries(ids)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from exc
    res = _floats(args.resolution, "--resolution") if args.resolution else \
        list(corpus_mod.RESOLUTIONS)
    if not res or min(res) <= 0:
        raise ConfigError("--resolution must be positive")
    if args.N <= corpus_mod.FAIL_CAP:
        raise ConfigError(f"--N must exceed {corpus_mod.FAIL_CAP}")
    body = {"mode": "corpus", "entries": [e.to_dict() for e in entries]}
    ok = True
    if "classification" in checks:
        mat = corpus_mod.run_corpus(res, args.N, [e.id for e in entries], progress=_log)
        body["classification"] = mat.to_dict()
        body["table"] = mat.to_table().splitlines()
        ok = ok and mat.passed
    if "implications" in checks:
        h = min(res)
        _log(f"implications h={h:g}")
        rows = corpus_mod.theorem_suite(h, args.N, seed=args.seed)
        items = []
        for source, label, rep, tight in rows:
            items.append({"source": source, "label": label, "tight": tight,
                          "consistent": rep.consistent, "report": rep})
        body["implications"] = {"resolution": h, "seed": args.seed, "reports": items,
                                "all_consistent": all(r.consistent for _, _, r, _ in rows)}
        ok = ok and body["implications"]["all_consistent"]
    body["passed"] = ok
    return body, EXIT_OK if ok else EXIT_MISMATCH


def write_report(path, payload):
    """Write the whole report at once; no partial file on failure."""
    text = json.dumps(jsonable(payload), sort_keys=True, indent=1) + "\n"
    folder = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(folder, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=folder, prefix=".setreg-", suffix=".json")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except OSError as exc:
        raise ConfigError(f"cannot write report {path}: {exc}") from exc


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.input is None and args.corpus is None:
            raise ConfigError("one of --input or --corpus is required")
        np.random.seed(args.seed)
        body, code = run_input(args) if args.input is not None else run_corpus_mode(args)
        payload = {"schema_version": SCHEMA_VERSION, "config": _config_echo(args), **body}
        write_report(args.report, payload)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    except InputError as exc:
        _log(f"input error: {exc}")
        return EXIT_INPUT
    print(args.report)
    return code


if __name__ == "__main__":
    sys.exit(main())
