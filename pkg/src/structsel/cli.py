"""Command-line entry point: ``structsel <command> ...``.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from . import fixtures
from .dictionary import derive_algorithm1, derive_algorithm2, witness
from .errors import StructselError
from .grouping import GroupingStructure, synthesize_from_rules, verify_congruence
from .harness import CVConfig, PathConfig, SyntheticSpec, cross_validate, generate_synthetic
from .model.design import Design
from .model.logl import FitConfig, fit_path
from .rules import parse_ruleset
from .varsets import DEFAULT_CAP, VarRegistry

OK, FAILED, USAGE = 0, 1, 2


def _registry(args) -> VarRegistry:
    if getattr(args, "registry", None):
        return VarRegistry.from_text(Path(args.registry).read_text())
    return fixtures.study_registry()


def _ruleset(args, reg):
    if getattr(args, "rules", None):
        return parse_ruleset(Path(args.rules).read_text(), reg)
    return fixtures.study_rules(reg)


def _groups(args, reg) -> GroupingStructure:
    if getattr(args, "groups", None):
        return GroupingStructure.from_json(reg, Path(args.groups).read_text())
    return fixtures.study_groups(reg)


def _config(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        cfg = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("seed", 0)
    return cfg


def _write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _timed(fn, *a, **kw):
    t = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t


def cmd_dict(args) -> int:
    reg = _registry(args)
    rs = _ruleset(args, reg)
    results = {}
    if args.algo in ("setops", "both"):
        results["setops"] = _timed(derive_algorithm1, rs, args.cap)
    if args.algo in ("exhaustive", "both"):
        results["exhaustive"] = _timed(derive_algorithm2, rs, args.cap, workers=args.threads)
    for name, (d, dt) in results.items():
        print(f"{name}: {len(d)} members in {dt:.3f} s")
    status = OK
    if len(results) == 2:
        w = witness(results["setops"][0], results["exhaustive"][0])
        if w is None:
            print("algorithms agree")
        else:
            side = "setops" if w in results["setops"][0] else "exhaustive"
            print(f"algorithms disagree; witness {w!r} only in {side}")
            status = FAILED
    if args.out:
        d = next(iter(results.values()))[0]
        if args.out.endswith(".ndjson"):
            Path(args.out).write_text(d.to_ndjson())
        else:
            Path(args.out).write_bytes(d.to_bytes())
    return status


def cmd_groups(args) -> int:
    reg = _registry(args)
    rs = _ruleset(args, reg)
    if args.action == "synth":
        g = synthesize_from_rules(rs)
        text = g.to_json()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return OK
    g = _groups(args, reg)
    target = rs if args.literal else rs.none_or_all()
    d = derive_algorithm2(target, args.cap, workers=args.threads)
    res = verify_congruence(g, d, args.cap)
    if res:
        print(f"congruent: {len(g)} groups, {len(d)} supports")
        return OK
    where = "reachable by the groups only" if res.side == "groups" else "in the rule dictionary only"
    print(f"not congruent; witness {res.witness!r} is {where}")
    return FAILED


def _design(args, reg, cfg) -> Design:
    return Design.from_csv(
        args.data, reg, cfg.get("outcome", "y"), cfg.get("outcome_kind", "binary")
    )


def _path_config(cfg) -> PathConfig:
    return PathConfig(
        kind=cfg.get("penalty", "L2"),
        gamma=cfg.get("gamma"),
        n_lambda=int(cfg.get("n_lambda", 20)),
        lambda_min_ratio=float(cfg.get("lambda_min_ratio", 0.01)),
        fit=FitConfig(float(cfg.get("tol", 1e-8)), int(cfg.get("max_iter", 10_000))),
    )


def cmd_fit(args) -> int:
    reg = _registry(args)
    cfg = _config(args)
    design = _design(args, reg, cfg)
    groups = _groups(args, reg)
    pc = _path_config(cfg)
    fits = fit_path(design, groups, pc.kind, pc.gamma, pc.n_lambda, pc.lambda_min_ratio,
                    config=pc.fit)
    if args.path_out:
        with open(args.path_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda_index", "lambda", "variable", "beta", "beta_std", "selected"])
            for i, f in enumerate(fits):
                for j, name in enumerate(reg.names):
                    w.writerow([i, repr(f.lam), name, repr(float(f.beta[j])),
                                repr(float(f.beta_std[j])), int(name in f.support)])
    summary = {
        "seed": cfg["seed"],
        "penalty": pc.kind,
        "gamma": fits[0].penalty.gamma,
        "lambdas": [f.lam for f in fits],
        "supports": [list(f.support) for f in fits],
        "selected_groups": [[groups.names[i] for i in f.selected_groups] for f in fits],
        "objectives": [f.objective for f in fits],
        "iterations": [f.iterations for f in fits],
        "converged": [f.converged for f in fits],
        "intercepts": [f.intercept for f in fits],
    }
    _write_json(args.out, summary)
    return OK


def cmd_cv(args) -> int:
    reg = _registry(args)
    cfg = _config(args)
    design = _design(args, reg, cfg)
    groups = _groups(args, reg)
    pc = _path_config(cfg)
    cv = CVConfig(int(cfg.get("folds", 10)), cfg.get("risk", "deviance"), int(cfg["seed"]),
                  bool(cfg.get("stratified", True)))
    res = cross_validate(design, groups, pc, cv, threads=args.threads)
    fits = fit_path(design, groups, pc.kind, pc.gamma, lambdas=res.lambdas, config=pc.fit)
    best = fits[res.selected_index]
    report = {
        "seed": cfg["seed"],
        "penalty": pc.kind,
        "gamma": best.penalty.gamma,
        "folds": cv.folds,
        "risk": cv.risk,
        "lambdas": res.lambdas.tolist(),
        "cv_mean": res.mean.tolist(),
        "cv_sd": res.sd.tolist(),
        "selected_index": res.selected_index,
        "selected_lambda": res.selected_lambda,
        "selected_support": list(best.support),
        "coefficients": best.coef(),
        "intercept": best.intercept,
        "supports": [list(f.support) for f in fits],
    }
    _write_json(args.out, report)
    return OK


def cmd_simulate(args) -> int:
    cfg = json.loads(Path(args.spec).read_text()) if args.spec else {}
    if args.seed is not None:
        cfg["seed"] = args.seed
    reg = VarRegistry.from_text(Path(args.registry).read_text()) if args.registry else None
    target = None
    if args.rules:
        target = parse_ruleset(Path(args.rules).read_text(), reg or fixtures.study_registry())
    spec = SyntheticSpec(
        n=int(cfg.get("n", 1000)),
        true_beta=dict(cfg.get("true_beta", {})),
        intercept=float(cfg.get("intercept", 0.0)),
        outcome_kind=cfg.get("outcome_kind", "binary"),
        seed=int(cfg.get("seed", 0)),
        registry=reg,
        target=target,
        noise_sd=float(cfg.get("noise_sd", 1.0)),
    )
    design = generate_synthetic(spec)
    design.to_csv(args.out, cfg.get("outcome", "y"))
    print(f"wrote {design.n} rows to {args.out} (seed {spec.seed})")
    return OK


def cmd_repro(args) -> int:
    reg = fixtures.study_registry()
    rs = fixtures.study_rules(reg)
    ok = True

    def report(label, good, detail=""):
        nonlocal ok
        ok &= good
        # the cardinality line format is part of the documented output
        print(f"{label} — {'OK' if good else 'FAILED'}{detail}")

    d2, t2 = _timed(derive_algorithm2, rs, DEFAULT_CAP, workers=args.threads)
    d1, t1 = _timed(derive_algorithm1, rs)
    n = len(d2)
    report(f"dictionary cardinality: {n}", n == fixtures.STUDY_DICTIONARY_SIZE,
           "" if n == fixtures.STUDY_DICTIONARY_SIZE else f" (expected {fixtures.STUDY_DICTIONARY_SIZE})")
    w = witness(d1, d2)
    report("set-operation and exhaustive algorithms agree", w is None,
           f" ({t1:.3f} s, {t2:.3f} s)" if w is None else f"; witness {w!r}")
    g = fixtures.study_groups(reg)
    relaxed = derive_algorithm2(rs.none_or_all(), workers=args.threads)
    res = verify_congruence(g, relaxed)
    report(f"{len(g)}-group structure congruent with the none-or-all rule set", bool(res),
           "" if res else f"; witness {res.witness!r} ({res.side} side)")
    synth = synthesize_from_rules(rs)
    report("synthesized grouping equals the shipped grouping", synth.group_set() == g.group_set())
    return OK if ok else FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="structsel", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="seed echoed into JSON reports")
    p.add_argument("--threads", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, rules=True):
        sp.add_argument("--registry", help="registry file (default: embedded study registry)")
        if rules:
            sp.add_argument("--rules", help="rule file (default: embedded study rules)")

    sp = sub.add_parser("dict", help="derive a selection dictionary")
    common(sp)
    sp.add_argument("--algo", choices=("setops", "exhaustive", "both"), default="both")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.add_argument("--out", help="write members (.ndjson text, otherwise binary)")
    sp.set_defaults(func=cmd_dict)

    sp = sub.add_parser("groups", help="synthesize or verify a grouping structure")
    sp.add_argument("action", choices=("verify", "synth"))
    common(sp)
    sp.add_argument("--groups", help="grouping JSON (default: embedded study grouping)")
    sp.add_argument("--literal", action="store_true",
                    help="verify against the rules as written, without relaxing the forced rule")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_groups)

    for name, func, helptext in (("fit", cmd_fit, "fit a penalized path"),
                                 ("cv", cmd_cv, "cross-validate a penalized path")):
        sp = sub.add_parser(name, help=helptext)
        common(sp, rules=False)
        sp.add_argument("--data", required=True)
        sp.add_argument("--groups")
        sp.add_argument("--config")
        sp.add_argument("--out", help="JSON report (default: stdout)")
        if name == "fit":
            sp.add_argument("--path-out", help="coefficient path CSV")
        sp.set_defaults(func=func)

    sp = sub.add_parser("simulate", help="generate a synthetic cohort")
    sp.add_argument("--spec", help="JSON with n, true_beta, intercept, outcome_kind, seed")
    sp.add_argument("--registry")
    sp.add_argument("--rules", help="target rule set the true support must satisfy")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("repro", help="reproduction checks on the embedded study fixtures")
    sp.add_argument("target", choices=("paper-rules",))
    sp.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (StructselError, ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"structsel: error: {e}", file=sys.stderr)
        return USAGE


def run(argv=None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
