"""Command-line experiment runner.

Every command prints (or writes to --out) one JSON document that embeds the
resolved configuration and seed; tabular results also go to a CSV file.
Exit codes: 0 success, 1 audit failure, 2 usage error, 3 size cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .commsim import (EvalProblem, amplify, dist_cc, equality_protocol, newman_sparsify,
                      optimal_distributional_protocol, protocol_error)
from .concepts import FiniteDistribution, make_builtin, sauer_bound, vc_dimension
from .errors import CapExceeded
from .infomath import augindex_bound
from .mistaketree import build_halfspace_tree, halfspace_tree_depth, ldim, validate_tree

CLASS_CHOICES = ["point", "thr", "line", "box", "hs"]
MAX_AUDIT_SAMPLES = 1 << 24


class UsageError(Exception):
    pass


def _frac(v) -> Fraction:
    """Parse '1/4', '0.25' or a number as an exact fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10 ** 9)
    return Fraction(str(v))


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def _class(cfg):
    if cfg.get("class") is None:
        raise UsageError("--class is required")
    kind = cfg["class"]
    return make_builtin(kind, b=cfg.get("b"), d=cfg.get("d"), p=cfg.get("p"))


def _uniform(n):
    return FiniteDistribution.uniform(n)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def _class_label(cfg) -> str:
    parts = [cfg["class"]] + [f"{k}={cfg[k]}" for k in ("b", "d", "p") if cfg.get(k) is not None]
    return ",".join(parts)


# ---------------------------------------------------------------- commands


def cmd_dims(cfg):
    c = _class(cfg)
    vc, witness = vc_dimension(c) if c.domain_size <= 24 else (None, ())
    ld, tree = ldim(c)
    row = {"class": _class_label(cfg), "size": c.size, "domain_size": c.domain_size, "vc": vc,
           "ldim": ld, "sauer_bound": None if vc is None else sauer_bound(c.domain_size, vc)}
    body = dict(row, vc_witness=list(witness), ldim_tree_valid=validate_tree(tree, c).valid)
    return body, [row], 0


def cmd_ldim(cfg):
    c = _class(cfg)
    if cfg.get("construct"):
        if c.kind != "halfspace":
            raise UsageError("--construct needs --class hs")
        tree = build_halfspace_tree(cfg["d"], cfg["b"], c)
        value, how = tree.depth, "halfspace_construction"
        expected = halfspace_tree_depth(cfg["d"], cfg["b"])
    else:
        value, tree = ldim(c)
        how, expected = "exhaustive", None
    check = validate_tree(tree, c)
    row = {"class": _class_label(cfg), "method": how, "depth": value, "complete": tree.is_complete,
           "valid": check.valid}
    body = dict(row, expected_depth=expected, tree=tree.to_json())
    return body, [row], 0


def cmd_cc(cfg):
    problem = cfg.get("problem") or "eval"
    eps = _frac(cfg.get("eps") if cfg.get("eps") is not None else 0)
    if problem == "equality":
        b, k = cfg.get("b") or 2, cfg.get("k") or 1
        p = equality_protocol(b, k)
        g = EvalProblem.from_class(make_builtin("point", b=b))
        rows = []
        rep = protocol_error(p, g)
        rows.append({"protocol": f"equality_b{b}_k{k}", **rep.to_json()})
        if cfg.get("amplify"):
            amp = amplify(p, cfg["amplify"])
            rows.append({"protocol": f"amplified_x{cfg['amplify']}", **protocol_error(amp, g).to_json()})
        if cfg.get("newman"):
            sp = newman_sparsify(p, cfg["newman"], cfg["seed"])
            rows.append({"protocol": f"newman_m{cfg['newman']}", **protocol_error(sp, g).to_json()})
        for r in rows:
            r.pop("worst_pair", None)
        return {"problem": problem, "results": rows}, rows, 0
    if problem == "augindex":
        if cfg.get("d") is None:
            raise UsageError("--d is required for augindex")
        g = EvalProblem.augindex(cfg["d"])
        name = f"augindex_{cfg['d']}"
    else:
        c = _class(cfg)
        g = EvalProblem.from_class(c)
        name = f"eval_{_class_label(cfg)}"
    mu = g.uniform_mu()
    rows = []
    budget = 0
    while True:
        _, err = optimal_distributional_protocol(g, mu, budget)
        rows.append({"problem": name, "budget_bits": budget, "error_num": err.numerator,
                     "error_den": err.denominator})
        if err == 0:
            break
        budget += 1
    value = dist_cc(g, mu, eps)
    body = {"problem": name, "eps": eps, "dist_cc": value, "per_budget": rows}
    if problem == "augindex" and eps <= Fraction(1, 2):
        body["entropy_bound"] = augindex_bound(cfg["d"], float(eps))
    return body, rows, 0


def cmd_repdim(cfg):
    from .repdim import (DetRepresentation, ProbRepresentation, check_det_rep_distfree,
                         check_rep_fixed_dist, det_rep_to_protocol, det_rep_to_protocol_fixed,
                         fixed_dist_error, min_cover, prob_rep_to_protocol, protocol_to_det_rep,
                         protocol_to_prob_rep)
    c = _class(cfg)
    eps = _frac(cfg.get("eps") if cfg.get("eps") is not None else Fraction(1, 4))
    delta = _frac(cfg.get("delta") if cfg.get("delta") is not None else 0)
    d = _uniform(c.domain_size)
    cover = min_cover(c, d, eps, proper=True, allow_greedy=True)
    H = cover.rep
    fixed = check_rep_fixed_dist(H, c, d, eps)
    rows = [{"check": "proper_cover_fixed_uniform", "size": H.size, "pass": fixed.passed}]
    body = {"eps": eps, "delta": delta, "cover": cover.to_json(), "fixed_check": fixed.to_json()}
    df = check_det_rep_distfree(H, c, eps)
    body["distribution_free"] = df.to_json()
    rows.append({"check": "cover_distribution_free", "size": H.size, "pass": df.passed})
    pfix = det_rep_to_protocol_fixed(H, c, d, eps)
    err = fixed_dist_error(pfix, c, d)
    rows.append({"check": "fixed_protocol_error_le_eps", "size": H.size, "pass": err <= eps})
    body["fixed_protocol_error"] = err
    g = EvalProblem.from_class(c)
    mu = g.uniform_mu()
    rep = ProbRepresentation.point_mass(H)
    pp = prob_rep_to_protocol(rep, c, eps, mu=mu)
    perr = protocol_error(pp, g, "distributional", mu=mu).value
    bound = eps + delta - eps * delta
    rows.append({"check": "prob_rep_protocol_error_le_bound", "size": H.size, "pass": perr <= bound})
    body["prob_rep_protocol_error"] = perr
    if df.passed:
        pd = det_rep_to_protocol(H, c, eps)
        e2 = protocol_error(pd, g).value
        rows.append({"check": "det_rep_protocol_worst_error_le_eps", "size": H.size,
                     "pass": e2 <= eps + Fraction(1, 10 ** 6)})
        back = protocol_to_det_rep(pd)
        ok = check_det_rep_distfree(back, c, 2 * e2).passed
        rows.append({"check": "majority_rep_passes_at_2e", "size": back.size, "pass": ok})
    if c.kind == "point" and cfg.get("k"):
        p = equality_protocol(cfg["b"], cfg["k"])
        e = protocol_error(p, g).value
        prep = protocol_to_prob_rep(p)
        body["equality_prob_rep_max_log_size"] = prep.max_log_size
        ok = all(check_rep_fixed_dist(prep, c, FiniteDistribution.point_mass(c.domain_size, z), eps, delta).passed
                 for z in range(c.domain_size)) if eps * delta >= e else None
        rows.append({"check": "equality_prob_rep_point_masses", "size": len(prep.support), "pass": ok})
    return body, rows, 0


def cmd_cover(cfg):
    from .repdim import max_packing_and_duality, min_cover
    c = _class(cfg)
    eps = _frac(cfg.get("eps") if cfg.get("eps") is not None else Fraction(1, 4))
    d = _uniform(c.domain_size)
    proper = not cfg.get("improper")
    cov = min_cover(c, d, eps, proper=proper, allow_greedy=bool(cfg.get("greedy")))
    pk = max_packing_and_duality(c, d, eps, with_cover=False)
    row = {"class": _class_label(cfg), "eps": str(eps), "proper": proper, "cover_size": cov.size,
           "drdim": cov.drdim, "optimal": cov.optimal, "packing_size": pk.packing_size,
           "packing_is_cover": pk.is_cover}
    return dict(row, cover=cov.to_json(), packing=list(pk.packing)), [row], 0


def _line_cfg(cfg):
    from .dplearn import LineLearnerConfig
    return LineLearnerConfig(cfg.get("p") or 7, float(cfg.get("eps") or 0.2), float(cfg.get("delta") or 0.25),
                             float(cfg.get("alpha") or 1.0), float(cfg.get("beta") or 0.05),
                             cfg.get("scale_range"), cfg.get("scale_ell"))


def cmd_learn_line(cfg):
    from .dplearn import Hypothesis, line_boosted_learner, line_overall_learner, make_oracle
    lc = _line_cfg(cfg)
    p = lc.p
    a, b = cfg.get("target") or (1, 0)
    f = Hypothesis.line(a, b, p).row()
    d = _uniform(p * p)
    trials = cfg.get("trials") or 1
    rows = []
    for i in range(trials):
        data_rng, rng = _rng(cfg["seed"], i, 0), _rng(cfg["seed"], i, 1)
        oracle = make_oracle(d, f, data_rng)
        run = (line_overall_learner if cfg.get("unboosted") else line_boosted_learner)(lc, oracle, rng)
        err = d.mass(run.hypothesis.row() != f)
        rows.append({"trial": i, "hypothesis": run.hypothesis.key(), "exact_error_num": err.numerator,
                     "exact_error_den": err.denominator, "success": err <= _frac(lc.eps)})
    body = {"config": lc.to_json(), "deviation_flags": lc.deviation_flags,
            "success_rate": sum(r["success"] for r in rows) / trials, "runs": rows}
    return body, rows, 0


def _target_row(c, cfg):
    t = cfg.get("target_index") or 0
    if not 0 <= t < c.size:
        raise UsageError("--target-index out of range")
    return t, c.rows[t]


def cmd_learn_dist(cfg, label_private=False):
    from .dplearn import dist_specific_learner, label_private_learner, make_oracle
    c = _class(cfg)
    d = _uniform(c.domain_size)
    t, f = _target_row(c, cfg)
    alpha = float(cfg.get("alpha") or 1.0)
    eps = _frac(cfg.get("eps") if cfg.get("eps") is not None else Fraction(1, 4))
    trials = cfg.get("trials") or 1
    rows = []
    for i in range(trials):
        oracle = make_oracle(d, f, _rng(cfg["seed"], i, 0))
        rng = _rng(cfg["seed"], i, 1)
        if label_private:
            res = label_private_learner(c, oracle, alpha, rng)
        else:
            res = dist_specific_learner(c, d, oracle, alpha, rng)
        h = res.hypothesis
        err = d.mass(h.row() != f)
        rows.append({"trial": i, "hypothesis": h.key(), "exact_error_num": err.numerator,
                     "exact_error_den": err.denominator, "success": err <= eps})
    body = {"target_index": t, "success_rate": sum(r["success"] for r in rows) / trials, "runs": rows}
    return body, rows, 0


def cmd_audit(cfg):
    from .dpaudit import (ExponentialMechanism, LeakyMechanism, LineLearnerMechanism,
                          RandomizedResponse, audit)
    from .dplearn import Hypothesis
    mech_name = cfg.get("mechanism") or "em"
    alpha = float(cfg.get("alpha") if cfg.get("alpha") is not None else 1.0)
    beta = float(cfg.get("beta") if cfg.get("beta") is not None else 0.0)
    mode = cfg.get("mode") or "exact"
    trials = cfg.get("trials") or 100_000
    rng = _rng(cfg["seed"], 0)
    n_pairs = cfg.get("pairs") or 10
    if mech_name == "em":
        mech = ExponentialMechanism(alpha)
        pairs = []
        for _ in range(n_pairs):
            q = rng.integers(0, 20, size=4)
            pairs.append((q.tolist(), (q + rng.integers(-1, 2, size=4)).tolist()))
    elif mech_name == "rr":
        mech = RandomizedResponse(float(cfg.get("flip") or 0.25))
        pairs = [(0, 1)]
    elif mech_name in ("line", "leaker"):
        lc = _line_cfg(cfg)
        f = Hypothesis.line(1, 0, lc.p).row()
        n = lc.max_samples
        if n > MAX_AUDIT_SAMPLES:
            raise CapExceeded(f"audit dataset of {n} samples exceeds {MAX_AUDIT_SAMPLES}; "
                              "lower it with --scale-range/--scale-ell")
        idx = rng.integers(0, lc.p * lc.p, size=n)
        lab = f[idx]
        base = (idx, lab)
        pairs = []
        for _ in range(n_pairs):
            j = int(rng.integers(0, min(n, 16 * lc.ell)))
            lab2 = lab.copy()
            lab2[j] ^= 1
            if mech_name == "leaker":
                lab2[0] ^= 1
            pairs.append((base, (idx, lab2)))
        mech = LineLearnerMechanism(lc) if mech_name == "line" else LeakyMechanism()
    else:
        raise UsageError(f"unknown mechanism {mech_name!r}")
    rep = audit(mech, pairs, alpha, beta, mode=mode, trials=trials, seed=cfg["seed"])
    rows = [{"pair": p.pair, "forward_ratio": _jsonable(p.forward_ratio), "max_ratio": _jsonable(p.max_ratio),
             "slack": p.slack, "verdict": p.verdict} for p in rep.pairs]
    body = {"mechanism": mech_name, "report": rep.to_json()}
    return body, rows, (1 if rep.verdict == "fail" else 0)


def cmd_stability(cfg):
    from .dplearn import stability_probs
    if cfg.get("r") is None or cfg.get("t") is None:
        raise UsageError("--r and --t are required")
    atoms = cfg.get("atoms") or []
    s = stability_probs(float(cfg["r"]), atoms, int(cfg["t"]), diffuse=bool(cfg.get("diffuse")))
    row = {"r": s.r, "q": s.q, "t": s.t, "none": s.none, "one": s.one, "two": s.two, "bounds_ok": s.bounds_ok}
    return s.to_json(), [row], 0


def cmd_report(cfg):
    rows = []
    for kind, kw in [("thr", {"b": 3}), ("point", {"b": 2}), ("line", {"p": 3}), ("box", {"b": 1, "d": 2}),
                     ("hs", {"b": 1, "d": 2})]:
        c = make_builtin(kind, **kw)
        vc, _ = vc_dimension(c)
        ld, _ = ldim(c)
        name = ",".join([kind] + [f"{k}={v}" for k, v in sorted(kw.items())])
        rows.append({"section": "dims", "name": name, "value": f"vc={vc};ldim={ld}"})
    for d in (2, 3):
        g = EvalProblem.augindex(d)
        for eps in (Fraction(0), Fraction(1, 8), Fraction(1, 4)):
            v = dist_cc(g, g.uniform_mu(), eps)
            rows.append({"section": "augindex", "name": f"d={d},eps={eps}",
                         "value": f"dist_cc={v};bound={augindex_bound(d, float(eps)):.6f}"})
    from .dplearn import stability_probs
    s = stability_probs(0.5, [0.25, 0.25], 8)
    rows.append({"section": "stability", "name": "r=0.5,atoms=0.25+0.25,t=8",
                 "value": f"none={s.none:.6f};one={s.one:.6f};two={s.two:.6f}"})
    return {"rows": rows}, rows, 0


COMMANDS = {
    "dims": cmd_dims, "ldim": cmd_ldim, "cc": cmd_cc, "repdim": cmd_repdim, "cover": cmd_cover,
    "learn-line": cmd_learn_line, "learn-dist": cmd_learn_dist,
    "learn-label": lambda cfg: cmd_learn_dist(cfg, label_private=True),
    "audit": cmd_audit, "stability": cmd_stability, "report": cmd_report,
}


# ---------------------------------------------------------------- parsing and output


def _pair(s: str):
    a, b = s.split(",")
    return int(a), int(b)


def _floats(s: str):
    return [float(v) for v in s.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--class", dest="class", choices=CLASS_CHOICES)
    common.add_argument("--b", type=int)
    common.add_argument("--d", type=int)
    common.add_argument("--p", type=int)
    common.add_argument("--eps", type=str)
    common.add_argument("--delta", type=str)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=str, help="directory for <command>.json and <command>.csv")
    common.add_argument("--config", type=str, help="JSON file whose fields override the flags")
    common.add_argument("--scale-range", dest="scale_range", type=float)
    common.add_argument("--scale-ell", dest="scale_ell", type=int)

    parser = argparse.ArgumentParser(prog="privcc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("dims", parents=[common], help="VC and Littlestone dimension of a built-in class")
    p = sub.add_parser("ldim", parents=[common], help="Littlestone dimension with a witness tree")
    p.add_argument("--construct", action="store_true", help="use the inductive halfspace tree")
    p = sub.add_parser("cc", parents=[common], help="distributional one-way communication complexity")
    p.add_argument("--problem", choices=["eval", "augindex", "equality"], default="eval")
    p.add_argument("--k", type=int)
    p.add_argument("--amplify", type=int)
    p.add_argument("--newman", type=int)
    p = sub.add_parser("repdim", parents=[common], help="representation checks and conversions")
    p.add_argument("--k", type=int, help="also test the equality protocol with k hash bits")
    p = sub.add_parser("cover", parents=[common], help="minimum cover and greedy packing")
    p.add_argument("--improper", action="store_true")
    p.add_argument("--greedy", action="store_true", help="allow a greedy fallback")
    p = sub.add_parser("learn-line", parents=[common], help="private line learner")
    p.add_argument("--target", type=_pair, help="a,b for the line y = a*x + b")
    p.add_argument("--unboosted", action="store_true")
    for name in ("learn-dist", "learn-label"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--target-index", dest="target_index", type=int)
    p = sub.add_parser("audit", parents=[common], help="differential-privacy audit")
    p.add_argument("--mechanism", choices=["em", "rr", "line", "leaker"], default="em")
    p.add_argument("--mode", choices=["exact", "monte_carlo"], default="exact")
    p.add_argument("--pairs", type=int)
    p.add_argument("--flip", type=float)
    p = sub.add_parser("stability", parents=[common], help="None/One/Two probabilities")
    p.add_argument("--r", type=float)
    p.add_argument("--atoms", type=_floats)
    p.add_argument("--t", type=int)
    p.add_argument("--diffuse", action="store_true")
    sub.add_parser("report", parents=[common], help="summary of headline quantities")
    return parser


def _resolve(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("config",)}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config: {e}") from e
        if not isinstance(doc, dict):
            raise UsageError("config must be a JSON object")
        for k, v in doc.items():
            key = k.replace("-", "_")
            if key not in cfg:
                raise UsageError(f"unknown config field {k!r}")
            cfg[key] = tuple(v) if isinstance(v, list) and key == "target" else v
    return cfg


def _csv(rows) -> str:
    if not rows:
        return ""
    fields = list(rows[0].keys())
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _jsonable(v) for k, v in r.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        cfg = _resolve(args)
        body, rows, code = COMMANDS[args.command](cfg)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"privcc: error: {e}", file=sys.stderr)
        return 2
    except CapExceeded as e:
        print(json.dumps({"error": "cap_exceeded", "command": args.command, "message": str(e)}), file=sys.stderr)
        return 3
    except (ValueError, TypeError) as e:
        parser.print_usage(sys.stderr)
        print(f"privcc: error: {e}", file=sys.stderr)
        return 2
    doc = {"command": args.command, "config": _jsonable({k: v for k, v in cfg.items() if k != "out"}),
           "seed": cfg["seed"], "result": _jsonable(body)}
    doc.setdefault("deviation_flags", _jsonable(body.get("deviation_flags", [])))
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(text, encoding="utf-8", newline="\n")
        (out / f"{args.command}.csv").write_text(_csv(rows), encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
