"""Acceptance suite: one test per criterion, each printing a PASS or FAIL line.

Run with `python3 -m pytest tests/test_acceptance.py -v`; the summary section at
the end lists every criterion in order.
"""

import itertools
import json
import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from privcc.commsim import (EvalProblem, amplify, dist_cc, equality_protocol, newman_sparsify,
                            protocol_error)
from privcc.concepts import ConceptClass, FiniteDistribution, make_builtin, vc_dimension
from privcc.dpaudit import ExponentialMechanism, LeakyMechanism, LineLearnerMechanism, audit
from privcc.dplearn import (Hypothesis, LineLearnerConfig, bad_log_t_values, label_private_learner,
                            label_private_unlabeled_size, line_boosted_learner, pac_evaluate,
                            release_probability, stability_probs)
from privcc.dplearn.linelearn import LineReleaseStage
from privcc.infomath import (augindex_bound, conditional_entropy, kl_nats, min_entropy,
                             min_entropy_conditioning_tail, mutual_information, renyi2, shannon,
                             statistical_distance)
from privcc.mistaketree import augindex_embedding, build_halfspace_tree, ldim, validate_tree
from privcc.repdim import (DetRepresentation, ProbRepresentation, check_det_rep_distfree,
                           check_prob_rep_distfree, check_rep_fixed_dist, det_rep_to_protocol,
                           det_rep_to_protocol_fixed, fixed_dist_error, greedy_packing,
                           max_packing_and_duality, prob_rep_to_protocol, protocol_to_det_rep,
                           protocol_to_prob_rep)


def philox(seed):
    return np.random.Generator(np.random.Philox(seed))


def rational(ws):
    ws = [Fraction(int(w)) for w in ws]
    total = sum(ws)
    return FiniteDistribution([w / total for w in ws])


# ---------------------------------------------------------------- 1


def test_c01_dimension_identities(criterion):
    with criterion(1, "dimension identities") as info:
        t0 = time.perf_counter()
        for b in (1, 2, 3, 4):
            assert ldim(make_builtin("thr", b=b))[0] == b
            assert vc_dimension(make_builtin("thr", b=b))[0] == 1
        for p in (2, 3, 5):
            assert ldim(make_builtin("line", p=p))[0] == 2
        elapsed = time.perf_counter() - t0
        assert elapsed < 10
        info["detail"] = "ldim(Thr_1..4)=1..4, ldim(Line_2,3,5)=2, vc(Thr)=1"


# ---------------------------------------------------------------- 2


def test_c02_halfspace_tree(criterion):
    with criterion(2, "halfspace mistake trees") as info:
        t0 = time.perf_counter()
        depths = []
        for d, b in ((2, 1), (2, 2), (3, 1)):
            cls = make_builtin("hs", b=b, d=d)
            tree = build_halfspace_tree(d, b, cls)
            assert validate_tree(tree, cls).valid
            assert tree.is_complete
            assert tree.depth == (d * (d - 1) // 2 + 1) * b
            depths.append(tree.depth)
        assert time.perf_counter() - t0 < 30
        info["detail"] = f"depths {depths}"


# ---------------------------------------------------------------- 3


def embedding_holds(tree, c):
    emb = augindex_embedding(tree, c)
    for x in itertools.product((0, 1), repeat=emb.depth):
        f = emb.concept_map[x]
        for i in range(emb.depth):
            if c.rows[f, emb.point_map[x[:i]]] != x[i]:
                return False
    return True


def test_c03_augindex(criterion):
    with criterion(3, "AugIndex embedding and lower bound") as info:
        t0 = time.perf_counter()
        trees = 0
        classes = [("thr", {"b": b}) for b in range(1, 6)] + [("point", {"b": b}) for b in (1, 2, 3)]
        classes += [("line", {"p": p}) for p in (2, 3, 5)] + [("box", {"b": 1, "d": 2}), ("hs", {"b": 1, "d": 2})]
        for kind, kw in classes:
            c = make_builtin(kind, **kw)
            k, tree = ldim(c)
            if k <= 5:
                assert embedding_holds(tree, c), (kind, kw)
                trees += 1
        for d, b in ((2, 1), (2, 2), (3, 1)):
            cls = make_builtin("hs", b=b, d=d)
            assert embedding_holds(build_halfspace_tree(d, b, cls), cls)
            trees += 1
        ccs = {}
        for d in (1, 2, 3, 4):
            g = EvalProblem.augindex(d)
            mu = g.uniform_mu()
            for eps in (Fraction(0), Fraction(1, 8), Fraction(1, 4)):
                v = dist_cc(g, mu, eps)
                assert v >= augindex_bound(d, float(eps)), (d, eps, v)
                ccs[(d, str(eps))] = v
        assert time.perf_counter() - t0 < 60
        info["detail"] = f"{trees} trees embedded; dist_cc d=4: {[ccs[(4, e)] for e in ('0', '1/8', '1/4')]}"


# ---------------------------------------------------------------- 4


def test_c04_conversion_round_trips(criterion):
    with criterion(4, "representation/protocol round trips") as info:
        t0 = time.perf_counter()
        c = make_builtin("point", b=2)
        g = EvalProblem.from_class(c)
        grid = [Fraction(i, 8) for i in range(1, 8)]
        rng = philox(0)
        ds = [FiniteDistribution.uniform(4)] + [FiniteDistribution.point_mass(4, i) for i in range(4)]
        ds += [rational(rng.integers(1, 9, 4)) for _ in range(2)]
        pis = [FiniteDistribution.uniform(4), rational([1, 2, 3, 4])]
        n_rep = n_proto = n_free = 0
        for k in (1, 2, 3):
            p = equality_protocol(2, k)
            e = protocol_error(p, g).value
            R = protocol_to_prob_rep(p)
            assert R.max_log_size <= p.cost
            for eps, dl in itertools.product(grid, grid):
                if eps * dl < e:
                    continue
                for d in ds:
                    assert check_rep_fixed_dist(R, c, d, eps, dl).passed, (k, eps, dl)
                    n_rep += 1
                    for pi in pis:
                        mu = FiniteDistribution(np.outer(pi.weights, d.weights))
                        er = protocol_error(prob_rep_to_protocol(R, c, eps, mu=mu), g, "distributional",
                                            mu=mu).value
                        assert er <= eps + dl - eps * dl, (k, eps, dl, er)
                        n_proto += 1
                if k == 1:
                    assert check_prob_rep_distfree(R, c, eps, dl).passed
                    n_free += 1
        # private-coin protocols through Newman sparsification and amplification
        n_det = 0
        for k, amp in ((1, 1), (1, 3), (2, 1), (2, 3), (3, 1)):
            p = equality_protocol(2, k)
            if amp > 1:
                p = amplify(p, amp)
            s = newman_sparsify(p, 64, 0)
            e = protocol_error(s, g).value
            H = protocol_to_det_rep(s)
            assert check_det_rep_distfree(H, c, min(2 * e, 1)).passed, (k, amp, e)
            back = det_rep_to_protocol(H, c, min(2 * e, 1))
            assert protocol_error(back, g).value <= 2 * e + Fraction(1, 10 ** 6)
            n_det += 1
        # Thr_2 subsets: distribution-free and fixed-distribution directions
        t = make_builtin("thr", b=2)
        gt = EvalProblem.from_class(t)
        dts = [FiniteDistribution.uniform(4), rational([1, 2, 3, 4]), rational([4, 1, 1, 2])]
        n_thr = 0
        for r in range(1, 5):
            for S in itertools.combinations(range(4), r):
                H = DetRepresentation(t.rows[list(S)])
                v = check_det_rep_distfree(H, t, 1).worst_value
                if v < 1 - 1e-9:
                    eps = Fraction(v).limit_denominator(10 ** 6) + Fraction(1, 10 ** 9)
                    assert protocol_error(det_rep_to_protocol(H, t, eps), gt).value <= eps + Fraction(1, 10 ** 6)
                    n_thr += 1
                for d in dts:
                    for eps in (Fraction(0), Fraction(1, 4), Fraction(1, 2)):
                        if check_rep_fixed_dist(H, t, d, eps).passed:
                            assert fixed_dist_error(det_rep_to_protocol_fixed(H, t, d, eps), t, d) <= eps
                            n_thr += 1
        assert time.perf_counter() - t0 < 60
        info["detail"] = (f"{n_rep} rep checks, {n_proto} protocol errors, {n_free} dist-free, "
                          f"{n_det} private-coin, {n_thr} Thr_2 checks")


# ---------------------------------------------------------------- 5


BUILTINS = [("point", {"b": 3}), ("thr", {"b": 4}), ("line", {"p": 5}), ("line", {"p": 7}),
            ("box", {"b": 1, "d": 2}), ("box", {"b": 2, "d": 2}), ("hs", {"b": 1, "d": 2}),
            ("hs", {"b": 1, "d": 3}), ("hs", {"b": 2, "d": 2})]


def test_c05_packing_duality(criterion):
    with criterion(5, "packing duality") as info:
        t0 = time.perf_counter()
        checked = 0
        for kind, kw in BUILTINS:
            c = make_builtin(kind, **kw)
            d = FiniteDistribution.uniform(c.domain_size)
            for eps in (Fraction(0), Fraction(1, 4), Fraction(1, 2)):
                rep = max_packing_and_duality(c, d, eps)
                assert rep.is_cover, (kind, kw, eps)
                if rep.cover_optimal:
                    assert rep.packing_size >= rep.cover_size
                # an eps/2 representation mixing a greedy eps/2 cover with the class itself
                half = DetRepresentation(c.rows[greedy_packing(c, d, eps / 2)])
                mix = ProbRepresentation((half, DetRepresentation(c.rows)),
                                         FiniteDistribution([Fraction(3, 4), Fraction(1, 4)]))
                dual = max_packing_and_duality(c, d, eps, delta=Fraction(1, 4), rep=mix,
                                               with_cover=False).duality
                assert dual["represents_at_half_eps"] and dual["holds"], (kind, kw, eps)
                checked += 1
        assert time.perf_counter() - t0 < 60
        info["detail"] = f"{checked} (class, eps) instances"


# ---------------------------------------------------------------- 6


def em_law(q, alpha):
    w = [math.exp(alpha * (v - max(q)) / 2) for v in q]
    return [x / sum(w) for x in w]


def release_setup():
    cfg = LineLearnerConfig(5, 0.25, 0.25, 1.0, 0.05, range_width_override=0, ell_override=4)
    assert cfg.k_range == (1, 1) and cfg.ell == 4 and cfg.max_samples == 8
    pts = [(4, 4), (1, 1), (2, 2), (3, 3), (4, 4), (0, 1), (1, 3), (0, 1)]
    idx = np.array([x * 5 + y for x, y in pts])
    return cfg, idx, np.ones(8, dtype=np.uint8)


def test_c06_exact_privacy(criterion):
    with criterion(6, "exact privacy") as info:
        alpha = 1.0
        rng = philox(6)
        pairs = []
        for _ in range(100):
            q = rng.integers(0, 30, size=int(rng.integers(2, 7)))
            pairs.append((q.tolist(), (q + rng.integers(-1, 2, size=len(q))).tolist()))
        rep = audit(ExponentialMechanism(alpha), pairs, alpha)
        for pr, (q, q2) in zip(rep.pairs, pairs):
            P, Q = em_law(q, alpha), em_law(q2, alpha)
            assert pr.forward_ratio == pytest.approx(max(a / b for a, b in zip(P, Q)), rel=1e-12)
            assert pr.forward_ratio <= math.exp(alpha) + 1e-9
        assert rep.passed

        cfg, idx, labels = release_setup()
        h, g = Hypothesis.line(1, 0, 5), Hypothesis.line(2, 1, 5)
        assert h < g
        stage = LineReleaseStage(cfg, idx, labels)
        assert stage.stage(1) == (h.code, 1)
        # one changed example turns the block vote into [g, h, g, g]
        idx2 = idx.copy()
        idx2[1] = 2 * 5 + 0
        stage2 = LineReleaseStage(cfg, idx2, labels)
        assert stage2.stage(1) == (g.code, 1)
        beta = cfg.beta
        assert release_probability(1, cfg) == pytest.approx(beta, abs=1e-15)
        P, Q = stage.distribution(), stage2.distribution()
        zero = Hypothesis.zero(5).key()
        assert P[h.key()] == pytest.approx(beta, abs=1e-15) and P[zero] == pytest.approx(1 - beta, abs=1e-15)
        assert Q[g.key()] == pytest.approx(beta, abs=1e-15) and Q[zero] == pytest.approx(1 - beta, abs=1e-15)

        class Fixed:
            def __init__(self, table):
                self.table = table

            def distribution(self, x):
                return self.table[x]

        mech = Fixed({0: P, 1: Q})
        assert audit(mech, [(0, 1)], cfg.alpha, beta).passed
        assert not audit(mech, [(0, 1)], cfg.alpha, beta - 1e-6).passed
        # neighbours keeping the same winner pass with no additive slack
        idx3 = idx.copy()
        idx3[7] = 4 * 5 + 3
        same = LineReleaseStage(cfg, idx3, labels)
        assert same.stage(1)[0] == h.code
        mech = Fixed({0: P, 1: same.distribution()})
        assert audit(mech, [(0, 1)], cfg.alpha, 0.0).passed
        info["detail"] = f"EM max forward ratio {rep.forward_ratio:.6f} <= e; release mass = beta = {beta}"


# ---------------------------------------------------------------- 7


def test_c07_statistical_privacy(criterion):
    with criterion(7, "Monte Carlo privacy audit") as info:
        t0 = time.perf_counter()
        cfg = LineLearnerConfig(5, 0.25, 0.5, 1.0, 0.05)
        rng = philox(7)
        f = Hypothesis.line(2, 1, 5).row()
        n = cfg.max_samples
        idx = rng.integers(0, 25, n)
        lab = f[idx]
        base = (idx, lab)
        pairs = []
        for _ in range(10):
            lab2 = lab.copy()
            lab2[int(rng.integers(0, min(n, 64 * cfg.ell)))] ^= 1
            pairs.append((base, (idx, lab2)))
        rep = audit(LineLearnerMechanism(cfg), pairs, cfg.alpha, cfg.beta, mode="monte_carlo", trials=100_000)
        assert rep.verdict in ("pass", "inconclusive")
        assert all(p.verdict != "fail" for p in rep.pairs)
        leak = ((idx, lab), (idx, np.concatenate([[1 - lab[0]], lab[1:]])))
        leaker = audit(LeakyMechanism(), [leak], cfg.alpha, cfg.beta, mode="monte_carlo", trials=100_000)
        assert leaker.verdict == "fail"
        assert time.perf_counter() - t0 < 300
        info["detail"] = f"learner verdict {rep.verdict}; leaker {leaker.verdict}"


# ---------------------------------------------------------------- 8


def line_distribution(p, f, line_mass, heavy=None):
    on, off = np.flatnonzero(f), np.flatnonzero(1 - f)
    w = np.empty(p * p, dtype=object)
    w[off] = (1 - line_mass) / len(off)
    if heavy is None:
        w[on] = line_mass / len(on)
    else:
        w[on] = (line_mass - heavy) / (len(on) - 1)
        w[on[0]] = heavy
    return FiniteDistribution(w)


def test_c08_learner_accuracy(criterion):
    with criterion(8, "boosted line learner accuracy (scaled constants)") as info:
        t0 = time.perf_counter()
        p = 101
        cfg = LineLearnerConfig(p, 0.2, 0.25, 1.0, 0.05, range_width_override=8, ell_override=40)
        assert cfg.deviation_flags
        settings = [
            ("uniform", (3, 7), None),
            ("line-heavy", (0, 0), (Fraction(9, 10), None)),
            ("line-half", (100, 50), (Fraction(1, 2), None)),
            ("point-heavy", (1, 1), (Fraction(1, 2), Fraction(2, 5))),
            ("point-mid", (57, 2), (Fraction(3, 10), Fraction(1, 5))),
        ]
        rates = []
        for i, (name, (a, b), shape) in enumerate(settings):
            f = Hypothesis.line(a, b, p).row()
            d = FiniteDistribution.uniform(p * p) if shape is None else line_distribution(p, f, *shape)
            rep = pac_evaluate(lambda o, r: line_boosted_learner(cfg, o, r).hypothesis,
                               ConceptClass.from_rows([f]), f, d, 200, Fraction(1, 5), seed=80 + i)
            assert rep.success_rate >= 1 - cfg.delta, (name, rep.success_rate)
            assert rep.ci_low >= 0.60, (name, rep.ci_low)
            rates.append(f"{name}={rep.success_rate:.3f}")
        assert time.perf_counter() - t0 < 600
        info["detail"] = ", ".join(rates)


# ---------------------------------------------------------------- 9


def c9_settings():
    rng = philox(0)
    for _ in range(100):
        p = int(rng.choice([2, 3, 5, 7, 11, 101]))
        cfg = LineLearnerConfig(p, 0.2, 0.25, 0.25, 0.05)
        w = rng.dirichlet(np.full(p * p, float(rng.choice([0.1, 1.0, 10.0]))))
        a, b = rng.integers(0, p, 2)
        f = Hypothesis.line(int(a), int(b), p).row()
        atoms = w[f == 1]
        yield p, float(atoms.sum()), atoms, cfg.ks


def test_c09_stability_analysis(criterion):
    with criterion(9, "stability bounds and bad log t count") as info:
        t0 = time.perf_counter()
        grid = 0
        stated_misses = 0
        for i in range(1, 10):
            r = i / 10
            for q in (0.0, r / 2, r):
                for t in range(1, 65):
                    s = stability_probs(r, [q] if q else [], t, diffuse=True)
                    assert s.bounds_ok, (r, q, t)
                    assert abs(s.none + s.one + s.two - 1) <= 1e-12
                    stated_misses += not s.stated_two_bound_ok
                    grid += 1
        over = []
        for p, r, atoms, ks in c9_settings():
            bad = bad_log_t_values(r, atoms, ks)
            if len(bad) > 3:
                over.append((p, round(r, 4), bad))
        assert time.perf_counter() - t0 < 10
        info["detail"] = f"{grid} grid points ok ({stated_misses} miss the unfloored half-sample bound)"
        assert not over, f"{len(over)}/100 settings have more than 3 bad values, e.g. {over[:2]}"


# ---------------------------------------------------------------- 10


def random_dist(rng, n):
    w = rng.integers(0, 10, n).astype(float)
    w[rng.integers(0, n)] += 1
    return w / w.sum()


def test_c10_information_theory(criterion):
    with criterion(10, "information-theoretic identities") as info:
        t0 = time.perf_counter()
        rng = philox(10)
        tol = 1e-9
        for _ in range(10_000):
            p = random_dist(rng, int(rng.integers(1, 10)))
            assert math.log2(len(p)) + tol >= shannon(p) >= renyi2(p) - tol >= min_entropy(p) - 2 * tol
        for _ in range(10_000):
            nx, ny = rng.integers(1, 6, 2)
            j = random_dist(rng, int(nx * ny)).reshape(nx, ny)
            jd = FiniteDistribution(j)
            py = j.sum(axis=0)
            assert abs(shannon(j) - shannon(py) - conditional_entropy(jd)) <= tol
            kl = kl_nats(j, np.outer(j.sum(axis=1), py)) / math.log(2)
            assert abs(mutual_information(jd) - kl) <= tol
        for _ in range(10_000):
            n = int(rng.integers(1, 10))
            p, q = random_dist(rng, n), random_dist(rng, n)
            if np.any((q == 0) & (p > 0)):
                q = 0.5 * q + 0.5 * p
            assert statistical_distance(p, q) <= math.sqrt(kl_nats(p, q) / 2) + tol
        for _ in range(10_000):
            s = int(rng.integers(0, 3))
            nx = int(rng.integers(1, 8))
            t = float(rng.uniform(0, 4))
            j = random_dist(rng, nx << s).reshape(nx, 1 << s)
            h = -math.log2(j.sum(axis=1).max())
            py = j.sum(axis=0)
            expect = sum(py[y] for y in range(1 << s)
                         if py[y] > 0 and -math.log2(j[:, y].max() / py[y]) < h - s - t - 1e-12)
            got = min_entropy_conditioning_tail(FiniteDistribution(j), s, t)
            assert abs(got - expect) <= tol and got < 2.0 ** -t
        assert time.perf_counter() - t0 < 60
        info["detail"] = "4 x 10^4 instances"


# ---------------------------------------------------------------- 11


def replay_oracle(idx, labels):
    pos = [0]

    def oracle(n):
        i = pos[0]
        pos[0] += n
        if pos[0] > len(idx):
            raise RuntimeError("replay data exhausted")
        return idx[i:i + n], labels[i:i + n]
    return oracle


def test_c11_label_privacy(criterion):
    with criterion(11, "phase-1 labels unused") as info:
        c = make_builtin("thr", b=4)
        t = label_private_unlabeled_size(c)
        n = 200
        rng = philox(11)
        idx = rng.integers(0, c.domain_size, t + n)
        labels = c.rows[9][idx].copy()

        def output(lab):
            res = label_private_learner(c, replay_oracle(idx, lab), 1.0, philox(111), t=t, n=n)
            return json.dumps(res.to_json(), sort_keys=True)

        ref = output(labels)
        flips = rng.integers(0, t, 100)
        for j in flips:
            lab = labels.copy()
            lab[j] ^= 1
            assert output(lab) == ref, int(j)
        # the second-phase labels do drive the output
        lab = labels.copy()
        lab[t:] ^= 1
        assert output(lab) != ref
        info["detail"] = f"100 flips among the first {t} labels"


# ---------------------------------------------------------------- 12


CLI_RUNS = [
    ["dims", "--class", "thr", "--b", "3"],
    ["ldim", "--class", "hs", "--d", "2", "--b", "1", "--construct"],
    ["cc", "--problem", "augindex", "--d", "3", "--eps", "0"],
    ["cc", "--problem", "equality", "--b", "2", "--k", "1", "--amplify", "3", "--newman", "64"],
    ["repdim", "--class", "thr", "--b", "2", "--eps", "1/4", "--k", "2"],
    ["cover", "--class", "thr", "--b", "3", "--eps", "1/4"],
    ["learn-line", "--p", "11", "--scale-range", "4", "--scale-ell", "20", "--trials", "3", "--seed", "2"],
    ["learn-dist", "--class", "thr", "--b", "3", "--trials", "3", "--seed", "2"],
    ["learn-label", "--class", "thr", "--b", "3", "--trials", "3", "--seed", "2"],
    ["audit", "--mechanism", "em", "--seed", "2"],
    ["audit", "--mechanism", "line", "--p", "5", "--eps", "0.25", "--delta", "0.5", "--pairs", "2",
     "--mode", "monte_carlo", "--trials", "2000"],
    ["stability", "--r", "0.5", "--atoms", "0.25,0.25", "--t", "8"],
    ["report"],
]


def test_c12_cli_reproducible(criterion, tmp_path):
    with criterion(12, "CLI byte-identical reruns") as info:
        for argv in CLI_RUNS:
            outs = []
            for rep in range(2):
                d = tmp_path / f"{argv[0]}-{CLI_RUNS.index(argv)}-{rep}"
                res = subprocess.run([sys.executable, "-m", "privcc", *argv, "--out", str(d)],
                                     capture_output=True)
                assert res.returncode == 0, (argv, res.stderr.decode())
                outs.append(tuple((d / f"{argv[0]}.{ext}").read_bytes() for ext in ("json", "csv")))
            assert outs[0] == outs[1], argv
        info["detail"] = f"{len(CLI_RUNS)} commands"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
