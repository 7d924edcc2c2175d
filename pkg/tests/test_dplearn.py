import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privcc.concepts import ConceptClass, FiniteDistribution, make_builtin
from privcc.dplearn import (Hypothesis, LineLearnerConfig, bad_log_t_values, boost_runs,
                            boost_selection_samples, dist_specific_learner, em_probabilities,
                            exponential_mechanism, freq_and_instability, freq_and_instability_codes,
                            label_private_learner, laplace_sample, laplace_sf, line_basic_learner,
                            line_boosted_learner, line_overall_learner, make_oracle, pac_evaluate,
                            prdim_learner, release_probability, stability_probs)
from privcc.dplearn.mechanisms import laplace_from_uniform
from privcc.repdim import DetRepresentation, ProbRepresentation

P = 5


def philox(seed):
    return np.random.Generator(np.random.Philox(seed))


# ---------------------------------------------------------------- hypotheses and the basic learner


def test_order():
    hs = [Hypothesis.line(0, 1, P), Hypothesis.zero(P), Hypothesis.point(2, 0, P), Hypothesis.point(1, 4, P)]
    assert sorted(hs) == [hs[1], hs[3], hs[2], hs[0]]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 1 + 2 * P * P - 1))
def test_code_round_trip(code):
    h = Hypothesis.from_code(code, P)
    assert h.code == code
    idx = np.arange(P * P)
    assert np.array_equal(h.evaluate(idx), h.row())


def test_line_row():
    row = Hypothesis.line(2, 1, 7).row()
    assert {divmod(int(i), 7) for i in np.flatnonzero(row)} == {(x, (2 * x + 1) % 7) for x in range(7)}


def test_basic_learner_examples():
    assert line_basic_learner([(1, 3), (2, 5)], [1, 1], 7).hypothesis == Hypothesis.line(2, 1, 7)
    assert line_basic_learner([(4, 2)], [1], 7).hypothesis == Hypothesis.point(4, 2, 7)
    assert line_basic_learner([(4, 2), (1, 1)], [0, 0], 7).hypothesis == Hypothesis.zero(7)


def test_basic_learner_non_realizable():
    res = line_basic_learner([(1, 1), (2, 2), (3, 0)], [1, 1, 1], 7)
    assert res.hypothesis == Hypothesis.line(1, 0, 7) and not res.realizable
    same_x = line_basic_learner([(1, 1), (1, 2)], [1, 1], 7)
    assert not same_x.realizable


def test_basic_learner_deterministic():
    rng = philox(4)
    pts = rng.integers(0, P * P, 30)
    labels = Hypothesis.line(3, 2, P).evaluate(pts)
    a = line_basic_learner(pts, labels, P)
    b = line_basic_learner(pts.copy(), labels.copy(), P)
    assert a == b and a.hypothesis == Hypothesis.line(3, 2, P)


# ---------------------------------------------------------------- frequency and instability


UNIVERSE = sorted([Hypothesis.zero(P)] + [Hypothesis.point(x, y, P) for x in range(P) for y in range(P)]
                  + [Hypothesis.line(a, b, P) for a in range(P) for b in range(P)])


def argmax_lex(h_list):
    counts = Counter(h_list)
    return min(counts, key=lambda h: (-counts[h], h))


def instability_oracle(h_list):
    """Fewest positions to rewrite (with any hypothesis) so that the winner changes."""
    top = argmax_lex(h_list)
    fresh = next(h for h in UNIVERSE if h not in h_list)
    cands = sorted(set(h_list)) + [fresh]
    for k in range(1, len(h_list) + 1):
        for pos in itertools.combinations(range(len(h_list)), k):
            for vals in itertools.product(cands, repeat=k):
                new = list(h_list)
                for i, v in zip(pos, vals):
                    new[i] = v
                if argmax_lex(new) != top:
                    return k
    raise AssertionError("unreachable")


BASE = [Hypothesis.zero(P), Hypothesis.point(0, 0, P), Hypothesis.point(1, 2, P),
        Hypothesis.line(0, 0, P), Hypothesis.line(1, 1, P)]


@settings(max_examples=120, deadline=None)
@given(st.lists(st.sampled_from(BASE), min_size=1, max_size=8).filter(lambda v: len(set(v)) <= 3))
def test_instability_matches_exhaustive_search(h_list):
    top, c = freq_and_instability(h_list)
    assert top == argmax_lex(h_list)
    assert c == instability_oracle(h_list)
    assert freq_and_instability_codes([h.code for h in h_list]) == (top.code, c)


def test_instability_examples():
    g, h = Hypothesis.point(1, 1, P), Hypothesis.line(1, 1, P)
    assert freq_and_instability([h, h, h]) == (h, 2)
    assert freq_and_instability([h, h, h, g]) == (h, 1)
    assert freq_and_instability([h, g]) == (g, 1)


# ---------------------------------------------------------------- mechanisms


def test_laplace_symmetry_and_median():
    assert laplace_from_uniform(0.0, 2.0) == 0.0
    draws = laplace_sample(2.0, philox(0), size=10 ** 6)
    assert abs(np.median(draws)) <= 0.02
    with pytest.raises(ValueError):
        laplace_sample(0.0, philox(0))


def test_laplace_tail_equals_beta():
    for alpha, beta in ((1.0, 0.05), (0.5, 0.1), (2.0, 0.01)):
        assert laplace_sf(math.log(1 / (2 * beta)) / alpha, 1 / alpha) == pytest.approx(beta, rel=1e-12)


def test_laplace_empirical_tail():
    draws = laplace_sample(1.0, philox(1), size=200000)
    assert (draws > 1.5).mean() == pytest.approx(0.5 * math.exp(-1.5), abs=0.004)


def test_em_probabilities():
    p = em_probabilities([10, 8], 1.0)
    assert p[0] == pytest.approx(1 / (1 + math.exp(-1)), abs=1e-12)
    assert em_probabilities([20, 10], 2.0)[0] == pytest.approx(1 / (1 + math.exp(-10)), abs=1e-12)
    assert em_probabilities([3], 1.0).tolist() == [1.0]
    assert em_probabilities([4, 4, 4, 4], 1.0) == pytest.approx([0.25] * 4)
    with pytest.raises(ValueError):
        em_probabilities([], 1.0)


def test_em_tail_bound():
    q = np.array([30, 29, 27, 24, 20, 15, 10, 5])
    alpha, n = 0.5, 100000
    rng = philox(2)
    picks = np.array([exponential_mechanism(range(len(q)), lambda s, h: q[h], None, alpha, rng)[0]
                      for _ in range(2000)])
    probs = em_probabilities(q, alpha)
    picks = np.concatenate([picks, rng.choice(len(q), size=n - len(picks), p=probs)])
    from privcc.stats import clopper_pearson
    for t in (2, 4, 6, 8, 12):
        k = int((q[picks] < q.max() - t).sum())
        lo, _ = clopper_pearson(k, n)
        assert lo <= len(q) * math.exp(-alpha * t / 2)


# ---------------------------------------------------------------- configuration


def test_config_formulas():
    cfg = LineLearnerConfig(7, 0.2, 0.5, 1.0, 0.05)
    assert cfg.ell == 150
    assert cfg.k_range == (2, 14)
    assert cfg.log_lo == pytest.approx(math.log2(math.log(1.5) / 0.2))
    assert cfg.deviation_flags == ["parameter-outside-(0,1/2):delta", "parameter-outside-(0,1/2):alpha"]
    assert boost_runs(0.1) == 11
    assert boost_selection_samples(0.2, 1.0, 0.1, 11) == 487
    assert release_probability(1, cfg) == pytest.approx(0.05, rel=1e-12)


def test_config_overrides_flagged():
    cfg = LineLearnerConfig(101, 0.2, 0.25, 0.4, 0.05, range_width_override=8, ell_override=40)
    assert cfg.k_range == (2, 10) and cfg.ell == 40
    assert cfg.deviation_flags == ["non-paper-constants:range_width", "non-paper-constants:ell"]


@pytest.mark.parametrize("kw", [dict(p=6), dict(eps=0), dict(delta=1.0), dict(alpha=0), dict(beta=-0.1)])
def test_config_rejects(kw):
    base = dict(p=5, eps=0.2, delta=0.25, alpha=0.4, beta=0.05) | kw
    with pytest.raises(ValueError):
        LineLearnerConfig(**base)


# ---------------------------------------------------------------- stability analysis


def stability_oracle(r, atoms, t):
    """Distribution of the set of distinct positive atoms seen in t draws, by dynamic programming."""
    atoms = list(atoms)
    neg = 1.0 - r
    probs = {0: 1.0}
    for _ in range(t):
        nxt = {}
        for S, pr in probs.items():
            nxt[S] = nxt.get(S, 0.0) + pr * neg
            for i, a in enumerate(atoms):
                T = S | (1 << i)
                nxt[T] = nxt.get(T, 0.0) + pr * a
        probs = nxt
    none = probs.get(0, 0.0)
    one = sum(v for S, v in probs.items() if S and S & (S - 1) == 0)
    return none, one, 1.0 - none - one


def test_stability_examples():
    s = stability_probs(0.5, [0.5], 3)
    assert (s.none, s.one, s.two) == pytest.approx((1 / 8, 7 / 8, 0.0), abs=1e-12)
    s = stability_probs(0.5, [0.25, 0.25], 8)
    assert s.none == pytest.approx(0.5 ** 8)
    assert s.one == pytest.approx(2 * (0.75 ** 8 - 0.5 ** 8))
    assert s.two == pytest.approx(1 - 0.5 ** 8 - 2 * (0.75 ** 8 - 0.5 ** 8))
    assert s.bound_two == pytest.approx((1 - math.exp(-2)) * (1 - math.exp(-1)))
    assert s.bounds_ok
    z = stability_probs(0.0, [], 5)
    assert z.none == 1.0 and z.one == 0.0 and z.two == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 10), min_size=1, max_size=4), st.integers(0, 10), st.integers(1, 12))
def test_stability_matches_subset_dp(ws, neg, t):
    total = sum(ws) + neg
    atoms = [w / total for w in ws]
    r = sum(atoms)
    s = stability_probs(r, atoms, t)
    none, one, two = stability_oracle(r, atoms, t)
    assert (s.none, s.one, s.two) == pytest.approx((none, one, two), abs=1e-12)
    assert s.none + s.one + s.two == pytest.approx(1.0, abs=1e-12)


def test_stability_rejects_inconsistent_atoms():
    with pytest.raises(ValueError):
        stability_probs(0.5, [0.1, 0.1], 4)


def test_bad_values_match_oracle():
    rng = philox(7)
    for _ in range(20):
        w = rng.dirichlet(np.ones(5))
        atoms = list(w[:3])
        r = float(sum(atoms))
        expect = [k for k in range(0, 8) if max(stability_oracle(r, atoms, 1 << k)) < 2 / 3]
        assert bad_log_t_values(r, atoms, range(0, 8)) == expect


def test_more_than_three_bad_values_occur():
    # a line-supported setting whose bad exponents, confirmed by the subset DP, number four
    atoms = [0.187, 0.159]
    r = sum(atoms)
    bad = [k for k in range(0, 12) if max(stability_oracle(r, atoms, 1 << k)) < 2 / 3]
    assert bad_log_t_values(r, atoms, range(0, 12)) == bad
    assert len(bad) == 4


# ---------------------------------------------------------------- learners


def line_setup(p, a, b):
    f = Hypothesis.line(a, b, p).row()
    return f, FiniteDistribution.uniform(p * p)


def test_overall_learner_finds_line():
    cfg = LineLearnerConfig(7, 0.2, 0.25, 1.0, 0.05, range_width_override=4, ell_override=40)
    f, d = line_setup(7, 3, 2)
    target = Hypothesis.line(3, 2, 7)
    consistent = {Hypothesis.zero(7), target} | {Hypothesis.point(x, (3 * x + 2) % 7, 7) for x in range(7)}
    hits = 0
    for s in range(20):
        run = line_overall_learner(cfg, make_oracle(d, f, philox(100 + s)), philox(s))
        assert run.samples_used == run.t * run.ell
        # every candidate agrees with realizable data, so only these outputs are possible
        assert run.hypothesis in consistent
        hits += run.hypothesis == target
    assert hits > 0


def test_boosted_learner_structure():
    cfg = LineLearnerConfig(7, 0.2, 0.25, 1.0, 0.05, range_width_override=4, ell_override=40)
    f, d = line_setup(7, 1, 4)
    run = line_boosted_learner(cfg, make_oracle(d, f, philox(1)), philox(2))
    assert run.runs == boost_runs(0.25) == len(run.candidates)
    assert sum(run.probabilities) == pytest.approx(1.0)


def test_prdim_learner():
    t = make_builtin("thr", b=2)
    d = FiniteDistribution.uniform(4)
    rep = ProbRepresentation.point_mass(DetRepresentation(t.rows[[2]]))
    res = prdim_learner(rep, make_oracle(d, t.rows[0], philox(0)), 10, 1.0, philox(1))
    assert res.hypothesis.row().tolist() == t.rows[2].tolist()
    rep2 = ProbRepresentation.point_mass(DetRepresentation(t.rows[[0, 3]]))
    res = prdim_learner(rep2, make_oracle(d, t.rows[0], philox(0)), 0, 1.0, philox(1))
    assert res.probabilities == (0.5, 0.5)


def test_dist_specific_learner_singleton():
    c = ConceptClass.from_rows([[1, 0, 1]])
    d = FiniteDistribution.uniform(3)
    res = dist_specific_learner(c, d, make_oracle(d, c.rows[0], philox(0)), 1.0, philox(1))
    assert res.hypothesis.row().tolist() == [1, 0, 1]


def test_label_private_singleton():
    c = ConceptClass.from_rows([[0, 1, 1, 0]])
    d = FiniteDistribution.uniform(4)
    res = label_private_learner(c, make_oracle(d, c.rows[0], philox(0)), 1.0, philox(1))
    assert res.hypothesis.row().tolist() == [0, 1, 1, 0]


def test_label_private_thr_accuracy():
    t = make_builtin("thr", b=2)
    d = FiniteDistribution.uniform(4)
    for target in range(4):
        rep = pac_evaluate(lambda o, r: label_private_learner(t, o, 1.0, r), t, target, d, 200,
                           Fraction(1, 4), seed=target)
        assert rep.success_rate >= 0.75


def test_pac_evaluate_trivial():
    t = make_builtin("thr", b=2)
    d = FiniteDistribution.uniform(4)
    good = pac_evaluate(lambda o, r: Hypothesis.table(t.rows[1]), t, 1, d, 5, Fraction(0))
    assert good.success_rate == 1.0
    bal = np.array([1, 1, 0, 0], dtype=np.uint8)
    bad = pac_evaluate(lambda o, r: Hypothesis.table(1 - bal), t, bal, d, 5, Fraction(9, 10))
    assert bad.success_rate == 0.0 and bad.errors[0] == 1
    half = Hypothesis.table([1, 0, 1, 0])
    assert pac_evaluate(lambda o, r: half, t, bal, d, 3, Fraction(1, 2)).errors[0] == Fraction(1, 2)
    assert pac_evaluate(lambda o, r: half, t, bal, d, 3, Fraction(1, 2)).success_rate == 1.0
    assert pac_evaluate(lambda o, r: half, t, bal, d, 3, Fraction(2, 5)).success_rate == 0.0


def test_pac_evaluate_agnostic():
    t = make_builtin("thr", b=1)
    joint = FiniteDistribution(np.array([[0.3, 0.2], [0.1, 0.4]]))
    # thresholds [1,1] and [0,1] mislabel mass 0.3 + 0.1 and 0.2 + 0.1
    best = pac_evaluate(lambda o, r: Hypothesis.table([0, 1]), t, None, None, 4, 0.0, joint=joint)
    assert best.success_rate == 1.0 and best.errors[0] == pytest.approx(0.3)
    other = pac_evaluate(lambda o, r: Hypothesis.table([1, 1]), t, None, None, 4, 0.0, joint=joint)
    assert other.success_rate == 0.0 and other.errors[0] == pytest.approx(0.4)
    assert pac_evaluate(lambda o, r: Hypothesis.table([1, 1]), t, None, None, 4, 0.15,
                        joint=joint).success_rate == 1.0
