from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpoker import poker_models as pm
from qpoker import strategic_games as sg
from qpoker.verify import golden

SP, NS = pm.SIMPLIFIED_POKER, pm.NASH_SHAPLEY
NS_SEQUENCES = ["BBB", "BBP", "BPB", "BPP", "PBBB", "PBBP", "PBPB", "PBPP",
                "PPBBB", "PPBBP", "PPBPB", "PPBPP", "PPP"]


@pytest.fixture(scope="module")
def ns_full():
    return pm.strategic_form(NS)


@pytest.fixture(scope="module")
def ns_eliminated(ns_full):
    return pm.eliminate(ns_full)


def test_action_sequences():
    assert sorted(pm.enumerate_action_sequences(NS)) == sorted(NS_SEQUENCES)
    assert all(3 <= len(s) <= 5 for s in pm.enumerate_action_sequences(NS))
    assert sorted(pm.enumerate_action_sequences(SP)) == ["BB", "BP", "P"]


def test_strategy_counts():
    for p in range(3):
        plans = pm.enumerate_pure_strategies(NS, p)
        assert len(plans) == 256 and len({pl.label for pl in plans}) == 256
        assert all(len(pl.high) == len(pl.low) == 4 for pl in plans)
    assert len(pm.enumerate_pure_strategies(SP, 0)) == 4
    with pytest.raises(pm.PokerRuleError):
        pm.enumerate_pure_strategies(SP, 2)


def test_deals_are_uniform():
    for spec in (SP, NS):
        ds = pm.deals(spec)
        assert len(ds) == 2 ** spec.players
        assert sum(d.probability for d in ds) == 1


def plan(spec, player, name):
    return pm.named_plan(spec, player, name)


def test_play_out_examples():
    passive = [pm.PureStrategyPlan.from_strings(NS.info_sets(p), "PPPP", "PPPP") for p in range(3)]
    for d in pm.deals(NS):
        assert pm.play_out(NS, d, passive) == ("PPP", (0, 0, 0))
    seq, pay = pm.play_out(SP, ("H", "L"), [plan(SP, 0, "s1"), plan(SP, 1, "t1")])
    assert (seq, pay) == ("BP", (15, -15))
    seq, pay = pm.play_out(SP, ("L", "H"), [plan(SP, 0, "s2"), plan(SP, 1, "t2")])
    assert (seq, pay) == ("BB", (-25, 25))
    seq, pay = pm.play_out(SP, ("H", "H"), [plan(SP, 0, "s2"), plan(SP, 1, "t2")])
    assert pay == (0, 0)


def test_three_way_split_is_exact():
    spec = pm.PokerSpec(pm.Variant.NASH_SHAPLEY, 1, 1)
    assert pm.settle(spec, ("H", "H", "H"), "BBB") == (0, 0, 0)
    assert pm.settle(spec, ("H", "H", "L"), "BBB") == (1, 1, -2)
    spec = pm.PokerSpec(pm.Variant.NASH_SHAPLEY, 1, 2)
    assert pm.settle(spec, ("H", "L", "L"), "BPB") == (Fraction(4), Fraction(-1), Fraction(-3))


def test_malformed_plan_rejected():
    with pytest.raises(pm.PokerRuleError):
        pm.PureStrategyPlan.from_strings(NS.info_sets(0), "PPP", "PPPP")
    with pytest.raises(pm.PokerRuleError):
        pm.PureStrategyPlan.from_strings(SP.info_sets(0), "X", "P")
    with pytest.raises(pm.PokerRuleError):
        pm.PokerSpec(pm.Variant.SIMPLIFIED, -1, 1)


def conserves(spec):
    for d in pm.deals(spec):
        for seq in pm.enumerate_action_sequences(spec):
            assert sum(pm.settle(spec, d.cards, seq)) == 0


@given(st.fractions(0, 100, max_denominator=5), st.fractions(0, 100, max_denominator=5))
@settings(max_examples=25)
def test_money_is_conserved(ante, bet):
    for variant in pm.Variant:
        conserves(pm.PokerSpec(variant, ante, bet))


@given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 5))
@settings(max_examples=20)
def test_sp_form_scales_with_stakes(ante, bet, c):
    small = pm.strategic_form(pm.PokerSpec(pm.Variant.SIMPLIFIED, ante, bet))
    big = pm.strategic_form(pm.PokerSpec(pm.Variant.SIMPLIFIED, c * ante, c * bet))
    assert all(tuple(c * v for v in small.payoff(p)) == big.payoff(p) for p in small.profiles())


def test_sp_strategic_form_restricts_to_table(sp_game):
    full = pm.strategic_form(SP)
    assert full.is_zero_sum()
    assert pm.named_restriction(SP, full).equals(golden("sp"))
    assert sp_game.equals(golden("sp"))


def test_zero_stakes_give_zero_tensor():
    for variant in pm.Variant:
        g = pm.strategic_form(pm.PokerSpec(variant, 0, 0)) if variant is pm.Variant.SIMPLIFIED \
            else None
        if g is not None:
            assert not g.numer.any()
    g = pm.strategic_form(pm.PokerSpec(pm.Variant.NASH_SHAPLEY, 0, 0))
    assert g.shape == (256, 256, 256) and not g.numer.any()


def test_ns_strategic_form(ns_full):
    assert ns_full.shape == (256, 256, 256)
    assert ns_full.is_zero_sum()
    assert pm.named_restriction(NS, ns_full).equals(golden("ns"))
    assert pm.named_restriction(NS, ns_full).payoff_by_label("s2", "t2", "u2") == (10, 10, -20)


def test_ns_matches_brute_force_on_sampled_profiles(ns_full):
    rng = np.random.default_rng(11)
    plans = [pm.enumerate_pure_strategies(NS, p) for p in range(3)]
    for _ in range(40):
        idx = tuple(int(x) for x in rng.integers(0, 256, 3))
        total = [Fraction(0)] * 3
        for d in pm.deals(NS):
            _, pay = pm.play_out(NS, d, [plans[p][idx[p]] for p in range(3)])
            total = [t + d.probability * v for t, v in zip(total, pay)]
        assert ns_full.payoff(idx) == tuple(total)


def test_quotient(ns_eliminated):
    sp_full = pm.strategic_form(SP)
    q = pm.quotient_payoff_equivalent(sp_full)
    assert [len(c) for c in q.classes] == [4, 4]
    assert pm.quotient_payoff_equivalent(q.game).game.equals(q.game)
    _, quot, _ = ns_eliminated
    # players 1 and 2 have decisions that no opponent play can reach; player 3 does not
    assert [len(c) for c in quot.classes] == [81, 100, 256]
    assert sum(len(m) for m in quot.classes[0]) == 256
    again = pm.quotient_payoff_equivalent(quot.game)
    assert again.game.shape == quot.game.shape


def test_prisoners_dilemma_reduces_to_equilibrium(pd_game):
    reduced, trace = pm.reduce_by_dominance(pd_game, "strong")
    assert reduced.labels == (("s2",), ("t2",))
    assert pm.verify_trace(pd_game, trace)


def test_ns_elimination(ns_eliminated, ns_full):
    reduced, quot, trace = ns_eliminated
    assert reduced.shape == (2, 2, 2)
    assert pm.verify_trace(quot.game, trace)
    named = pm.name_survivors(NS, reduced, quot, ns_full)
    assert named is not None and named.equals(golden("ns"))
    # no survivor folds H when facing a bet; the strong phase already removes some of them
    facing = {0: ("PBB", "PBP", "PPB"), 1: ("B", "PPBB", "PPBP"), 2: ("BB", "BP", "PB")}

    def folds_high(player, label):
        high = label.split("/")[0][2:]
        return any(high[k] == "P" for k, s in enumerate(NS.info_sets(player)) if s in facing[player])

    for p in range(3):
        assert not any(folds_high(p, pm.named_plan(NS, p, name).label)
                       for name in named.labels[p])
        strong = [e for e in trace if e.player == p and e.mode == "strong"]
        assert any(folds_high(p, e.removed) for e in strong)


def test_trace_csv_header(ns_eliminated):
    _, _, trace = ns_eliminated
    csv_text = pm.trace_to_csv(trace)
    lines = csv_text.splitlines()
    assert lines[0] == "round,player,removed,dominator,mode"
    assert len(lines) == len(trace) + 1


def test_tampered_trace_fails(pd_game):
    _, trace = pm.reduce_by_dominance(pd_game, "strong")
    bad = [pm.Elimination(e.round, e.player, e.dominator, e.removed, e.mode) for e in trace]
    assert not pm.verify_trace(pd_game, bad)


def test_builtin_sp_is_the_reduced_form(sp_game):
    full = pm.strategic_form(SP)
    reduced, quot, _ = pm.eliminate(full)
    assert pm.name_survivors(SP, reduced, quot, full).equals(sp_game)
