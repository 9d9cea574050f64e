import json
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from electsim import EmptyDistrictError, InvalidParameterError
from electsim.ballots import (
    Approval,
    KApproval,
    NegativeVote,
    TransferableVote,
    WeightedKApproval,
    cast_approval,
    cast_k_approval,
    cast_negative_vote,
    cast_transferable_vote,
    cast_weighted_k_approval,
)
from electsim.population import Electorate
from electsim.preferences import rank_from_valuations
from electsim.tally import (
    POLICIES,
    MinVotes,
    TopM,
    TopOne,
    net_plurality,
    plurality,
    plurality_with_transfer,
    run_district_election,
    select,
    selection_from_dict,
    transfer_from_pair_counts,
    weighted_plurality,
    write_score_table,
)

from conftest import A, B, C, SIX_VOTERS

TV = TransferableVote


class TestSelection:
    def test_tie_goes_to_lower_index(self):
        assert select([5, 5, 2]) == (0,)

    def test_top_m(self):
        assert select([1, 3, 3, 0], TopM(2)) == (1, 2)

    def test_min_votes(self):
        assert select([4, 1, 6], MinVotes(4)) == (2, 0)
        assert select([1, 1], MinVotes(5)) == ()

    def test_from_dict(self):
        assert selection_from_dict({"kind": "top_m", "m": 2}) == TopM(2)
        with pytest.raises(InvalidParameterError):
            selection_from_dict({"kind": "lottery"})

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            TopM(0)
        with pytest.raises(InvalidParameterError):
            MinVotes(-1)


class TestPlurality:
    def test_two_party_district(self):
        ballots = [KApproval((A,))] * 3 + [KApproval((B,))] * 2
        assert plurality(ballots).elected == (A,)

    def test_six_voter_first_choices(self):
        ballots = [cast_k_approval(r, 1) for r in SIX_VOTERS]
        t = plurality(ballots)
        assert t.scores.tolist() == [3, 2, 1]
        assert t.elected == (A,)

    def test_index_tie_break(self):
        ballots = [KApproval((0,))] * 5 + [KApproval((1,))] * 5 + [KApproval((2,))] * 2
        assert plurality(ballots).elected == (0,)

    def test_empty(self):
        with pytest.raises(EmptyDistrictError):
            plurality([])

    def test_mixed_families(self):
        with pytest.raises(InvalidParameterError):
            plurality([KApproval((0,)), Approval((1,))])


class TestWeighted:
    def test_hand_arithmetic(self):
        ballots = [WeightedKApproval(((A, 1), (B, 0.5)))] * 2 + [WeightedKApproval(((B, 1), (A, 0.5)))]
        t = weighted_plurality(ballots)
        assert t.scores.tolist() == [2.5, 2.0]
        assert t.elected == (A,)

    def test_single(self):
        assert weighted_plurality([WeightedKApproval(((C, 1),))]).elected == (C,)

    @given(st.lists(st.permutations([0, 1, 2, 3]), min_size=1, max_size=30))
    def test_unit_weights_reduce_to_plurality(self, orders):
        a = weighted_plurality([cast_weighted_k_approval(o, [1, 1]) for o in orders], n_parties=4)
        b = plurality([cast_k_approval(o, 2) for o in orders], n_parties=4)
        assert a.scores.tolist() == b.scores.tolist()
        assert a.elected == b.elected


class TestNet:
    def test_hand_arithmetic(self):
        ballots = [NegativeVote(A, C)] * 3 + [NegativeVote(B, A)] * 2
        t = net_plurality(ballots)
        assert t.scores.tolist() == [1, 2, -3]
        assert t.elected == (B,)

    def test_two_parties(self):
        t = net_plurality([NegativeVote(A, B)])
        assert t.scores.tolist() == [1, -1]
        assert t.elected == (A,)

    def test_symmetric_tie(self):
        assert net_plurality([NegativeVote(A, B), NegativeVote(B, A)]).elected == (A,)


class TestTransfer:
    def test_elimination_run(self):
        ballots = [TV(A, B)] * 4 + [TV(B, C)] * 3 + [TV(C, B)] * 2
        t = plurality_with_transfer(ballots)
        assert t.eliminated == (C,)
        assert t.elected == (B,)
        assert t.scores.tolist() == [4, 5, 0]

    def test_immediate_majority(self):
        t = plurality_with_transfer([TV(A, B)] * 5)
        assert t.elected == (A,)
        assert t.eliminated == ()

    def test_transfer_to_standing_second(self):
        ballots = [TV(A, C)] * 2 + [TV(B, C)] * 2 + [TV(C, A)]
        t = plurality_with_transfer(ballots)
        assert t.eliminated == (C,)
        assert t.elected == (A,)
        assert t.scores[A] == 3

    def test_exhausted_ballots_drop_out(self):
        # party 3 goes first and its ballot moves to C; when C falls that ballot has no third choice
        ballots = [TV(A, B)] * 4 + [TV(B, A)] * 3 + [TV(C, B)] * 2 + [TV(3, C)] * 1
        t = plurality_with_transfer(ballots)
        assert t.eliminated == (3, C)
        assert t.elected == (B,)
        assert t.scores.sum() == 9

    def test_top_m(self):
        ballots = [TV(A, B)] * 4 + [TV(B, C)] * 3 + [TV(C, B)] * 2
        assert plurality_with_transfer(ballots, TopM(2)).elected == (B, A)

    def test_elimination_tie_drops_highest_index(self):
        ballots = [TV(A, B)] * 3 + [TV(B, A)] * 1 + [TV(C, A)] * 1
        t = plurality_with_transfer(ballots, TopM(2))
        assert t.eliminated == (C,)

    @given(st.lists(st.permutations([0, 1, 2, 3]), min_size=1, max_size=40), st.sampled_from([TopOne(), TopM(2), MinVotes(3)]))
    @settings(max_examples=200)
    def test_pair_counts_agree_with_ballots(self, orders, policy):
        ballots = [cast_transferable_vote(o) for o in orders]
        pairs = np.zeros((4, 4), dtype=int)
        for b in ballots:
            pairs[b.first, b.second] += 1
        a = plurality_with_transfer(ballots, policy, n_parties=4)
        b = transfer_from_pair_counts(pairs, policy)
        assert a.elected == b.elected
        assert a.eliminated == b.eliminated
        assert a.scores.tolist() == b.scores.tolist()

    @given(st.lists(st.permutations([0, 1, 2]), min_size=1, max_size=30))
    def test_majority_wins_without_elimination(self, orders):
        ballots = [cast_transferable_vote(o) for o in orders]
        firsts = np.bincount([b.first for b in ballots], minlength=3)
        if firsts.max() * 2 > len(ballots):
            t = plurality_with_transfer(ballots)
            assert t.eliminated == ()
            assert t.elected == (int(firsts.argmax()),)


class TestAnonymity:
    @given(st.lists(st.permutations([0, 1, 2, 3]), min_size=1, max_size=30), st.randoms(use_true_random=False))
    def test_permuting_ballots(self, orders, rnd):
        shuffled = list(orders)
        rnd.shuffle(shuffled)
        for cast, tally in [
            (lambda o: cast_k_approval(o, 2), plurality),
            (lambda o: cast_weighted_k_approval(o, [1, 0.5]), weighted_plurality),
            (cast_negative_vote, net_plurality),
            (cast_transferable_vote, plurality_with_transfer),
        ]:
            x = tally([cast(o) for o in orders], n_parties=4)
            y = tally([cast(o) for o in shuffled], n_parties=4)
            assert x.elected == y.elected
            assert x.scores.tolist() == y.scores.tolist()


def _ballot_route(electorate, values, policy_id, selection):
    rankings = rank_from_valuations(values)
    k = values.shape[1]
    winners = []
    for s in range(electorate.n_districts):
        idx = np.flatnonzero(electorate.district_of == s)
        if policy_id == "1-approval":
            t = plurality([cast_k_approval(rankings[i], 1) for i in idx], selection, k)
        elif policy_id == "2-approval":
            t = plurality([cast_k_approval(rankings[i], 2) for i in idx], selection, k)
        elif policy_id == "weighted-2-approval":
            t = weighted_plurality([cast_weighted_k_approval(rankings[i], [1, 0.5]) for i in idx], selection, k)
        elif policy_id == "approval":
            t = plurality([cast_approval(values[i]) for i in idx], selection, k)
        elif policy_id == "negative-vote":
            t = net_plurality([cast_negative_vote(rankings[i]) for i in idx], selection, k)
        else:
            t = plurality_with_transfer([cast_transferable_vote(rankings[i]) for i in idx], selection, k)
        winners.append(t.elected)
    return tuple(winners)


def _random_electorate(seed, n=120, s=6, k=4):
    g = np.random.default_rng(seed)
    district = g.permutation(np.repeat(np.arange(s), n // s))
    # a few heavy parties so that ties are rare but elections are contested
    values = g.normal(size=(n, k)) + g.normal(size=k)
    return Electorate(s, np.zeros(n, dtype=int), district), values


@pytest.mark.parametrize("policy_id", POLICIES)
@pytest.mark.parametrize("selection", [TopOne(), TopM(2), MinVotes(10)])
def test_array_route_matches_ballot_route(policy_id, selection):
    for seed in range(5):
        e, values = _random_electorate(seed)
        outcome = run_district_election(e, values, policy_id, selection)
        assert outcome.winners == _ballot_route(e, values, policy_id, selection)


@given(st.integers(0, 2**32 - 1), st.sampled_from(POLICIES))
@settings(max_examples=60, deadline=None)
def test_seat_conservation(seed, policy_id):
    e, values = _random_electorate(seed, n=200, s=10, k=5)
    out = run_district_election(e, values, policy_id)
    assert out.seats.sum() == e.n_districts
    assert all(len(w) == 1 for w in out.winners)


def test_two_party_profiles(two_party):
    e, v = two_party["upper"]
    assert run_district_election(e, v, "1-approval").seats.tolist() == [5, 0]
    e, v = two_party["lower"]
    assert run_district_election(e, v, "1-approval").seats.tolist() == [2, 3]


def test_empty_winner_warning(caplog):
    e, v = _random_electorate(0)
    with caplog.at_level(logging.WARNING):
        out = run_district_election(e, v, "1-approval", MinVotes(10_000))
    assert out.seats.sum() == 0
    assert "elected nobody" in caplog.text


def test_outcome_serialisation(tmp_path, two_party):
    e, v = two_party["lower"]
    out = run_district_election(e, v, "1-approval")
    assert json.loads(out.to_json()) == {"seats": [2, 3], "winners": [[0], [0], [1], [1], [1]]}
    path = tmp_path / "scores.csv"
    write_score_table(out, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "district,party,score,elected"
    assert lines[1:3] == ["0,0,5.0,1", "0,1,0.0,0"]
    assert len(lines) == 1 + 5 * 2


def test_unknown_policy(two_party):
    e, v = two_party["upper"]
    with pytest.raises(InvalidParameterError):
        run_district_election(e, v, "borda")


def test_deterministic():
    e, v = _random_electorate(3)
    a = run_district_election(e, v, "transferable-vote")
    b = run_district_election(e, v, "transferable-vote")
    assert a.winners == b.winners
