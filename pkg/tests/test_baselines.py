import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from orgchart.baselines import NeighborModel, score_aa, score_cn, score_jc, score_pair_with
from orgchart.errors import EmptyClass, UnknownUser

from oracles import net_from_edges, random_network


def model(follows, users="uvabcw"):
    return NeighborModel(net_from_edges(users, users[0], follows))


AB_BC = [("u", "a"), ("b", "u"), ("v", "b"), ("c", "v")]  # N(u) = {a, b}, N(v) = {b, c}


def test_cn():
    assert score_cn(model([("u", "a"), ("v", "b")]), "u", "v") == 0
    assert score_cn(model(AB_BC), "u", "v") == 1


def test_jc():
    m = model(AB_BC)
    assert score_jc(m, "u", "v") == pytest.approx(1 / 3)
    assert score_jc(model([]), "u", "v") == 0
    assert score_jc(model([("u", "a"), ("a", "v")]), "u", "v") == 1


def test_aa():
    assert score_aa(model([("u", "a"), ("v", "b")]), "u", "v") == 0
    # w's only neighbours are u and v
    assert score_aa(model([("u", "w"), ("w", "v")]), "u", "v") == pytest.approx(1 / math.log(2))


def test_errors():
    m = model(AB_BC)
    with pytest.raises(UnknownUser):
        score_cn(m, "u", "zz")
    with pytest.raises(ValueError):
        score_jc(m, "u", "u")
    with pytest.raises(EmptyClass):
        score_pair_with("cn", m, [], ["v"])


def test_pair_scoring_shape():
    cs = score_pair_with("jc", model(AB_BC), ["u", "v"], ["a", "b", "c"], 2)
    assert len(cs) == 6 and cs.upper_class == 2 and cs.features is None


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_random_20_nodes_against_sets(seed):
    net = random_network(random.Random(seed), 20, p_follow=0.12)
    m = NeighborModel(net)
    nb = {u: {b for a, b in net.follows if a == u} | {a for a, b in net.follows if b == u} for u in net.users}
    users = sorted(net.users)
    for u in users:
        assert (u in nb) and all(u in nb[v] for v in nb[u])
        for v in users:
            if u == v:
                continue
            common = nb[u] & nb[v]
            union = nb[u] | nb[v]
            cn, jc, aa = score_cn(m, u, v), score_jc(m, u, v), score_aa(m, u, v)
            assert cn == len(common) == score_cn(m, v, u)
            assert jc == (len(common) / len(union) if union else 0) == score_jc(m, v, u)
            assert aa == pytest.approx(sum(1 / math.log(len(nb[w])) for w in common if len(nb[w]) > 1))
            assert aa == pytest.approx(score_aa(m, v, u))
            assert jc <= 1
            assert (cn == 0) == (jc == 0) == (aa == 0)
