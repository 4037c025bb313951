import numpy as np
import pytest
from conftest import Line, boundary_net
from mdp_gen import random_layered_mdp

from mosaic.abstraction import build_mdp
from mosaic.faults import sticky

from mosaic.errors import BadDistribution, ChoiceOnFailState, MosaicError, ParseError
from mosaic.geometry import Box
from mosaic.mdp import AbstractMdp, add_choice, add_state, export_model, import_model, isomorphic


def test_choice_on_fail_state():
    mdp = AbstractMdp()
    f = add_state(mdp, Box([0], [1]), True, 0)
    t = add_state(mdp, Box([1], [2]), False, 1)
    with pytest.raises(ChoiceOnFailState):
        add_choice(mdp, f, [(1.0, t)])


def test_distribution_checks():
    mdp = AbstractMdp()
    s = [mdp.add_state(Box([i], [i + 1]), False, 0) for i in range(3)]
    assert add_choice(mdp, s[0], [(0.5, s[1]), (0.5, s[2])]) == 0
    with pytest.raises(BadDistribution):
        add_choice(mdp, s[0], [(0.6, s[1]), (0.5, s[2])])
    with pytest.raises(BadDistribution):
        add_choice(mdp, s[0], [(1.0, 99)])
    with pytest.raises(BadDistribution):
        add_choice(mdp, s[0], [(0.0, s[1]), (1.0, s[2])])
    assert add_choice(mdp, s[0], [(1.0, s[1])]) == 1


def test_dedup():
    mdp = AbstractMdp()
    a = mdp.add_state(Box([0, 0], [1, 1]), False, 2)
    assert mdp.add_state(Box([0.0, 0.0], [1.0, 1.0]), False, 2) == a
    assert mdp.add_state(Box([0, 0], [1, 1]), False, 3) != a
    assert len(mdp) == 2 and mdp.find(Box([0, 0], [1, 1]), 3) == 1


def test_frozen():
    mdp = AbstractMdp()
    mdp.add_state(Box([0], [1]), False, 0)
    mdp.freeze()
    with pytest.raises(MosaicError):
        mdp.add_state(Box([1], [2]), False, 0)


def chain():
    mdp = AbstractMdp()
    a = mdp.add_state(Box([0], [1]), False, 0)
    b = mdp.add_state(Box([1], [2]), False, 1)
    mdp.mark_initial(a)
    mdp.add_choice(a, [(1.0, b)])
    return mdp


def test_export_chain(tmp_path):
    tra, lab, sta = export_model(chain(), tmp_path / "m.tra")
    lines = tra.read_text().split("\n")
    assert lines[0] == "2 2 2"
    assert [l for l in lines[1:] if l] == ["0 0 1 1", "1 0 1 1"]
    assert lab.read_text().split("\n")[:2] == ['0="init" 1="fail"', "0: 0"]


def test_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    for i in range(10):
        mdp = random_layered_mdp(rng, 3)
        export_model(mdp, tmp_path / f"m{i}")
        back = import_model(tmp_path / f"m{i}")
        assert isomorphic(mdp, back)


def test_round_trip_without_state_file(tmp_path):
    # depths come back from a breadth-first pass; every built state is reachable
    mdp = build_mdp(boundary_net(), Line(), sticky(0.2, 2), [Box([-1.0], [1.0])], 3, 2.0 ** -4)
    export_model(mdp, tmp_path / "m")
    (tmp_path / "m.sta").unlink()
    back = import_model(tmp_path / "m")
    assert isomorphic(mdp, back)
    assert all(s.box is None for s in back.states)


def test_round_trip_keeps_boxes_and_exact_probs(tmp_path):
    mdp = AbstractMdp()
    a = mdp.add_state(Box([0.1, -0.3], [0.2, 0.7]), False, 0)
    b = mdp.add_state(Box([1 / 3, 0], [0.5, 1]), False, 1)
    c = mdp.add_state(Box([2, 2], [3, 3]), True, 1)
    mdp.mark_initial(a)
    mdp.add_choice(a, [(0.1, b), (0.9, c)])
    export_model(mdp, tmp_path / "m")
    back = import_model(tmp_path / "m")
    assert [s.box for s in back.states] == [s.box for s in mdp.states]
    assert back.choices[a][0].distribution == mdp.choices[a][0].distribution
    assert back.states[c].fail


def test_import_garbage(tmp_path):
    (tmp_path / "bad.tra").write_text("x y z\n")
    (tmp_path / "bad.lab").write_text("")
    with pytest.raises(ParseError):
        import_model(tmp_path / "bad")


def test_stochastic_and_absorbing():
    rng = np.random.default_rng(7)
    for _ in range(20):
        mdp = random_layered_mdp(rng, 3)
        for sid, st in enumerate(mdp.states):
            if st.fail:
                assert mdp.choices[sid] == []
            for ch in mdp.choices[sid]:
                assert abs(sum(p for p, _ in ch.distribution) - 1) <= 1e-12
