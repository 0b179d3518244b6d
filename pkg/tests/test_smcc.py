import math

import numpy as np
import pytest

from beliefsim.belief import ObjectInstance, init_belief
from beliefsim.errors import CardinalityMismatch
from beliefsim.smcc import class_min_cost, figures_of_merit, format_report, smcc

from oracles import brute_force_class_cost


def _state(points_by_class):
    insts = []
    for cls, pts in points_by_class.items():
        for i, p in enumerate(pts):
            insts.append(ObjectInstance(f"{cls}_{i}", cls, p))
    return init_belief(insts)


def _random_state(rng, shape):
    return _state({cls: [tuple(rng.normal(0, 3, 3)) for _ in range(n)] for cls, n in shape.items()})


def test_identical_states_are_zero():
    a = _state({"cup": [(0, 0, 0), (1, 2, 3)], "book": [(5, 5, 0)]})
    r = smcc(a, a)
    assert r.total == 0.0 and r.mean == 0.0 and r.object_count == 3


def test_known_value():
    a = _state({"cup": [(0, 0, 0), (10, 0, 0)], "book": [(0, 0, 0)]})
    b = _state({"cup": [(10, 0, 1), (0, 3, 0)], "book": [(0, 4, 3)]})
    r = smcc(a, b)
    assert r.per_class["cup"] == (4.0, 2)
    assert r.per_class["book"] == (5.0, 1)
    assert r.total == 9.0 and r.mean == 3.0


def test_ids_do_not_matter():
    a = init_belief([ObjectInstance("x", "cup", (0, 0, 0)), ObjectInstance("y", "cup", (1, 0, 0))])
    b = init_belief([ObjectInstance("y", "cup", (0, 0, 0)), ObjectInstance("x", "cup", (1, 0, 0))])
    assert smcc(a, b).total == 0.0


def test_class_cost_matches_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(200):
        n, m = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        pa = [tuple(rng.random(3)) for _ in range(n)]
        pb = [tuple(rng.random(3)) for _ in range(m)]
        assert class_min_cost(pa, pb) == pytest.approx(brute_force_class_cost(pa, pb), abs=1e-12)


def test_class_cost_exactly_symmetric():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 6))
        pa = [tuple(rng.random(3)) for _ in range(n)]
        pb = [tuple(rng.random(3)) for _ in range(n)]
        assert class_min_cost(pa, pb) == class_min_cost(pb, pa)
        assert class_min_cost(pa, pb) == class_min_cost(pa[::-1], pb[::-1])


def test_strict_cardinality():
    a = _state({"cup": [(0, 0, 0)]})
    b = _state({"cup": [(0, 0, 0), (1, 0, 0)]})
    with pytest.raises(CardinalityMismatch):
        smcc(a, b)
    c = _state({"book": [(0, 0, 0)]})
    with pytest.raises(CardinalityMismatch):
        smcc(a, c)


def test_penalty_mode():
    a = _state({"cup": [(0, 0, 0)]})
    b = _state({"cup": [(0, 0, 0), (1, 0, 0)], "book": [(0, 0, 0)]})
    r = smcc(a, b, strict=False, penalty=2.5)
    assert r.per_class["cup"] == (2.5, 1)
    assert r.per_class["book"] == (2.5, 0)
    assert r.total == 5.0


def test_axioms_on_random_triples():
    rng = np.random.default_rng(6)
    for _ in range(300):
        shape = {"cup": int(rng.integers(1, 4)), "plate": int(rng.integers(1, 4))}
        a, b, c = (_random_state(rng, shape) for _ in range(3))
        ab, ba = smcc(a, b).total, smcc(b, a).total
        assert ab >= 0.0
        assert ab == pytest.approx(ba, rel=1e-9)
        assert smcc(a, c).total <= ab + smcc(b, c).total + 1e-9


def test_figures_of_merit_means():
    truth = _state({"cup": [(0, 0, 0)], "book": [(0, 0, 0)]})
    human = _state({"cup": [(2, 0, 0)], "book": [(0, 0, 0)]})
    m = figures_of_merit(human, human, truth, truth)
    assert m.inferred_vs_human == 0.0
    assert m.human_vs_true == 1.0
    assert m.robot_vs_true == 0.0


def test_format_report():
    a = _state({"cup": [(0, 0, 0)], "book": [(0, 0, 0)]})
    b = _state({"cup": [(3, 4, 0)], "book": [(0, 0, 0)]})
    text = format_report(smcc(a, b), per_class=True)
    assert text.splitlines() == [
        "total\t5.000000",
        "mean\t2.500000",
        "objects\t2",
        "class\tcost\tmatched",
        "book\t0.000000\t1",
        "cup\t5.000000\t1",
    ]
    assert format_report(smcc(a, a)).splitlines()[1] == "mean\t0.000000"


def test_empty_states():
    e = init_belief([])
    r = smcc(e, e)
    assert r.total == 0.0 and r.mean == 0.0 and not math.isnan(r.mean)
