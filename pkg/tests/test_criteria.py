import math

import numpy as np
import pytest

from conftest import (local_deterministic_boxes, make_ghz_style,
                      make_svetlichny, random_local_mixture, random_ns_box)
from icbox.behaviors import mix, named_box
from icbox.criteria import (CRITERION_IDS, VIOLATION_TOL, eval_bipartite_ic,
                            eval_multicopy, eval_multipartite_ic,
                            eval_noisy_ic, eval_stronger_bipartite,
                            eval_success_bound, eval_uffink, evaluate,
                            multicopy_orbit_max)
from icbox.entropy import JointDistribution, binary_entropy
from icbox.protocol import single_copy_joint


def test_report_shape():
    rep = eval_multicopy(named_box("white"))
    assert rep.criterion_id == "ic-multicopy"
    assert rep.margin == rep.lhs - rep.rhs
    obj = rep.to_json_obj()
    assert set(obj) == {"criterion", "lhs", "rhs", "margin", "violated",
                        "details"}


def test_violation_threshold():
    # margin exactly 0 is not a violation
    rep = eval_multicopy(named_box("deterministic-zero"))
    assert rep.lhs == pytest.approx(1.0, abs=1e-12)
    assert rep.margin == pytest.approx(0.0, abs=1e-12)
    assert not rep.violated
    assert eval_multicopy(named_box("isotropic", bias=0.71)).violated
    assert not eval_multicopy(named_box("isotropic", bias=0.70)).violated


def test_bipartite_frozen_values():
    rep = evaluate("ic-bipartite", named_box("pr"))
    assert rep.lhs == pytest.approx(2.0, abs=1e-12)
    assert rep.rhs == pytest.approx(1.0, abs=1e-12)
    assert rep.violated
    assert rep.details["terms"] == pytest.approx((1.0, 1.0), abs=1e-12)
    # direct joint entry point agrees with the dispatcher
    direct = eval_bipartite_ic(single_copy_joint(named_box("pr")))
    assert direct.lhs == rep.lhs and direct.rhs == rep.rhs

    rep = evaluate("ic-bipartite", named_box("isotropic", parties=2, bias=0.5))
    want = 2.0 * (1.0 - binary_entropy(0.75))
    assert rep.lhs == pytest.approx(want, abs=1e-12)
    assert rep.lhs == pytest.approx(0.3774437510817341, abs=1e-12)
    assert not rep.violated

    rep = evaluate("ic-bipartite", named_box("white", parties=2))
    assert rep.lhs == pytest.approx(0.0, abs=1e-12)


def test_stronger_bipartite():
    rep = evaluate("ic-bipartite-strong", named_box("pr"))
    assert rep.lhs == pytest.approx(2.0, abs=1e-12)
    assert rep.rhs == pytest.approx(1.0, abs=1e-12)
    assert rep.violated

    rep = evaluate("ic-bipartite-strong", named_box("deterministic-zero",
                                                    parties=2))
    assert rep.lhs == pytest.approx(1.0, abs=1e-12)
    assert not rep.violated

    rep = evaluate("ic-bipartite-strong", named_box("white", parties=2))
    assert rep.lhs == pytest.approx(0.0, abs=1e-9)

    direct = eval_stronger_bipartite(single_copy_joint(named_box("pr")))
    assert direct.lhs == pytest.approx(2.0, abs=1e-12)


def test_stronger_bipartite_rejects_correlated_inputs():
    diag = np.zeros((2, 2))
    diag[0, 0] = diag[1, 1] = 0.5
    dist = JointDistribution(("X1^1", "X2^1"), diag)
    with pytest.raises(NotImplementedError):
        evaluate("ic-bipartite-strong", named_box("pr"),
                 input_distribution=dist)


def test_multipartite_frozen_values():
    rep = evaluate("ic-multi", named_box("box45"))
    assert rep.lhs == pytest.approx(4.0, abs=1e-12)
    assert rep.rhs == pytest.approx(2.0, abs=1e-12)
    assert rep.violated
    assert sorted(rep.details["terms"]) == ["k=1,i=1", "k=1,i=2",
                                            "k=2,i=1", "k=2,i=2"]
    for v in rep.details["terms"].values():
        assert v == pytest.approx(1.0, abs=1e-12)
    assert rep.details["input_correlation"] == pytest.approx(0.0, abs=1e-12)

    rep = evaluate("ic-multi", named_box("box45", parties=4))
    assert rep.lhs == pytest.approx(6.0, abs=1e-12)
    assert rep.rhs == pytest.approx(3.0, abs=1e-12)

    rep = evaluate("ic-multi", named_box("white"))
    assert rep.lhs == pytest.approx(0.0, abs=1e-9)
    assert not rep.violated


def test_multipartite_joint_shape_checks():
    joint = single_copy_joint(named_box("box45"))
    with pytest.raises(ValueError):
        eval_multipartite_ic(joint, parties=4)
    with pytest.raises(ValueError):
        eval_multipartite_ic(joint, bits_per_sender=4)
    rep = eval_multipartite_ic(joint, parties=3, bits_per_sender=2)
    assert rep.lhs == pytest.approx(4.0, abs=1e-12)


def test_multipartite_holds_on_local_boxes():
    rng = np.random.default_rng(21)
    boxes = local_deterministic_boxes(3)
    picks = rng.choice(len(boxes), size=6, replace=False)
    for i in picks:
        assert not evaluate("ic-multi", boxes[i]).violated
    for _ in range(4):
        assert not evaluate("ic-multi", random_local_mixture(rng, 3)).violated


def test_multicopy_frozen_values():
    rep = eval_multicopy(named_box("box45"))
    assert rep.lhs == pytest.approx(2.0, abs=1e-12)
    assert rep.violated
    assert rep.details["E_I"] == pytest.approx(1.0, abs=1e-12)
    assert eval_multicopy(named_box("white")).lhs == pytest.approx(
        0.0, abs=1e-12)


def test_multicopy_orbit_max_frozen_values():
    rep = multicopy_orbit_max(named_box("box45"))
    assert rep.lhs == pytest.approx(2.0, abs=1e-12)
    assert rep.details["orbit_size"] == 3072
    assert rep.violated

    rep = multicopy_orbit_max(make_svetlichny())
    assert rep.lhs == pytest.approx(0.5, abs=1e-12)
    assert not rep.violated

    rep = multicopy_orbit_max(named_box("deterministic-zero"))
    assert rep.lhs == pytest.approx(1.0, abs=1e-12)
    assert not rep.violated

    rep = multicopy_orbit_max(named_box("pr"))
    assert rep.lhs == pytest.approx(2.0, abs=1e-12)
    assert rep.details["orbit_size"] == 128


def test_orbit_never_below_canonical():
    rng = np.random.default_rng(22)
    for _ in range(5):
        b = random_ns_box(rng, 3)
        assert multicopy_orbit_max(b).lhs >= eval_multicopy(b).lhs - 1e-12


def test_uffink_two_party_equals_multicopy():
    rng = np.random.default_rng(23)
    for _ in range(5):
        b = random_ns_box(rng, 2)
        u = evaluate("uffink-2", b)
        m = eval_multicopy(b)
        assert u.criterion_id == "uffink-2"
        assert u.lhs == pytest.approx(m.lhs, abs=1e-12)
        assert u.rhs == 1.0


def test_uffink_three_party_frozen_values():
    rep = evaluate("uffink-3", named_box("box45"))
    assert rep.details["canonical"] == pytest.approx(8.0, abs=1e-12)
    assert rep.lhs == pytest.approx(8.0, abs=1e-12)
    assert rep.details["orbit_size"] == 3072
    assert not rep.violated

    rep = evaluate("uffink-3", make_svetlichny())
    assert rep.lhs == pytest.approx(32.0, abs=1e-12)
    assert rep.violated

    rep = evaluate("uffink-3", make_ghz_style())
    assert rep.lhs == pytest.approx(16.0, abs=1e-12)
    assert not rep.violated

    assert evaluate("uffink-3", named_box("white")).lhs == pytest.approx(
        0.0, abs=1e-12)
    rep = evaluate("uffink-3", named_box("deterministic-zero"))
    assert rep.lhs == pytest.approx(8.0, abs=1e-12)


def test_uffink_party_count():
    with pytest.raises(ValueError):
        eval_uffink(named_box("box45", parties=4))


def test_success_bound():
    rep = evaluate("ic-success-bound", named_box("box45"))
    assert rep.lhs == pytest.approx(4.0, abs=1e-12)
    assert rep.rhs == pytest.approx(2.0, abs=1e-12)
    assert rep.details["depth"] == 1
    assert rep.details["analytic_lower_bound"] == pytest.approx(
        2.0 / (2.0 * math.log(2.0)) * 2.0, abs=1e-12)
    assert rep.violated

    with pytest.raises(ValueError):
        eval_success_bound(named_box("box45"), 0)


def test_success_bound_analytic_never_exceeds_lhs():
    rng = np.random.default_rng(24)
    for _ in range(20):
        b = random_ns_box(rng, 3)
        for depth in (1, 2, 3):
            rep = eval_success_bound(b, depth)
            assert rep.details["analytic_lower_bound"] <= rep.lhs + 1e-12


def test_success_bound_grows_for_violating_box():
    b = named_box("isotropic", bias=0.9)
    values = [eval_success_bound(b, k).lhs for k in (1, 2, 3, 4)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_noisy_reduces_to_multipartite_at_zero():
    rng = np.random.default_rng(25)
    for b in (named_box("box45"), random_local_mixture(rng, 3)):
        noisy = eval_noisy_ic(b, 0.0)
        multi = evaluate("ic-multi", b)
        assert abs(noisy.lhs - multi.lhs) <= 1e-12
        assert abs(noisy.rhs - multi.rhs) <= 1e-12


def test_noisy_channel_values():
    rep = eval_noisy_ic(named_box("white"), 0.1)
    assert not rep.violated
    assert set(rep.details["per_sender"]) == {"k=1", "k=2"}

    rep = eval_noisy_ic(named_box("box45"), 0.5)
    assert rep.details["flag"] == "indeterminate-limit"
    assert rep.lhs == pytest.approx(0.0, abs=1e-9)
    assert rep.rhs == pytest.approx(0.0, abs=1e-9)

    with pytest.raises(ValueError):
        eval_noisy_ic(named_box("box45"), -0.1)
    with pytest.raises(ValueError):
        eval_noisy_ic(named_box("box45"), 0.6)


def test_noisy_monotone_in_bias():
    # fixed channel, growing box bias: the margin should cross from
    # satisfied to violated
    eps = 0.3
    low = eval_noisy_ic(named_box("isotropic", bias=0.5), eps)
    high = eval_noisy_ic(named_box("isotropic", bias=0.95), eps)
    assert not low.violated
    assert high.violated
    assert high.margin > low.margin


def test_dispatcher():
    assert len(CRITERION_IDS) == 8
    with pytest.raises(ValueError):
        evaluate("ic-unknown", named_box("pr"))
    with pytest.raises(ValueError):
        evaluate("ic-bipartite", named_box("box45"))
    with pytest.raises(ValueError):
        evaluate("uffink-2", named_box("box45"))
    with pytest.raises(ValueError):
        evaluate("uffink-3", named_box("pr"))
    with pytest.raises(ValueError):
        evaluate("ic-noisy", named_box("box45"))
    d1 = evaluate("ic-success-bound", named_box("isotropic", bias=0.6))
    d1x = evaluate("ic-success-bound", named_box("isotropic", bias=0.6),
                   depth=1)
    assert d1.lhs == d1x.lhs


def test_bound_ordering_chain():
    # analytic <= success-bound LHS <= multipartite LHS for isotropic boxes
    for e in (0.2, 0.5, 0.8):
        b = named_box("isotropic", bias=e)
        sb = eval_success_bound(b, 1)
        multi = evaluate("ic-multi", b)
        assert sb.details["analytic_lower_bound"] <= sb.lhs + 1e-12
        assert sb.lhs <= multi.lhs + 1e-12


def test_multicopy_on_mixture():
    b = mix([(0.75, named_box("box45")), (0.25, named_box("white"))])
    rep = eval_multicopy(b)
    assert rep.details["E_I"] == pytest.approx(0.75, abs=1e-12)
    assert rep.lhs == pytest.approx(2 * 0.75 ** 2, abs=1e-12)
    assert rep.violated is (rep.lhs - 1.0 > VIOLATION_TOL)
