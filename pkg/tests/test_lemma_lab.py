import math

import numpy as np
import pytest

from pwfkit import lemma_lab as ll
from pwfkit.constraints import ConstraintSet
from pwfkit.geometry import orthant_cone, sample_cone_directions, subspace_cone
from pwfkit.model import make_measurements, rng_from_seed, sub_seed


def test_closed_form_anchors():
    e1, e2 = np.eye(2)
    assert ll.closed_form_abs_moment(e1, e1) == pytest.approx(1.0, abs=1e-15)
    assert ll.closed_form_abs_moment(e1, -e1) == pytest.approx(1.0, abs=1e-15)
    assert ll.closed_form_abs_moment(e1, e2) == pytest.approx(2 / np.pi, abs=1e-15)
    assert ll.closed_form_abs_moment(2 * e1, 3 * e1) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        ll.closed_form_abs_moment(e1, np.zeros(2))


def test_closed_form_lower_bound(rng):
    for _ in range(200):
        u, v = rng.standard_normal((2, 5))
        assert ll.closed_form_abs_moment(u, v) >= 2 / np.pi * np.linalg.norm(u) * np.linalg.norm(v) - 1e-12


def test_closed_form_vs_quadrature():
    # E|g1 (c g1 + s g2)| by 2-D Gauss-Hermite quadrature, independent of the formula
    x, w = np.polynomial.hermite_e.hermegauss(200)
    w = w / w.sum()
    for theta in (0.3, 1.0, 2.0):
        c, s = np.cos(theta), np.sin(theta)
        val = w @ (np.abs(x[:, None] * (c * x[:, None] + s * x[None, :])) @ w)
        assert ll.closed_form_abs_moment(np.array([1.0, 0]), np.array([c, s])) == pytest.approx(val, abs=2e-3)


def test_mc_abs_moment():
    e1, e2 = np.eye(2)
    est, se = ll.mc_abs_moment(e1, e1, 100_000, 1)
    assert abs(est - 1) <= 4 * se
    est, se = ll.mc_abs_moment(e1, e2, 100_000, 2)
    assert abs(est - 2 / np.pi) <= 4 * se
    with pytest.raises(ValueError):
        ll.mc_abs_moment(e1, e2, 1, 0)


def test_truncation_S():
    assert ll.truncation_S(0.5, 1, 0.1) == 0
    assert ll.truncation_S(0.95, 1, 0.1) == pytest.approx(0.5)
    assert ll.truncation_S(2, 1, 0.1) == 2
    assert ll.truncation_S(-2, 1, 0.1) == 2
    for bad in (0, 1, 1.5):
        with pytest.raises(ValueError):
            ll.truncation_S(1, 1, bad)
    with pytest.raises(ValueError):
        ll.truncation_S(1, -1, 0.1)


def test_truncation_S_continuity_and_domination(rng):
    for beta in (0.3, 1.0, 4.0):
        for bp in (beta * 0.9, beta):
            for eps in (-1e-9, 1e-9):
                assert abs(ll.truncation_S(bp + eps, beta, 0.1) - ll.truncation_S(bp, beta, 0.1)) <= 1e-6
    e = 2 / 15
    h = rng.standard_normal(10_000) * 3
    beta = rng.uniform(0, 3, 10_000)
    ind = np.abs(h) * ((1 - e) * beta <= np.abs(h))
    assert np.all(ind <= ll.truncation_S(h, (1 - e) * beta, 0.1) + 1e-12)


def test_S_properties_report():
    rep = ll.check_S_properties(8, 20_000, 3)
    assert rep.passed and rep.worst_violation <= 0
    # alpha edge cases
    z = np.array([1.0, -0.95, 0.2])
    b = np.ones(3)
    assert ll.truncated_norm(0 * z, b, 0.1) == 0
    assert ll.truncated_norm(1 * z, b, 0.1) == ll.truncated_norm(z, b, 0.1)


def test_projection_contraction_small():
    rep = ll.check_projection_contraction(6, 4000, 1)
    assert rep.passed and rep.trials == 8000


def test_nonconvex_factor_is_needed():
    # top_k is not nonexpansive: with u in the set the factor 1 fails
    cs = ConstraintSet("top_k", k=1)
    u = np.array([1.0, 0.0])
    v = np.array([0.4, 0.6])
    from pwfkit.constraints import project
    assert np.linalg.norm(project(cs, v) - u) > np.linalg.norm(v - u)
    assert np.linalg.norm(project(cs, v) - u) <= 2 * np.linalg.norm(v - u)


def test_bm_values():
    assert ll.compute_bm(1) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    assert ll.compute_bm(2) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-14)
    # Gamma ratio directly for moderate m
    assert ll.compute_bm(30) == pytest.approx(math.sqrt(2) * math.gamma(15.5) / math.gamma(15), rel=1e-13)
    vals = [ll.compute_bm(m) for m in (1, 2, 5, 50, 500, 5000, 10**6)]
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] / 1000 == pytest.approx(1, abs=1e-6)
    b2 = ll.compute_bm(10**6) ** 2
    assert 10**6 - 0.5 <= b2 <= 10**6
    with pytest.raises(ValueError):
        ll.compute_bm(0)
    assert ll.check_bm_bracket([1, 2, 3, 999_999]).passed


def test_sample_bounds():
    assert ll.gordon_sample_bound(2, 0.5) == 160
    assert ll.gordon_sample_bound(0, 0.01) == 49
    assert ll.cross_sample_bound(2, 0.5) == 640
    assert ll.mixed_moment_sample_bound(4, 0.5, 64) == pytest.approx(1600 * 16 * np.log(64))


def test_cone_isometry_weighted_ones_matches_unweighted():
    cone = subspace_cone(rng_from_seed(0).standard_normal((16, 2)))
    m = 1500
    rep = ll.mc_cone_isometry(cone, m, 0.3, 50, 10, seed=4, weights=np.ones(m), omega_sq=2.0)
    d = rep.details
    assert d["worst_weighted"] == pytest.approx(d["worst_gordon"], rel=1e-12)
    assert d["fail_weighted"] == d["fail_gordon"]


def test_cone_isometry_warns_below_threshold():
    cone = orthant_cone(8)
    rep = ll.mc_cone_isometry(cone, 50, 0.25, 20, 3, seed=1, omega_sq=4.0)
    assert "precondition warning" in rep.notes
    with pytest.raises(ValueError):
        ll.mc_cone_isometry(cone, 50, 0.25, 20, 3, seed=1, weights=np.ones(3), omega_sq=4.0)


def test_cone_isometry_passes_at_lemma_size():
    cone = subspace_cone(rng_from_seed(5).standard_normal((32, 2)))
    m = int(np.ceil(ll.cross_sample_bound(2.0, 0.25)))
    rep = ll.mc_cone_isometry(cone, m, 0.25, 200, 50, seed=6, omega_sq=2.0)
    assert rep.passed, rep.details


def test_abs_product_with_u_equal_v_matches_isometry():
    cone = subspace_cone(rng_from_seed(2).standard_normal((16, 2)))
    seed, m, trials = 9, 800, 10
    H = sample_cone_directions(cone, 60, rng_from_seed(sub_seed(seed, 0)))
    iso = ll.mc_cone_isometry(cone, m, 0.3, 60, trials, seed=seed, omega_sq=2.0)
    prod = ll.mc_abs_product_concentration(cone, cone, m, 0.3, trials, seed, directions=(H, H))
    assert prod.details["worst_deviation"] == pytest.approx(iso.details["worst_gordon"], rel=1e-12)


def test_abs_product_orthogonal_pair():
    u, v = np.eye(2)
    rep = ll.mc_abs_product_concentration(None, None, 10_000, 0.1, 100, 3, directions=(u, v))
    assert rep.passed
    assert rep.details["mean_empirical"] == pytest.approx(2 / np.pi, abs=0.01)


def test_mixed_fourth_moment():
    cone = subspace_cone(rng_from_seed(1).standard_normal((32, 2)))
    x = np.zeros(32)
    x[0] = 1
    m = int(np.ceil(ll.mixed_moment_sample_bound(2.0, 0.5, 32)))
    rep = ll.mc_mixed_fourth_moment(cone, x, m, 0.5, 10, seed=2, omega_sq=2.0)
    assert rep.passed and "precondition" not in rep.notes
    with pytest.raises(ValueError):
        ll.mc_mixed_fourth_moment(cone, 2 * x, 100, 0.5, 1, seed=2, omega_sq=2.0)


def test_fourth_moment_gate_is_strict():
    assert ll.check_fourth_moment(106_468, 0.5, 20, 1).passed
    # far below the proof's threshold failures do occur and the gate catches them
    assert not ll.check_fourth_moment(50, 0.5, 50, 1).passed


def test_regularity_at_truth_and_off_ball():
    x = np.zeros(16)
    x[:2] = [3.0, -1.0]
    meas = make_measurements(x, 200, 0)
    cs = ConstraintSet("l1_ball", radius=4.0)
    rep = ll.check_regularity_condition(meas, cs, x, [x, -x])
    assert rep.details["rc_margin"] == pytest.approx(0, abs=1e-12)
    assert rep.passed and rep.trials == 2
    rep = ll.check_regularity_condition(meas, cs, x, [x + 10])
    assert rep.details["skipped"] == 1 and not rep.passed
    with pytest.raises(ValueError):
        ll.check_regularity_condition(meas, cs, x, [])
    assert ll.RCConstants().beta_for(64) == 13000 * 64


def test_reports_reproducible():
    a = ll.check_abs_moment_agreement(pairs=5, trials=2000, seed=3)
    b = ll.check_abs_moment_agreement(pairs=5, trials=2000, seed=3)
    assert a.to_dict() == b.to_dict()
    assert ll.LemmaReport("x", 1, 0.5, 0.4).passed is False
