import json

import numpy as np
import pytest

from graphflow.curves import (
    KnotCurve,
    bundled_curve,
    fourier_from_samples,
    load_curve,
    make_torus_knot,
    reparametrized,
    resample_arclength,
    round_circle,
    scaled,
)
from graphflow.errors import CurveValidationError, InvalidParams


def test_torus_knot_param_validation():
    with pytest.raises(InvalidParams):
        make_torus_knot(1, 0, 2.0, 1.0)
    with pytest.raises(InvalidParams):
        make_torus_knot(2, 4, 2.0, 0.5)
    with pytest.raises(InvalidParams):
        make_torus_knot(2, 3, 0.5, 2.0)


def test_torus_knot_matches_parametric_formula():
    k = make_torus_knot(2, 3, 2.0, 0.5)
    t = np.linspace(0, 1, 17, endpoint=False)
    ang = 2 * np.pi * t
    expect = np.stack(
        [
            (2.0 + 0.5 * np.cos(3 * ang)) * np.cos(2 * ang),
            (2.0 + 0.5 * np.cos(3 * ang)) * np.sin(2 * ang),
            0.5 * np.sin(3 * ang),
        ],
        axis=1,
    )
    assert np.allclose(k.eval(t), expect, atol=1e-12)


def test_torus_11_is_unknot_circle_like():
    k = make_torus_knot(1, 1, 2.0, 0.5)
    k.validate()
    from graphflow.diagrams import a2_of_curve

    assert a2_of_curve(k) == 0


def test_fourier_curve_closes_exactly():
    k = make_torus_knot(2, 3, 2.0, 0.5)
    assert np.array_equal(k.eval(0.0), k.eval(1.0))


def test_derivative_matches_finite_difference():
    k = bundled_curve("figure_eight")
    t = np.array([0.123, 0.456, 0.789])
    h = 1e-7
    fd = (k.eval(t + h) - k.eval(t - h)) / (2 * h)
    assert np.allclose(k.deriv(t), fd, rtol=1e-5, atol=1e-4)


def test_validate_rejects_self_intersecting_curve():
    # planar figure-eight shaped loop crosses itself
    t = np.arange(256) / 256
    pts = np.stack(
        [np.sin(4 * np.pi * t), np.sin(2 * np.pi * t), np.zeros_like(t)], axis=1
    )
    curve = KnotCurve(points=pts)
    with pytest.raises(CurveValidationError) as err:
        curve.validate()
    assert err.value.invariant == "embedded"


def test_validate_rejects_irregular_curve():
    cos_c = np.zeros((3, 2))
    sin_c = np.zeros((3, 1))
    # x traces a segment back and forth: speed vanishes at turning points
    cos_c[0, 1] = 1.0
    curve = KnotCurve(cos_coeffs=cos_c, sin_coeffs=sin_c)
    with pytest.raises(CurveValidationError) as err:
        curve.validate()
    assert err.value.invariant == "regular"


def test_resample_circle_four_points():
    r4 = resample_arclength(round_circle(1.0), 4)
    sides = np.linalg.norm(np.diff(np.vstack([r4.points, r4.points[:1]]), axis=0), axis=1)
    assert np.allclose(sides, np.sqrt(2.0), atol=1e-9)
    assert abs(r4.arclength[-1] - 2 * np.pi) < 1e-6 * 2 * np.pi


def test_resample_idempotent():
    tref = make_torus_knot(2, 3, 2.0, 0.5)
    r1 = resample_arclength(tref, 500)
    r2 = resample_arclength(r1, 500)
    assert np.abs(r1.points - r2.points).max() < 1e-9


def test_resampled_trefoil_embedded():
    tref = make_torus_knot(2, 3, 2.0, 0.5)
    resample_arclength(tref, 2000).validate(eps_emb=1e-3)


def test_reparametrized_same_image_different_speed():
    tref = make_torus_knot(2, 3, 2.0, 0.5)
    rep = reparametrized(tref, 0.3)
    t = np.linspace(0, 1, 11, endpoint=False)
    warped = t + 0.3 * np.sin(2 * np.pi * t) / (2 * np.pi)
    assert np.allclose(rep.eval(t), tref.eval(warped), atol=1e-14)
    assert not np.allclose(
        np.linalg.norm(rep.deriv(t), axis=1), np.linalg.norm(tref.deriv(t), axis=1)
    )


def test_scaled_curve():
    tref = make_torus_knot(2, 3, 2.0, 0.5)
    big = scaled(tref, 2.0)
    assert np.allclose(big.eval(0.37), 2.0 * tref.eval(0.37))


def test_fourier_fit_exact_on_trig_polynomials():
    tref = make_torus_knot(2, 3, 2.0, 0.5)
    t = np.arange(64) / 64
    fit = fourier_from_samples(tref.eval(t))
    s = np.linspace(0, 1, 200, endpoint=False)
    assert np.allclose(fit.eval(s), tref.eval(s), atol=1e-12)


def test_json_round_trips(tmp_path):
    for name in ("circle", "trefoil", "figure_eight"):
        k = bundled_curve(name)
        obj = json.loads(json.dumps(k.to_json_obj()))
        k2 = KnotCurve.from_json_obj(obj)
        t = np.linspace(0, 1, 50, endpoint=False)
        assert np.allclose(k.eval(t), k2.eval(t))
    poly = resample_arclength(bundled_curve("trefoil"), 64)
    k3 = KnotCurve.from_json_obj(json.loads(json.dumps(poly.to_json_obj())))
    assert np.allclose(k3.points, poly.points)


def test_load_curve_from_path_and_bundled(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(round_circle(2.0).to_json_obj()))
    k = load_curve(str(path))
    assert abs(k.diameter() - 4.0) < 1e-9
    assert load_curve("trefoil").name == "trefoil"
    with pytest.raises(InvalidParams):
        load_curve("no-such-curve")


def test_bundled_curves_validate():
    for name in ("circle", "trefoil", "torus_2_5", "figure_eight", "hopf_a", "hopf_b"):
        bundled_curve(name).validate()


def test_content_hash_stable_and_distinct():
    a = bundled_curve("trefoil")
    assert a.content_hash() == bundled_curve("trefoil").content_hash()
    assert a.content_hash() != bundled_curve("circle").content_hash()
