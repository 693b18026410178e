import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from projflat.errors import ChartError, DomainError, NotProjectivelyFlatError, PreconditionError
from projflat.geodesics import Curve, IntegratorSettings, collinearity_residual, geodesic_ivp
from projflat.geometry import ConnectionField, CovectorField, levi_civita, projective_change, y_tensor
from projflat.metrics import builtin_metric
from projflat.tractor import (
    ProjectivePoint, TractorValue, affine_chart, developing_map, developing_map_batch, holonomy,
    parallel_frame, straightening_coordinates, tractor_curvature_residual, tractor_derivative,
    transport_polyline, transport_tractor,
)

FAST = IntegratorSettings(steps_per_unit=300)


def lc(name):
    return levi_civita(builtin_metric(name))


def circle_loop(centre, radius):
    """Closed circle over t in [0, 1] with an exact path."""
    cx, cy = centre
    w = 2 * np.pi

    def path(t):
        t = np.asarray(t, dtype=float)
        return (np.array([cx + radius * np.cos(w * t), cy + radius * np.sin(w * t)]),
                np.array([-w * radius * np.sin(w * t), w * radius * np.cos(w * t)]))

    return Curve.from_path(path, 0.0, 1.0, 5)


# ---------------------------------------------------------------- derivative and curvature


def test_tractor_derivative_flat_constant_section():
    d0, d1 = tractor_derivative(ConnectionField.flat(), lambda x, y: (0.0, 0.0, 1.0), (0.3, 0.4))
    assert d0 == TractorValue((-1.0, 0.0), 0.0)
    assert d1 == TractorValue((0.0, -1.0), 0.0)


def test_tractor_derivative_flat_position_section():
    for d in tractor_derivative(ConnectionField.flat(), lambda x, y: (x, y, 1.0), (0.3, -0.2)):
        assert np.all(d.as_array() == 0)


def test_tractor_derivative_beltrami():
    metric = builtin_metric("beltrami")
    d = tractor_derivative(levi_civita(metric), lambda x, y: (1.0, 0.0, 0.0), (0.0, 0.0))
    g = metric.values((0.0, 0.0))
    assert [v.rho for v in d] == pytest.approx(list(-g[:, 0]), abs=1e-14)


def test_tractor_derivative_requires_symmetric_ricci():
    conn = projective_change(ConnectionField.flat(), CovectorField.from_function(lambda x, y: (0.0, x)))
    with pytest.raises(PreconditionError):
        tractor_derivative(conn, lambda x, y: (0.0, 0.0, 1.0), (0.1, 0.1))


def test_curvature_residual_flat_and_thales():
    assert np.all(tractor_curvature_residual(ConnectionField.flat(), (0.2, 0.1), TractorValue((1, 2), 3))
                  .as_array() == 0)
    r = tractor_curvature_residual(lc("thales"), (0.1, 0.4), TractorValue((1.0, 2.0), 0.5))
    assert np.max(np.abs(r.as_array())) <= 1e-7


def test_curvature_residual_bump_matches_y():
    conn = lc("bump")
    r = tractor_curvature_residual(conn, (0.5, 0.5), TractorValue((1.0, 0.0), 0.0))
    Y = y_tensor(conn, (0.5, 0.5)).Y
    assert max(abs(r.X[0]), abs(r.X[1])) <= 1e-7
    assert r.rho == pytest.approx(Y[0, 1, 0], abs=1e-6)
    assert abs(r.rho) > 1e-3


@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.lists(st.floats(-2, 2), min_size=3, max_size=3),
       st.sampled_from(["bump", "poincare", "sphere-stereographic", "beltrami"]))
def test_curvature_rows(x, y, t, name):
    conn = lc(name)
    r = tractor_curvature_residual(conn, (x, y), t)
    Y = y_tensor(conn, (x, y)).Y
    assert max(abs(r.X[0]), abs(r.X[1])) <= 1e-7
    assert r.rho == pytest.approx(Y[0, 1, 0] * t[0] + Y[0, 1, 1] * t[1], abs=1e-6)


# ---------------------------------------------------------------- transport


def test_transport_zero_stays_zero():
    out = transport_tractor(lc("bump"), Curve.segment((0, 0), (0.3, 0.2)), TractorValue((0, 0), 0), FAST)
    assert out == TractorValue((0.0, 0.0), 0.0)


def test_transport_flat_segment():
    out = transport_tractor(ConnectionField.flat(), Curve.segment((0, 0), (1, 0)), TractorValue((0, 0), 1))
    assert np.allclose(out.as_array(), [1, 0, 1], atol=1e-14)


def test_transport_is_linear(rng):
    conn = lc("bump")
    seg = Curve.segment((0.1, 0.0), (0.4, 0.3))
    a, b = rng.normal(size=3), rng.normal(size=3)
    both = transport_tractor(conn, seg, np.stack([a, b, 2 * a - 3 * b], axis=1), FAST)
    assert np.allclose(both[:, 2], 2 * both[:, 0] - 3 * both[:, 1], atol=1e-10)


def test_poincare_loop_holonomy_trivial():
    loop = circle_loop((0.1, 0.0), 1 / (2 * np.pi))  # perimeter 1
    H = holonomy(lc("poincare"), loop, IntegratorSettings(steps_per_unit=500))
    assert np.max(np.abs(H - np.eye(3))) <= 1e-8


def test_bump_loop_holonomy_nontrivial():
    square = [(0.2, 0.2), (0.6, 0.2), (0.6, 0.6), (0.2, 0.6), (0.2, 0.2)]
    H = holonomy(lc("bump"), square, FAST)
    assert np.max(np.abs(H - np.eye(3))) >= 1e-4


def test_transport_leaving_domain_raises():
    from projflat.errors import IntegrationError

    with pytest.raises(IntegrationError):
        transport_tractor(lc("poincare"), Curve.segment((0, 0), (1.5, 0)), np.eye(3), FAST)


# ---------------------------------------------------------------- frames and the developing map


def test_flat_frame_closed_form():
    frame = parallel_frame(ConnectionField.flat(), (0.0, 0.0), radius=1.0, settings=FAST)
    S = frame.sections_at((np.array([0.3, -0.5]), np.array([0.4, 0.1])))
    for k, (x, y) in enumerate([(0.3, 0.4), (-0.5, 0.1)]):
        assert np.allclose(S[:, :, k], [[1, 0, x], [0, 1, y], [0, 0, 1]], atol=1e-13)
    assert np.array_equal(frame.sections_at((0.0, 0.0)), np.eye(3))


def test_flat_developing_map():
    frame = parallel_frame(ConnectionField.flat(), (0.0, 0.0), radius=1.0, settings=FAST)
    p = developing_map(frame, (0.3, 0.4))
    ref = ProjectivePoint.from_vector([-0.3, -0.4, 1.0])
    assert np.allclose(p.as_array(), ref.as_array(), atol=1e-14)
    assert affine_chart(p) == pytest.approx((-0.3, -0.4))
    assert developing_map(frame, (0.0, 0.0)).h == (0.0, 0.0, 1.0)


def test_base_maps_to_origin():
    frame = parallel_frame(lc("sphere-stereographic"), (0.2, -0.1), radius=0.3, settings=FAST)
    assert np.allclose(developing_map(frame, (0.2, -0.1)).as_array(), [0, 0, 1])
    x, y = straightening_coordinates(frame, (0.2, -0.1))
    assert (x, y) == pytest.approx((0.2, -0.1))


def test_frame_refuses_curved_metric():
    with pytest.raises(NotProjectivelyFlatError) as info:
        parallel_frame(lc("bump"), (0.0, 0.0), radius=0.5, grid=7)
    assert info.value.sup_y > 1e-3


def test_frame_rejects_far_targets():
    frame = parallel_frame(lc("poincare"), (0.0, 0.0), radius=0.3, settings=FAST, grid=5)
    with pytest.raises(DomainError):
        frame.sections_at((0.5, 0.0))


def test_poincare_frame_determinant():
    frame = parallel_frame(lc("poincare"), (0.0, 0.0), radius=0.9, settings=FAST, grid=11)
    th = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    S = frame.sections_at((0.85 * np.cos(th), 0.85 * np.sin(th)))
    assert np.all(np.abs(np.linalg.det(np.moveaxis(S, -1, 0))) > 1e-6)


def test_path_independence_flat_case():
    conn = lc("poincare")
    target = (0.4, 0.3)
    a = transport_polyline(conn, [(0, 0), (0.4, 0.0), target], np.eye(3), FAST)
    b = transport_polyline(conn, [(0, 0), (0.0, 0.3), (0.2, 0.5), target], np.eye(3), FAST)
    assert np.max(np.abs(a - b)) <= 1e-7


def test_poincare_geodesic_straightened():
    conn = lc("poincare")
    frame = parallel_frame(conn, (0.0, 0.0), radius=0.8, settings=FAST, grid=11)
    c = geodesic_ivp(conn, (0.5, -0.3), (-0.3, 1.0), 0.7, FAST)
    pts = c.points[::20]
    x, y = straightening_coordinates(frame, (pts[:, 0], pts[:, 1]))
    assert collinearity_residual(pts) >= 1e-2
    assert collinearity_residual(np.stack([x, y], 1)) <= 1e-5


def test_straightening_is_an_immersion():
    frame = parallel_frame(lc("sphere-stereographic"), (0.0, 0.0), radius=0.8, settings=FAST, grid=7)
    h = 1e-4
    pts = np.array([(0.5, 0.1), (-0.3, 0.4), (0.0, -0.6)])
    P = np.concatenate([pts, pts + (h, 0), pts - (h, 0), pts + (0, h), pts - (0, h)])
    x, y = straightening_coordinates(frame, (P[:, 0], P[:, 1]))
    F = np.stack([x, y], 1).reshape(5, 3, 2)
    J = np.stack([(F[1] - F[2]) / (2 * h), (F[3] - F[4]) / (2 * h)], axis=-1)
    assert np.all(np.abs(np.linalg.det(J)) > 1e-2)


def test_developing_map_batch_shape():
    frame = parallel_frame(ConnectionField.flat(), (0.0, 0.0), radius=1.0, settings=FAST)
    H = developing_map_batch(frame, (np.zeros((2, 3)), np.zeros((2, 3))))
    assert H.shape == (3, 2, 3)


# ---------------------------------------------------------------- projective points


def test_affine_chart_examples():
    assert affine_chart(ProjectivePoint.from_vector([0, 0, 1])) == (0.0, 0.0)
    assert affine_chart(ProjectivePoint.from_vector([2, 4, 2])) == pytest.approx((1.0, 2.0))
    with pytest.raises(ChartError):
        affine_chart(ProjectivePoint.from_vector([1, 1, 0]))


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
       st.floats(-10, 10).filter(lambda s: abs(s) > 1e-3))
def test_projective_point_canonical(v, s):
    a = ProjectivePoint.from_vector(v).as_array()
    b = ProjectivePoint.from_vector(np.array(v) * s).as_array()
    assert np.allclose(a, b, atol=1e-12)
    assert np.linalg.norm(a) == pytest.approx(1)
    assert a[np.flatnonzero(a)[0]] > 0


def test_projective_point_zero():
    with pytest.raises(ValueError):
        ProjectivePoint.from_vector([0, 0, 0])
