import math
from fractions import Fraction

import numpy as np
import pytest

from klregular.embeddings import (
    CIRCLE,
    REAL_LINE,
    REAL_PLANE,
    Configuration,
    SampledMap,
    complex_moment_curve,
    evaluate_jet,
    moment_curve,
    product_chart,
    restrict_coordinates,
    tensor_product,
    trig_curve,
)
from klregular.errors import (
    DegenerateDirection,
    DimensionMismatch,
    DistinctnessViolation,
    InvalidInput,
    InvalidParameter,
    OutOfDomain,
)


def jet(spec, p, u=None):
    j = evaluate_jet(spec, p, [] if u is None else [u])
    value = np.asarray(j.value, dtype=float)
    d = np.asarray(j.directional_derivatives[0], dtype=float) if u is not None else None
    return value, d


def test_moment_examples():
    v, d = jet(moment_curve(3), 1.0, 1.0)
    assert v.tolist() == [1, 1, 1] and d.tolist() == [1, 2, 3]
    v, d = jet(moment_curve(2), 0.0, 1.0)
    assert v.tolist() == [0, 0] and d.tolist() == [1, 0]
    v, d = jet(moment_curve(1), 5.0, 1.0)
    assert v.tolist() == [5] and d.tolist() == [1]
    v, d = jet(moment_curve(2), 1.0, 1.0)
    assert v.tolist() == [1, 1] and d.tolist() == [1, 2]


def test_moment_exact_jet():
    j = evaluate_jet(moment_curve(4), Fraction(1, 3), [Fraction(2)])
    assert list(j.value) == [Fraction(1, 3), Fraction(1, 9), Fraction(1, 27), Fraction(1, 81)]
    assert list(j.directional_derivatives[0]) == [2, Fraction(4, 3), Fraction(2, 3), Fraction(8, 27)]


def test_trig_examples():
    v, d = jet(trig_curve(1), 0.0, 1.0)
    assert np.allclose(v, [1, 0]) and np.allclose(d, [0, 1])
    v, d = jet(trig_curve(2), math.pi / 2, 1.0)
    assert np.allclose(v, [0, 1, -1, 0], atol=1e-15)
    assert np.allclose(d, [-1, 0, 0, -2], atol=1e-15)
    v0, d0 = jet(trig_curve(2), 0.0, 1.0)
    v1, d1 = jet(trig_curve(2), 2 * math.pi, 1.0)
    assert np.allclose(v0, v1, atol=1e-14) and np.allclose(d0, d1, atol=1e-14)
    v, d = jet(trig_curve(1), math.pi, 1.0)
    assert np.allclose(v, [-1, 0]) and np.allclose(d, [0, -1])


def test_complex_moment_examples():
    v, d = jet(complex_moment_curve(1), (3.0, 4.0), (1.0, 0.0))
    assert v.tolist() == [3, 4] and d.tolist() == [1, 0]
    v, d = jet(complex_moment_curve(2), (0.0, 1.0), (1.0, 0.0))
    assert v.tolist() == [0, 1, -1, 0]
    assert d.tolist() == [1, 0, 0, 2]


def test_tensor_examples():
    t = tensor_product(moment_curve(1), moment_curve(1))
    v, d = jet(t, (2.0, 3.0), (1.0, 0.0))
    assert v.tolist() == [6, 2, 3] and d.tolist() == [3, 1, 0]
    v, _ = jet(t, (0.0, 0.0))
    assert v.tolist() == [0, 0, 0]


def test_invalid_constructors():
    for ctor in (moment_curve, trig_curve, complex_moment_curve):
        with pytest.raises(InvalidParameter):
            ctor(0)


def test_zero_direction_rejected():
    with pytest.raises(DegenerateDirection):
        evaluate_jet(moment_curve(2), 1.0, [0.0])
    with pytest.raises(DegenerateDirection):
        evaluate_jet(complex_moment_curve(2), (1.0, 0.0), [(0.0, 0.0)])


def test_dimension_bookkeeping():
    assert moment_curve(5).ambient_dim == 5 and moment_curve(5).domain == REAL_LINE
    assert trig_curve(3).ambient_dim == 6 and trig_curve(3).domain == CIRCLE
    assert complex_moment_curve(3).ambient_dim == 6
    assert complex_moment_curve(3).domain == REAL_PLANE
    a, b = moment_curve(2), trig_curve(1)
    t = tensor_product(a, b)
    assert t.ambient_dim == 2 * 2 + 2 + 2 and t.domain.dim == 2
    nested = tensor_product(t, complex_moment_curve(1))
    assert nested.ambient_dim == 8 * 2 + 8 + 2
    assert nested.domain.dim == 4
    assert nested.domain == product_chart(t.domain, REAL_PLANE)
    assert restrict_coordinates(trig_curve(2), 3).ambient_dim == 3


def test_circle_chart_distance():
    assert CIRCLE.distance([0.1], [2 * math.pi - 0.1]) == pytest.approx(0.2)
    assert CIRCLE.distance([0.0], [math.pi]) == pytest.approx(math.pi)
    assert np.allclose(CIRCLE.normalize(np.array([[7.0]])), [[7.0 - 2 * math.pi]])


ALL_SPECS = [
    moment_curve(1),
    moment_curve(4),
    moment_curve(9),
    trig_curve(1),
    trig_curve(3),
    complex_moment_curve(1),
    complex_moment_curve(4),
    tensor_product(moment_curve(2), moment_curve(3)),
    tensor_product(trig_curve(1), moment_curve(2)),
    tensor_product(tensor_product(moment_curve(1), moment_curve(1)), trig_curve(1)),
    restrict_coordinates(trig_curve(2), 3),
    restrict_coordinates(moment_curve(2), 4),
]


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.describe())
def test_finite_difference_consistency(spec):
    rng = np.random.default_rng(0)
    n = spec.domain.dim
    h = 1e-5
    p = rng.uniform(-1, 1, size=(100, n))
    u = rng.normal(size=(100, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    d = spec.differentials(p, u)
    fd = (spec.values(p + h * u) - spec.values(p - h * u)) / (2 * h)
    assert np.all(np.abs(d - fd) <= 1e-7 * (1 + np.abs(d)))


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.describe())
def test_derivative_is_linear_in_direction(spec):
    rng = np.random.default_rng(1)
    n = spec.domain.dim
    p = rng.uniform(-1, 1, size=(20, n))
    u = rng.normal(size=(20, n))
    v = rng.normal(size=(20, n))
    lhs = spec.differentials(p, 2.5 * u - v)
    rhs = 2.5 * spec.differentials(p, u) - spec.differentials(p, v)
    assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.describe())
def test_second_differential_matches_finite_difference(spec):
    rng = np.random.default_rng(2)
    n = spec.domain.dim
    p = rng.uniform(-1, 1, size=(10, n))
    u = rng.normal(size=(10, n))
    h = 1e-3
    fd = (spec.values(p + h * u) - 2 * spec.values(p) + spec.values(p - h * u)) / h**2
    assert np.allclose(spec.second_differentials(p, u), fd, rtol=1e-4, atol=1e-4)


def test_tensor_jet_identity():
    rng = np.random.default_rng(3)
    f, g = moment_curve(3), complex_moment_curve(2)
    t = tensor_product(f, g)
    for _ in range(50):
        x, y = rng.uniform(-1, 1, 1), rng.uniform(-1, 1, 2)
        a, b = rng.normal(size=1), rng.normal(size=2)
        fx, gy = f.values(x[None])[0], g.values(y[None])[0]
        du, dv = f.differentials(x[None], a[None])[0], g.differentials(y[None], b[None])[0]
        expected_value = np.concatenate([np.outer(fx, gy).ravel(), fx, gy])
        expected = np.concatenate([(np.outer(du, gy) + np.outer(fx, dv)).ravel(), du, dv])
        value, d = jet(t, np.concatenate([x, y]), np.concatenate([a, b]))
        assert np.allclose(value, expected_value, rtol=1e-15, atol=1e-15)
        assert np.allclose(d, expected, rtol=1e-14, atol=1e-15)


def test_cauchy_riemann():
    rng = np.random.default_rng(4)
    spec = complex_moment_curve(5)
    p = rng.uniform(-1, 1, size=(50, 2))
    dx = spec.differentials(p, np.tile([1.0, 0.0], (50, 1)))
    dy = spec.differentials(p, np.tile([0.0, 1.0], (50, 1)))
    zx = dx[:, 0::2] + 1j * dx[:, 1::2]
    zy = dy[:, 0::2] + 1j * dy[:, 1::2]
    assert np.allclose(zy, 1j * zx, atol=1e-13)


def write_grid(path, f, axes):
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    vals = f(pts)
    n, big_n = pts.shape[1], vals.shape[1]
    header = [f"param_{i + 1}" for i in range(n)] + [f"out_{i + 1}" for i in range(big_n)]
    lines = [",".join(header)]
    for p, v in zip(pts, vals):
        lines.append(",".join(repr(float(x)) for x in [*p, *v]))
    path.write_text("\n".join(lines) + "\n")


def test_sampled_map_reproduces_smooth_curve(tmp_path):
    path = tmp_path / "curve.csv"
    axis = np.linspace(-1, 1, 201)
    write_grid(path, moment_curve(3).values, [axis])
    spec = SampledMap.from_csv(path)
    assert spec.ambient_dim == 3 and spec.domain.dim == 1
    v, d = jet(spec, 0.3, 1.0)
    assert np.allclose(v, [0.3, 0.09, 0.027], atol=1e-6)
    assert np.allclose(d, [1, 0.6, 0.27], atol=1e-4)
    with pytest.raises(OutOfDomain):
        evaluate_jet(spec, 1.5)


def test_sampled_map_two_parameters(tmp_path):
    path = tmp_path / "surface.csv"
    axes = [np.linspace(-1, 1, 21), np.linspace(0, 1, 11)]
    write_grid(path, complex_moment_curve(2).values, axes)
    spec = SampledMap.from_csv(path)
    assert spec.domain.dim == 2 and spec.ambient_dim == 4
    v, _ = jet(spec, (0.5, 0.5))
    assert np.allclose(v, [0.5, 0.5, 0.0, 0.5], atol=1e-3)


def test_sampled_csv_diagnostics(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("param_1,out_1\n0,1\n1,x\n")
    with pytest.raises(InvalidInput, match=":3:"):
        SampledMap.from_csv(bad)
    bad.write_text("a,b\n0,1\n")
    with pytest.raises(InvalidInput, match=":1:"):
        SampledMap.from_csv(bad)
    bad.write_text("param_1,param_2,out_1\n0,0,1\n0,1,1\n1,0,1\n")
    with pytest.raises(InvalidInput, match="rectangular"):
        SampledMap.from_csv(bad)
    bad.write_text("param_1,out_1\n0,1\n1\n")
    with pytest.raises(InvalidInput, match=":3:"):
        SampledMap.from_csv(bad)


def test_configuration_build_and_validate():
    c = Configuration.build([0.0, 0.5], [1.0], [0.7])
    assert (c.k, c.l) == (2, 1)
    c.validate(REAL_LINE)
    full = Configuration.build([], [(0.0, 0.0)])
    assert full.directions == (((1, 0), (0, 1)),)
    with pytest.raises(DistinctnessViolation):
        Configuration.build([0.0, 1e-9], []).validate(REAL_LINE)
    with pytest.raises(DistinctnessViolation):
        Configuration.build([0.0], [2 * math.pi - 1e-9], [1.0]).validate(CIRCLE)
    with pytest.raises(DegenerateDirection):
        Configuration.build([], [(0, 0)], [[(1, 0), (2, 0)]]).validate(REAL_PLANE)
    with pytest.raises(InvalidParameter):
        Configuration.build([], [0.0], [[(1,), (2,)]]).validate(REAL_LINE)
    with pytest.raises(DimensionMismatch):
        Configuration.build([(0.0, 1.0)], []).validate(REAL_LINE)


def test_configuration_rationality_and_json():
    c = Configuration.build([Fraction(1, 2)], [Fraction(-1, 3)], [1])
    assert c.is_rational
    d = c.to_dict()
    assert d["through_points"] == [["1/2"]] and d["tangency_points"] == [["-1/3"]]
    assert not Configuration.build([0.5], []).is_rational
