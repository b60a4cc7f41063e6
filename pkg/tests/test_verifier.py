import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from klregular.embeddings import (
    Configuration,
    complex_moment_curve,
    moment_curve,
    restrict_coordinates,
    tensor_product,
    trig_curve,
)
from klregular.errors import (
    DegenerateCurvature,
    DistinctnessViolation,
    EmptyConfiguration,
    InvalidParameter,
    NotATangency,
)
from klregular.lift import exact_determinant, rank_and_margin
from klregular.verifier import (
    check_configuration,
    check_subspace_configuration,
    confluent_vandermonde_certificate,
    confluent_vandermonde_matrix,
    confluent_vandermonde_product,
    find_violating_hyperplane,
    lifted_matrix,
    sub_configurations,
    tangency_crossing_probe,
)


def leibniz_det(rows):
    n = len(rows)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i, j in itertools.combinations(range(n), 2):
            if perm[i] > perm[j]:
                sign = -sign
        term = Fraction(sign)
        for i in range(n):
            term *= rows[i][perm[i]]
        total += term
    return total


def assert_witness_valid(verdict, tol=1e-10):
    w = verdict.hyperplane_witness
    assert w is not None
    scale = max(verdict.rank_report.scale, 1.0) if not verdict.rank_report.exact else 1.0
    res = w.residuals(verdict.lifted)
    assert np.all(res <= max(tol, 1e-9) * scale * 10)
    if w.exact:
        for cov in w.covectors:
            for j in range(verdict.lifted.n_columns):
                assert sum(c * x for c, x in zip(cov, verdict.lifted.matrix[:, j])) == 0


# check_configuration ----------------------------------------------------


def test_examples():
    v = check_configuration(moment_curve(2), Configuration.build([1], [0], [1]))
    assert v.regular and v.rank_report.exact
    assert abs(exact_determinant(v.lifted)) == 1
    v = check_configuration(moment_curve(1), Configuration.build([1], [0], [1]))
    assert not v.regular
    v = check_configuration(moment_curve(2), Configuration.build([0, 1, 2], []))
    assert v.regular and abs(exact_determinant(v.lifted)) == 2


def test_float_path_matches_exact_path():
    c = Configuration.build([1], [0], [1])
    f = check_configuration(moment_curve(2), c, exact=False)
    assert not f.rank_report.exact and f.regular and f.rank_report.margin > 0.1


def test_errors():
    with pytest.raises(DistinctnessViolation):
        check_configuration(moment_curve(3), Configuration.build([0.5, 0.5], []))
    with pytest.raises(EmptyConfiguration):
        check_configuration(moment_curve(3), Configuration.build([], []))


def test_subspace_examples():
    spec = complex_moment_curve(2)
    c = Configuration.build([], [(0, 0)])
    v = check_subspace_configuration(spec, c)
    assert v.regular and v.lifted.n_columns == 3
    single = Configuration.build([(1, 0)], [(0, 0)], [[(1, 0)]])
    a = check_subspace_configuration(spec, single)
    b = check_configuration(spec, single)
    assert a.regular == b.regular and a.rank_report.rank == b.rank_report.rank
    assert np.array_equal(a.lifted.matrix, b.lifted.matrix)
    with pytest.raises(InvalidParameter):
        check_subspace_configuration(
            spec, Configuration.build([], [(0, 0)], [[(1, 0), (0, 1), (1, 1)]])
        )
    with pytest.raises(InvalidParameter):
        check_subspace_configuration(
            spec, Configuration.build([], [(0, 0)], [[(1.0, 0.0), (1.0, 1.0)]])
        )


def test_full_plane_has_n_plus_one_columns_per_tangency():
    spec = complex_moment_curve(3)
    c = Configuration.build([(0.5, 0.5)], [(0, 0), (-0.5, 0.25)])
    v = check_subspace_configuration(spec, c, exact=False)
    assert v.lifted.n_columns == 1 + 2 * 3
    assert v.regular


# witnesses ----------------------------------------------------------------


def test_circle_in_plane_witness_is_whole_plane():
    c = Configuration.build([], [0.3, 2.0], [1.0, 1.0])
    w = find_violating_hyperplane(trig_curve(1), c)
    assert w is not None and w.dim == 2 and w.covectors == ()


def test_regular_config_has_no_witness():
    assert find_violating_hyperplane(moment_curve(2), Configuration.build([1], [0], [1])) is None


def test_padded_parabola_witness_is_plane_z0():
    spec = restrict_coordinates(moment_curve(2), 3)
    c = Configuration.build([Fraction(1), Fraction(-1, 2)], [Fraction(1, 3)], [1])
    v = check_configuration(spec, c)
    assert not v.regular
    w = v.hyperplane_witness
    assert w.dim == 2 and len(w.covectors) == 1
    cov = w.covectors[0]
    assert cov[0] == 0 and cov[1] == 0 and cov[3] == 0 and cov[2] != 0
    assert_witness_valid(v)


def test_witness_validity_numeric():
    rng = np.random.default_rng(8)
    spec = restrict_coordinates(trig_curve(2), 3)
    found = 0
    for _ in range(200):
        t = rng.uniform(0, 2 * math.pi, 3)
        c = Configuration.build(t[:2], t[2:], [1.0])
        v = check_configuration(spec, c)
        if not v.regular:
            found += 1
            assert_witness_valid(v)
    # a moment curve of too low degree always gives a witness
    for _ in range(50):
        t = rng.uniform(-1, 1, 3)
        v = check_configuration(moment_curve(3), Configuration.build(t[:1], t[1:], [1.0, 1.0]))
        if v.regular:
            continue
        found += 1
        assert_witness_valid(v)
    spec = moment_curve(2)
    for _ in range(50):
        t = rng.uniform(-1, 1, 2)
        v = check_configuration(spec, Configuration.build([], t, [1.0, 1.0]))
        assert not v.regular
        assert v.hyperplane_witness.covectors == ()
        found += 1
    assert found >= 50


def test_witness_hyperplane_contains_points_and_tangents():
    spec = restrict_coordinates(moment_curve(2), 3)
    c = Configuration.build([0.7, -0.4], [0.1], [1.0])
    v = check_configuration(spec, c)
    normal, offset = v.hyperplane_witness.hyperplane
    for x in c.through_points + c.tangency_points:
        assert abs(normal @ spec.values(np.array([x]))[0] + offset) < 1e-12
    d = spec.differentials(np.array([[0.1]]), np.array([[1.0]]))[0]
    assert abs(normal @ d) < 1e-12


# monotonicity and certificates -------------------------------------------


def test_sub_configurations_stay_regular():
    rng = np.random.default_rng(9)
    specs = [moment_curve(5), trig_curve(3), tensor_product(moment_curve(2), moment_curve(2))]
    for spec in specs:
        n = spec.domain.dim
        for _ in range(30):
            pts = rng.uniform(-1, 1, size=(4, n))
            dirs = rng.normal(size=(2, n))
            c = Configuration.build(pts[:2], pts[2:], [[d] for d in dirs])
            v = check_configuration(spec, c, exact=False)
            if not v.regular:
                continue
            for sub in sub_configurations(c):
                assert check_configuration(spec, sub, exact=False).regular


def test_dropping_a_direction_keeps_regularity():
    # (k,l) regular implies (k+1, l-1): the direction column is removed
    rng = np.random.default_rng(10)
    spec = moment_curve(6)
    for _ in range(30):
        t = rng.uniform(-1, 1, 5)
        c = Configuration.build(t[:1], t[1:], [1.0] * 4)
        if check_configuration(spec, c, exact=False).regular:
            moved = Configuration.build(list(t[:2]), t[2:], [1.0] * 3)
            assert check_configuration(spec, moved, exact=False).regular


@pytest.mark.parametrize(
    "simple,double,expected",
    [([1], [0], 1), ([0, 1, 2], [], 2), ([], [0, 1], 1)],
)
def test_certificate_examples(simple, double, expected):
    assert abs(confluent_vandermonde_certificate(simple, double)) == expected


def test_certificate_coincident_nodes():
    with pytest.raises(DistinctnessViolation):
        confluent_vandermonde_certificate([1, 1], [0])
    with pytest.raises(DistinctnessViolation):
        confluent_vandermonde_certificate([1], [1])


def test_product_formula_against_leibniz():
    rng = random.Random(12)
    for _ in range(60):
        k, l = rng.randint(0, 3), rng.randint(0, 2)
        if k + 2 * l < 2:
            continue
        nodes = set()
        while len(nodes) < k + l:
            nodes.add(Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
        nodes = list(nodes)
        simple, double = nodes[:k], nodes[k:]
        m = confluent_vandermonde_matrix(simple, double)
        rows = [list(r) for r in m]
        assert abs(leibniz_det(rows)) == confluent_vandermonde_product(simple, double)


def test_certificate_coherence_with_check_configuration():
    rng = random.Random(13)
    for _ in range(60):
        k, l = rng.randint(0, 4), rng.randint(0, 2)
        if k + 2 * l < 2:
            continue
        nodes = set()
        while len(nodes) < k + l:
            nodes.add(Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
        nodes = list(nodes)
        simple, double = nodes[:k], nodes[k:]
        c = Configuration.build(simple, double, [1] * l)
        v = check_configuration(moment_curve(k + 2 * l - 1), c)
        det = confluent_vandermonde_certificate(simple, double)
        assert v.regular == (det != 0)
        assert abs(exact_determinant(v.lifted)) == abs(det)


def test_full_plane_matches_basis_directions():
    """Full tangent plane regular => every single direction regular.

    On rational inputs the plane check is exactly the check with the two
    basis directions; the converse (all lines regular => plane regular)
    is not a per-configuration fact and is only reported.
    """
    rng = random.Random(14)
    spec = complex_moment_curve(3)
    converse_failures = 0
    angles = np.linspace(0, math.pi, 24, endpoint=False)
    for _ in range(100):
        pts = set()
        while len(pts) < 2:
            pts.add((Fraction(rng.randint(-4, 4), 4), Fraction(rng.randint(-4, 4), 4)))
        x, y = sorted(pts)
        plane = Configuration.build([x], [y])
        basis = Configuration.build([x], [y], [[(1, 0), (0, 1)]])
        pv = check_subspace_configuration(spec, plane)
        assert pv.rank_report.exact
        assert pv.regular == check_configuration(spec, basis).regular
        singles = []
        for a in angles:
            c = Configuration.build([x], [y], [[(math.cos(a), math.sin(a))]])
            singles.append(check_configuration(spec, c, exact=False).regular)
        if pv.regular:
            assert all(singles)
        elif all(singles):
            converse_failures += 1
    print(f"lines regular but plane not: {converse_failures} of 100")


# SearchReport margin invariant lives in test_search; probes here -----------


def test_probe_examples():
    p = tangency_crossing_probe(trig_curve(1), [0.0], [1.0], ([1.0, 0.0], -1.0))
    assert p.one_sided and p.curvature_sign == -1
    assert all(v <= 0 for v in p.values)
    p = tangency_crossing_probe(moment_curve(2), [0.0], [1.0], ([0.0, 1.0], 0.0))
    assert p.one_sided and p.curvature_sign == 1
    with pytest.raises(DegenerateCurvature):
        tangency_crossing_probe(moment_curve(3), [0.0], [1.0], ([0.0, 0.0, 1.0], 0.0))


def test_probe_rejects_non_tangent_planes():
    with pytest.raises(NotATangency):
        tangency_crossing_probe(moment_curve(2), [0.0], [1.0], ([0.0, 1.0], 1.0))
    with pytest.raises(NotATangency):
        tangency_crossing_probe(moment_curve(2), [0.0], [1.0], ([1.0, 0.0], 0.0))


def test_lifted_matrix_column_count():
    spec = tensor_product(moment_curve(1), moment_curve(1))
    c = Configuration.build([(1, 1)], [(0, 0), (2, 0)], [[(1, 0), (0, 1)], [(1, 1)]])
    m = lifted_matrix(spec, c)
    assert m.n_columns == 1 + 2 + 3 and m.rows == 4
    assert rank_and_margin(m).rank <= 4
