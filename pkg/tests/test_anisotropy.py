import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from anisoperim import anisotropy as an
from conftest import norm_suite, polytope_suite

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)


def quadrant_dual_bruteforce(p, s_star, t_star, n=200001):
    """sup of s*a + t*b over the quadrant arc omega_p(a, b) = 1."""
    th = np.linspace(0.0, np.pi / 2, n)
    a, b = np.cos(th), np.sin(th)
    r = an.Omega(p)(a, b)
    return np.max((s_star * a + t_star * b) / r)


# --------------------------------------------------------------- examples


def test_eval_examples():
    assert an.Euclidean().eval([3, 4]) == 5.0
    assert an.cylindrical(an.PNorm(1)).eval([1, 1, 3]) == 3.0
    for alpha in (np.pi / 6, np.pi / 4, np.pi / 3):
        assert an.parallelogram(alpha).eval([-2.5, 0]) == pytest.approx(2.5, abs=1e-12)


def test_eval_dual_examples():
    assert an.PNorm(1).eval_dual([1, 1]) == 1.0
    assert an.parallelogram(np.pi / 4).eval_dual([1, 0]) == pytest.approx(2.0, abs=1e-12)
    assert an.cylindrical(an.Euclidean()).eval_dual([0, 0, 1]) == 1.0


def test_eval_zero_only_at_origin():
    for norm, dim in norm_suite().values():
        assert norm.eval(np.zeros(dim)) == 0.0
        assert norm.eval(np.eye(dim)[0] * 1e-8) > 0


def test_eval_rejects_bad_input():
    with pytest.raises(ValueError):
        an.Euclidean().eval([np.nan, 1])
    with pytest.raises(ValueError):
        an.PNorm(1, dim=3).eval([1, 2])
    with pytest.raises(ValueError):
        an.hexagon(1).eval([1, 2, 3])


@pytest.mark.parametrize(
    "verts",
    [
        [[1, 1], [2, 1], [1, 2]],  # origin outside
        [[1, 0], [-1, 0], [2, 0], [-2, 0]],  # flat
        [[2, 0], [-1, 0], [0, 1], [0, -1]],  # not symmetric
    ],
)
def test_degenerate_polytopes_rejected_at_construction(verts):
    with pytest.raises(ValueError):
        an.Polytope(verts)


def test_omega_dual_examples():
    assert an.omega_dual("max", 1, 1) == 2.0
    assert an.omega_dual("sum", 1, 1) == 1.0
    assert an.omega_dual({"p": 2}, 3, 4) == pytest.approx(5.0, abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, np.inf])
@pytest.mark.parametrize("pt", [(3.0, 4.0), (1.0, 0.0), (0.2, 2.0)])
def test_omega_dual_matches_bruteforce(p, pt):
    brute = quadrant_dual_bruteforce(p, *pt)
    assert an.omega_dual(an.Omega(p), *pt) == pytest.approx(brute, rel=1e-8)


def test_omega_dual_rejects_negative():
    with pytest.raises(ValueError):
        an.omega_dual("max", -1, 0)


def test_composed_duals():
    cyl = an.cylindrical(an.PNorm(1))
    assert cyl.dual().kind == "conical"
    assert isinstance(cyl.dual().base, an.PNorm) and np.isinf(cyl.dual().base.p)
    om = an.omega_norm({"p": 3}, an.Euclidean())
    assert om.dual().omega.p == pytest.approx(1.5)


# --------------------------------------------------------------- predicates


def test_generalized_graph_examples():
    assert an.check_generalized_graph(an.hexagon(1.0)).verdict == "holds"
    rep = an.check_generalized_graph(an.Quadratic([[1, 0.5], [0.5, 1]]))
    assert rep.verdict == "fails"
    np.testing.assert_allclose(rep.witness, [2, -1])
    # Phi(2, 0) = 2 > sqrt(3) = Phi(2, -1)
    q = an.Quadratic([[1, 0.5], [0.5, 1]])
    assert q.eval([2, 0]) == 2 and q.eval([2, -1]) == pytest.approx(np.sqrt(3))
    sym = an.Polytope([[2, 1], [2, -1], [-2, 1], [-2, -1], [0, 3], [0, -3]])
    assert an.check_generalized_graph(sym).verdict == "holds"
    for norm, _ in norm_suite().values():
        if norm.structurally_symmetric_last():
            assert an.check_generalized_graph(norm, dim=3).verdict == "holds"


def test_generalized_graph_failure_witness_reverifies():
    for name, P in polytope_suite().items():
        rep = an.check_generalized_graph(P)
        if rep.verdict == "fails":
            w = rep.witness
            flat = np.r_[w[:-1], 0.0]
            assert P.eval(flat) - P.eval(w) > 1e-9, name


def test_sampled_generalized_graph_agrees_with_exact():
    for name, P in polytope_suite().items():
        exact = an.check_generalized_graph(P)
        sampled = an.check_generalized_graph(P, method="sampled", seed=3)
        assert sampled.method.startswith("sampled")
        assert exact.verdict == sampled.verdict, name


def test_partial_monotonicity_examples():
    for base in (an.PNorm(1), an.Euclidean(), an.hexagon(0.5)):
        assert an.check_partial_monotonicity(an.cylindrical(base), dim=3).verdict == "holds"
    assert an.check_partial_monotonicity(an.omega_norm({"p": 2}, an.PNorm(1)), dim=3).holds
    q = an.Quadratic([[1, 0.5], [0.5, 1]])
    rep = an.check_partial_monotonicity(q)
    assert rep.verdict == "fails"
    x, y = rep.witness
    assert q.eval(x) > q.eval(y) + 1e-9
    assert q.eval(np.r_[x[:-1], 0]) <= q.eval(np.r_[y[:-1], 0]) + 1e-12
    assert abs(x[-1]) <= abs(y[-1]) + 1e-12


def test_sampled_partial_monotonicity_of_composed_norm():
    rep = an.check_partial_monotonicity(
        an.cylindrical(an.hexagon(0.5)), method="sampled", seed=1
    )
    assert rep.verdict == "holds"
    assert rep.method.startswith("sampled")


def test_partial_monotone_implies_generalized_graph():
    cands = list(polytope_suite().values()) + [
        an.Quadratic([[1, 0.5], [0.5, 1]]),
        an.Quadratic([[2, 0], [0, 1]]),
    ]
    for norm in cands:
        if an.check_partial_monotonicity(norm).holds:
            assert an.check_generalized_graph(norm).holds


def test_restriction_gap_examples():
    for alpha in (np.pi / 6, np.pi / 4, np.pi / 3):
        P = an.parallelogram(alpha)
        assert an.restriction_gap(P, [1, 0]) == pytest.approx(1 / np.tan(alpha), abs=1e-9)
        assert an.restriction_gap(P, [1.0]) == pytest.approx(1 / np.tan(alpha), abs=1e-9)
    cyl = an.cylindrical(an.PNorm(1))
    for d in ([1, 0], [0.3, -2.0], [1, 1]):
        assert an.restriction_gap(cyl, d, dim=3) == pytest.approx(0, abs=1e-12)
    assert an.restriction_gap(cyl, "sup", dim=3) == pytest.approx(0, abs=1e-12)


def test_restriction_gap_sup_iff_generalized_graph():
    for name, P in polytope_suite().items():
        gap = an.restriction_gap(P, "sup")
        assert gap >= -1e-12
        assert (gap <= 1e-9) == an.check_generalized_graph(P).holds, name


def test_dual_graph_symmetry_on_polytopes():
    for name, P in polytope_suite().items():
        assert (
            an.check_generalized_graph(P).verdict
            == an.check_generalized_graph(P.dual()).verdict
        ), name


# --------------------------------------------------------------- calibration & projection


def test_calibration_examples():
    cube = polytope_suite()["cube"]
    np.testing.assert_allclose(cube.calibration([1, 0, 0]), [1, 0, 0])
    np.testing.assert_allclose(an.PNorm(np.inf, 3).calibration([1, 0, 0]), [1, 0, 0])
    nu = np.array([1, 1, 0]) / np.sqrt(2)
    zeta = cube.calibration(nu)
    np.testing.assert_allclose(zeta, [1, 1, 0])
    assert nu @ zeta == pytest.approx(np.sqrt(2))
    np.testing.assert_allclose(an.Euclidean().calibration(nu), nu)


def test_calibration_property(rng):
    for name, (norm, dim) in norm_suite().items():
        for nu in rng.normal(size=(50, dim)):
            nu /= np.linalg.norm(nu)
            z = norm.calibration(nu)
            assert norm.eval(z) == pytest.approx(1.0, abs=1e-9), name
            assert nu @ z == pytest.approx(norm.eval_dual(nu), abs=1e-9), name


@pytest.mark.parametrize(
    "norm,dim",
    [
        (an.Euclidean(), 2),
        (an.PNorm(1), 3),
        (an.PNorm(np.inf), 2),
        (an.hexagon(0.5), 2),
        (an.parallelogram(np.pi / 3), 2),
        (an.Polytope([[2.0], [-2.0]]), 1),
        (an.cylindrical(an.PNorm(1)), 3),
    ],
)
def test_project_ball_is_nearest_point(norm, dim, rng):
    pts = rng.normal(scale=2.0, size=(200, dim))
    proj = norm.project_ball(pts)
    assert np.all(norm.eval(proj) <= 1 + 1e-12)
    # variational inequality: (p - P p) . (z - P p) <= 0 for z in the ball
    zs = rng.normal(size=(300, dim))
    zs /= np.maximum(norm.eval(zs), 1.0)[:, None] * 1.0
    zs = zs / np.maximum(norm.eval(zs), 1e-300)[:, None] * rng.random((300, 1))
    lhs = np.einsum("ik,jk->ij", pts - proj, zs) - np.sum((pts - proj) * proj, axis=1)[:, None]
    assert lhs.max() <= 1e-9


# --------------------------------------------------------------- restriction & descriptors


def test_restriction_of_parallelogram_is_absolute_value():
    for alpha in (np.pi / 6, np.pi / 4, np.pi / 3):
        r = an.parallelogram(alpha).restriction()
        assert r.eval([1.0]) == pytest.approx(1.0)
        assert an.parallelogram(alpha).dual_restriction().eval([1.0]) == pytest.approx(
            1 / (1 + 1 / np.tan(alpha))
        )


def test_descriptor_round_trip():
    for norm, dim in list(norm_suite().values()) + [(an.Quadratic([[2, 0.1], [0.1, 1]]), 2)]:
        again = an.from_dict(norm.to_dict())
        x = np.random.default_rng(0).normal(size=(20, dim))
        np.testing.assert_allclose(again.eval(x), norm.eval(x), rtol=1e-14)


@pytest.mark.parametrize(
    "desc",
    [
        {"kind": "nope"},
        {"kind": "euclidean", "color": 1},
        {"kind": "cylindrical"},
        {"kind": "omega", "omega": "min", "base": {"kind": "euclidean"}},
        [1, 2],
    ],
)
def test_descriptor_rejects_bad_input(desc):
    with pytest.raises((ValueError, KeyError)):
        an.from_dict(desc)


# --------------------------------------------------------------- properties


@settings(max_examples=200, deadline=None)
@given(vec3, vec3, st.floats(-50, 50, allow_nan=False))
def test_norm_axioms(x, y, lam):
    for norm, dim in norm_suite().values():
        a, b = x[:dim], y[:dim]
        na, nb = norm.eval(a), norm.eval(b)
        assert norm.eval(lam * a) == pytest.approx(abs(lam) * na, rel=1e-9, abs=1e-9)
        assert norm.eval(a + b) <= na + nb + 1e-9 * (1 + na + nb)
        assert a @ b <= norm.eval_dual(a) * nb + 1e-9 * (1 + abs(a @ b))


@settings(max_examples=100, deadline=None)
@given(vec3)
def test_cylindrical_dual_is_conical_over_base_dual(x):
    for base in (an.PNorm(1), an.Euclidean(), an.PNorm(3)):
        direct = base.dual().eval(x[:2]) + abs(x[2])
        assert an.cylindrical(base).eval_dual(x) == pytest.approx(direct, rel=1e-12, abs=1e-12)
        direct = max(base.dual().eval(x[:2]), abs(x[2]))
        assert an.conical(base).eval_dual(x) == pytest.approx(direct, rel=1e-12, abs=1e-12)
