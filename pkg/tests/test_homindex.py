"""Index machinery: windings, boundary sums, audits, tangency."""

from fractions import Fraction

import numpy as np
import pytest

from critsense.domains import Ball, Interval
from critsense.errors import (DegenerateError, NonIsolatedZeroError,
                              UnderSampledError)
from critsense.fields import ScalarField
from critsense.gallery import gallery
from critsense.homindex import (boundary_index, classify_by_index,
                                homological_index, poincare_hopf_audit,
                                sign_index_nondegenerate, tangency_check,
                                winding_index_2d)

from oracles import brute_winding

ORIGIN = np.zeros(2)


@pytest.mark.parametrize("eps", [0.1, 0.05])
@pytest.mark.parametrize("name,expected", [
    ("bowl", 1),        # minimum
    ("dome", 1),        # maximum
    ("undulation", 0),  # x^3 + y^2
    ("saddle", -1),     # hyperbolic
    ("monkey", -2),     # three-pronged
])
def test_winding_table(name, expected, eps):
    f = gallery(name)
    assert winding_index_2d(f, ORIGIN, eps) == expected
    assert brute_winding(f, ORIGIN, eps) == expected


@pytest.mark.parametrize("eps", [0.1, 0.05])
def test_peano_winding(eps):
    # four level-set branches through the origin: 1 - 4/2 = -1
    f = gallery("peano")
    assert winding_index_2d(f, ORIGIN, eps) == -1
    assert brute_winding(f, ORIGIN, eps) == -1


def test_winding_radius_independent_until_the_next_zero():
    f = gallery("twogauss")
    # saddle at the origin; nearest other zeros at (+-0.5, 0)
    idx = [winding_index_2d(f, ORIGIN, e) for e in (0.2, 0.1, 0.025)]
    assert idx == [-1, -1, -1]


def test_one_dimensional_sign_indices():
    up = ScalarField(lambda s: s[..., 0] ** 2, 1, grad_fn=lambda s: 2 * s)
    down = ScalarField(lambda s: -s[..., 0] ** 2, 1, grad_fn=lambda s: -2 * s)
    assert homological_index(up, np.zeros(1)) == 1
    assert homological_index(down, np.zeros(1)) == -1


def test_three_dimensional_dispatch():
    bowl3 = gallery("bowl3")
    assert homological_index(bowl3, np.zeros(3)) == 1
    flat = ScalarField(lambda s: np.sum(s ** 4, axis=-1), 3,
                       grad_fn=lambda s: 4 * s ** 3,
                       hess_fn=lambda s: 12.0 * s[..., None] ** 2 *
                       np.eye(3))
    with pytest.raises(DegenerateError):
        homological_index(flat, np.zeros(3))


def test_sign_index_matches_winding_on_quadratics():
    rng = np.random.default_rng(44)
    for _ in range(10):
        A = rng.standard_normal((2, 2))
        H = A + A.T
        if abs(np.linalg.det(H)) < 0.2:
            continue
        f = ScalarField(
            lambda s, H=H: 0.5 * np.einsum("...i,ij,...j->...", s, H, s), 2,
            grad_fn=lambda s, H=H: s @ H,
            hess_fn=lambda s, H=H: np.broadcast_to(H, s.shape[:-1] + (2, 2)))
        assert sign_index_nondegenerate(f, ORIGIN) == \
            winding_index_2d(f, ORIGIN, 0.1)


def test_discontinuous_gradient_never_settles():
    # the angle step across the jump stays at pi under subdivision
    jumpy = ScalarField(
        lambda s: s[..., 0], 2,
        grad_fn=lambda s: np.where(s[..., :1] > 0, 1.0, -1.0) *
        np.ones_like(s))
    with pytest.raises(UnderSampledError) as exc:
        winding_index_2d(jumpy, ORIGIN, 0.1, n_samples=64)
    assert "step" in exc.value.context


def test_zero_on_probe_circle_is_rejected():
    f = ScalarField(
        lambda s: (np.sum(s ** 2, axis=-1) - 0.01) ** 2, 2,
        grad_fn=lambda s: (4.0 * (np.sum(s ** 2, axis=-1)
                                  - 0.01))[..., None] * s)
    with pytest.raises(NonIsolatedZeroError):
        winding_index_2d(f, ORIGIN, 0.1)


@pytest.mark.parametrize("name,expected", [
    ("bowl", "Min"),
    ("dome", "Max"),
    ("saddle", "Saddle(2)"),
    ("monkey", "Saddle(3)"),
    ("peano", "Saddle(2)"),
    ("undulation", "Undulation"),
])
def test_classification_strings(name, expected):
    f = gallery(name)
    idx = homological_index(f, ORIGIN, domain=Ball((0, 0), 1.0))
    assert classify_by_index(f, ORIGIN, 0.25, index=idx) == expected


@pytest.mark.parametrize("name,total,perturbed", [
    ("monkey", Fraction(3), False),
    ("tilt", Fraction(1), False),
    ("saddle", Fraction(2), False),
    ("bowl", Fraction(0), True),   # radial: every tangential sample is 0
])
def test_boundary_index_on_the_disk(name, total, perturbed):
    res = boundary_index(gallery(name), Ball((0, 0), 1.0))
    assert res.total == total
    assert res.perturbed == perturbed


def test_boundary_index_interval_and_3d():
    up = ScalarField(lambda s: s[..., 0] ** 2, 1, grad_fn=lambda s: 2 * s)
    res = boundary_index(up, Interval(-1.0, 1.0))
    assert res.total == Fraction(-1)
    res3 = boundary_index(gallery("bowl3"), Ball((0, 0, 0), 1.0))
    assert res3.total == Fraction(-1)
    assert res3.perturbed


def test_boundary_weights_are_half_integers():
    res = boundary_index(gallery("twogauss_pit"), Ball((0, 0), 1.0))
    assert res.total == Fraction(-2)
    for z in res.zeros:
        assert abs(z.weight) == Fraction(1, 2)


@pytest.mark.parametrize("name", ["bowl", "dome", "saddle", "monkey",
                                  "tilt", "twogauss"])
def test_audit_even_dimension_totals_one(name):
    res = poincare_hopf_audit(gallery(name), Ball((0, 0), 1.0))
    assert res.passed
    assert res.total == Fraction(1)


def test_audit_odd_dimension_totals_zero():
    up = ScalarField(lambda s: s[..., 0] ** 2, 1, grad_fn=lambda s: 2 * s,
                     hess_fn=lambda s: np.full(s.shape[:-1] + (1, 1), 2.0))
    res = poincare_hopf_audit(up, Interval(-1.0, 1.0), grid_res=64)
    assert res.passed
    assert res.total == Fraction(0)
    res3 = poincare_hopf_audit(gallery("bowl3"), Ball((0, 0, 0), 1.0),
                               grid_res=24)
    assert res3.passed
    assert res3.total == Fraction(0)


def test_audit_splits_interior_and_boundary():
    res = poincare_hopf_audit(gallery("twogauss_pit"), Ball((0, 0), 1.0))
    assert res.interior_index == 3
    assert res.boundary_index == Fraction(-2)
    assert res.passed


def test_tangency_transversal_crossing():
    slope = ScalarField(lambda s: s[..., 0], 2,
                        grad_fn=lambda s: np.stack(
                            [np.ones(s.shape[:-1]), np.zeros(s.shape[:-1])],
                            axis=-1))
    res = tangency_check(slope, ORIGIN, 0.0, delta=0.5)
    assert res.transversal
    assert res.n_intersections == 2
    assert res.min_angle == pytest.approx(np.pi / 2, abs=1e-6)
    assert not res.vacuous


def test_tangency_vacuous_and_coincident():
    bowl = gallery("bowl")
    missed = tangency_check(bowl, ORIGIN, 1.0, delta=0.5)
    assert missed.transversal
    assert missed.vacuous
    coincident = tangency_check(bowl, ORIGIN, 0.25, delta=0.5)
    assert not coincident.transversal
    assert coincident.n_intersections == 256


def test_tangency_grazing_level_set():
    # level set y = 0 grazes the circle around (0, eps - 1): the two
    # crossings sit at angle ~ sqrt(2 eps) from the radius
    eps = 2e-7
    rise = ScalarField(lambda s: s[..., 1], 2,
                       grad_fn=lambda s: np.stack(
                           [np.zeros(s.shape[:-1]), np.ones(s.shape[:-1])],
                           axis=-1))
    res = tangency_check(rise, np.array([0.0, eps - 1.0]), 0.0,
                         delta=1.0, n_samples=65536)
    assert not res.transversal
    assert res.n_intersections == 2
    assert res.min_angle == pytest.approx(np.sqrt(2 * eps), rel=0.05)
