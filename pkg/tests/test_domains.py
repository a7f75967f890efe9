"""Domain geometry: containment, projection, frames, grammar."""

import numpy as np
import pytest

from critsense.cli import parse_domain
from critsense.domains import Ball, Box, Interval
from critsense.errors import UsageError


@pytest.mark.parametrize("dom", [
    Interval(-1.0, 2.0),
    Box([-1.0, 0.0], [1.0, 3.0]),
    Ball([0.5, -0.5], 2.0),
])
def test_projection_lands_inside(dom):
    rng = np.random.default_rng(7)
    pts = rng.uniform(-5, 5, size=(40, dom.dim))
    proj = np.array([dom.project(p) for p in pts])
    assert np.all(dom.contains(proj, tol=1e-9))


def test_interval_boundary_distance():
    dom = Interval(-1.0, 1.0)
    assert dom.boundary_distance(np.array([0.0])) == pytest.approx(1.0)
    assert dom.boundary_distance(np.array([0.75])) == pytest.approx(0.25)
    assert dom.euler_char == 1
    assert dom.diameter == pytest.approx(2.0)


def test_ball_frames_are_outward_unit_normals():
    dom = Ball([0.0, 0.0], 2.0)
    pts, normals = dom.boundary_frames(64)
    assert np.allclose(np.linalg.norm(pts, axis=1), 2.0)
    assert np.allclose(np.linalg.norm(normals, axis=1), 1.0)
    # outward: normal parallel to the radius
    perp = pts[:, 0] * normals[:, 1] - pts[:, 1] * normals[:, 0]
    assert np.allclose(perp, 0.0, atol=1e-12)
    assert np.all(np.sum(pts * normals, axis=1) > 0)


def test_box_edges_walk_the_rim():
    dom = Box([0.0, 0.0], [2.0, 1.0])
    edges = dom.edges()
    assert len(edges) == 4
    center = np.array([1.0, 0.5])
    starts = [e[0] for e in edges]
    for i, (start, tangent, normal) in enumerate(edges):
        assert np.linalg.norm(tangent) == pytest.approx(1.0)
        assert np.linalg.norm(normal) == pytest.approx(1.0)
        assert abs(float(np.dot(tangent, normal))) < 1e-14
        nxt = starts[(i + 1) % 4]
        length = float(np.linalg.norm(nxt - start))
        assert np.allclose(start + tangent * length, nxt)
        # outward normal
        assert float(np.dot(normal, 0.5 * (start + nxt) - center)) > 0


def test_lattice_has_res_plus_one_nodes_per_axis():
    dom = Box([0.0, 0.0], [1.0, 1.0])
    assert dom.lattice(8).shape == (9, 9, 2)
    dom1 = Interval(0.0, 1.0)
    assert dom1.lattice(16).shape == (17, 1)


@pytest.mark.parametrize("text,cls", [
    ("interval:-1,1", Interval),
    ("box:-1,-1:1,1", Box),
    ("ball:0,0:1", Ball),
])
def test_domain_grammar_round_trip(text, cls):
    dom = parse_domain(text)
    assert isinstance(dom, cls)
    assert dom.descriptor() == text


@pytest.mark.parametrize("text", ["disk:0,0:1", "ball:0,0", "interval:a,b"])
def test_domain_grammar_rejects_malformed(text):
    with pytest.raises(UsageError):
        parse_domain(text)
