import numpy as np
import pytest

from anisoperim import anisotropy as an


def norm_suite():
    """The eight reference norms used by the property tests (name -> norm, dim)."""
    return {
        "euclidean-3": (an.Euclidean(), 3),
        "l1-3": (an.PNorm(1), 3),
        "linf-3": (an.PNorm(np.inf), 3),
        "parallelogram-pi/4": (an.parallelogram(np.pi / 4), 2),
        "hexagon-1/2": (an.hexagon(0.5), 2),
        "cylindrical-l1": (an.cylindrical(an.PNorm(1)), 3),
        "conical-euclidean": (an.conical(an.Euclidean()), 3),
        "omega2-l1": (an.omega_norm({"p": 2}, an.PNorm(1)), 3),
    }


def polytope_suite():
    """Polytope norms on which the exact predicates are cross-checked."""
    return {
        "parallelogram-pi/6": an.parallelogram(np.pi / 6),
        "parallelogram-pi/4": an.parallelogram(np.pi / 4),
        "parallelogram-pi/3": an.parallelogram(np.pi / 3),
        "hexagon-1": an.hexagon(1.0),
        "hexagon-1/2": an.hexagon(0.5),
        "square": an.Polytope([[1, 1], [1, -1], [-1, 1], [-1, -1]]),
        "tilted-octahedron": an.Polytope(
            [[1, 0, 0.3], [-1, 0, -0.3], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
        ),
        "cube": an.Polytope(np.array(np.meshgrid([-1, 1], [-1, 1], [-1, 1])).reshape(3, -1).T),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
