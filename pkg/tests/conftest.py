import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hnabem.beamtrace import strong_beam_boundaries, trace_beams
from hnabem.geometry import make_regular_polygon
from hnabem.hnaspace import build_hna_space
from hnabem.problem import ScatteringProblem

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=1000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

MU_LOSSY = 1.5 + 0.003125j
D1_ANGLE = math.pi / 2


@pytest.fixture(scope="session")
def triangle():
    return make_regular_polygon(3, 2 * math.pi)


@pytest.fixture(scope="session")
def hexagon():
    return make_regular_polygon(6, 2 * math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def triangle_problem(k1, mu=MU_LOSSY, theta=D1_ANGLE, alpha="unity"):
    return ScatteringProblem.from_angle(make_regular_polygon(3, 2 * math.pi), k1, mu, theta, alpha)


@pytest.fixture(scope="session")
def tri_k5():
    pb = triangle_problem(5.0)
    go = trace_beams(pb)
    space = build_hna_space(pb, strong_beam_boundaries(go))
    return pb, go, space


# acceptance criteria: number -> list of (part, passed, detail); printed once per criterion
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{name}: {'ok' if ok else 'FAILED'} ({info})" for name, ok, info in parts)
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
