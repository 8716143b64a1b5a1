import numpy as np
import pytest

from deadoil import (CostParams, Grid2D, TimeGrid, builtin_set, solve_forward)


@pytest.fixture(scope="session")
def coef():
    return builtin_set("default", 1.0, 2.0)


@pytest.fixture(scope="session")
def grid16():
    # 16 x 16 interior nodes on the unit square
    return Grid2D(17, 17)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


class Desk:
    """Desk-scale instance: targets from a forward solve of a known control."""

    def __init__(self, coef, q0=1.0, N=256):
        self.grid = Grid2D(17, 17)
        self.tg = TimeGrid(0.05, N)
        self.coef = coef
        s = self.grid.sine_mode(1, 1)
        self.u0 = 0.5 * s
        self.p0 = s.copy()
        self.f_star = np.broadcast_to(5.0 * s, (N,) + s.shape).copy()
        ref = solve_forward(self.grid, self.u0, self.p0, self.f_star, coef, self.tg)
        self.params = CostParams(ref.u, ref.p, beta1=1e-2, q0=q0)


@pytest.fixture(scope="session", params=[1.0, 1.5], ids=["q0=1", "q0=1.5"])
def desk(request, coef):
    return Desk(coef, q0=request.param)


def smooth(grid, rng, modes=3):
    from deadoil.oracle import smooth_field
    return smooth_field(grid, rng, modes)


# acceptance criteria report one summary line each; printed after the run
ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def criterion():
    def record(label: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE[label] = line
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for label in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[label])
