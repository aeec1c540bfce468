import numpy as np
import pytest

from bbmkp_lab.spectral import Field2D, make_grid_2d


class PlaneWaves:
    """f = sum_i A_i cos(xi_i x + mu_i y + theta_i) with distinct wavevectors.

    Every wavevector has x-index m >= 1, so each slice has zero x-mean and
    all norms have closed forms in the amplitudes.
    """

    def __init__(self, grid, rng, n_waves=6, max_m=None, max_p=None):
        self.grid = grid
        max_m = max_m or grid.nx // 4
        max_p = max_p or grid.ny // 4
        seen = set()
        waves = []
        while len(waves) < n_waves:
            m = int(rng.integers(1, max_m + 1))
            p = int(rng.integers(-max_p, max_p + 1))
            if (m, p) in seen:
                continue
            seen.add((m, p))
            waves.append((m, p, rng.normal(), rng.uniform(0, 2 * np.pi)))
        self.waves = waves

    def wavevectors(self):
        g = self.grid
        for m, p, amp, th in self.waves:
            yield 2 * np.pi * m / g.Lx, 2 * np.pi * p / g.Ly, amp, th

    def field(self):
        g = self.grid
        x, y = g.x[:, None], g.y[None, :]
        v = sum(a * np.cos(xi * x + mu * y + th) for xi, mu, a, th in self.wavevectors())
        return Field2D(g, v)

    def slice_derivative(self, y, order):
        """d^order/dx^order of f(., y) evaluated analytically on the grid."""
        x = self.grid.x
        out = np.zeros_like(x)
        for xi, mu, a, th in self.wavevectors():
            out += a * xi**order * np.cos(xi * x + mu * y + th + order * np.pi / 2)
        return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def plane_waves():
    def make(seed, nx=32, ny=16, Lx=20.0, Ly=12.0, n_waves=6):
        return PlaneWaves(make_grid_2d(nx, ny, Lx, Ly), np.random.default_rng(seed), n_waves)

    return make


# ---------------------------------------------------- acceptance reporting

_CRITERIA: dict[int, dict] = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when not in ("setup", "call"):
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "ran": False})
    if call.excinfo is not None:
        entry["ok"] = False
        entry["ran"] = True
    elif call.when == "call":
        entry["ran"] = True


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        verdict = "PASS" if e["ok"] and e["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  {e['title']}")
