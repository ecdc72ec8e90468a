import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from willmore_lab.spectral import TorusGrid
from willmore_lab.torus import Mode, PerturbationSpec, clifford_immersion, perturbed_clifford

settings.register_profile(
    "lab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lab")

CLIFFORD_W = 2.0 * np.pi**2

CORPUS_SPECS = {
    "normal-2-0": PerturbationSpec((Mode("normal", 2, 0, 0.05),)),
    "mixed": PerturbationSpec((Mode("normal", 1, 2, 0.05, 0.3), Mode("tangent-theta", 0, 1, 0.03))),
    "ambient": PerturbationSpec((Mode("ambient", 2, 1, 0.05, 0.2, 3), Mode("normal", 3, -1, 0.02))),
    "product": PerturbationSpec((Mode("normal", 0, 0, 0.1),)),
    "gauged": PerturbationSpec((Mode("normal", 2, 1, 0.03, 0.7),)).with_conformal_gauge(),
}


@pytest.fixture(scope="session")
def grid64():
    return TorusGrid(64, 64)


@pytest.fixture(scope="session")
def grid128():
    return TorusGrid(128, 128)


@pytest.fixture(scope="session")
def clifford64(grid64):
    return clifford_immersion(grid64)


@pytest.fixture(scope="session")
def clifford128(grid128):
    return clifford_immersion(grid128)


@pytest.fixture(scope="session")
def corpus64(grid64, clifford64):
    out = {"clifford": clifford64}
    out.update({k: perturbed_clifford(grid64, s) for k, s in CORPUS_SPECS.items()})
    return out


def random_unit(rng, shape=()):
    x = rng.normal(size=shape + (4,))
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def random_so4(rng):
    Q, R = np.linalg.qr(rng.normal(size=(4, 4)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}
_SESSION = {}


def pytest_sessionstart(session):
    import time
    _SESSION["start"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    import time
    if not ACCEPTANCE_LINES:
        return
    elapsed = time.perf_counter() - _SESSION.get("start", time.perf_counter())
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        tr.write_line(ACCEPTANCE_LINES[n])
    tr.write_line(f"[{'PASS' if elapsed <= 300 else 'FAIL'}] suite runtime: {elapsed:.1f} s (<= 300 s)")
