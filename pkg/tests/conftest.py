import numpy as np
import pytest

from qdock.big import build_big, select_receptor_scope
from qdock.sasa import SasaConfig, filter_points, shrake_rupley
from qdock.synthetic import make_synthetic_instance, make_toy_instance


@pytest.fixture(scope="session")
def surrogate():
    return make_synthetic_instance(seed=0)


@pytest.fixture(scope="session")
def surrogate_filtered(surrogate):
    inst = surrogate
    scoped = select_receptor_scope(inst.receptor_points, inst.crystal_atoms, 6.5)
    areas = shrake_rupley(inst.receptor_atoms, SasaConfig())
    kept, removed = filter_points(scoped, areas, 1.0)
    return scoped, kept, removed


@pytest.fixture(scope="session")
def surrogate_big(surrogate, surrogate_filtered):
    _, kept, _ = surrogate_filtered
    return build_big(surrogate.ligand_points, kept, surrogate.ensemble)


@pytest.fixture(scope="session")
def surrogate_complement(surrogate_big):
    return surrogate_big.complement()


@pytest.fixture
def toy():
    return make_toy_instance()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance report ------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    def add(criterion: str, status: str, detail: str):
        ACCEPTANCE_LINES.append(f"[{status}] criterion {criterion}: {detail}")
    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s.split("criterion ")[1]):
            terminalreporter.write_line(line)
