import numpy as np
import pytest

from pnamsr.icnn import IcnnParams
from pnamsr.kinematics import LoadingMode
from pnamsr.pnam import AffineScaler, BaselineMlp, PnamModel
from pnamsr.training import StressSample


def random_net(rng, h):
    return IcnnParams(rng.normal(0, 1, h), rng.normal(0, 1, h), rng.normal(0, 1, h),
                      float(rng.normal()), float(rng.normal()))


def random_model(rng, h=10, kind="pnam"):
    sc1 = AffineScaler(3.0, float(rng.uniform(5, 40)))
    sc2 = AffineScaler(3.0, float(rng.uniform(5, 40)))
    scale = float(rng.choice([1.0, 0.05, 3.0]))
    if kind == "pnam":
        return PnamModel(random_net(rng, h), random_net(rng, h), sc1, sc2, scale)
    m = BaselineMlp.init(int(rng.integers(1 << 30)), sc1, sc2, scale, h)
    return m.with_vector(rng.normal(0, 1, m.to_vector().shape))


def random_batch(rng, n=None):
    n = n or int(rng.integers(1, 8))
    out = []
    for _ in range(n):
        mode = LoadingMode(rng.choice(["UE", "EBE", "PS"]))
        lam = float(rng.uniform(0.7, 3.0))
        p3 = float(rng.normal()) if mode is LoadingMode.PS and rng.random() < 0.5 else None
        out.append(StressSample(mode, lam, float(rng.normal()), p3))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def record(n: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
