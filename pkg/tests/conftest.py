import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def toy_ckks():
    from mmfhe.ckks import ckks_preset, keygen

    p = ckks_preset("toy")
    return p, keygen(p, 7, rotations=[1, 2, -1, 3])


@pytest.fixture(scope="session")
def desk_ckks():
    from mmfhe.ckks import ckks_preset, keygen

    p = ckks_preset("desk")
    return p, keygen(p, 11, rotations=[1, -1, 5])


@pytest.fixture(scope="session")
def toy_tfhe():
    from mmfhe.tfhe import tfhe_keygen, tfhe_preset

    p = tfhe_preset("toy")
    sk, keys = tfhe_keygen(p, 3)
    return p, sk, keys


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.VERDICTS:
            terminalreporter.write_line(line)
