import numpy as np
import pytest

from linsense.model import DriveSpec, ModeParams, build_network, stability

ACCEPTANCE = []


def record_acceptance(label, ok, detail=""):
    ACCEPTANCE.append((label, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")


def random_network(rng, n, gain=True, style="general", max_tries=100):
    """Stable random network; couplings reciprocal, one-way or unstructured."""
    for _ in range(max_tries):
        modes = [
            ModeParams(
                w0=rng.uniform(-1, 1),
                kappa_ex=rng.uniform(0.1, 2),
                kappa_0=rng.uniform(0.05, 2),
                g=rng.uniform(0, 1) if gain and rng.random() < 0.5 else 0.0,
            )
            for _ in range(n)
        ]
        z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * 0.5
        if style == "reciprocal":
            z = np.triu(z, 1)
            z = z + z.conj().T
        elif style == "one_way":
            z = np.triu(z, 1)
        net = build_network(modes, z)
        if stability(net).decay_margin > 1e-2:
            return net
    raise RuntimeError("no stable network drawn")


def random_drive(rng, n):
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return DriveSpec(rng.uniform(-1, 1), 3 * a)


@pytest.fixture
def rng():
    return np.random.default_rng(20240519)


@pytest.fixture
def passive():
    return build_network([ModeParams(w0=0.0, kappa_ex=1.0, kappa_0=1.0)])
