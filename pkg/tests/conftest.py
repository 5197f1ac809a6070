import numpy as np
import pytest

from jointirs.channel import DuplexChannelSet, LinkChannels
from jointirs.metrics import DuplexParams, Weights

ACCEPTANCE_LINES = []


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_link(rng, k, m, n, reflect_scale=1.0):
    return LinkChannels(crandn(rng, k, m), reflect_scale * crandn(rng, k, n), crandn(rng, m, n))


def random_channels(rng, k=2, m=4, n=16, duplex="fdd", reflect_scale=1.0):
    """Unit-scale synthetic channels; TDD shares one link object for both directions."""
    ul = random_link(rng, k, m, n, reflect_scale)
    dl = ul if duplex == "tdd" else random_link(rng, k, m, n, reflect_scale)
    return DuplexChannelSet(dl, ul, 1.95, 1.95 if duplex == "tdd" else 2.14, duplex)


def random_weights(rng, k):
    dl, ul = rng.uniform(0.2, 1.0, k), rng.uniform(0.2, 1.0, k)
    return Weights(dl / dl.sum(), ul / ul.sum())


def unit_params(alpha=0.5, beta=0.5, p_dl=4.0, p_ul=2.0, noise_dl=1.0, noise_ul=1.0, duplex="fdd"):
    return DuplexParams(alpha, beta, 1.0, p_dl, p_ul, noise_dl, noise_ul, duplex)


def random_phases(rng, n):
    return np.exp(2j * np.pi * rng.random(n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    def report(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
