"""Shared, cached fixtures.  Building orders and class lists dominates the cost,
so each prime is set up once per session."""

from __future__ import annotations

from functools import lru_cache

import pytest

from levelp2.hecke_ops import HeckeData, bilateral_group
from levelp2.ideals import enumerate_classes
from levelp2.orders_p2 import build_context
from levelp2.spectra import spectrum

PRIMES = (7, 11, 13)

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


class Setup:
    def __init__(self, p: int):
        self.p = p
        self.ctx = build_context(p)
        self.cl = enumerate_classes(self.ctx.O_tilde, p, seeds=self.ctx.norm_one)
        self.G = bilateral_group(self.ctx)
        self._spectra = {}
        self._cl_O = None
        self.hecke = HeckeData(self.cl, 30)

    @property
    def cl_O(self):
        if self._cl_O is None:
            self._cl_O = enumerate_classes(self.ctx.O_max, self.p)
        return self._cl_O

    def spectrum(self, cell: int | None = None):
        cell = self.G.norm_p[0] if cell is None else cell
        if cell not in self._spectra:
            self._spectra[cell] = spectrum(self.ctx, self.cl, self.G, cell, cl_O=self.cl_O)
        return self._spectra[cell]


@lru_cache(maxsize=None)
def setup_for(p: int) -> Setup:
    return Setup(p)


@lru_cache(maxsize=None)
def ksetting(p: int, d: int):
    from levelp2.verify import KSetting

    return KSetting(-p * d, p)


@pytest.fixture(scope="session")
def s7():
    return setup_for(7)


@pytest.fixture(scope="session")
def s11():
    return setup_for(11)


@pytest.fixture(scope="session")
def s13():
    return setup_for(13)


@pytest.fixture(scope="session", params=PRIMES)
def setup(request):
    return setup_for(request.param)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
