import pytest

from carleman.config import RunConfig
from carleman.pipeline import analyze, build_structure, construct
from carleman.wavelet import MotherWavelet


@pytest.fixture(scope="session")
def mother():
    return MotherWavelet(i_max=2)


def small_config(preset, **kw):
    """Small truncation with a coarse grid, for unit tests of the later stages."""
    base = dict(preset=preset, N=12, R=2, extent=4.0, step=0.05, schwarz_samples=200)
    base.update(kw)
    return RunConfig(**base)


@pytest.fixture(scope="session")
def small_structures():
    return {p: build_structure(analyze(small_config(p)))
            for p in ("zero", "diagonal-decay", "weighted-shift", "random-compact")}


@pytest.fixture(scope="session")
def small_constructions():
    return {p: construct(small_config(p)) for p in ("zero", "diagonal-decay", "weighted-shift")}
