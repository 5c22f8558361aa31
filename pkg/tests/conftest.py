import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("solerlab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("solerlab")


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Every test writes its cache under a private temporary directory."""
    monkeypatch.setenv("SOLERLAB_CACHE_DIR", str(tmp_path / "cache"))
    return tmp_path / "cache"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
