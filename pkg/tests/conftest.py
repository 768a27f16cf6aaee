import pytest


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    # keep shell-cache IO inside the test sandbox
    monkeypatch.setenv("SPHERE_LAB_CACHE", str(tmp_path / "cache"))
