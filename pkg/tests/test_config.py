import pytest
import yaml

from src.config import TOLERANCE_ENV, load_config
from src.errors import StructuralError


@pytest.fixture(autouse=True)
def no_tolerance_env(monkeypatch):
    monkeypatch.delenv(TOLERANCE_ENV, raising=False)


def test_defaults():
    cfg = load_config()
    assert cfg.tolerance.validation == 1e-9
    assert cfg.tolerance.condition == 1e-9
    assert cfg.slice.resolution == 200
    assert cfg.output.digits == 17
    assert list(cfg.tsirelson_search.offsets) == [-1.0, -0.5, 0.0, 0.5, 1.0]


def test_overrides():
    cfg = load_config(overrides=["slice.workers=8", "tolerance.condition=1.0e-6"])
    assert cfg.slice.workers == 8
    assert cfg.tolerance.condition == 1e-6
    assert cfg.tolerance.validation == 1e-9


def test_unknown_override_is_rejected():
    with pytest.raises(StructuralError):
        load_config(overrides=["slice.colour=red"])


def test_tolerance_from_environment(monkeypatch):
    monkeypatch.setenv(TOLERANCE_ENV, "1e-7")
    cfg = load_config()
    assert cfg.tolerance.validation == 1e-7
    assert cfg.tolerance.condition == 1e-7


def test_bad_tolerance_from_environment(monkeypatch):
    monkeypatch.setenv(TOLERANCE_ENV, "tight")
    with pytest.raises(StructuralError):
        load_config()


def test_missing_file(tmp_path):
    with pytest.raises(StructuralError):
        load_config(tmp_path / "absent.yaml")


def test_custom_file(tmp_path):
    settings = {"tolerance": {"validation": 1e-6, "condition": 1e-6}}
    (tmp_path / "small.yaml").write_text(yaml.safe_dump(settings))
    cfg = load_config(tmp_path / "small.yaml")
    assert cfg.tolerance.condition == 1e-6
