import os

import pytest

from fake_review_lab.config import (
    DEFAULT_STORE_LIFETIME_S,
    InvalidConfigValue,
    UserConfig,
    fetch_user_config,
)


@pytest.mark.parametrize(
    "function_expected_is_true",
    [
        (lambda obj: obj.app_dir.is_dir()),
        (lambda obj: obj.app_dir.name == "fake-review-lab"),
        (lambda obj: obj.log_path.name == "app.log"),
        (lambda obj: obj.tmp_dir == obj.app_dir / "tmp"),
        (lambda obj: obj.workers == (os.cpu_count() or 1)),
        (lambda obj: obj.store_lifetime_s == DEFAULT_STORE_LIFETIME_S),
    ],
    ids=[
        "app_dir_is_directory",
        "app_dir_name",
        "log_path_name",
        "default_tmp_dir",
        "default_workers",
        "default_store_lifetime",
    ],
)
def test_init(mock_user_config, function_expected_is_true):
    assert function_expected_is_true(mock_user_config)


def test_default_store_lifetime_is_nine_years():
    assert DEFAULT_STORE_LIFETIME_S == 283_824_000


def test_user_config_objects_are_the_same_object_instance(mock_user_config):
    user_config_1 = fetch_user_config(mock_user_config.user_dir)
    user_config_2 = fetch_user_config(mock_user_config.user_dir)
    assert user_config_1 is user_config_2


def test_user_config_objects_are_different_instances(
    mock_user_config: UserConfig,
    mock_user_config_module_scoped: UserConfig,
):
    user_config_1 = fetch_user_config(mock_user_config.user_dir)
    user_config_2 = fetch_user_config(mock_user_config_module_scoped.user_dir)
    assert user_config_1 is not user_config_2


def test_environment_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("FRL_WORKERS", "3")
    monkeypatch.setenv("FRL_TMPDIR", str(tmp_path / "scratch"))
    monkeypatch.setenv("FRL_STORE_LIFETIME_S", "1000")
    user_config = UserConfig(tmp_path)
    assert user_config.workers == 3
    assert user_config.tmp_dir == tmp_path / "scratch"
    assert user_config.store_lifetime_s == 1000


def test_env_file_is_loaded(tmp_path, monkeypatch):
    monkeypatch.delenv("FRL_WORKERS", raising=False)
    config_dir = tmp_path / ".config" / "fake-review-lab"
    config_dir.mkdir(parents=True)
    (config_dir / ".env").write_text("FRL_WORKERS=5\n")
    assert UserConfig(tmp_path).workers == 5
    monkeypatch.delenv("FRL_WORKERS", raising=False)


def test_missing_env_file_is_not_an_error(tmp_path, monkeypatch):
    monkeypatch.delenv("FRL_WORKERS", raising=False)
    user_config = UserConfig(tmp_path)
    assert not user_config.env_file.exists()


@pytest.mark.parametrize(
    "name, value, message",
    [
        ("FRL_WORKERS", "many", "must be an integer"),
        ("FRL_WORKERS", "0", "must be a positive integer"),
        ("FRL_STORE_LIFETIME_S", "-5", "must be a positive integer"),
    ],
)
def test_invalid_environment_value_raises(tmp_path, monkeypatch, name, value, message):
    monkeypatch.setenv(name, value)
    with pytest.raises(InvalidConfigValue, match=f"'{name}' {message}"):
        UserConfig(tmp_path)
