import json

import pytest

import settings
from constants import DEFAULT_MAX_ATOMS, DEFAULT_MAX_STRATEGIES, ENV_MAX_ATOMS, ENV_MAX_STRATEGIES, MAX_INPUT_BYTES
from security import is_safe_path, is_valid_label, read_text_file


# ---------------------------------------------------------------------------
# Settings layering

def test_defaults_without_file_or_environment(tmp_path) -> None:
    loaded = settings.load_settings(path=str(tmp_path / "absent.json"), environ={})
    assert loaded == settings.DEFAULT_SETTINGS
    assert settings.get_setting("max_atoms") == DEFAULT_MAX_ATOMS
    assert settings.get_setting("no_such_key", 7) == 7


def test_file_then_environment_then_overrides(tmp_path) -> None:
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"max_atoms": 5, "max_strategies": 100}), encoding="utf-8")
    settings.load_settings(path=str(path), environ={ENV_MAX_ATOMS: "9"})
    assert settings.get_setting("max_atoms") == 9
    assert settings.get_setting("max_strategies") == 100
    settings.override_settings(max_strategies=12, max_atoms=None)
    assert settings.get_setting("max_strategies") == 12
    assert settings.get_setting("max_atoms") == 9


def test_bad_file_values_are_ignored(tmp_path, caplog) -> None:
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"max_atoms": 0, "max_strategies": True, "colour": "red", "max_windows": 3}),
                    encoding="utf-8")
    loaded = settings.load_settings(path=str(path), environ={})
    assert loaded["max_atoms"] == DEFAULT_MAX_ATOMS
    assert loaded["max_strategies"] == DEFAULT_MAX_STRATEGIES
    assert loaded["max_windows"] == 3
    assert "colour" not in loaded
    assert "Ignoring unknown setting 'colour'" in caplog.text


@pytest.mark.parametrize("content", ["{not json", "[1, 2]"])
def test_unreadable_file_falls_back_to_defaults(tmp_path, content) -> None:
    path = tmp_path / "settings.json"
    path.write_text(content, encoding="utf-8")
    assert settings.load_settings(path=str(path), environ={}) == settings.DEFAULT_SETTINGS


@pytest.mark.parametrize("raw", ["many", "0", "-4"])
def test_bad_environment_values_are_ignored(tmp_path, raw) -> None:
    loaded = settings.load_settings(path=str(tmp_path / "absent.json"), environ={ENV_MAX_STRATEGIES: raw})
    assert loaded["max_strategies"] == DEFAULT_MAX_STRATEGIES


def test_unknown_override_is_an_error() -> None:
    with pytest.raises(KeyError):
        settings.override_settings(target_fps=60)


def test_reset_reloads_on_next_access(tmp_path, monkeypatch) -> None:
    monkeypatch.setattr(settings, "SETTINGS_FILE", str(tmp_path / "absent.json"))
    monkeypatch.setenv(ENV_MAX_ATOMS, "3")
    settings.reset_settings()
    assert settings.get_setting("max_atoms") == 3


# ---------------------------------------------------------------------------
# Input validation

def test_safe_path_checks(tmp_path) -> None:
    good = tmp_path / "game.tbl"
    good.write_text("cellgame-table v1\n", encoding="utf-8")
    ok, resolved, err = is_safe_path(str(good))
    assert ok and resolved == str(good) and err is None
    assert is_safe_path("")[0] is False
    assert is_safe_path("a\x00b")[2] == "Null byte in path"
    assert is_safe_path(str(tmp_path / "missing.tbl"))[2].startswith("No such file")
    assert is_safe_path(str(tmp_path))[2].startswith("Not a regular file")


def test_oversized_files_are_refused(tmp_path) -> None:
    big = tmp_path / "big.prf"
    big.write_bytes(b"#" * (MAX_INPUT_BYTES + 1))
    ok, _, err = is_safe_path(str(big))
    assert not ok and err.startswith("File too large")


def test_read_text_file(tmp_path) -> None:
    path = tmp_path / "proof.prf"
    path.write_text("1. 0||1 | !0||1 ; TAUT\n", encoding="utf-8")
    assert read_text_file(str(path)) == ("1. 0||1 | !0||1 ; TAUT\n", None)
    binary = tmp_path / "binary.prf"
    binary.write_bytes(b"\xff\xfe\x00")
    assert read_text_file(str(binary)) == (None, "File is not valid UTF-8")


@pytest.mark.parametrize("label, valid", [
    ("HH", True),
    ("[0,1;2,3]", False),
    ("s_1.a-b", True),
    ("[0;1]", True),
    ("a b", False),
    ("#x", False),
    ("", False),
    ("x" * 201, False),
])
def test_label_validation(label, valid) -> None:
    assert is_valid_label(label)[0] is valid
