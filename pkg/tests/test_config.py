import pytest

from bdflow.config import SCHEMA, load_config, parse_config
from bdflow.errors import (ConfigError, ConfigRegimeError, ConfigSemanticError, ConfigSyntaxError,
                           ExtinctionRegime)

MINIMAL = """\
[run]
command = pme
[law]
alpha = 2
dim = 1
[grid]
n = 64
[time]
t_end = 2
"""


def test_minimal_config_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.command == "pme"
    assert cfg.mu_c == 0.5 and cfg.cfl == 0.5 and cfg.kind == "barenblatt"
    assert cfg.grid().n == (64,)
    assert cfg.law().alpha == 2.0
    assert cfg.initial_field().time == 1.0
    assert cfg.lines["alpha"] == 4


def test_every_key_has_a_default_slot():
    cfg = parse_config(MINIMAL)
    assert set(cfg.values) == set(SCHEMA)


def test_comments_lists_and_scientific_notation():
    cfg = parse_config(MINIMAL.replace("t_end = 2", "t_end = 2e0  # final time\nsnapshot_times = 1.5, 2"))
    assert cfg.snapshot_times == (1.5, 2.0)


def test_extinction_regime_is_semantic_error():
    text = "command = pme\nalpha = 0.2\ndim = 3\nt_end = 1\n"
    with pytest.raises(ConfigRegimeError) as info:
        parse_config(text)
    assert isinstance(info.value, ExtinctionRegime)
    assert isinstance(info.value, ConfigSemanticError)
    assert info.value.key == "alpha"
    assert info.value.line == 2


def test_duplicate_key_reports_both_lines():
    with pytest.raises(ConfigSyntaxError) as info:
        parse_config(MINIMAL + "[law]\nalpha = 3\n")
    msg = str(info.value)
    assert "line 4" in msg and "line 11" in msg


@pytest.mark.parametrize("text, key", [
    (MINIMAL + "[grid]\nwidth_cells = 4\n", "width_cells"),
    (MINIMAL + "[time]\nalpha = 3\n", "alpha"),
])
def test_unknown_or_misplaced_keys(text, key):
    with pytest.raises(ConfigSyntaxError) as info:
        parse_config(text)
    assert info.value.key == key


@pytest.mark.parametrize("text", [
    MINIMAL + "[physics]\n",
    MINIMAL + "[grid\n",
    MINIMAL + "just words\n",
    MINIMAL.replace("n = 64", "n = sixty"),
    MINIMAL.replace("n = 64", "n = 64.5"),
    MINIMAL.replace("t_end = 2", "t_end ="),
])
def test_syntax_errors(text):
    with pytest.raises(ConfigSyntaxError):
        parse_config(text)


@pytest.mark.parametrize("old, new, key", [
    ("alpha = 2\ndim = 1", "alpha = 0.5\ndim = 2", "alpha"),
    ("t_end = 2", "t_end = 0.5", "t_end"),
    ("t_end = 2", "cfl = 1.5\nt_end = 2", "cfl"),
    ("alpha = 2", "alpha = -1", "alpha"),
    ("n = 64", "n = 4", "n"),
    ("n = 64", "n = 64\nboundary = sticky", "boundary"),
    ("t_end = 2", "t_end = 2\nsnapshot_times = 1.5, 1.2", "snapshot_times"),
    ("t_end = 2", "", "t_end"),
    ("command = pme", "command = plot", "command"),
    ("t_end = 2", "t_end = 2\n[initial]\nkind = gaussian", "kind"),
    ("t_end = 2", "t_end = 2\n[initial]\nkind = file", "path"),
])
def test_semantic_errors(old, new, key):
    with pytest.raises(ConfigSemanticError) as info:
        parse_config(MINIMAL.replace(old, new))
    assert info.value.key == key


def test_sweep_needs_decreasing_eps():
    base = MINIMAL.replace("command = pme", "command = sweep")
    with pytest.raises(ConfigSemanticError):
        parse_config(base)
    with pytest.raises(ConfigSemanticError):
        parse_config(base + "[pressure]\neps_list = 0.01, 0.1\n")
    cfg = parse_config(base + "[pressure]\neps_list = 0.1, 0.01, 0.001\n")
    assert cfg.eps_list == (0.1, 0.01, 0.001)


def test_command_override():
    cfg = parse_config(MINIMAL, command="cns")
    assert cfg.command == "cns"


def test_box_and_reference():
    cfg = parse_config(MINIMAL + "[initial]\nkind = box\nheight = 3\nwidth = 0.5\n")
    f = cfg.initial_field()
    assert f.time == 0.0 and f.values.max() == 3.0
    assert cfg.reference() is None
    assert parse_config(MINIMAL).reference().C == 1.0


def test_as_text_roundtrip():
    cfg = parse_config(MINIMAL + "[initial]\nmass = 2\n")
    again = parse_config(cfg.as_text())
    assert again.values == cfg.values


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")
