import math
import pathlib

import pytest

import shellmem

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_material_derived_constants():
    p = shellmem.MaterialParams(1.0, 1.0, 1.0, 1.0)
    assert p.k == pytest.approx(1.5)
    assert p.Lambda == pytest.approx(-0.5)


def test_builtin_and_file_scenarios_agree():
    assert "cylinder-panel" in shellmem.builtin_scenario_names()
    a = shellmem.builtin_scenario("cylinder-panel")
    b = shellmem.load_scenario(CONFIGS / "cylinder-panel.toml")
    assert (a.nx, a.ny, a.layers, a.eps) == (b.nx, b.ny, b.layers, b.eps)


def test_bad_config_raises_config_error():
    with pytest.raises(shellmem.ConfigError):
        shellmem.parse_scenario("nx = -3\n")
    with pytest.raises(ValueError):
        shellmem.parse_scenario("no_such_key = 1\n")


def test_convolve_matches_closed_form():
    n, k, T = 200, 2.0, 1.0
    f = [i * T / n for i in range(n + 1)]
    H = shellmem.convolve(f, k, T)
    exact = T / k - (1 - math.exp(-k * T)) / k**2
    assert H[-1] == pytest.approx(exact, abs=1e-13)


def test_memory_suite_passes():
    r = shellmem.run_properties("memory", seed=3)
    assert r.passed(), [c.name for c in r.checks if not c.passed]
    with pytest.raises(shellmem.UnknownSuiteError):
        shellmem.run_properties("nonsense")


def test_small_solves():
    s = shellmem.builtin_scenario("cylinder-panel")
    s.nx = s.ny = 3
    s.layers = 2
    s.N = 4
    out2 = shellmem.solve2d(s)
    assert out2["kernel"].kind == "first-kind"
    assert len(out2["seminorm"]) == 5
    out3 = shellmem.solve3d(s, 0.2)
    assert out3["eps"] == 0.2
    assert all(math.isfinite(x) for x in out3["d3"])


def test_geometry_check_passes():
    checks = shellmem.geometry_check(shellmem.builtin_scenario("cylinder-panel"))
    assert checks and all(c.passed for c in checks)
