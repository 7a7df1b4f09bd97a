import math

import numpy as np
import pytest

from lorentz_lab.geometry.metric_family import BumpPerturbedWarp, TorusMatrix, WarpedProduct
from lorentz_lab.utils.config import (
    CertificateConfig,
    FamilyConfig,
    RunConfig,
    Tolerances,
    build_family,
    resolve_growth_rate,
)
from lorentz_lab.utils.errors import ConfigurationError

TORUS_TOML = """
seed = 3
suites = ["hypothesis", "growth"]

[family]
kind = "torus-matrix"
fiber = "torus"
dim = 2
warps = [{name = "cosh"}, {name = "exp", rate = 2.0}]

[certificate]
t0 = 1.5
c = 0.5

[net]
T_values = [1.5, 2.0]
"""


def test_defaults_are_valid():
    config = RunConfig()
    assert config.family.kind == "warped-product"
    assert config.certificate.c == "auto"
    assert config.jobs == 1


def test_from_file(tmp_path):
    path = tmp_path / "torus.toml"
    path.write_text(TORUS_TOML)
    config = RunConfig.from_file(path)
    assert config.seed == 3
    assert config.suites == ["hypothesis", "growth"]
    assert config.family.warps[1] == {"name": "exp", "rate": 2.0}
    assert config.net.T_values == [1.5, 2.0]
    assert config.source == str(path)
    family = build_family(config.family)
    assert isinstance(family, TorusMatrix)
    np.testing.assert_allclose(family.metric(1.0, 0, np.zeros(2)), np.diag([math.cosh(1) ** 2, math.exp(4.0)]))


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        RunConfig.from_file(tmp_path / "missing.toml")
    broken = tmp_path / "broken.toml"
    broken.write_text("[family\nkind = ")
    with pytest.raises(ConfigurationError, match="not valid TOML"):
        RunConfig.from_file(broken)


@pytest.mark.parametrize(
    "data, message",
    [
        ({"colour": "red"}, "Unknown top-level"),
        ({"family": {"warp_name": "cosh"}}, "Unknown key"),
        ({"family": "cosh"}, "must be a table"),
        ({"family": {"dim": 4}}, "dimension"),
        ({"family": {"kind": "torus-matrix"}}, "torus fiber"),
        ({"certificate": {"t0": -1.0}}, "t0"),
        ({"certificate": {"c": 0}}, "c must be positive"),
        ({"certificate": {"expect": "maybe"}}, "expectation"),
        ({"tolerances": {"rtol": 0.0}}, "rtol"),
        ({"batch": {"apex_low": 2.0, "apex_high": 1.0}}, "apex_low"),
        ({"seed": -1}, "seed"),
        ({"jobs": 0}, "jobs"),
        ({"cover": {"min_radius": 0.0}}, "min_radius"),
        ({"suites": ["growth", "curvature"]}, "Unknown suite"),
    ],
)
def test_invalid_configurations(data, message):
    with pytest.raises(ConfigurationError, match=message):
        RunConfig.from_dict(data)


def test_configuration_error_is_value_error():
    with pytest.raises(ValueError):
        CertificateConfig(t0=0.0)


def test_with_overrides():
    config = RunConfig(seed=1, jobs=2)
    assert config.with_overrides().seed == 1
    changed = config.with_overrides(seed=5, out_dir="reports", jobs=4)
    assert (changed.seed, changed.out_dir, changed.jobs) == (5, "reports", 4)
    assert config.seed == 1


def test_out_dir_resolution(monkeypatch):
    monkeypatch.delenv("LORENTZ_LAB_OUT", raising=False)
    assert str(RunConfig().resolved_out_dir()) == "lorentz-lab-out"
    monkeypatch.setenv("LORENTZ_LAB_OUT", "/tmp/from-env")
    assert str(RunConfig().resolved_out_dir()) == "/tmp/from-env"
    assert str(RunConfig(out_dir="explicit").resolved_out_dir()) == "explicit"


def test_digest():
    config = RunConfig()
    assert len(config.digest()) == 64
    assert config.digest() == RunConfig().digest()
    assert config.with_overrides(out_dir="elsewhere", jobs=8).digest() == config.digest()
    assert config.with_overrides(seed=1).digest() != config.digest()


def test_build_families():
    assert build_family(FamilyConfig()).is_de_sitter
    sphere = build_family(FamilyConfig(dim=2, chart_system="polar"))
    assert isinstance(sphere, WarpedProduct)
    assert sphere.fiber.chart_system == "polar"
    flat = build_family(FamilyConfig(kind="torus-matrix", fiber="torus", dim=2, matrix=[[1.0, 0.0], [0.0, 2.0]]))
    np.testing.assert_allclose(flat.metric(3.0, 0, np.zeros(2)), np.diag([1.0, 2.0]))
    bump = build_family(FamilyConfig(kind="bump-perturbed-warp", epsilon=0.2))
    assert isinstance(bump, BumpPerturbedWarp)
    assert bump.epsilon == 0.2


def test_build_family_rejects_bad_values():
    with pytest.raises(ConfigurationError):
        build_family(FamilyConfig(warp="tanh"))
    with pytest.raises(ConfigurationError):
        build_family(FamilyConfig(kind="bump-perturbed-warp", epsilon=-5.0))


def test_resolve_growth_rate():
    family = build_family(FamilyConfig())
    assert resolve_growth_rate(CertificateConfig(c=0.5), family) == 0.5
    auto = resolve_growth_rate(CertificateConfig(sample_budget=256), family)
    assert auto == pytest.approx(math.tanh(1.0))


def test_integration_settings():
    settings = Tolerances(rtol=1e-8, max_gap=0.1).integration_settings()
    assert settings.rtol == 1e-8
    assert settings.max_step == 0.1
