import json

import numpy as np
import pytest

from QLame.bethe import BethePoint
from QLame.data_wrangling import (
    DEFAULT_TOLERANCES,
    RunConfig,
    bethe_point_from_dict,
    bethe_point_to_dict,
    load_config_file,
    parse_config_text,
    samples_to_frame,
    spectral_fit_to_dict,
    write_json,
    write_samples_csv,
)
from QLame.data_wrangling.serialization import dumps
from QLame.errors import ConfigError
from QLame.spectral_curve import SpectralFit, SpectralSample


def test_defaults_are_merged_with_overrides():
    cfg = RunConfig(m_list=[1, 2], tolerances={"commutation": 1e-9})
    assert cfg.tolerances["commutation"] == 1e-9
    assert cfg.tolerances["identity"] == DEFAULT_TOLERANCES["identity"]
    assert set(cfg.tolerances) == set(DEFAULT_TOLERANCES)
    assert cfg.modular_data.tau == 1j


@pytest.mark.parametrize(
    "kwargs",
    [
        {"tau": -1j},
        {"tau": 0.3},
        {"m_list": [-1]},
        {"m_list": []},
        {"sample_count": 5},
        {"fit_backend": "highs"},
        {"tolerances": {"nonsense": 1e-3}},
        {"tolerances": {"eigen": 0.0}},
    ],
)
def test_invalid_configs_are_rejected(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs)


def test_gamma_on_lattice_is_a_config_error():
    with pytest.raises(ConfigError):
        RunConfig(gamma=1.0).modular_data


def test_updated_merges_tolerances():
    cfg = RunConfig(tolerances={"eigen": 1e-7}).updated(seed=4, tolerances={"bethe": 1e-9})
    assert cfg.seed == 4
    assert cfg.tolerances["eigen"] == 1e-7
    assert cfg.tolerances["bethe"] == 1e-9


def test_parse_config_text():
    text = """
    # run settings
    gamma = 0.12+0.01j
    tau = 0.1 + 1.2j   # modular parameter
    m = 0, 1,2
    seed = 7
    samples = 30
    backend = cvxpy
    out = report.json
    tol.eigen = 1e-7
    """
    kwargs = parse_config_text(text)
    assert kwargs["gamma"] == 0.12 + 0.01j
    assert kwargs["tau"] == 0.1 + 1.2j
    assert kwargs["m_list"] == [0, 1, 2]
    assert kwargs["seed"] == 7
    assert kwargs["sample_count"] == 30
    assert kwargs["fit_backend"] == "cvxpy"
    assert kwargs["output_path"] == "report.json"
    assert kwargs["tolerances"] == {"eigen": 1e-7}
    assert RunConfig(**kwargs).tolerances["eigen"] == 1e-7


@pytest.mark.parametrize("text", ["colour = blue", "seed = seven", "gamma = abc", "just words", "tol.eigen = x"])
def test_parse_config_text_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_load_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("m = 2\nseed = 3\n")
    assert load_config_file(path) == {"m_list": [2], "seed": 3}
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.cfg")


def test_bethe_point_json(modular_data):
    point = BethePoint((0.5 + 0.1j, -1.2 + 0.3j), 0.3 - 0.2j, 3e-12, modular_data)
    data = json.loads(dumps(bethe_point_to_dict(point)))
    assert data["m"] == 2
    assert data["t"][1] == [-1.2, 0.3]
    assert data["c"] == [0.3, -0.2]
    restored = bethe_point_from_dict(data)
    assert restored.t == point.t
    assert restored.c == point.c
    assert restored.residual == point.residual

    with pytest.raises(ConfigError):
        bethe_point_from_dict({**data, "m": 3})
    with pytest.raises(ConfigError):
        bethe_point_from_dict({k: v for k, v in data.items() if k != "c"})


def test_samples_csv_is_reproducible(tmp_path):
    samples = [SpectralSample(1.5 + 0.25j, -0.5 + 2j), SpectralSample(1.5 + 0.25j, 0.5 - 2j, partner=True)]
    frame = samples_to_frame(samples)
    assert list(frame.columns) == ["re_X", "im_X", "re_Y", "im_Y", "partner"]
    assert frame["partner"].tolist() == [False, True]
    first = write_samples_csv(samples, tmp_path / "a.csv").read_bytes()
    second = write_samples_csv(samples, tmp_path / "b.csv").read_bytes()
    assert first == second


def test_spectral_fit_json(modular_data, tmp_path):
    fit = SpectralFit(1, np.array([1.0, 2.0j, 0.5, 1.0]), 1e-12, 2e-12, 10.0, modular_data)
    path = write_json(spectral_fit_to_dict(fit), tmp_path / "fit.json")
    data = json.loads(path.read_text())
    assert data["coeffs"][1] == [0.0, 2.0]
    assert data["gamma"] == [np.sqrt(2) / 10, 0.0]
    assert {"fit_residual", "validation_residual", "discriminant_abs", "backend", "normalization"} <= set(data)
    assert path.read_text() == dumps(spectral_fit_to_dict(fit))


def test_dumps_writes_standard_json():
    text = dumps({"residual": float("nan"), "rows": [[1.0, float("inf")]], "ok": 0.5})
    assert "NaN" not in text and "Infinity" not in text
    data = json.loads(text, parse_constant=lambda name: pytest.fail(name))
    assert data == {"residual": "nan", "rows": [[1.0, "inf"]], "ok": 0.5}
    assert np.isnan(float(data["residual"]))
