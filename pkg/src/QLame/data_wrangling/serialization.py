"""JSON and CSV encodings of Bethe points, curve samples and fits."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence, Union

import pandas as pd

from QLame.bethe import BethePoint
from QLame.elliptic import ModularData
from QLame.errors import ConfigError
from QLame.spectral_curve import SpectralFit, SpectralSample


def complex_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def pair_complex(pair: Sequence[float]) -> complex:
    if len(pair) != 2:
        raise ConfigError(f"expected [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def bethe_point_to_dict(point: BethePoint) -> dict:
    return {
        "m": point.m,
        "gamma": complex_pair(point.md.gamma),
        "tau": complex_pair(point.md.tau),
        "t": [complex_pair(tj) for tj in point.t],
        "c": complex_pair(point.c),
        "residual": point.residual,
    }


def bethe_point_from_dict(data: dict) -> BethePoint:
    try:
        md = ModularData(pair_complex(data["gamma"]), pair_complex(data["tau"]))
        t = tuple(pair_complex(pair) for pair in data["t"])
        if len(t) != data["m"]:
            raise ConfigError(f"m={data['m']} but {len(t)} roots given")
        return BethePoint(t, pair_complex(data["c"]), float(data["residual"]), md)
    except KeyError as exc:
        raise ConfigError(f"Bethe point is missing field {exc}") from None


def spectral_fit_to_dict(fit: SpectralFit) -> dict:
    return {
        "m": fit.m,
        "gamma": complex_pair(fit.md.gamma),
        "tau": complex_pair(fit.md.tau),
        "coeffs": [complex_pair(p) for p in fit.coeffs],
        "fit_residual": fit.fit_residual,
        "validation_residual": fit.validation_residual,
        "cond_estimate": fit.cond_estimate,
        "normalization": fit.normalization,
        "discriminant_abs": fit.discriminant_abs,
        "backend": fit.backend,
    }


def samples_to_frame(samples: Sequence[SpectralSample]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "re_X": s.X.real,
                "im_X": s.X.imag,
                "re_Y": s.Y.real,
                "im_Y": s.Y.imag,
                "partner": bool(s.partner),
            }
            for s in samples
        ],
        columns=["re_X", "im_X", "re_Y", "im_Y", "partner"],
    )


def write_samples_csv(samples: Sequence[SpectralSample], path: Union[str, Path]) -> Path:
    path = Path(path)
    samples_to_frame(samples).to_csv(path, index=False, float_format="%.17g")
    return path


def _strict(value):
    # non-finite floats become "nan", "inf" or "-inf", which float() reads back
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _strict(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_strict(v) for v in value]
    return value


def dumps(data: dict) -> str:
    return json.dumps(_strict(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(data: dict, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(dumps(data))
    return path
