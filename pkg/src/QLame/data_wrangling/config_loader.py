from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from QLame.elliptic import DEFAULT_GAMMA, DEFAULT_TAU, ModularData, SeriesConfig
from QLame.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCES: dict[str, float] = {
    "theta": 1e-10,
    "identity": 1e-10,
    "commutation": 1e-8,
    "recurrence": 1e-8,
    "product_rule": 1e-8,
    "omega_shift": 1e-8,
    "phi": 1e-10,
    "bethe": 1e-10,
    "eigen": 1e-8,
    "transformed": 1e-8,
    "ellipticity": 1e-8,
    "validation": 1e-6,
    "relation": 1e-6,
    "involution": 1e-8,
    "window_stability": 1e-5,
    "parity": 1e-8,
}

BACKEND_NAMES = ("numpy", "cvxpy")


@dataclass
class RunConfig:
    """
    Settings of a verification or export run.

    User tolerances are merged over ``DEFAULT_TOLERANCES``; unknown names are
    rejected.

    Parameters
    ----------
    gamma, tau : complex
        Deformation step and modular parameter.
    m_list : list of int
        Coupling indices to run the suites for.
    tolerances : dict, optional
        Overrides of the default thresholds, by name.
    sample_count : int
        Number of sample points for operator comparisons (at least 10).
    seed : int
        Seed of every random choice in the run.
    output_path : str, optional
        Where reports and exports are written.
    fit_backend : str
        Least-squares backend of the curve fit, ``"numpy"`` or ``"cvxpy"``.

    Examples
    --------
    >>> cfg = RunConfig(m_list=[1, 2], tolerances={"commutation": 1e-9})
    >>> cfg.tolerances["commutation"]
    1e-09
    """

    gamma: complex = DEFAULT_GAMMA
    tau: complex = DEFAULT_TAU
    m_list: list[int] = field(default_factory=lambda: [1])
    tolerances: dict[str, float] = field(default_factory=dict)
    sample_count: int = 50
    seed: int = 0
    output_path: Optional[str] = None
    fit_backend: str = "numpy"
    series: SeriesConfig = field(default_factory=SeriesConfig)

    def __post_init__(self):
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"Unknown tolerance name(s): {sorted(unknown)}")
        self.tolerances = {**DEFAULT_TOLERANCES, **(self.tolerances or {})}
        if any(not tol > 0 for tol in self.tolerances.values()):
            raise ConfigError("Tolerances must be positive")
        self.gamma = complex(self.gamma)
        self.tau = complex(self.tau)
        if self.tau.imag <= 0:
            raise ConfigError(f"Im(tau) must be positive, got tau={self.tau}")
        if not self.m_list or any(m < 0 for m in self.m_list):
            raise ConfigError(f"m_list must hold nonnegative integers, got {self.m_list}")
        if self.sample_count < 10:
            raise ConfigError(f"sample_count must be >= 10, got {self.sample_count}")
        if self.fit_backend not in BACKEND_NAMES:
            raise ConfigError(
                f"Unknown backend {self.fit_backend!r}, choose from {BACKEND_NAMES}"
            )

    @property
    def modular_data(self) -> ModularData:
        try:
            return ModularData(self.gamma, self.tau, self.series)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def updated(self, **changes) -> RunConfig:
        """A copy with some fields replaced; tolerances are merged, not replaced."""
        if "tolerances" in changes:
            changes["tolerances"] = {**self.tolerances, **changes["tolerances"]}
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "gamma": [self.gamma.real, self.gamma.imag],
            "tau": [self.tau.real, self.tau.imag],
            "m_list": list(self.m_list),
            "tolerances": dict(sorted(self.tolerances.items())),
            "sample_count": self.sample_count,
            "seed": self.seed,
            "fit_backend": self.fit_backend,
        }


def _parse_complex(key: str, value: str) -> complex:
    try:
        return complex(value.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as a complex number") from None


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as an integer") from None


def parse_config_text(text: str) -> dict:
    """
    Parse ``key = value`` lines into RunConfig keyword arguments.

    Blank lines and everything after ``#`` are ignored. Recognized keys are
    gamma, tau, m (comma separated), seed, samples, out, backend and
    tol.<name>.
    """
    kwargs: dict = {}
    tolerances: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in ("gamma", "tau"):
            kwargs[key] = _parse_complex(key, value)
        elif key == "m":
            kwargs["m_list"] = [_parse_int(key, v.strip()) for v in value.split(",") if v.strip()]
        elif key == "seed":
            kwargs["seed"] = _parse_int(key, value)
        elif key == "samples":
            kwargs["sample_count"] = _parse_int(key, value)
        elif key == "out":
            kwargs["output_path"] = value
        elif key == "backend":
            kwargs["fit_backend"] = value
        elif key.startswith("tol."):
            try:
                tolerances[key[4:]] = float(value)
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {value!r} as a number") from None
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if tolerances:
        kwargs["tolerances"] = tolerances
    return kwargs


def load_config_file(path: Union[str, Path]) -> dict:
    """Read a config file; returns RunConfig keyword arguments."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    logger.info("loaded config file %s", path)
    return parse_config_text(text)
