from .config_loader import (
    DEFAULT_TOLERANCES,
    RunConfig,
    load_config_file,
    parse_config_text,
)
from .serialization import (
    bethe_point_from_dict,
    bethe_point_to_dict,
    samples_to_frame,
    spectral_fit_to_dict,
    write_json,
    write_samples_csv,
)

__all__ = [
    "DEFAULT_TOLERANCES",
    "RunConfig",
    "load_config_file",
    "parse_config_text",
    "bethe_point_from_dict",
    "bethe_point_to_dict",
    "samples_to_frame",
    "spectral_fit_to_dict",
    "write_json",
    "write_samples_csv",
]
