"""
Configuration for Fiducial Splat

Defaults live in one nested dictionary. A YAML file (or a plain dict) is
deep-merged on top of it; unknown sections or keys are rejected so that a
typo never silently falls back to a default.
"""

import copy
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from .error_handler import ConfigurationError, create_error_context, handle_error

logger = logging.getLogger(__name__)

# Levels switch from 3 to 4 at this marker width (cells).
LARGE_MARKER_CELLS = 25

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    "approx": {
        # None means "pick from the marker size", see default_levels()
        "levels": None,
        "rho": 2,
        "gamma": 3.0,
        "dedup_mirrors": True,
        "base_opacity": 0.999,
    },
    "render": {
        "background": 1.0,
        "gamma": 3.0,
        "alpha_epsilon": 1e-4,
        "workers": 1,
    },
    "sweep": {
        "decode_threshold": 1.0,
        "azimuth": 0.0,
        "resolution": [800, 800],
        # distance = plane diagonal * distance_factor
        "distance_factor": 3.0,
    },
    "partition": {
        "colors": "both",
    },
}


def default_levels(width: int, height: int, longest_side: int = 1) -> int:
    """
    Refinement levels used when the configuration leaves ``levels`` unset.

    3 below LARGE_MARKER_CELLS, 4 from there on, raised to the smallest L
    with 2**L >= ``longest_side`` (in cells). Below that the end modules of
    long thin rectangles fall between the finest strips and render lighter
    than 0.5.
    """
    by_size = 4 if max(width, height) >= LARGE_MARKER_CELLS else 3
    by_length = (max(int(longest_side), 1) - 1).bit_length()
    return max(by_size, by_length)


def merge_config(
    base: Mapping[str, Mapping[str, Any]],
    overrides: Optional[Mapping[str, Any]],
) -> Dict[str, Dict[str, Any]]:
    """
    Deep-merge ``overrides`` onto ``base``.

    Args:
        base: Configuration with every section and key present
        overrides: Partial configuration, two levels deep at most

    Returns:
        A new merged configuration dictionary

    Raises:
        ConfigurationError: On unknown sections or keys
    """
    merged = copy.deepcopy(dict(base))
    if not overrides:
        return merged

    for section, values in overrides.items():
        if section not in merged:
            raise ConfigurationError(
                f"Unknown configuration section: {section}",
                create_error_context("merge_config", section=section),
            )
        if values is None:
            continue
        if not isinstance(values, Mapping):
            raise ConfigurationError(
                f"Configuration section '{section}' must be a mapping",
                create_error_context("merge_config", section=section),
            )
        for key, value in values.items():
            if key not in merged[section]:
                raise ConfigurationError(
                    f"Unknown configuration key: {section}.{key}",
                    create_error_context("merge_config", section=section, key=key),
                )
            merged[section][key] = value
    return merged


def load_config(
    source: Union[None, str, Path, Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Dict[str, Any]]:
    """
    Build the effective configuration.

    Args:
        source: YAML file path, configuration mapping, or None for defaults
        overrides: Extra values applied after ``source``

    Returns:
        Merged configuration dictionary

    Raises:
        ConfigurationError: If the file cannot be parsed or holds unknown keys
    """
    if source is None:
        loaded: Optional[Mapping[str, Any]] = None
    elif isinstance(source, Mapping):
        loaded = source
    else:
        context = create_error_context("load_config", file_path=str(source))
        try:
            with open(source, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML: {e}", context)
        except OSError as e:
            raise handle_error(e, context)
        if loaded is not None and not isinstance(loaded, Mapping):
            raise ConfigurationError("Configuration root must be a mapping", context)
        logger.info("loaded configuration from %s", source)

    config = merge_config(DEFAULT_CONFIG, loaded)
    return merge_config(config, overrides)
