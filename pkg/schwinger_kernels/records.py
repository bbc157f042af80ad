"""JSON layout helpers shared by kernel, state and report records."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from schwinger_kernels.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


def complex_pair(value: complex) -> List[float]:
    value = complex(value)
    return [float(value.real), float(value.imag)]


def parse_complex(pair: Iterable[float]) -> complex:
    try:
        re, im = pair
        return complex(float(re), float(im))
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"Expected a [re, im] pair, got {pair!r}.")


def complex_array_pairs(values: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex)]


def parse_complex_array(pairs: List[List[float]]) -> np.ndarray:
    data = np.asarray(pairs, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InvalidArgumentError("Samples must be a list of [re, im] pairs.")
    return data[:, 0] + 1j * data[:, 1]


def dumps(record: Dict[str, Any]) -> str:
    # json emits repr() floats, which round-trip exactly
    return json.dumps(record, indent=2, allow_nan=True) + "\n"


def write_record(record: Dict[str, Any], output: Optional[str], stream) -> None:
    """Write a record to the output path, or to the stream when no path is given."""
    text = dumps(record)
    if not output:
        stream.write(text)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as handle:
        handle.write(text)
    logger.info(f"Record written to {path}")


def read_record(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r') as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise InvalidArgumentError(f"Input file '{path}' not found.")
    except json.JSONDecodeError as error:
        raise InvalidArgumentError(f"Input file '{path}' is not valid JSON: {error}")
