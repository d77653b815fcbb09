"""
Textual dump/load of channel realizations for regression fixtures

Format (UTF-8, one item per line, complex numbers as "re,im" pairs):

    # star-secrecy channel set v1
    elements <N>
    antennas <M>
    large_scale <L_bs> <L_iu> <L_ou> <L_eve>
    [g]            N lines of M pairs
    [h_is] [h_os] [h_es]            one line of N pairs each
    [small_g]      N lines of M pairs
    [small_h_is] [small_h_os] [small_h_es]
"""

from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import structlog

from ..models.system import StarSecrecyError
from .sampler import ChannelSet, LargeScaleGains, SmallScaleFading

logger = structlog.get_logger(__name__)

HEADER = "# star-secrecy channel set v1"
MATRIX_SECTIONS = ("g", "small_g")
VECTOR_SECTIONS = ("h_is", "h_os", "h_es", "small_h_is", "small_h_os", "small_h_es")


class ChannelFormatError(StarSecrecyError):
    """Malformed channel fixture"""
    pass


def _format_row(values: np.ndarray) -> str:
    return " ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in np.asarray(values, dtype=complex))


def _parse_row(line: str) -> np.ndarray:
    try:
        pairs = [token.split(",") for token in line.split()]
        return np.array([complex(float(re), float(im)) for re, im in pairs])
    except ValueError as e:
        raise ChannelFormatError(f"Invalid complex row: {line!r}") from e


def dump_channels(channels: ChannelSet, path: Union[str, Path]) -> Path:
    """Write a ChannelSet fixture and return its path."""
    path = Path(path)
    large = channels.large_scale
    small = channels.small_scale
    sections: Dict[str, np.ndarray] = {
        "g": channels.g, "h_is": channels.h_is, "h_os": channels.h_os, "h_es": channels.h_es,
        "small_g": small.g, "small_h_is": small.h_is, "small_h_os": small.h_os, "small_h_es": small.h_es,
    }
    lines: List[str] = [
        HEADER,
        f"elements {channels.num_elements}",
        f"antennas {channels.num_antennas}",
        f"large_scale {float(large.bs)!r} {float(large.iu)!r} {float(large.ou)!r} {float(large.eve)!r}",
    ]
    for name in MATRIX_SECTIONS + VECTOR_SECTIONS:
        lines.append(f"[{name}]")
        array = sections[name]
        if array.ndim == 2:
            lines.extend(_format_row(row) for row in array)
        else:
            lines.append(_format_row(array))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug("Channel fixture written", path=str(path))
    return path


def load_channels(path: Union[str, Path]) -> ChannelSet:
    """Read a fixture written by dump_channels."""
    path = Path(path)
    lines = [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines or lines[0] != HEADER:
        raise ChannelFormatError(f"{path}: missing fixture header")
    try:
        n = int(lines[1].split()[1])
        m = int(lines[2].split()[1])
        large_values = [float(v) for v in lines[3].split()[1:5]]
    except (IndexError, ValueError) as e:
        raise ChannelFormatError(f"{path}: malformed preamble") from e

    sections: Dict[str, List[np.ndarray]] = {}
    current = None
    for line in lines[4:]:
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = []
        elif current is None:
            raise ChannelFormatError(f"{path}: data before first section")
        else:
            sections[current].append(_parse_row(line))

    def matrix(name: str) -> np.ndarray:
        rows = sections.get(name)
        if rows is None or len(rows) != n or any(r.size != m for r in rows):
            raise ChannelFormatError(f"{path}: section [{name}] must hold {n} rows of {m} values")
        return np.vstack(rows)

    def vector(name: str) -> np.ndarray:
        rows = sections.get(name)
        if rows is None or len(rows) != 1 or rows[0].size != n:
            raise ChannelFormatError(f"{path}: section [{name}] must hold {n} values")
        return rows[0]

    return ChannelSet(
        g=matrix("g"),
        h_is=vector("h_is"),
        h_os=vector("h_os"),
        h_es=vector("h_es"),
        large_scale=LargeScaleGains(*large_values),
        small_scale=SmallScaleFading(
            g=matrix("small_g"),
            h_is=vector("small_h_is"),
            h_os=vector("small_h_os"),
            h_es=vector("small_h_es"),
        ),
    )
