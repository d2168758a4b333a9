"""TSPLIB EUC_2D ingestion.

Only EDGE_WEIGHT_TYPE = EUC_2D files with a NODE_COORD_SECTION are
accepted.  Raw coordinates are kept alongside the normalized instance:
tours are found on the normalized points (angles and hence purity
orders are unchanged), while gaps against published optima use the
TSPLIB integer metric on the raw coordinates, nint(euclidean) per edge.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import TsplibParseError
from .geometry import Instance, normalize_points


@dataclass(frozen=True)
class TsplibInstance:
    name: str
    n: int
    raw_coords: np.ndarray
    instance: Instance
    optimum: int | None = None


def rounded_tour_length(raw_coords: np.ndarray, order: np.ndarray) -> int:
    """Tour length under the TSPLIB EUC_2D metric: per-edge nint rounding
    of the raw-coordinate Euclidean distance."""
    order = np.asarray(order, dtype=np.int64)
    diff = raw_coords[order] - raw_coords[np.roll(order, -1)]
    dist = np.hypot(diff[:, 0], diff[:, 1])
    return int(np.floor(dist + 0.5).astype(np.int64).sum())


def parse_tsplib(text: str, optimum: int | None = None) -> TsplibInstance:
    """Parse TSPLIB text into a TsplibInstance.

    Raises TsplibParseError (with a line number where known) on
    unsupported weight types, missing sections, malformed node lines, or
    dimension mismatches.
    """
    name = ""
    dimension = None
    weight_type = None
    coord_lines: list[tuple[int, str]] = []
    in_coords = False
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        if in_coords:
            if line.upper() == "EOF":
                break
            coord_lines.append((lineno, line))
            continue
        key, _, value = line.partition(":")
        key = key.strip().upper()
        value = value.strip()
        if key == "NAME":
            name = value
        elif key == "DIMENSION":
            try:
                dimension = int(value)
            except ValueError:
                raise TsplibParseError(f"bad DIMENSION value {value!r}", lineno)
        elif key == "EDGE_WEIGHT_TYPE":
            weight_type = value.upper()
        elif key == "NODE_COORD_SECTION":
            in_coords = True
        elif key == "EOF":
            break
    if weight_type is None:
        raise TsplibParseError("missing EDGE_WEIGHT_TYPE header")
    if weight_type != "EUC_2D":
        raise TsplibParseError(f"unsupported EDGE_WEIGHT_TYPE {weight_type!r}; only EUC_2D is accepted")
    if dimension is None:
        raise TsplibParseError("missing DIMENSION header")
    if not coord_lines:
        raise TsplibParseError("missing NODE_COORD_SECTION")
    if len(coord_lines) != dimension:
        raise TsplibParseError(
            f"NODE_COORD_SECTION has {len(coord_lines)} entries, DIMENSION says {dimension}",
            coord_lines[-1][0] if coord_lines else None)

    coords = np.full((dimension, 2), np.nan)
    seen = np.zeros(dimension, dtype=bool)
    for lineno, line in coord_lines:
        parts = line.split()
        if len(parts) != 3:
            raise TsplibParseError(f"expected 'id x y', got {line!r}", lineno)
        try:
            node = int(parts[0])
            x, y = float(parts[1]), float(parts[2])
        except ValueError:
            raise TsplibParseError(f"non-numeric node line {line!r}", lineno)
        if not 1 <= node <= dimension:
            raise TsplibParseError(f"node id {node} outside 1..{dimension}", lineno)
        if seen[node - 1]:
            raise TsplibParseError(f"duplicate node id {node}", lineno)
        seen[node - 1] = True
        coords[node - 1] = (x, y)

    return TsplibInstance(name=name, n=dimension, raw_coords=coords,
                          instance=Instance(normalize_points(coords)),
                          optimum=optimum)


def load_tsplib(path) -> TsplibInstance:
    """Parse a .tsp file; a companion '<stem>.opt.json' with an
    {"optimum": int} payload supplies the published optimum if present."""
    path = Path(path)
    optimum = None
    companion = path.with_suffix(".opt.json")
    if companion.exists():
        with open(companion) as fh:
            optimum = int(json.load(fh)["optimum"])
    return parse_tsplib(path.read_text(), optimum=optimum)
