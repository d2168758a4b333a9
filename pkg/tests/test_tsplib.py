import math
from pathlib import Path

import numpy as np
import pytest

from purity_tsp.errors import TsplibParseError
from purity_tsp.tsplib import load_tsplib, parse_tsplib, rounded_tour_length

DATA = Path(__file__).parent / "data"

MINIMAL = """NAME: tiny
TYPE: TSP
DIMENSION: 3
EDGE_WEIGHT_TYPE: EUC_2D
NODE_COORD_SECTION
1 0.0 0.0
2 30.0 0.0
3 0.0 40.0
EOF
"""


class TestParse:
    def test_minimal(self):
        tsp = parse_tsplib(MINIMAL)
        assert tsp.name == "tiny"
        assert tsp.n == 3
        assert tsp.instance.n == 3
        assert tsp.raw_coords[1].tolist() == [30.0, 0.0]

    def test_explicit_weights_rejected(self):
        text = MINIMAL.replace("EUC_2D", "EXPLICIT")
        with pytest.raises(TsplibParseError, match="EXPLICIT"):
            parse_tsplib(text)

    def test_missing_headers(self):
        with pytest.raises(TsplibParseError, match="EDGE_WEIGHT_TYPE"):
            parse_tsplib("NAME: x\nDIMENSION: 2\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n")
        with pytest.raises(TsplibParseError, match="DIMENSION"):
            parse_tsplib("NAME: x\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n")

    def test_dimension_mismatch(self):
        text = MINIMAL.replace("DIMENSION: 3", "DIMENSION: 4")
        with pytest.raises(TsplibParseError):
            parse_tsplib(text)

    def test_malformed_line_reports_lineno(self):
        text = MINIMAL.replace("2 30.0 0.0", "2 thirty 0.0")
        with pytest.raises(TsplibParseError, match="line 7"):
            parse_tsplib(text)

    def test_duplicate_node(self):
        text = MINIMAL.replace("2 30.0 0.0", "1 30.0 0.0")
        with pytest.raises(TsplibParseError, match="duplicate|outside"):
            parse_tsplib(text)


class TestRounding:
    def test_rounded_length_345_triangle(self):
        tsp = parse_tsplib(MINIMAL)
        assert rounded_tour_length(tsp.raw_coords, np.array([0, 1, 2])) == 30 + 50 + 40

    def test_nint_is_half_up(self):
        coords = np.array([[0.0, 0.0], [1.5, 0.0], [1.5, 1.5]])
        # legs: 1.5 -> 2, 1.5 -> 2, hypot 2.1213 -> 2
        assert rounded_tour_length(coords, np.array([0, 1, 2])) == 6

    def test_matches_scalar_loop(self):
        tsp = load_tsplib(DATA / "berlin52.tsp")
        order = np.roll(np.arange(52), 5)
        expected = 0
        for k in range(52):
            a, b = order[k], order[(k + 1) % 52]
            expected += int(math.dist(tsp.raw_coords[a], tsp.raw_coords[b]) + 0.5)
        assert rounded_tour_length(tsp.raw_coords, order) == expected


class TestBundledBenchmark:
    def test_load_with_companion_optimum(self):
        tsp = load_tsplib(DATA / "berlin52.tsp")
        assert tsp.n == 52
        assert tsp.name == "berlin52"
        assert tsp.optimum == 7542
        assert tsp.instance.points.min() >= 0
        assert tsp.instance.points.max() <= 1
