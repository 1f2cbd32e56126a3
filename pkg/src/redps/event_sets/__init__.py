from redps.event_sets.base import PolyhedralUnion, Polyhedron, normalize_rows
from redps.event_sets.builders import (
    empty_set,
    halfspace_set,
    overshoot_set,
    random_halfspace_union,
    two_tail_set,
    whole_space,
)
from redps.event_sets.parsing import dump_polyhedral_text, load_polyhedral_file, parse_polyhedral_text
from redps.event_sets.split import RegionSplit, split_regions

__all__ = [
    "Polyhedron",
    "PolyhedralUnion",
    "RegionSplit",
    "normalize_rows",
    "overshoot_set",
    "two_tail_set",
    "halfspace_set",
    "whole_space",
    "empty_set",
    "random_halfspace_union",
    "split_regions",
    "parse_polyhedral_text",
    "load_polyhedral_file",
    "dump_polyhedral_text",
]
