from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from redps.event_sets.base import PolyhedralUnion, Polyhedron
from redps.utils.exceptions import ConfigError

PIECE_HEADER = "[piece]"


def _parse_row(line: str, line_number: int):
    for operator, sign in ((">=", 1.0), ("<=", -1.0)):
        if operator in line:
            lhs, rhs = line.split(operator, 1)
            break
    else:
        raise ConfigError([f"line {line_number}: expected 'w1 ... wd >= b' or '<=', got {line!r}"])
    try:
        w = [float(token) for token in lhs.split()]
        b = float(rhs.strip())
    except ValueError as exc:
        raise ConfigError([f"line {line_number}: {exc}"]) from exc
    if not w:
        raise ConfigError([f"line {line_number}: empty coefficient list"])
    return sign * np.asarray(w), sign * b


def parse_polyhedral_text(text: str, gamma: Optional[float] = None) -> PolyhedralUnion:
    """Parse repeated [piece] sections of 'w1 ... wd >= b' rows. '#' starts a comment."""
    pieces: List[list] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower() == PIECE_HEADER:
            pieces.append([])
            continue
        if not pieces:
            raise ConfigError([f"line {line_number}: row found before the first {PIECE_HEADER} header"])
        pieces[-1].append((line_number, *_parse_row(line, line_number)))

    if not pieces:
        raise ConfigError([f"no {PIECE_HEADER} sections found"])

    errors = []
    built = []
    dimension = None
    for index, rows in enumerate(pieces):
        if not rows:
            errors.append(f"piece {index}: no rows")
            continue
        for line_number, w, _ in rows:
            if dimension is None:
                dimension = w.size
            elif w.size != dimension:
                errors.append(f"piece {index} line {line_number}: expected {dimension} coefficients, got {w.size}")
        if not errors:
            try:
                built.append(Polyhedron.from_rows([(w, b) for _, w, b in rows]))
            except ValueError as exc:
                errors.append(f"piece {index}: {exc}")
    if errors:
        raise ConfigError(errors)
    try:
        return PolyhedralUnion(built, gamma=gamma)
    except ValueError as exc:
        raise ConfigError([f"set: {exc}"]) from exc


def load_polyhedral_file(path: Union[str, Path], gamma: Optional[float] = None) -> PolyhedralUnion:
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"set.polyhedral_file: file {path} not found"])
    return parse_polyhedral_text(path.read_text(), gamma=gamma)


def dump_polyhedral_text(union: PolyhedralUnion) -> str:
    lines = []
    for piece in union.pieces:
        lines.append(PIECE_HEADER)
        for w, b in piece.rows():
            coefficients = " ".join(repr(float(value)) for value in w)
            lines.append(f"{coefficients} >= {float(b)!r}")
    return "\n".join(lines) + "\n"
