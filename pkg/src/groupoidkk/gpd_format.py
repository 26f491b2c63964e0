"""Reader and writer for the ``gpd 1`` text format.

::

    gpd 1
    units 2
    a 0 0 0 0        # arrow id, src, tgt, inv
    ...
    c 0 0 0          # a * b = c for each composable pair

Whitespace separated; ``#`` starts a comment.
"""

from __future__ import annotations

from pathlib import Path

from .groupoid import FiniteGroupoid, GroupoidStructureError


class GPDFormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def loads(text: str) -> FiniteGroupoid:
    header = False
    n_units = None
    arrows = {}
    comp = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if not header:
            if line != ["gpd", "1"]:
                raise GPDFormatError("expected header 'gpd 1'", lineno)
            header = True
            continue
        tag, fields = line[0], line[1:]
        try:
            nums = [int(v) for v in fields]
        except ValueError:
            raise GPDFormatError(f"non-integer field in {raw.strip()!r}", lineno) from None
        if tag == "units" and len(nums) == 1:
            if n_units is not None:
                raise GPDFormatError("duplicate 'units' line", lineno)
            n_units = nums[0]
        elif tag == "a" and len(nums) == 4:
            if nums[0] in arrows:
                raise GPDFormatError(f"arrow {nums[0]} declared twice", lineno)
            arrows[nums[0]] = nums[1:]
        elif tag == "c" and len(nums) == 3:
            key = (nums[0], nums[1])
            if key in comp:
                raise GPDFormatError(f"pair {key} composed twice", lineno)
            comp[key] = nums[2]
        else:
            raise GPDFormatError(f"unrecognised line {raw.strip()!r}", lineno)
    if not header:
        raise GPDFormatError("empty input")
    if n_units is None:
        raise GPDFormatError("missing 'units' line")
    m = len(arrows)
    if sorted(arrows) != list(range(m)):
        raise GPDFormatError("arrow ids must be 0..m-1")
    src = [arrows[a][0] for a in range(m)]
    tgt = [arrows[a][1] for a in range(m)]
    inv = [arrows[a][2] for a in range(m)]
    try:
        return FiniteGroupoid(n_units, src, tgt, inv, comp)
    except GroupoidStructureError as exc:
        raise GPDFormatError(str(exc)) from exc


def dumps(g: FiniteGroupoid) -> str:
    lines = ["gpd 1", f"units {g.n_units}"]
    for a in range(g.n_arrows):
        lines.append(f"a {a} {g.src[a]} {g.tgt[a]} {g.inv[a]}")
    for a, b in g.composable_pairs():
        lines.append(f"c {a} {b} {g.table[a, b]}")
    return "\n".join(lines) + "\n"


def load(path) -> FiniteGroupoid:
    return loads(Path(path).read_text())


def dump(g: FiniteGroupoid, path) -> None:
    Path(path).write_text(dumps(g))
