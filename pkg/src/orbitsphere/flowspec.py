"""Parse, validate and serialize the .flowspec rectangle-data format.

A flowspec describes a pseudo-Anosov suspension flow combinatorially:
rectangles with exact widths/heights in the expansion field, boundary
identifications between side segments, the unstable substitution
(``transition``: how the image of each rectangle crosses the others),
its stable counterpart (``stacking``: the bottom-to-top order of image
strips inside each rectangle), declared singular vertices, a monodromy
anchor and optional named deck-group generators.

Grammar (line oriented, ``#`` comments)::

    version 1
    field x^2 - 3*x + 1         # minimal polynomial of the expansion g
    genus 1
    dilatation 2.618033988      # optional, documentation only

    [rectangles]
    A w=1 h=g-1

    [gluings]
    u A.T@0 A.B@g-2 len=1 flip=+

    [transition]
    A -> A+ B+

    [stacking]
    A <- A.0+ B.0+

    [singular]
    A.L@1 p=4

    [monodromy]
    anchor A

    [generators]
    a = R0 T0 flip +

Side letters: ``L R T B``; side parameters run bottom to top on L/R and
left to right on T/B.  ``flip=-`` reverses the parameter on the partner
segment; on an oriented surface opposite side letters pair with ``+``
and equal letters with ``-``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield
from fractions import Fraction
import re

from orbitsphere.field import Elt, NumberField, poly_str

__all__ = [
    "FlowSpec",
    "Rect",
    "Gluing",
    "SidePoint",
    "ValidationReport",
    "FlowSpecError",
    "parse_flowspec",
    "serialize",
    "validate",
    "count_matrix",
    "primitivity_power",
]

SIDES = ("L", "R", "T", "B")
STABLE_SIDES = ("L", "R")   # segments of stable leaves; crossing them extends unstable leaves
UNSTABLE_SIDES = ("T", "B")

_OPPOSITE = {"L": "R", "R": "L", "T": "B", "B": "T"}


class FlowSpecError(ValueError):
    """Parse error with position information."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Rect:
    name: str
    width: Elt
    height: Elt

    def side_length(self, side):
        return self.height if side in STABLE_SIDES else self.width


@dataclass(frozen=True)
class SidePoint:
    """A point on the boundary of a rectangle: (rect, side, offset)."""

    rect: str
    side: str
    offset: Elt

    def key(self):
        return (self.rect, self.side, self.offset.coeffs)


@dataclass(frozen=True)
class Gluing:
    kind: str            # 's' or 'u'
    a: SidePoint         # start of segment on first side
    b: SidePoint         # start of segment on second side
    length: Elt
    flip: int            # +1 or -1


@dataclass
class FlowSpec:
    field: NumberField
    genus: int
    rectangles: dict[str, Rect]
    gluings: list[Gluing]
    transition: dict[str, list[tuple[str, int]]]
    stacking: dict[str, list[tuple[str, int, int]]]
    singular: list[tuple[SidePoint, int]]
    monodromy_anchor: str
    generators: dict[str, tuple[list[tuple[str, int]], int]] = dfield(default_factory=dict)
    dilatation: str | None = None

    @property
    def names(self):
        return list(self.rectangles)

    def rect(self, name):
        return self.rectangles[name]

    def structural_key(self):
        """Hashable structure used for round-trip equality."""
        return (
            tuple(self.field.minpoly),
            self.genus,
            tuple(sorted((r.name, r.width.coeffs, r.height.coeffs)
                         for r in self.rectangles.values())),
            tuple(sorted(_gluing_key(g) for g in self.gluings)),
            tuple(sorted((n, tuple(w)) for n, w in self.transition.items())),
            tuple(sorted((n, tuple(w)) for n, w in self.stacking.items())),
            tuple(sorted((s.key(), p) for s, p in self.singular)),
            self.monodromy_anchor,
            tuple(sorted((n, tuple(w), f) for n, (w, f) in self.generators.items())),
        )

    def __eq__(self, other):
        return isinstance(other, FlowSpec) and self.structural_key() == other.structural_key()


def _gluing_key(g):
    ka, kb = g.a.key(), g.b.key()
    if kb < ka:
        ka, kb = kb, ka
    return (g.kind, ka, kb, g.length.coeffs, g.flip)


@dataclass
class ValidationReport:
    status: str                       # 'ok' or 'error'
    errors: list[str]
    warnings: list[str]
    primitivity_power: int | None
    genus: int | None
    singularity_census: dict[int, int]

    @property
    def ok(self):
        return self.status == "ok"

    def as_dict(self):
        return {
            "status": self.status,
            "errors": list(self.errors),
            "warnings": list(self.warnings),
            "primitivity_power": self.primitivity_power,
            "genus": self.genus,
            "singularity_census": {str(k): v for k, v in
                                   sorted(self.singularity_census.items())},
        }


# ---------------------------------------------------------------------------
# parsing

_FIELD_LINE = re.compile(r"field\s+(.+)$")
_SECTIONS = ("rectangles", "gluings", "transition", "stacking",
             "singular", "monodromy", "generators")


def _parse_poly(text, line):
    """'x^2 - 3*x + 1' -> low-to-high Fraction list."""
    s = text.replace(" ", "").replace("-", "+-")
    if s.startswith("+"):
        s = s[1:]
    coeffs = {}
    for term in s.split("+"):
        if not term:
            continue
        m = re.fullmatch(r"(-?)(?:(\d+(?:/\d+)?)\*?)?(?:x(?:\^(\d+))?)?", term)
        if not m or (m.group(2) is None and "x" not in term):
            raise FlowSpecError(f"bad polynomial term {term!r}", line)
        sgn, num, power = m.groups()
        c = Fraction(num) if num else Fraction(1)
        if sgn:
            c = -c
        k = (int(power) if power else 1) if "x" in term else 0
        coeffs[k] = coeffs.get(k, Fraction(0)) + c
    deg = max(coeffs) if coeffs else 0
    return [coeffs.get(i, Fraction(0)) for i in range(deg + 1)]


def _split_side_ref(tok, line):
    m = re.fullmatch(r"(\w+)\.([LRTB])@(.+)", tok)
    if not m:
        raise FlowSpecError(f"bad side point {tok!r} (want RECT.SIDE@OFFSET)", line)
    return m.group(1), m.group(2), m.group(3)


def parse_flowspec(text):
    """Parse a flowspec document into a FlowSpec.

    Raises FlowSpecError with line information on malformed input;
    trailing unparsed content is an error.
    """
    headers = {}
    section = None
    raw = {name: [] for name in _SECTIONS}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        stripped = rawline.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise FlowSpecError("unterminated section header", lineno)
            name = stripped[1:-1].strip()
            if name not in _SECTIONS:
                raise FlowSpecError(f"unknown section [{name}]", lineno)
            if raw[name]:
                raise FlowSpecError(f"duplicate section [{name}]", lineno)
            section = name
            raw[name].append(("__start__", lineno))
            continue
        if section is None:
            parts = stripped.split(None, 1)
            if len(parts) != 2:
                raise FlowSpecError(f"bad header line {stripped!r}", lineno)
            key, value = parts
            if key not in ("version", "field", "genus", "dilatation"):
                raise FlowSpecError(f"unknown header {key!r}", lineno)
            if key in headers:
                raise FlowSpecError(f"duplicate header {key!r}", lineno)
            headers[key] = (value.strip(), lineno)
        else:
            raw[section].append((stripped, lineno))

    for key in ("version", "field", "genus"):
        if key not in headers:
            raise FlowSpecError(f"missing header {key!r}")
    if headers["version"][0] != "1":
        raise FlowSpecError("unsupported version", headers["version"][1])
    nf = NumberField(_parse_poly(headers["field"][0], headers["field"][1]))
    try:
        genus = int(headers["genus"][0])
    except ValueError:
        raise FlowSpecError("genus must be an integer", headers["genus"][1]) from None
    dilatation = headers.get("dilatation", (None, None))[0]

    def body(name):
        return [(s, n) for s, n in raw[name] if s != "__start__"]

    # rectangles
    rectangles = {}
    for stripped, lineno in body("rectangles"):
        m = re.fullmatch(r"(\w+)\s+w=(\S+)\s+h=(\S+)", stripped)
        if not m:
            raise FlowSpecError(f"bad rectangle line {stripped!r}", lineno)
        name = m.group(1)
        if name in rectangles:
            raise FlowSpecError(f"duplicate rectangle {name!r}", lineno)
        w = nf.parse(m.group(2))
        h = nf.parse(m.group(3))
        if w.sign() <= 0 or h.sign() <= 0:
            raise FlowSpecError(f"rectangle {name!r} must have positive size", lineno)
        rectangles[name] = Rect(name, w, h)
    if not rectangles:
        raise FlowSpecError("at least one rectangle required")

    def side_point(tok, lineno, expect_kind=None):
        r, s, off = _split_side_ref(tok, lineno)
        if r not in rectangles:
            raise FlowSpecError(f"dangling side reference to unknown rectangle {r!r}",
                                lineno)
        if expect_kind == "s" and s not in STABLE_SIDES:
            raise FlowSpecError(f"stable gluing must join L/R sides, got {s}", lineno)
        if expect_kind == "u" and s not in UNSTABLE_SIDES:
            raise FlowSpecError(f"unstable gluing must join T/B sides, got {s}", lineno)
        return SidePoint(r, s, nf.parse(off))

    gluings = []
    for stripped, lineno in body("gluings"):
        m = re.fullmatch(r"([su])\s+(\S+)\s+(\S+)\s+len=(\S+)\s+flip=([+-])", stripped)
        if not m:
            raise FlowSpecError(f"bad gluing line {stripped!r}", lineno)
        kind = m.group(1)
        a = side_point(m.group(2), lineno, kind)
        b = side_point(m.group(3), lineno, kind)
        length = nf.parse(m.group(4))
        flip = 1 if m.group(5) == "+" else -1
        if length.sign() <= 0:
            raise FlowSpecError("gluing segment must have positive length", lineno)
        expect_flip = 1 if b.side == _OPPOSITE[a.side] else -1
        if flip != expect_flip:
            raise FlowSpecError(
                f"orientation: sides {a.side}/{b.side} need flip="
                f"{'+' if expect_flip == 1 else '-'}", lineno)
        gluings.append(Gluing(kind, a, b, length, flip))

    transition = {}
    for stripped, lineno in body("transition"):
        m = re.fullmatch(r"(\w+)\s*->\s*(.+)", stripped)
        if not m:
            raise FlowSpecError(f"bad transition line {stripped!r}", lineno)
        name = m.group(1)
        if name not in rectangles:
            raise FlowSpecError(f"transition for unknown rectangle {name!r}", lineno)
        if name in transition:
            raise FlowSpecError(f"duplicate transition for {name!r}", lineno)
        word = []
        for tok in m.group(2).split():
            mm = re.fullmatch(r"(\w+)([+-])", tok)
            if not mm or mm.group(1) not in rectangles:
                raise FlowSpecError(f"bad transition item {tok!r}", lineno)
            word.append((mm.group(1), 1 if mm.group(2) == "+" else -1))
        if not word:
            raise FlowSpecError(f"empty transition word for {name!r}", lineno)
        transition[name] = word

    stacking = {}
    for stripped, lineno in body("stacking"):
        m = re.fullmatch(r"(\w+)\s*<-\s*(.+)", stripped)
        if not m:
            raise FlowSpecError(f"bad stacking line {stripped!r}", lineno)
        name = m.group(1)
        if name not in rectangles:
            raise FlowSpecError(f"stacking for unknown rectangle {name!r}", lineno)
        if name in stacking:
            raise FlowSpecError(f"duplicate stacking for {name!r}", lineno)
        slots = []
        for tok in m.group(2).split():
            mm = re.fullmatch(r"(\w+)\.(\d+)([+-])", tok)
            if not mm or mm.group(1) not in rectangles:
                raise FlowSpecError(f"bad stacking item {tok!r}", lineno)
            slots.append((mm.group(1), int(mm.group(2)),
                          1 if mm.group(3) == "+" else -1))
        stacking[name] = slots

    singular = []
    for stripped, lineno in body("singular"):
        m = re.fullmatch(r"(\S+)\s+p=(\d+)", stripped)
        if not m:
            raise FlowSpecError(f"bad singular line {stripped!r}", lineno)
        singular.append((side_point(m.group(1), lineno), int(m.group(2))))

    anchor = None
    for stripped, lineno in body("monodromy"):
        m = re.fullmatch(r"anchor\s+(\w+)", stripped)
        if not m:
            raise FlowSpecError(f"bad monodromy line {stripped!r}", lineno)
        if anchor is not None:
            raise FlowSpecError("duplicate monodromy anchor", lineno)
        anchor = m.group(1)
        if anchor not in rectangles:
            raise FlowSpecError(f"monodromy anchor {anchor!r} unknown", lineno)
    if anchor is None:
        anchor = next(iter(rectangles))

    generators = {}
    for stripped, lineno in body("generators"):
        m = re.fullmatch(r"(\w+)\s*=\s*(.*?)\s*flip\s*([+-])", stripped)
        if not m:
            raise FlowSpecError(f"bad generator line {stripped!r}", lineno)
        name = m.group(1)
        if name in generators or name == "t":
            raise FlowSpecError(f"duplicate or reserved generator name {name!r}", lineno)
        walk = []
        for tok in m.group(2).split():
            mm = re.fullmatch(r"([LRTB])(\d+)", tok)
            if not mm:
                raise FlowSpecError(f"bad walk step {tok!r}", lineno)
            walk.append((mm.group(1), int(mm.group(2))))
        generators[name] = (walk, 1 if m.group(3) == "+" else -1)

    spec = FlowSpec(
        field=nf,
        genus=genus,
        rectangles=rectangles,
        gluings=gluings,
        transition=transition,
        stacking=stacking,
        singular=singular,
        monodromy_anchor=anchor,
        generators=generators,
        dilatation=dilatation,
    )
    return spec


# ---------------------------------------------------------------------------
# serialization

def _fmt(e):
    return str(e).replace(" ", "")


def serialize(spec):
    """Canonical text form: sections in fixed order, entries sorted, LF."""
    out = []
    out.append("version 1")
    out.append(f"field {poly_str(spec.field.minpoly, 'x').replace(' ', '')}")
    out.append(f"genus {spec.genus}")
    if spec.dilatation:
        out.append(f"dilatation {spec.dilatation}")
    out.append("")
    out.append("[rectangles]")
    for name in sorted(spec.rectangles):
        r = spec.rectangles[name]
        out.append(f"{name} w={_fmt(r.width)} h={_fmt(r.height)}")
    out.append("")
    out.append("[gluings]")
    for g in sorted(spec.gluings, key=_gluing_key):
        a, b = g.a, g.b
        if b.key() < a.key():
            a, b = b, a
        out.append(
            f"{g.kind} {a.rect}.{a.side}@{_fmt(a.offset)} "
            f"{b.rect}.{b.side}@{_fmt(b.offset)} len={_fmt(g.length)} "
            f"flip={'+' if g.flip == 1 else '-'}")
    out.append("")
    out.append("[transition]")
    for name in sorted(spec.transition):
        word = " ".join(f"{r}{'+' if f == 1 else '-'}" for r, f in spec.transition[name])
        out.append(f"{name} -> {word}")
    out.append("")
    out.append("[stacking]")
    for name in sorted(spec.stacking):
        word = " ".join(f"{r}.{j}{'+' if f == 1 else '-'}"
                        for r, j, f in spec.stacking[name])
        out.append(f"{name} <- {word}")
    if spec.singular:
        out.append("")
        out.append("[singular]")
        for sp, p in sorted(spec.singular, key=lambda t: (t[0].key(), t[1])):
            out.append(f"{sp.rect}.{sp.side}@{_fmt(sp.offset)} p={p}")
    out.append("")
    out.append("[monodromy]")
    out.append(f"anchor {spec.monodromy_anchor}")
    if spec.generators:
        out.append("")
        out.append("[generators]")
        for name in sorted(spec.generators):
            walk, flip = spec.generators[name]
            steps = " ".join(f"{s}{k}" for s, k in walk)
            out.append(f"{name} = {steps} flip {'+' if flip == 1 else '-'}".replace("  ", " "))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# validation

def count_matrix(spec):
    """Nonnegative integer matrix M[i][j] = occurrences of rect j in C(rect i)."""
    names = spec.names
    index = {n: i for i, n in enumerate(names)}
    mat = [[0] * len(names) for _ in names]
    for name, word in spec.transition.items():
        for r, _flip in word:
            mat[index[name]][index[r]] += 1
    return mat


def primitivity_power(mat, bound=None):
    """Least k with mat**k entrywise positive, or None up to the Wielandt bound."""
    n = len(mat)
    if bound is None:
        bound = (n - 1) * (n - 1) + 1 if n > 1 else 1
    cur = [row[:] for row in mat]
    for k in range(1, bound + 1):
        if all(all(x > 0 for x in row) for row in cur):
            return k
        # cap entries to avoid blowup; positivity pattern is all that matters
        cur = [[min(1, sum(cur[i][t] * mat[t][j] for t in range(n)))
                for j in range(n)] for i in range(n)]
    return None


def side_segments(spec):
    """Per (rect, side): sorted list of gluing slots covering the side.

    Each slot is (offset, length, gluing, end) where end is 0 if the slot is
    the gluing's `a` end, 1 for `b`.  Raises no errors; used by validate and
    by the cover builder after validation.
    """
    segs = {(r, s): [] for r in spec.rectangles for s in SIDES}
    for g in spec.gluings:
        segs[(g.a.rect, g.a.side)].append((g.a.offset, g.length, g, 0))
        segs[(g.b.rect, g.b.side)].append((g.b.offset, g.length, g, 1))
    for key in segs:
        segs[key].sort(key=lambda t: float(t[0]))
    return segs


def _vertex_classes(spec):
    """Identify all segment endpoints and rectangle corners into vertex classes.

    Returns (classes, sector_count) where classes is a list of sets of
    boundary points (rect, side, offset-as-Elt) and sector_count maps a
    class index to its total number of quadrant sectors.
    """
    segs = side_segments(spec)
    # collect marked points per side: all slot endpoints (plus corners)
    points = {}

    def add_point(r, s, off):
        points.setdefault((r, s), set()).add(off)

    for (r, s), slots in segs.items():
        rect = spec.rectangles[r]
        add_point(r, s, spec.field(0))
        add_point(r, s, rect.side_length(s))
        for off, length, _g, _e in slots:
            add_point(r, s, off)
            add_point(r, s, off + length)

    # union-find over symbolic point keys
    parent = {}

    def key(r, s, off):
        return (r, s, off.coeffs)

    def find(k):
        while parent.get(k, k) != k:
            parent[k] = parent.get(parent[k], parent[k])
            k = parent[k]
        return k

    def union(k1, k2):
        r1, r2 = find(k1), find(k2)
        if r1 != r2:
            parent[r2] = r1

    all_keys = set()
    for (r, s), offs in points.items():
        for off in offs:
            k = key(r, s, off)
            all_keys.add(k)
            parent.setdefault(k, k)

    # same-rectangle corner identifications
    for r, rect in spec.rectangles.items():
        zero = spec.field(0)
        corners = [
            (("L", zero), ("B", zero)),
            (("B", rect.width), ("R", zero)),
            (("R", rect.height), ("T", rect.width)),
            (("T", zero), ("L", rect.height)),
        ]
        for (s1, o1), (s2, o2) in corners:
            k1, k2 = key(r, s1, o1), key(r, s2, o2)
            for k in (k1, k2):
                if k not in parent:
                    parent[k] = k
                    all_keys.add(k)
            union(k1, k2)

    # gluing identifications: endpoints of matching slots map to each other
    elt_cache = {}

    def elt_of(k):
        if k not in elt_cache:
            elt_cache[k] = spec.field(list(k[2]))
        return elt_cache[k]

    for g in spec.gluings:
        ra, sa, oa = g.a.rect, g.a.side, g.a.offset
        rb, sb, ob = g.b.rect, g.b.side, g.b.offset
        # point at parameter p in [oa, oa+len] maps to image parameter
        for (r, s), offs in list(points.items()):
            if (r, s) != (ra, sa):
                continue
            for off in list(offs):
                if (off - oa).sign() >= 0 and (oa + g.length - off).sign() >= 0:
                    rel = off - oa
                    img = (ob + rel) if g.flip == 1 else (ob + g.length - rel)
                    k2 = key(rb, sb, img)
                    if k2 not in parent:
                        parent[k2] = k2
                        all_keys.add(k2)
                        points.setdefault((rb, sb), set()).add(img)
                    union(key(ra, sa, off), k2)
    # second pass so late-added points propagate through other gluings
    for g in spec.gluings:
        ra, sa, oa = g.a.rect, g.a.side, g.a.offset
        for (r, s), offs in list(points.items()):
            for off in list(offs):
                for (r1, s1, o1, r2, s2, o2) in (
                    (g.a.rect, g.a.side, g.a.offset, g.b.rect, g.b.side, g.b.offset),
                    (g.b.rect, g.b.side, g.b.offset, g.a.rect, g.a.side, g.a.offset),
                ):
                    if (r, s) != (r1, s1):
                        continue
                    if (off - o1).sign() >= 0 and (o1 + g.length - off).sign() >= 0:
                        rel = off - o1
                        img = (o2 + rel) if g.flip == 1 else (o2 + g.length - rel)
                        k2 = key(r2, s2, img)
                        if k2 not in parent:
                            parent[k2] = k2
                            all_keys.add(k2)
                            points.setdefault((r2, s2), set()).add(img)
                        union(key(r1, s1, off), k2)

    classes = {}
    for k in all_keys:
        classes.setdefault(find(k), set()).add(k)

    # sector count: per class, each rectangle corner at the point adds 1
    # quadrant pair?? -- each corner contributes 1 sector (quarter), each
    # flat side-interior passage contributes 2 sectors.
    sector_count = {}
    for root, keys in classes.items():
        quarters = 0
        seen_rect_corner = set()
        seen_flat = set()
        for (r, s, offc) in keys:
            off = elt_of((r, s, offc))
            rect = spec.rectangles[r]
            at_start = (off == 0)
            at_end = (off == rect.side_length(s))
            if at_start or at_end:
                # a rectangle corner: two sides of r meet here; count once per
                # (rect, corner)
                corner = _corner_of(s, at_start)
                if (r, corner) not in seen_rect_corner:
                    seen_rect_corner.add((r, corner))
                    quarters += 1
            else:
                if (r, s, offc) not in seen_flat:
                    seen_flat.add((r, s, offc))
                    quarters += 2
        sector_count[root] = quarters
    return classes, sector_count


def _corner_of(side, at_start):
    return {
        ("L", True): "bl", ("L", False): "tl",
        ("R", True): "br", ("R", False): "tr",
        ("B", True): "bl", ("B", False): "br",
        ("T", True): "tl", ("T", False): "tr",
    }[(side, at_start)]


def validate(spec):
    """Check the structural invariants; violations become report entries."""
    errors = []
    warnings = []

    # --- closed surface: each side covered exactly once by gluing slots
    segs = side_segments(spec)
    for (r, s), slots in segs.items():
        rect = spec.rectangles[r]
        total = rect.side_length(s)
        pos = spec.field(0)
        ok = True
        for off, length, _g, _e in slots:
            if off != pos:
                ok = False
                break
            pos = pos + length
        if not ok or pos != total:
            errors.append(f"side {r}.{s} is not glued exactly once "
                          f"(gaps or overlaps in its segments)")

    # --- vertex classification, prong counts
    census = {}
    declared = {}
    try:
        classes, sectors = _vertex_classes(spec)
        point_class = {}
        for root, keys in classes.items():
            for k in keys:
                point_class[k] = root
        for sp, p in spec.singular:
            k = (sp.rect, sp.side, sp.offset.coeffs)
            if k not in point_class:
                errors.append(f"declared singular point {sp.rect}.{sp.side}@{sp.offset} "
                              f"is not a vertex of the complex")
                continue
            declared[point_class[k]] = p
        for root, q in sectors.items():
            if q % 2 != 0:
                errors.append("vertex with an odd number of quadrant sectors "
                              "(identifications are inconsistent)")
                continue
            p = q // 2
            if p < 2:
                errors.append(f"prong count below 2 at a vertex (p={p}); "
                              f"1-prongs are not allowed")
            if p >= 3:
                census[p] = census.get(p, 0) + 1
                if root not in declared:
                    errors.append(f"undeclared singular vertex with p={p}")
                elif declared[root] != p:
                    errors.append(f"declared p={declared[root]} but vertex has p={p}")
        for root, p in declared.items():
            actual = sectors.get(root, 0) // 2
            if p != actual:
                errors.append(f"declared singular p={p} does not match "
                              f"computed sectors (p={actual})")
        # Euler-Poincare
        v = len(classes)
        e = len(spec.gluings)
        f = len(spec.rectangles)
        chi = v - e + f
        genus_from_chi = (2 - chi) // 2 if (2 - chi) % 2 == 0 else None
        index_sum = sum((p - 2) * n for p, n in census.items())
        if index_sum != 4 * spec.genus - 4:
            errors.append(f"Euler-Poincare mismatch: sum(p-2) = {index_sum} "
                          f"but 4g-4 = {4 * spec.genus - 4} for declared genus "
                          f"{spec.genus}")
        if genus_from_chi is None or genus_from_chi != spec.genus:
            errors.append(f"complex Euler characteristic {chi} does not match "
                          f"declared genus {spec.genus}")
    except Exception as exc:  # inconsistent data can break classification
        errors.append(f"vertex classification failed: {exc}")

    # --- transition sanity + primitivity
    power = None
    for name in spec.rectangles:
        if name not in spec.transition:
            errors.append(f"missing transition word for rectangle {name}")
    if not errors or all("transition" not in e for e in errors):
        mat = count_matrix(spec)
        power = primitivity_power(mat)
        if power is None:
            errors.append("transition not primitive (no power of the count "
                          "matrix is entrywise positive within the Wielandt bound)")

    # --- stacking consistency with transition (multiset + flips + heights)
    lam = None
    crossings = {}
    for name, word in spec.transition.items():
        for j, (r, flip) in enumerate(word):
            crossings.setdefault(r, []).append((name, j, flip))
    for name in spec.rectangles:
        want = sorted(crossings.get(name, []))
        have = sorted(spec.stacking.get(name, []))
        if want != have:
            errors.append(f"stacking for {name} does not list exactly the "
                          f"transition crossings of {name}")
    if spec.monodromy_anchor:
        word = spec.transition.get(spec.monodromy_anchor)
        if word and not (word[0][0] == spec.monodromy_anchor and word[0][1] == 1):
            warnings.append("monodromy anchor rectangle's transition word "
                            "does not start with itself (+); the anchored "
                            "monodromy action is unavailable")
    # geometric consistency of widths/heights with the transition counts
    try:
        from orbitsphere.field import pf_eigen

        mat = count_matrix(spec)
        f0, lam0, _r, _l = pf_eigen(mat)
        if f0.minpoly != spec.field.minpoly:
            warnings.append("declared field differs from the field generated "
                            "by the expansion factor of the count matrix")
        lam = spec.field(list(lam0.coeffs)) if f0.minpoly == spec.field.minpoly else None
    except Exception:
        lam = None
    if lam is not None:
        for name, word in spec.transition.items():
            rect = spec.rectangles[name]
            total = spec.field(0)
            for r, _f in word:
                total = total + spec.rectangles[r].width
            if total != lam * rect.width:
                errors.append(f"image of {name} has unstable length "
                              f"{total}, expected lambda*w = {lam * rect.width}")
        for name, slots in spec.stacking.items():
            rect = spec.rectangles[name]
            total = spec.field(0)
            for r, _j, _f in slots:
                total = total + spec.rectangles[r].height
            if total * lam != rect.height * lam * lam:
                # sum h(r)/lam == h(name)
                errors.append(f"strips stacked in {name} have total height "
                              f"sum(h)/lambda != h({name})")

    status = "ok" if not errors else "error"
    return ValidationReport(
        status=status,
        errors=errors,
        warnings=warnings,
        primitivity_power=power,
        genus=spec.genus if not errors else None,
        singularity_census=census,
    )
