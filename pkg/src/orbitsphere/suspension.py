"""Derive flowspec rectangle data from periodic interval-exchange loops.

A periodic loop of Rauzy induction on a labelled interval exchange gives a
self-similar suspension surface: interval lengths are the dominant
eigenvector of the loop matrix, suspension vectors come from the
1/lambda eigenvector, and the affine renormalisation is a pseudo-Anosov
map whose invariant foliations are the vertical/horizontal directions.
The flow boxes over the exchanged intervals form a Markov rectangle
tiling whose substitution is the loop's symbolic word data.

Everything is exact: coordinates live in the expansion field, and side
identifications are derived by ray tracing in the suspension polygon
with an infinitesimal perturbation (coordinates a + b*eps, both parts in
the field) so no degenerate incidence is ever mis-decided.
"""

from __future__ import annotations

from itertools import product

from orbitsphere.field import charpoly, pf_eigen, _solve_kernel
from orbitsphere.flowspec import (FlowSpec, Gluing, Rect, SidePoint,
                                  primitivity_power, serialize, validate,
                                  _vertex_classes)

__all__ = ["rauzy_loop", "find_reversal_loops", "SuspensionSurface",
           "build_flowspec", "torus_spec", "genus2_spec", "lozenge_spec"]


# ---------------------------------------------------------------------------
# labelled Rauzy induction

def _apply_move(top, bot, kind):
    top, bot = list(top), list(bot)
    if kind == "t":
        winner, loser = top[-1], bot[-1]
        bot.pop()
        bot.insert(bot.index(winner) + 1, loser)
    else:
        winner, loser = bot[-1], top[-1]
        top.pop()
        top.insert(top.index(winner) + 1, loser)
    return tuple(top), tuple(bot), winner, loser


def rauzy_loop(d, word):
    """Run a move word from the reversal permutation.

    Returns (matrix, closes, moves) where matrix B satisfies
    w_old = B w_new, closes says the labelled state returned to the
    reversal, and moves lists (kind, winner, loser) per step.
    """
    top = tuple(range(d))
    bot = tuple(range(d - 1, -1, -1))
    state = (top, bot)
    mat = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    moves = []
    for kind in word:
        t, b, winner, loser = _apply_move(*state, kind)
        moves.append((kind, winner, loser))
        elem = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
        elem[winner][loser] = 1
        mat = [[sum(mat[i][k] * elem[k][j] for k in range(d)) for j in range(d)]
               for i in range(d)]
        state = (t, b)
    return mat, state == (top, bot), moves


def find_reversal_loops(d, max_len=12):
    """Yield (word, matrix) for primitive loops on the reversal permutation."""
    for length in range(2, max_len + 1):
        for word in product("tb", repeat=length):
            mat, closes, _ = rauzy_loop(d, word)
            if not closes:
                continue
            if primitivity_power(mat) is None:
                continue
            yield "".join(word), mat


def _loop_length_consistent(d, word, field, w):
    """Check the winner/loser comparisons hold along the loop for lengths w."""
    top = tuple(range(d))
    bot = tuple(range(d - 1, -1, -1))
    state = (top, bot)
    cur = list(w)
    for kind in word:
        t, b, winner, loser = _apply_move(*state, kind)
        if not (cur[winner] - cur[loser]).sign() > 0:
            return False
        cur[winner] = cur[winner] - cur[loser]
        state = (t, b)
    return True


# ---------------------------------------------------------------------------
# perturbed coordinates: a + b*eps, eps infinitesimal, parts in the field

class Pert:
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def __add__(self, other):
        if isinstance(other, Pert):
            return Pert(self.a + other.a, self.b + other.b)
        return Pert(self.a + other, self.b)

    __radd__ = __add__

    def __neg__(self):
        return Pert(-self.a, -self.b)

    def __sub__(self, other):
        if isinstance(other, Pert):
            return Pert(self.a - other.a, self.b - other.b)
        return Pert(self.a - other, self.b)

    def __rsub__(self, other):
        return (-self) + other

    def times(self, s):
        return Pert(self.a * s, self.b * s)

    def cmp(self, other):
        o = other if isinstance(other, Pert) else None
        da = (self.a - (o.a if o else other)).sign()
        if da != 0:
            return da
        db = self.b - (o.b if o else 0)
        return db.sign() if hasattr(db, "sign") else (db > 0) - (db < 0)

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __eq__(self, other):
        return self.cmp(other) == 0

    def __repr__(self):
        return f"({self.a})+({self.b})e"


# ---------------------------------------------------------------------------
# suspension surface with exact tracing

class SuspensionSurface:
    """Suspension polygon over a labelled IET, with exact flow tracing.

    perm is the bottom row (labels left to right); the top row is
    0..d-1 in order.  w are interval lengths, tau suspension heights;
    both chains must stay strictly above/below the base line.
    """

    def __init__(self, field, perm, w, tau):
        self.field = field
        self.d = len(w)
        self.perm = list(perm)
        self.w = list(w)
        self.tau = list(tau)
        zero = field(0)
        self.x = [zero]
        for wi in w:
            self.x.append(self.x[-1] + wi)
        self.total = self.x[-1]
        self.tp = [(zero, zero)]
        for i in range(self.d):
            px, py = self.tp[-1]
            self.tp.append((px + w[i], py + tau[i]))
        self.bq = [(zero, zero)]
        self.u = [zero]
        for k in range(self.d):
            lab = self.perm[k]
            px, py = self.bq[-1]
            self.bq.append((px + w[lab], py + tau[lab]))
            self.u.append(self.u[-1] + w[lab])
        if self.tp[-1][0] != self.bq[-1][0] or self.tp[-1][1] != self.bq[-1][1]:
            raise ValueError("suspension polygon does not close")
        for k in range(1, self.d):
            if not self.tp[k][1].sign() > 0:
                raise ValueError("top chain must stay strictly above the base")
            if not self.bq[k][1].sign() < 0:
                raise ValueError("bottom chain must stay strictly below the base")
        self.bot_pos = {lab: k for k, lab in enumerate(self.perm)}
        self.transversal = None   # list of (y, xa, xb, offset_at_xa)

    # -- IET combinatorics ----------------------------------------------------

    def interval_of(self, off):
        """Index j with off strictly inside the perturbed-open interval I_j."""
        o = off if isinstance(off, Pert) else Pert(off, self.field(0))
        zero = self.field(0)
        for j in range(self.d):
            if Pert(self.x[j], zero) < o and o < Pert(self.x[j + 1], zero):
                return j
        raise ValueError("offset not interior to any base interval")

    def iet_map(self, off):
        j = self.interval_of(off)
        shift = self.u[self.bot_pos[j]] - self.x[j]
        if isinstance(off, Pert):
            return Pert(off.a + shift, off.b)
        return off + shift

    # -- chart geometry ---------------------------------------------------

    def _edge_y_at(self, p, q, x):
        slope = (q[1] - p[1]) / (q[0] - p[0])
        if isinstance(x, Pert):
            return Pert(p[1] + (x.a - p[0]) * slope, x.b * slope)
        return p[1] + (x - p[0]) * slope

    def chart_of_offset(self, off):
        """Chart point (x: Pert, y: field) of a perturbed base offset."""
        if not isinstance(off, Pert):
            off = Pert(off, self.field(0))
        for (y, xa, xb, o) in self.transversal:
            lo = Pert(o, self.field(0))
            hi = Pert(o + (xb - xa), self.field(0))
            if lo <= off and off <= hi:
                if off.a == o + (xb - xa) and off.b.sign() >= 0 and (off.a != self.total):
                    continue  # prefer the next piece at seams going right
                return Pert(xa + (off.a - o), off.b), y
        raise ValueError("offset outside transversal")

    def trace_transversal(self):
        """Trace the base separatrix rightward for total length |I|."""
        field = self.field
        pieces = []
        cx = Pert(field(0), field(1))
        cy = field(0)
        offset = field(0)
        for _guard in range(4 * self.d + 8):
            best = None
            for chain in (self.tp, self.bq):
                for i in range(self.d):
                    p, q = chain[i], chain[i + 1]
                    dy0, dy1 = (p[1] - cy), (q[1] - cy)
                    if dy0.sign() == 0 and dy1.sign() == 0:
                        continue
                    if dy0.sign() * dy1.sign() > 0:
                        continue
                    slope = (q[1] - p[1]) / (q[0] - p[0])
                    if slope.sign() == 0:
                        continue
                    xhit = p[0] + (cy - p[1]) / slope
                    if dy0.sign() == 0 or dy1.sign() == 0:
                        # crossing at a chain vertex
                        if (xhit - cx.a).sign() > 0:
                            raise ValueError("separatrix hits a vertex")
                        continue
                    if Pert(xhit, field(0)) > cx:
                        if best is None or (xhit - best[0]).sign() < 0:
                            best = (xhit, chain, i, p)
            if best is None:
                raise RuntimeError("horizontal trace found no wall")
            xhit, chain, i, p = best
            run = xhit - cx.a
            if (offset + run - self.total).sign() >= 0:
                run = self.total - offset
                pieces.append((cy, cx.a, cx.a + run, offset))
                self.transversal = pieces
                return pieces
            pieces.append((cy, cx.a, xhit, offset))
            offset = offset + run
            if chain is self.tp:
                k = self.bot_pos[i]
                dx = self.bq[k][0] - self.tp[i][0]
                dy = self.bq[k][1] - self.tp[i][1]
            else:
                lab = self.perm[i]
                dx = self.tp[lab][0] - self.bq[i][0]
                dy = self.tp[lab][1] - self.bq[i][1]
            cx = Pert(xhit + dx, field(1))
            cy = cy + dy
        raise RuntimeError("runaway transversal trace")

    # -- vertical tracing ---------------------------------------------------

    def trace_vertical(self, x, y, direction, max_len=None, stop_first_cross=False):
        """Trace the vertical leaf through (x, y) in the given direction.

        x must be perturbed off all vertex lines (x.b != 0).  Returns
        (pieces, crossings, end) where pieces are chart segments
        (x, y_lo, y_hi, v_at_lo, v_at_hi) with v the flow length from the
        start, crossings are (v, offset) transversal hits, and end is the
        final (x, y) chart point.  A crossing exactly at the start point
        is not reported; later hits at zero chart distance are.
        """
        field = self.field
        if x.b.sign() == 0:
            raise ValueError("vertical tracing requires a perturbed x")
        cx = x
        cy = y if isinstance(y, Pert) else Pert(y, field(0))
        v = field(0)
        pieces = []
        crossings = []
        hop = 0
        for _guard in range(100000):
            # chart exit in the travel direction
            lim = None
            chain = self.tp if direction > 0 else self.bq
            for i in range(self.d):
                p, q = chain[i], chain[i + 1]
                if Pert(p[0], field(0)) <= cx and cx <= Pert(q[0], field(0)):
                    yy = self._edge_y_at(p, q, cx)
                    if lim is None or (direction > 0 and yy < lim[0]) or \
                            (direction < 0 and yy > lim[0]):
                        lim = (yy, i)
            if lim is None:
                raise RuntimeError("vertical ray left the polygon")
            ylim, edge = lim
            # transversal crossings within this chart hop
            hop_events = []
            for (ly, xa, xb, o) in self.transversal:
                if Pert(xa, field(0)) <= cx and cx <= Pert(xb, field(0)):
                    lv = Pert(ly, field(0))
                    if direction > 0:
                        at_or_after = (lv > cy) or (hop > 0 and lv == cy)
                        if at_or_after and lv <= ylim:
                            hop_events.append((ly, o + (cx.a - xa)))
                    else:
                        at_or_after = (lv < cy) or (hop > 0 and lv == cy)
                        if at_or_after and lv >= ylim:
                            hop_events.append((ly, o + (cx.a - xa)))
            hop_events.sort(key=lambda t: float(t[0]), reverse=(direction < 0))
            seg_from = cy
            v_hop_start = v
            budget_hit = False
            for (ly, off) in hop_events:
                dv = (ly - seg_from.a) if direction > 0 else (seg_from.a - ly)
                if max_len is not None and (v + dv - max_len).sign() > 0:
                    budget_hit = True
                    break
                v = v + dv
                crossings.append((v, Pert(off, cx.b)))
                seg_from = Pert(ly, field(0))
                if stop_first_cross:
                    pieces.append((cx, cy, seg_from, v_hop_start, v))
                    return pieces, crossings, (cx, seg_from)
            dv_lim = (ylim.a - seg_from.a) if direction > 0 else (seg_from.a - ylim.a)
            if budget_hit or (max_len is not None and
                              (v + dv_lim - max_len).sign() >= 0):
                rem = max_len - v
                end_y = Pert(seg_from.a + (rem if direction > 0 else -rem), field(0))
                pieces.append((cx, cy, end_y, v_hop_start, max_len))
                return pieces, crossings, (cx, end_y)
            v = v + dv_lim
            pieces.append((cx, cy, ylim, v_hop_start, v))
            # cross the polygon edge
            if direction > 0:
                i = edge
                k = self.bot_pos[i]
                dx = self.bq[k][0] - self.tp[i][0]
                dy = self.bq[k][1] - self.tp[i][1]
            else:
                k = edge
                lab = self.perm[k]
                dx = self.tp[lab][0] - self.bq[k][0]
                dy = self.tp[lab][1] - self.bq[k][1]
            cx = Pert(cx.a + dx, cx.b)
            cy = Pert(ylim.a + dy, field(0))
            hop += 1
        raise RuntimeError("runaway vertical trace")


# ---------------------------------------------------------------------------
# first-return decomposition

class ReturnSystem:
    """First-return data of the vertical flow over the base separatrix.

    pieces[i] = (a, b, ret, h): offsets in [a, b) return to [ret, ret + b-a)
    after flow length h (constant per piece; the return is a translation).
    """

    def __init__(self, field, total, pieces):
        self.field = field
        self.total = total
        self.pieces = pieces

    def piece_of(self, off):
        """Index of the piece whose open interval contains a perturbed offset."""
        o = off if isinstance(off, Pert) else Pert(off, self.field(0))
        zero = self.field(0)
        for j, (a, b, _r, _h) in enumerate(self.pieces):
            if Pert(a, zero) < o and o < Pert(b, zero):
                return j
        raise ValueError("offset not interior to any return piece")

    def apply(self, off):
        j = self.piece_of(off)
        a, _b, ret, _h = self.pieces[j]
        if isinstance(off, Pert):
            return Pert(off.a - a + ret, off.b)
        return off - a + ret


def first_return_system(surface):
    """Compute the true first-return decomposition by adaptive interval flow.

    Flows every transversal piece upward, splitting at singular leaves,
    transversal endpoints and floor/level coincidences, until each strand
    lands back on the transversal.  All splits are exact.
    """
    field = surface.field
    zero = field(0)
    out = []
    # state: (a, b) offsets; chart x = offset + shift; floor line y = f0+f1*x;
    # flow length v = y - c
    queue = []
    for (ly, xa, xb, o) in surface.transversal:
        shift = xa - o
        queue.append((o, o + (xb - xa), shift, ly, zero, ly))
    guard = 0
    while queue:
        guard += 1
        if guard > 200000:
            raise RuntimeError("runaway first-return decomposition")
        a, b, shift, f0, f1, c = queue.pop()
        if (b - a).sign() <= 0:
            continue
        p, q = a + shift, b + shift
        pa, qa = Pert(p, field(1)), Pert(q, -field(1))

        def floor_at(x):
            if isinstance(x, Pert):
                return Pert(f0 + f1 * x.a, f1 * x.b)
            return f0 + f1 * x

        # ceiling edges over (p, q); split at interior top vertices
        split_at = None
        cover = []
        for i in range(surface.d):
            e0, e1 = surface.tp[i], surface.tp[i + 1]
            if Pert(e0[0], zero) <= pa and pa <= Pert(e1[0], zero):
                cover.append(i)
        edge = cover[0] if cover else None
        if edge is None:
            raise RuntimeError("strand escaped the polygon")
        e0, e1 = surface.tp[edge], surface.tp[edge + 1]
        if Pert(e1[0], zero) < qa:
            split_at = e1[0] - shift
        if split_at is not None:
            queue.append((a, split_at, shift, f0, f1, c))
            queue.append((split_at, b, shift, f0, f1, c))
            continue
        # candidate transversal pieces: split at partial overlaps and at
        # floor/level crossings, else take the lowest covering level
        best = None
        resplit = False
        for (ly, xa, xb, o) in surface.transversal:
            if not (Pert(xa, zero) < qa and pa < Pert(xb, zero)):
                continue
            lo_in = Pert(xa, zero) <= pa
            hi_in = qa <= Pert(xb, zero)
            if not lo_in or not hi_in:
                cut = (xa if not lo_in else xb) - shift
                queue.append((a, cut, shift, f0, f1, c))
                queue.append((cut, b, shift, f0, f1, c))
                resplit = True
                break
            # piece spans the strand; check floor < level at both ends
            fl_a = floor_at(pa)
            fl_b = floor_at(qa)
            below_a = fl_a < Pert(ly, zero)
            below_b = fl_b < Pert(ly, zero)
            if below_a != below_b:
                cut = (ly - f0) / f1 - shift
                queue.append((a, cut, shift, f0, f1, c))
                queue.append((cut, b, shift, f0, f1, c))
                resplit = True
                break
            if not below_a:
                continue
            h = ly - c
            if h.sign() <= 0:
                continue
            if best is None or (ly - best[0]).sign() < 0:
                best = (ly, o + (p - xa))
        if resplit:
            continue
        if best is not None:
            ly, ret = best
            out.append((a, b, ret, ly - c))
            continue
        # cross the ceiling edge
        k = surface.bot_pos[edge]
        dx = surface.bq[k][0] - surface.tp[edge][0]
        dy = surface.bq[k][1] - surface.tp[edge][1]
        s = (e1[1] - e0[1]) / (e1[0] - e0[0])
        nf1 = s
        nf0 = e0[1] + dy - s * (e0[0] + dx)
        queue.append((a, b, shift + dx, nf0, nf1, c + dy))
    out.sort(key=lambda t: float(t[0]))
    # merge strands split by non-cuts: same height, continuous return
    merged = []
    for (a, b, r, h) in out:
        if merged:
            (pa, pb, pr, ph) = merged[-1]
            if pb == a and ph == h and pr + (pb - pa) == r:
                merged[-1] = (pa, b, pr, ph)
                continue
        merged.append((a, b, r, h))
    out = merged
    # oracle checks: domain and range both tile [0, total); Kac area identity
    pos = zero
    for (a, b, _r, h) in out:
        if a != pos:
            raise ValueError("return pieces do not tile the transversal")
        if h.sign() <= 0:
            raise ValueError("nonpositive return height")
        pos = b
    if pos != surface.total:
        raise ValueError("return pieces do not fill the transversal")
    rets = sorted(((r, b - a) for (a, b, r, _h) in out), key=lambda t: float(t[0]))
    pos = zero
    for (r, width) in rets:
        if r != pos:
            raise ValueError("return images do not tile the transversal")
        pos = pos + width
    if pos != surface.total:
        raise ValueError("return images do not fill the transversal")
    area = zero
    for (a, b, _r, h) in out:
        area = area + (b - a) * h
    poly = zero
    pts = surface.tp + list(reversed(surface.bq[1:-1]))
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        poly = poly + (x0 * y1 - x1 * y0)
    two_area = area + area
    if two_area != poly and two_area != -poly:
        raise ValueError("return boxes do not account for the surface area")
    return ReturnSystem(field, surface.total, out)


# ---------------------------------------------------------------------------
# flowspec assembly

_NAMES = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _box_names(n):
    if n <= len(_NAMES):
        return [_NAMES[i] for i in range(n)]
    return [f"R{i}" for i in range(n)]


def _eigen_tau(field, mat, lam):
    """Eigenvector of mat for eigenvalue 1/lam over the field, or None."""
    d = len(mat)
    mu = field(1) / lam
    cp = charpoly(mat)
    val = field(0)
    for coeff in reversed(cp):
        val = val * mu + field(coeff)
    if val != 0:
        return None
    rows = [[(field(mat[i][j]) - (mu if i == j else field(0))) for j in range(d)]
            for i in range(d)]
    try:
        return _solve_kernel(field, rows)
    except ValueError:
        return None


def _substitution(system, lam):
    """Crossing words of the renormalised boxes through the return system.

    The affine renormalisation maps the return system over [0, total) to
    the one over [0, total/lam); tracing each contracted piece through the
    return map until it lands back in the contracted base yields the word.
    """
    field = system.field
    n = len(system.pieces)
    sub_total = system.total / lam
    words = {}
    visits = {j: [] for j in range(n)}
    for i, (a, b, _r, _h) in enumerate(system.pieces):
        cur_a, cur_b = a / lam, b / lam
        word = []
        for _guard in range(20000):
            if word and (cur_b - sub_total).sign() <= 0:
                break
            j = system.piece_of(Pert(cur_a, field(1)))
            j2 = system.piece_of(Pert(cur_b, -field(1)))
            if j != j2:
                raise ValueError("contracted piece straddles a return seam")
            pa, pb, ret, _ph = system.pieces[j]
            visits[j].append((cur_a - pa, i, len(word)))
            word.append(j)
            cur_a = cur_a - pa + ret
            cur_b = cur_b - pa + ret
        else:
            raise RuntimeError("runaway substitution trace")
        words[i] = word
    stack = {}
    for j, (pa, pb, _r, _h) in enumerate(system.pieces):
        entries = sorted(visits[j], key=lambda t: float(t[0]))
        pos = field(0)
        for (start, src, _occ) in entries:
            if start != pos:
                raise ValueError("image strips do not stack exactly")
            sa, sb, _sr, _sh = system.pieces[src]
            pos = pos + (sb - sa) / lam
        if pos != pb - pa:
            raise ValueError("image strips do not fill a box")
        stack[j] = [(src, occ) for (_s, src, occ) in entries]
    return words, stack


def _axis_gluings(system, names):
    """L/R identifications: box entry faces against box exit faces."""
    import functools

    field = system.field
    marks = set()
    for (a, b, r, _h) in system.pieces:
        marks.add(a.coeffs)
        marks.add(b.coeffs)
        marks.add(r.coeffs)
        marks.add((r + (b - a)).coeffs)
    marks = sorted((field(list(cs)) for cs in marks),
                   key=functools.cmp_to_key(lambda p, q: (p - q).sign()))
    gluings = []
    for lo, hi in zip(marks, marks[1:]):
        probe = Pert(lo, field(1))
        i = system.piece_of(probe)
        j = None
        for jj, (a, b, r, _h) in enumerate(system.pieces):
            if Pert(r, field(0)) <= probe and probe <= Pert(r + (b - a), field(0)):
                j = jj
                break
        if j is None:
            raise ValueError("exit faces do not cover the transversal")
        ia, _ib, _ir, _ih = system.pieces[i]
        ja, jb, jr, _jh = system.pieces[j]
        gluings.append(Gluing(
            "s",
            SidePoint(names[i], "L", lo - ia),
            SidePoint(names[j], "R", lo - jr),
            hi - lo,
            1,
        ))
    return gluings


def _wall_gluings(surface, system, names):
    """Derive all T/B side identifications by tracing box walls."""
    field = surface.field
    slack = field(0)
    for (_a, _b, _r, h) in system.pieces:
        slack = slack + h
    gluings = []
    for i, (a, b, _r, h) in enumerate(system.pieces):
        start = Pert(a, field(1))
        cx, cy = surface.chart_of_offset(start)
        pieces, crossings, _end = surface.trace_vertical(cx, Pert(cy, field(0)),
                                                         +1, max_len=h)
        if any((v - h).sign() < 0 for v, _o in crossings):
            raise ValueError("box interior touches the transversal")
        probe = None
        for (qx, qy0, qy1, w0, w1) in pieces:
            if (w1 - w0).sign() > 0:
                probe = (qx, (qy0.a + qy1.a) / 2, w0 + (qy1.a - qy0.a) / 2)
                break
        if probe is None:
            raise ValueError("wall has no interior chart piece")
        px, mid_y, v_mid = probe
        outer_x = Pert(px.a, -px.b)
        _p1, down_cross, _e1 = surface.trace_vertical(outer_x, Pert(mid_y, field(0)),
                                                      -1, max_len=v_mid + slack)
        _p2, up_cross, _e2 = surface.trace_vertical(outer_x, Pert(mid_y, field(0)),
                                                    +1, max_len=h - v_mid)
        events = []
        floor_event = None
        for (v, off) in down_cross:
            wall_v = v_mid - v
            if wall_v.sign() > 0:
                events.append((wall_v, off))
            else:
                floor_event = (wall_v, off)
                break
        if floor_event is None:
            raise ValueError("outer wall walk found no floor crossing")
        for (v, off) in up_cross:
            wall_v = v_mid + v
            if (wall_v - h).sign() < 0:
                events.append((wall_v, off))
        events.sort(key=lambda t: float(t[0]))
        marks = [field(0)] + [v for v, _ in events] + [h]
        anchors = [floor_event] + events
        for idx in range(len(marks) - 1):
            lo, hi = marks[idx], marks[idx + 1]
            if (hi - lo).sign() <= 0:
                continue
            v_anchor, off_anchor = anchors[idx]
            j = system.piece_of(off_anchor)
            ja, jb, _jr, _jh = system.pieces[j]
            if off_anchor.a - ja != jb - ja or off_anchor.b.sign() >= 0:
                raise ValueError("outer wall is not along the right edge of a box")
            gluings.append(Gluing(
                "u",
                SidePoint(names[i], "B", lo),
                SidePoint(names[j], "T", lo - v_anchor),
                hi - lo,
                1,
            ))
    return gluings


def build_flowspec(d, word):
    """Build a validated FlowSpec from a Rauzy loop on the reversal of d letters."""
    mat, closes, _ = rauzy_loop(d, word)
    if not closes:
        raise ValueError("move word does not return to the reversal permutation")
    field, lam, w, _left = pf_eigen(mat)
    if not _loop_length_consistent(d, word, field, w):
        raise ValueError("eigenvector lengths do not follow the loop")
    tau = _eigen_tau(field, mat, lam)
    if tau is None:
        raise ValueError("no 1/lambda eigenvector; loop unusable")
    perm = list(range(d - 1, -1, -1))
    surface = None
    for sign in (1, -1):
        cand = [t * sign for t in tau]
        try:
            surface = SuspensionSurface(field, perm, w, cand)
            break
        except ValueError:
            continue
    if surface is None:
        raise ValueError("suspension data not admissible for this loop")
    surface.trace_transversal()
    system = first_return_system(surface)
    n = len(system.pieces)
    words, stack = _substitution(system, lam)
    names = _box_names(n)
    rectangles = {}
    for i, (a, b, _r, h) in enumerate(system.pieces):
        rectangles[names[i]] = Rect(names[i], h, b - a)
    gluings = _axis_gluings(system, names) + _wall_gluings(surface, system, names)
    transition = {names[i]: [(names[r], 1) for r in words[i]] for i in range(n)}
    stacking = {names[j]: [(names[src], occ, 1) for (src, occ) in stack[j]]
                for j in range(n)}
    spec = FlowSpec(
        field=field,
        genus=0,
        rectangles=rectangles,
        gluings=gluings,
        transition=transition,
        stacking=stacking,
        singular=[],
        monodromy_anchor=names[0],
        generators={},
        dilatation=f"{float(lam):.10f}",
    )
    classes, sectors = _vertex_classes(spec)
    singular = []
    for root in sorted(classes, key=lambda rt: sorted(classes[rt])):
        q = sectors[root]
        if q % 2 != 0:
            raise ValueError("vertex with odd sector count; construction bug")
        p = q // 2
        if p >= 3:
            rep = sorted(classes[root])[0]
            singular.append((SidePoint(rep[0], rep[1], field(list(rep[2]))), p))
    v = len(classes)
    e = len(gluings)
    chi = v - e + n
    if (2 - chi) % 2 != 0:
        raise ValueError("odd Euler characteristic; construction bug")
    spec.genus = (2 - chi) // 2
    spec.singular = singular
    report = validate(spec)
    if not report.ok:
        raise ValueError("generated spec failed validation: " + "; ".join(report.errors))
    return spec


def torus_spec():
    """Golden-ratio two-box torus exchange (no singular vertices)."""
    return build_flowspec(2, "tb")


def genus2_spec(max_len=12):
    """Genus-2 surface with two 4-prong singular vertices from a 5-letter loop."""
    for word, _mat in find_reversal_loops(5, max_len=max_len):
        try:
            spec = build_flowspec(5, word)
        except (ValueError, RuntimeError):
            continue
        census = validate(spec).singularity_census
        if spec.genus == 2 and census == {4: 2}:
            return spec
    raise RuntimeError("no usable 5-letter loop found")


def lozenge_spec():
    """Synthetic perfect-fit example: torus data with a doctored stacking.

    The permuted stacking is consistent slot-by-slot (validation passes)
    but the vertical strip propagation no longer describes a suspension
    homeomorphism, which is exactly the configuration the perfect-fit
    detector certifies with a two-fixed-tile word.
    """
    spec = torus_spec()
    doctored = None
    for name in sorted(spec.stacking):
        slots = spec.stacking[name]
        if len(slots) >= 2:
            doctored = name
            break
    if doctored is None:
        raise RuntimeError("torus spec has no multi-slot stack to permute")
    slots = list(spec.stacking[doctored])
    slots[0], slots[1] = slots[1], slots[0]
    spec.stacking[doctored] = slots
    return spec
