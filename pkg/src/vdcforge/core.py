"""Core data model: objects, vertical/horizontal morphisms, multicells.

A virtual double category is presented effectively: decidable equality on
refs, enumerators for each carrier, and an algorithmic composition of
multicells.  Every ref is a frozen value carrying its own frame data, so
refs from different constructions can be nested inside each other's keys.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Sequence


class FrameMismatch(ValueError):
    """Boundaries do not paste or a ref's frame is inconsistent."""


class UnknownCell(ValueError):
    """A ref is foreign to the virtual double category it was handed to."""


class EnumerationOverflow(RuntimeError):
    """An enumerator exceeded its configured candidate cap."""


class MissingPullback(ValueError):
    """A chosen-pullback function was partial where a pullback was needed."""


class DanglingRef(ValueError):
    """A structure references a cell or morphism that does not resolve."""


def ckey(v) -> tuple:
    """Total order key for canonical values (ints, strings, tuples,
    frozensets, refs).  Used wherever deterministic iteration is needed."""
    if isinstance(v, bool):
        return (0, int(v))
    if isinstance(v, int):
        return (1, v)
    if isinstance(v, str):
        return (2, v)
    if isinstance(v, tuple):
        return (3, tuple(ckey(x) for x in v))
    if isinstance(v, frozenset):
        return (4, tuple(sorted(ckey(x) for x in v)))
    if isinstance(v, (Obj, VMor, HMor, Cell)):
        return (5, type(v).__name__, ckey(v.key))
    if v is None:
        return (6,)
    raise TypeError(f"not a canonical value: {v!r}")


def csorted(xs) -> list:
    return sorted(xs, key=ckey)


@dataclass(frozen=True)
class Obj:
    key: Any

    def __repr__(self):
        return f"Obj({self.key!r})"


@dataclass(frozen=True)
class VMor:
    key: Any
    dom: Obj
    cod: Obj

    def __repr__(self):
        return f"VMor({self.key!r}: {self.dom.key!r} -> {self.cod.key!r})"


@dataclass(frozen=True)
class HMor:
    key: Any
    src: Obj
    tgt: Obj

    def __repr__(self):
        return f"HMor({self.key!r}: {self.src.key!r} -|-> {self.tgt.key!r})"


@dataclass(frozen=True)
class Boundary:
    """Frame of a multicell: top path, bottom arrow, vertical sides.

    For arity 0 the top is empty and the top corner is ``left.dom``
    (which must coincide with ``right.dom``).
    """

    top: tuple[HMor, ...]
    bottom: HMor
    left: VMor
    right: VMor

    def __post_init__(self):
        if self.top:
            if self.top[0].src != self.left.dom:
                raise FrameMismatch(f"top starts at {self.top[0].src}, left leaves {self.left.dom}")
            if self.top[-1].tgt != self.right.dom:
                raise FrameMismatch(f"top ends at {self.top[-1].tgt}, right leaves {self.right.dom}")
            for a, b in zip(self.top, self.top[1:]):
                if a.tgt != b.src:
                    raise FrameMismatch(f"top path breaks between {a} and {b}")
        else:
            if self.left.dom != self.right.dom:
                raise FrameMismatch("nullary boundary needs equal top corners")
        if self.bottom.src != self.left.cod:
            raise FrameMismatch(f"bottom starts at {self.bottom.src}, left lands at {self.left.cod}")
        if self.bottom.tgt != self.right.cod:
            raise FrameMismatch(f"bottom ends at {self.bottom.tgt}, right lands at {self.right.cod}")

    @property
    def arity(self) -> int:
        return len(self.top)

    @property
    def top_origin(self) -> Obj:
        return self.left.dom

    def __repr__(self):
        tops = ",".join(repr(h.key) for h in self.top)
        return f"Boundary([{tops}] => {self.bottom.key!r} over ({self.left.key!r},{self.right.key!r}))"


@dataclass(frozen=True)
class Cell:
    key: Any
    boundary: Boundary

    def __repr__(self):
        return f"Cell({self.key!r} @ {self.boundary!r})"


class VDC:
    """Effective virtual double category.

    Subclasses provide carriers and the composition algorithm.  Enumerators
    are deterministic (canonical order) and may be bounded by construction
    parameters; membership predicates are total.
    """

    name = "vdc"

    # --- carriers ---------------------------------------------------------
    def objects(self) -> Iterator[Obj]:
        raise NotImplementedError

    def vmors(self, a: Obj, b: Obj) -> Iterator[VMor]:
        raise NotImplementedError

    def hmors(self, a: Obj, b: Obj) -> Iterator[HMor]:
        raise NotImplementedError

    def cells(self, b: Boundary) -> Iterator[Cell]:
        raise NotImplementedError

    # --- membership -------------------------------------------------------
    def has_obj(self, a: Obj) -> bool:
        return any(a == x for x in self.objects())

    def has_vmor(self, u: VMor) -> bool:
        return any(u == x for x in self.vmors(u.dom, u.cod))

    def has_hmor(self, h: HMor) -> bool:
        return any(h == x for x in self.hmors(h.src, h.tgt))

    def has_cell(self, c: Cell) -> bool:
        return any(c == x for x in self.cells(c.boundary))

    # --- vertical category ------------------------------------------------
    def vid(self, a: Obj) -> VMor:
        raise NotImplementedError

    def vcomp(self, u: VMor, v: VMor) -> VMor:
        """u followed by v."""
        raise NotImplementedError

    # --- multicell algebra --------------------------------------------------
    def cid(self, h: HMor) -> Cell:
        """Vertical identity cell on a horizontal morphism."""
        raise NotImplementedError

    def compose(self, kappa: Cell, thetas: Sequence[Cell]) -> Cell:
        """Composite multicell; arity of ``kappa`` must match ``len(thetas)``
        and be at least 1.  Use :meth:`compose_nullary` for the arity-0 arm."""
        raise NotImplementedError

    def compose_nullary(self, kappa: Cell, u: VMor) -> Cell:
        """Substitution of a vertical morphism into an arity-0 multicell."""
        raise NotImplementedError

    # --- conveniences -------------------------------------------------------
    def all_vmors(self) -> Iterator[VMor]:
        for a in self.objects():
            for b in self.objects():
                yield from self.vmors(a, b)

    def all_hmors(self) -> Iterator[HMor]:
        for a in self.objects():
            for b in self.objects():
                yield from self.hmors(a, b)

    def hmor_paths(self, max_len: int) -> Iterator[tuple[HMor, ...]]:
        """All composable top paths of length 1..max_len."""
        by_src: dict[Obj, list[HMor]] = {}
        for h in self.all_hmors():
            by_src.setdefault(h.src, []).append(h)
        frontier: list[tuple[HMor, ...]] = [(h,) for hs in by_src.values() for h in hs]
        frontier.sort(key=ckey)
        for _ in range(max_len):
            nxt = []
            for p in frontier:
                yield p
                for h in by_src.get(p[-1].tgt, ()):
                    nxt.append(p + (h,))
            frontier = nxt
            if not frontier:
                return

    def boundaries(self, max_len: int, include_nullary: bool = True) -> Iterator[Boundary]:
        """All boundaries with top paths of length 0..max_len."""
        objs = list(self.objects())
        if include_nullary:
            for a in objs:
                for b in objs:
                    for u in self.vmors(a, b):
                        for b2 in objs:
                            for u2 in self.vmors(a, b2):
                                for bot in self.hmors(u.cod, u2.cod):
                                    yield Boundary((), bot, u, u2)
        for path in self.hmor_paths(max_len):
            a0, an = path[0].src, path[-1].tgt
            for b in objs:
                for u in self.vmors(a0, b):
                    for b2 in objs:
                        for u2 in self.vmors(an, b2):
                            for bot in self.hmors(u.cod, u2.cod):
                                yield Boundary(path, bot, u, u2)


def paste_boundary(vdc: VDC, kb: Boundary, theta_bs: Sequence[Boundary]) -> Boundary:
    """Outer boundary of the pasting of cells with boundaries ``theta_bs``
    under a cell with boundary ``kb``.  Raises FrameMismatch if the
    configuration does not paste."""
    if kb.arity != len(theta_bs):
        raise FrameMismatch(f"arity {kb.arity} cell given {len(theta_bs)} arguments")
    if kb.arity == 0:
        raise FrameMismatch("nullary composition needs a vertical morphism, not a cell list")
    for i, (top, tb) in enumerate(zip(kb.top, theta_bs)):
        if tb.bottom != top:
            raise FrameMismatch(f"argument {i} has bottom {tb.bottom}, expected {top}")
    for i, (tb, tb2) in enumerate(zip(theta_bs, theta_bs[1:])):
        if tb.right != tb2.left:
            raise FrameMismatch(f"arguments {i},{i+1} do not share a vertical side")
    top = tuple(h for tb in theta_bs for h in tb.top)
    left = vdc.vcomp(theta_bs[0].left, kb.left)
    right = vdc.vcomp(theta_bs[-1].right, kb.right)
    return Boundary(top, kb.bottom, left, right)


def nullary_paste_boundary(vdc: VDC, kb: Boundary, u: VMor) -> Boundary:
    if kb.arity != 0:
        raise FrameMismatch("vertical substitution into a positive-arity cell")
    if u.cod != kb.top_origin:
        raise FrameMismatch(f"{u} does not land at the top corner {kb.top_origin}")
    return Boundary((), kb.bottom, vdc.vcomp(u, kb.left), vdc.vcomp(u, kb.right))


class ThinVDC(VDC):
    """A virtual double category with at most one cell per boundary.

    Subclasses implement ``cell_exists``; composition is forced.  The key of
    the unique cell over a boundary is derived from the boundary itself.
    """

    def cell_exists(self, b: Boundary) -> bool:
        raise NotImplementedError

    def _cell(self, b: Boundary) -> Cell:
        return Cell(("thin",), b)

    def cells(self, b: Boundary) -> Iterator[Cell]:
        if self.cell_exists(b):
            yield self._cell(b)

    def has_cell(self, c: Cell) -> bool:
        return c.key == ("thin",) and self.cell_exists(c.boundary)

    def cid(self, h: HMor) -> Cell:
        b = Boundary((h,), h, self.vid(h.src), self.vid(h.tgt))
        if not self.cell_exists(b):
            raise FrameMismatch(f"no identity cell on {h}")
        return self._cell(b)

    def compose(self, kappa: Cell, thetas: Sequence[Cell]) -> Cell:
        outer = paste_boundary(self, kappa.boundary, [t.boundary for t in thetas])
        if not (self.has_cell(kappa) and all(self.has_cell(t) for t in thetas)):
            raise UnknownCell("foreign cell in composition")
        if not self.cell_exists(outer):
            raise FrameMismatch(f"thin cell relation not closed at {outer}")
        return self._cell(outer)

    def compose_nullary(self, kappa: Cell, u: VMor) -> Cell:
        outer = nullary_paste_boundary(self, kappa.boundary, u)
        if not self.has_cell(kappa):
            raise UnknownCell("foreign cell in composition")
        if not self.cell_exists(outer):
            raise FrameMismatch(f"thin cell relation not closed at {outer}")
        return self._cell(outer)


@dataclass
class Violation:
    law: str
    site: str
    detail: str

    def __repr__(self):
        return f"[{self.law}] {self.site}: {self.detail}"


@dataclass
class Report:
    violations: list[Violation] = field(default_factory=list)
    cases: int = 0
    truncated: bool = False
    bounds: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, law: str, site: str, detail: str):
        self.violations.append(Violation(law, site, detail))

    def merge(self, other: "Report"):
        self.violations.extend(other.violations)
        self.cases += other.cases
        self.truncated = self.truncated or other.truncated

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.violations)} violation(s)"
        extra = " (truncated)" if self.truncated else ""
        lines = [f"{status}; {self.cases} case(s) checked{extra}"]
        lines += [f"  {v!r}" for v in self.violations[:20]]
        if len(self.violations) > 20:
            lines.append(f"  ... {len(self.violations) - 20} more")
        return "\n".join(lines)


class Bounds:
    """Enumeration bounds shared by validators and law checks."""

    FIELDS = ("path_len", "nesting", "universe", "max_apex", "cap")

    def __init__(self, path_len=3, nesting=2, universe=3, max_apex=2, cap=20000):
        if min(path_len, nesting, universe, max_apex, cap) < 1:
            raise ValueError("all bounds must be >= 1")
        self.path_len = path_len
        self.nesting = nesting
        self.universe = universe
        self.max_apex = max_apex
        self.cap = cap

    @classmethod
    def parse(cls, text: str, base: "Bounds | None" = None) -> "Bounds":
        """Parse ``k=v,...`` overrides, e.g. ``path_len=2,universe=2``."""
        vals = {f: getattr(base or cls(), f) for f in cls.FIELDS}
        if text:
            for piece in text.split(","):
                if not piece.strip():
                    continue
                k, _, v = piece.partition("=")
                k = k.strip()
                if k not in cls.FIELDS:
                    raise ValueError(f"unknown bound {k!r} (expected one of {cls.FIELDS})")
                vals[k] = int(v)
        return cls(**vals)

    def asdict(self) -> dict:
        return {f: getattr(self, f) for f in self.FIELDS}

    def __repr__(self):
        return "Bounds(" + ", ".join(f"{f}={getattr(self, f)}" for f in self.FIELDS) + ")"


def capped(it: Iterable, bounds: Bounds, report: Report | None = None) -> list:
    """Deterministic prefix of an enumerator; records truncation."""
    out = list(itertools.islice(it, bounds.cap + 1))
    if len(out) > bounds.cap:
        out = out[: bounds.cap]
        if report is not None:
            report.truncated = True
    return out


def validate_vdc(vdc: VDC, bounds: Bounds | None = None) -> Report:
    """Bounded exhaustive check of the unit and associativity axioms of the
    multicell algebra, frame preservation included.  Violations (including
    compositions that raise) are reported as data, never as exceptions."""
    bounds = bounds or Bounds()
    rep = Report(bounds=bounds.asdict())

    def run(law, site, thunk):
        try:
            return thunk()
        except (FrameMismatch, UnknownCell, DanglingRef, KeyError) as e:
            rep.add(law, site, f"raised {type(e).__name__}: {e}")
            return None

    objs = capped(vdc.objects(), bounds, rep)

    # vertical category: identities and associativity
    vms = capped(vdc.all_vmors(), bounds, rep)
    for u in vms:
        rep.cases += 1
        if vdc.vcomp(vdc.vid(u.dom), u) != u:
            rep.add("v-unit", repr(u), "id;u != u")
        if vdc.vcomp(u, vdc.vid(u.cod)) != u:
            rep.add("v-unit", repr(u), "u;id != u")
    by_dom: dict[Obj, list[VMor]] = {}
    for u in vms:
        by_dom.setdefault(u.dom, []).append(u)
    for u in vms:
        for v in by_dom.get(u.cod, ()):
            for w in by_dom.get(v.cod, ()):
                rep.cases += 1
                if vdc.vcomp(vdc.vcomp(u, v), w) != vdc.vcomp(u, vdc.vcomp(v, w)):
                    rep.add("v-assoc", f"{u};{v};{w}", "associativity fails")

    # identity cells have identity frames
    hms = capped(vdc.all_hmors(), bounds, rep)
    for h in hms:
        rep.cases += 1
        c = vdc.cid(h)
        b = c.boundary
        if b.top != (h,) or b.bottom != h or b.left != vdc.vid(h.src) or b.right != vdc.vid(h.tgt):
            rep.add("cid-frame", repr(h), f"bad identity frame {b}")

    # multicell laws over enumerated boundaries
    cells = []
    for b in capped(vdc.boundaries(bounds.path_len), bounds, rep):
        cells.extend(capped(vdc.cells(b), bounds, rep))

    for th in cells:
        rep.cases += 1
        b = th.boundary
        # left unit: id_bottom o (th) = th
        got = run("unit-left", repr(th), lambda: vdc.compose(vdc.cid(b.bottom), [th]))
        if got is not None and got != th:
            rep.add("unit-left", repr(th), f"id o (th) = {got}")
        # right unit
        if b.arity == 0:
            got = run("unit-right", repr(th), lambda: vdc.compose_nullary(th, vdc.vid(b.top_origin)))
        else:
            got = run("unit-right", repr(th), lambda: vdc.compose(th, [vdc.cid(h) for h in b.top]))
        if got is not None and got != th:
            rep.add("unit-right", repr(th), f"th o ids = {got}")

    # frame preservation + associativity on bounded pastings
    by_bottom: dict[HMor, list[Cell]] = {}
    for c in cells:
        by_bottom.setdefault(c.boundary.bottom, []).append(c)

    def arg_tuples(kappa: Cell) -> Iterator[tuple[Cell, ...]]:
        """Composable argument strings for kappa, drawn from ``cells``."""
        kb = kappa.boundary
        if kb.arity == 0:
            return
        pools = [by_bottom.get(h, []) for h in kb.top]
        if any(not p for p in pools):
            return
        for combo in itertools.product(*pools):
            if all(a.boundary.right == b.boundary.left for a, b in zip(combo, combo[1:])):
                yield combo

    pastings = 0
    for kappa in cells:
        if pastings > bounds.cap:
            rep.truncated = True
            break
        kb = kappa.boundary
        if kb.arity == 0:
            for u in vms:
                if u.cod != kb.top_origin:
                    continue
                pastings += 1
                rep.cases += 1
                got = vdc.compose_nullary(kappa, u)
                want = nullary_paste_boundary(vdc, kb, u)
                if got.boundary != want:
                    rep.add("frame", f"{kappa} o ({u})", f"boundary {got.boundary} != {want}")
                # nullary associativity: (kappa o u) o w = kappa o (w;u)
                for w in vms:
                    if w.cod != u.dom:
                        continue
                    rep.cases += 1
                    lhs = vdc.compose_nullary(got, w)
                    rhs = vdc.compose_nullary(kappa, vdc.vcomp(w, u))
                    if lhs != rhs:
                        rep.add("assoc-nullary", f"{kappa} o {u} o {w}", f"{lhs} != {rhs}")
            continue
        for combo in arg_tuples(kappa):
            pastings += 1
            if pastings > bounds.cap:
                rep.truncated = True
                break
            rep.cases += 1
            got = vdc.compose(kappa, list(combo))
            want = paste_boundary(vdc, kb, [c.boundary for c in combo])
            if got.boundary != want:
                rep.add("frame", f"{kappa} o {combo}", f"boundary {got.boundary} != {want}")
            if bounds.nesting < 2:
                continue
            # one more layer: substitute into each argument
            inner_opts = []
            for th in combo:
                tb = th.boundary
                if tb.arity == 0:
                    opts = [("v", u) for u in vms if u.cod == tb.top_origin]
                else:
                    opts = [("c", c) for c in arg_tuples(th)]
                    opts.append(("id", tuple(vdc.cid(h) for h in tb.top)))
                inner_opts.append(opts[:4])  # keep the fan-out small
            for choice in itertools.product(*inner_opts):
                # null slots force agreement of the substituted verticals
                ok = True
                parts: list = []
                for tag, val in choice:
                    if tag == "v":
                        parts.append(val)
                    else:
                        parts.append(list(val))
                # boundary chaining across slots
                chain: list[VMor] = []
                for p in parts:
                    if isinstance(p, VMor):
                        chain.append(p)
                        chain.append(p)
                    elif p:
                        chain.append(p[0].boundary.left)
                        chain.append(p[-1].boundary.right)
                for x, y in zip(chain[1::2], chain[2::2]):
                    if x != y:
                        ok = False
                        break
                if not ok:
                    continue
                pastings += 1
                rep.cases += 1
                # lhs: compose argument-wise first
                inner_cells = []
                for th, p in zip(combo, parts):
                    if isinstance(p, VMor):
                        inner_cells.append(vdc.compose_nullary(th, p))
                    else:
                        inner_cells.append(vdc.compose(th, p))
                lhs = vdc.compose(kappa, inner_cells)
                # rhs: compose outer first, then flatten arguments
                flat: list = []
                for p in parts:
                    if not isinstance(p, VMor):
                        flat.extend(p)
                if flat:
                    rhs = vdc.compose(got, flat)
                else:
                    vsub = parts[0]
                    assert isinstance(vsub, VMor)
                    rhs = vdc.compose_nullary(got, vsub)
                if lhs != rhs:
                    rep.add("assoc", f"{kappa} over {combo}", f"{lhs} != {rhs}")
            if pastings > bounds.cap:
                rep.truncated = True
                break
    return rep
