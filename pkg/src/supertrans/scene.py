"""Scene files: a small declarative language for domains, morphisms,
submanifolds, grids and point lists, plus a canonical pretty-printer.

Example::

    superdomain X dim 2|2 coords x1, x2 ; xi1, xi2 box x1 in [-2, 2], x2 in [-2, 2]
    superdomain Y dim 2|2 coords y1, y2 ; th1, th2
    morphism psi : X -> Y {
      y1 = x1
      y2 = x2 + x1^2
      th1 = xi1
      th2 = x1*xi1 + xi2
    }
    submanifold W in Y {
      chart {
        map { u1 = y1 ; u2 = y2 ; v1 = th1 ; v2 = th2 }
        inverse { y1 = u1 ; y2 = u2 ; th1 = v1 ; th2 = v2 }
        keep_even = 1 ; keep_odd = 1
      }
    }
    grid G on X range [-2, 2] step 1/2
    points P = [(1, -1), (0, 0)]

Statements are separated by newlines or ``;``.  Chart coordinates are the
left-hand sides of the ``map`` block; each gets the parity of its
right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import grassmann, parsing
from .charts import AdaptedChart, Submanifold
from .errors import InputError, ParityError, SceneError
from .geometry import SuperDomain, SuperMorphism, morphism_from_mapping
from .grassmann import Parity
from .parsing import ExprParser, Token, error_at
from .transversality import Grid

KEYWORDS = frozenset(
    {
        "superdomain", "morphism", "submanifold", "grid", "points", "dim", "coords", "box",
        "in", "chart", "map", "inverse", "keep_even", "keep_odd", "on", "range", "step",
    }
)  # fmt: skip


@dataclass
class Scene:
    domains: dict[str, SuperDomain] = field(default_factory=dict)
    morphisms: dict[str, SuperMorphism] = field(default_factory=dict)
    submanifolds: dict[str, Submanifold] = field(default_factory=dict)
    grids: dict[str, tuple[str, Grid]] = field(default_factory=dict)  # name -> (domain, grid)
    points: dict[str, tuple[tuple[Fraction, ...], ...]] = field(default_factory=dict)
    order: list[tuple[str, str]] = field(default_factory=list, compare=False)

    def names(self) -> set[str]:
        return {name for _, name in self.order}

    def lookup(self, kind: str, name: str):
        table = {
            "superdomain": self.domains,
            "morphism": self.morphisms,
            "submanifold": self.submanifolds,
            "grid": self.grids,
            "points": self.points,
        }[kind]
        if name not in table:
            known = ", ".join(sorted(table)) or "none"
            raise SceneError(f"no {kind} named {name!r} (known: {known})")
        return table[name]


def _rename(exc: InputError, prefix: str) -> InputError:
    if isinstance(exc, parsing.ParseError):
        return exc
    return type(exc)(f"{prefix}: {exc}")


class _SceneParser:
    def __init__(self, text: str):
        self.tokens = parsing.tokenize(text)
        self.i = 0
        self.scene = Scene()

    # token helpers
    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("op", "name") and tok.text == text

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise error_at(tok, f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def skip_separators(self) -> None:
        while self.peek().kind == "nl" or self.at(";"):
            self.advance()

    def skip_newlines(self) -> None:
        while self.peek().kind == "nl":
            self.advance()

    def name(self, what: str = "name") -> Token:
        tok = self.peek()
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise error_at(tok, f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def integer(self) -> int:
        tok = self.advance()
        if tok.kind != "number" or not tok.text.isdigit():
            raise error_at(tok, "expected a non-negative integer")
        return int(tok.text)

    def number(self) -> Fraction:
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        tok = self.advance()
        if tok.kind != "number":
            raise error_at(tok, f"expected a number, found {tok.text or 'end of input'!r}")
        return sign * parsing.parse_number(tok.text)

    def interval(self) -> tuple[Fraction, Fraction]:
        self.expect("[")
        lo = self.number()
        self.expect(",")
        hi = self.number()
        self.expect("]")
        return lo, hi

    def end_statement(self) -> None:
        tok = self.peek()
        if tok.kind in ("nl", "eof") or self.at(";") or self.at("}"):
            return
        raise error_at(tok, f"unexpected {tok.text!r} after declaration")

    def declare(self, kind: str, tok: Token) -> None:
        if tok.text in self.scene.names():
            raise error_at(tok, f"{tok.text!r} is declared twice")
        self.scene.order.append((kind, tok.text))

    # grammar
    def parse(self) -> Scene:
        self.skip_separators()
        while self.peek().kind != "eof":
            tok = self.peek()
            handler = {
                "superdomain": self.superdomain,
                "morphism": self.morphism,
                "submanifold": self.submanifold,
                "grid": self.grid,
                "points": self.point_list,
            }.get(tok.text if tok.kind == "name" else "")
            if handler is None:
                raise error_at(tok, f"expected a declaration, found {tok.text!r}")
            self.advance()
            handler()
            self.end_statement()
            self.skip_separators()
        return self.scene

    def name_list(self) -> list[str]:
        names = []
        if self.peek().kind == "name" and self.peek().text not in KEYWORDS:
            names.append(self.name("coordinate").text)
            while self.at(","):
                self.advance()
                names.append(self.name("coordinate").text)
        return names

    def box_clause(self, coords: tuple[str, ...], owner: str, where: Token):
        self.expect("box")
        given = {}
        while True:
            tok = self.name("coordinate")
            if tok.text not in coords:
                raise error_at(tok, f"{tok.text!r} is not an even coordinate of {owner}")
            if tok.text in given:
                raise error_at(tok, f"interval for {tok.text!r} given twice")
            self.expect("in")
            given[tok.text] = self.interval()
            if not self.at(","):
                break
            self.advance()
        missing = [c for c in coords if c not in given]
        if missing:
            raise error_at(where, f"{owner}: box has no interval for {', '.join(missing)}")
        return tuple(given[c] for c in coords)

    def superdomain(self) -> None:
        tok = self.name("domain name")
        self.expect("dim")
        m = self.integer()
        self.expect("|")
        n = self.integer()
        self.expect("coords")
        evens = self.name_list()
        self.expect(";")
        odds = self.name_list()
        if (len(evens), len(odds)) != (m, n):
            raise error_at(tok, f"superdomain {tok.text}: dim {m}|{n} but {len(evens)}|{len(odds)} coordinates")
        box = self.box_clause(tuple(evens), f"superdomain {tok.text}", tok) if self.at("box") else None
        try:
            dom = SuperDomain(tok.text, tuple(evens), tuple(odds), box)
        except ValueError as exc:
            raise error_at(tok, str(exc)) from None
        self.declare("superdomain", tok)
        self.scene.domains[tok.text] = dom

    def domain_ref(self) -> SuperDomain:
        tok = self.name("domain name")
        if tok.text not in self.scene.domains:
            raise error_at(tok, f"unknown superdomain {tok.text!r}")
        return self.scene.domains[tok.text]

    def assignments(self) -> list[tuple[Token, tuple]]:
        """``{ lhs = expr (sep lhs = expr)* }`` with newline or ``;`` separators."""
        self.skip_newlines()
        self.expect("{")
        out = []
        self.skip_separators()
        while not self.at("}"):
            lhs = self.name("coordinate")
            self.expect("=")
            p = ExprParser(self.tokens, self.i)
            node = p.parse()
            self.i = p.i
            out.append((lhs, node))
            tok = self.peek()
            if not (tok.kind == "nl" or self.at(";") or self.at("}")):
                raise error_at(tok, f"unexpected {tok.text!r} in assignment block")
            self.skip_separators()
        self.expect("}")
        return out

    def build_morphism(self, what: str, src: SuperDomain, dst: SuperDomain, body, name: str = "") -> SuperMorphism:
        images = {}
        for lhs, node in body:
            if lhs.text in images:
                raise error_at(lhs, f"{what}: {lhs.text!r} assigned twice")
            if lhs.text not in dst.even + dst.odd:
                raise error_at(lhs, f"{what}: {lhs.text!r} is not a coordinate of {dst.name}")
            try:
                images[lhs.text] = grassmann.from_ast(node, src.context)
            except InputError as exc:
                raise _rename(exc, what) from None
        try:
            return morphism_from_mapping(src, dst, images, name)
        except InputError as exc:
            raise _rename(exc, what) from None

    def morphism(self) -> None:
        tok = self.name("morphism name")
        self.expect(":")
        src = self.domain_ref()
        self.expect("->")
        dst = self.domain_ref()
        body = self.assignments()
        mor = self.build_morphism(f"morphism {tok.text}", src, dst, body, tok.text)
        self.declare("morphism", tok)
        self.scene.morphisms[tok.text] = mor

    def chart(self, Y: SuperDomain, owner: str, index: int) -> AdaptedChart:
        start = self.expect("chart")
        what = f"submanifold {owner}, chart {index}"
        self.skip_newlines()
        self.expect("{")
        self.skip_separators()
        self.expect("map")
        body = self.assignments()
        evens, odds = [], []
        for lhs, node in body:
            try:
                value = grassmann.from_ast(node, Y.context)
            except InputError as exc:
                raise _rename(exc, what) from None
            par = grassmann.parity(value)
            if par is Parity.EVEN and not value.is_zero():
                evens.append(lhs.text)
            elif par is Parity.ODD:
                odds.append(lhs.text)
            else:
                raise ParityError(f"{what}: chart coordinate {lhs.text} has {par.value.lower()} image {value}")
        if (len(evens), len(odds)) != (len(Y.even), len(Y.odd)):
            raise SceneError(
                f"{what}: chart map has {len(evens)}|{len(odds)} coordinates, ambient is {Y.dim}"
            )
        try:
            C = SuperDomain(f"{owner}.chart{index}", tuple(evens), tuple(odds))
        except ValueError as exc:
            raise error_at(start, f"{what}: {exc}") from None
        phi = self.build_morphism(f"{what} map", Y, C, body)
        self.skip_separators()
        inverse = None
        if self.at("inverse"):
            self.advance()
            inverse = self.build_morphism(f"{what} inverse", C, Y, self.assignments())
            self.skip_separators()
        keep = {}
        box = None
        while not self.at("}"):
            tok = self.peek()
            if self.at("keep_even") or self.at("keep_odd"):
                self.advance()
                self.expect("=")
                keep[tok.text] = self.integer()
            elif self.at("box"):
                box = self.box_clause(Y.even, what, tok)
            else:
                raise error_at(tok, f"unexpected {tok.text or 'end of input'!r} in chart")
            self.skip_separators()
        self.expect("}")
        if set(keep) != {"keep_even", "keep_odd"}:
            raise error_at(start, f"{what}: needs both keep_even and keep_odd")
        try:
            return AdaptedChart(phi, keep["keep_even"], keep["keep_odd"], inverse, box)
        except InputError as exc:
            raise _rename(exc, what) from None

    def submanifold(self) -> None:
        tok = self.name("submanifold name")
        self.expect("in")
        Y = self.domain_ref()
        self.skip_newlines()
        self.expect("{")
        self.skip_separators()
        charts = []
        while not self.at("}"):
            charts.append(self.chart(Y, tok.text, len(charts)))
            self.skip_separators()
        self.expect("}")
        try:
            W = Submanifold(Y, tuple(charts), tok.text)
        except InputError as exc:
            raise _rename(exc, f"submanifold {tok.text}") from None
        self.declare("submanifold", tok)
        self.scene.submanifolds[tok.text] = W

    def grid(self) -> None:
        tok = self.name("grid name")
        self.expect("on")
        X = self.domain_ref()
        self.expect("range")
        ranges = [self.interval()]
        while self.at(","):
            self.advance()
            ranges.append(self.interval())
        self.expect("step")
        step = self.number()
        if len(ranges) == 1:
            ranges = ranges * len(X.even)
        if len(ranges) != len(X.even):
            raise error_at(tok, f"grid {tok.text}: {len(ranges)} ranges for {len(X.even)} even coordinates")
        try:
            g = Grid(tuple(ranges), step)
        except ValueError as exc:
            raise error_at(tok, f"grid {tok.text}: {exc}") from None
        self.declare("grid", tok)
        self.scene.grids[tok.text] = (X.name, g)

    def point(self) -> tuple[Fraction, ...]:
        self.expect("(")
        coords = []
        if not self.at(")"):
            coords.append(self.number())
            while self.at(","):
                self.advance()
                coords.append(self.number())
        self.expect(")")
        return tuple(coords)

    def point_list(self) -> None:
        tok = self.name("point list name")
        self.expect("=")
        self.expect("[")
        pts = []
        if not self.at("]"):
            pts.append(self.point())
            while self.at(","):
                self.advance()
                self.skip_newlines()
                pts.append(self.point())
        self.expect("]")
        if len({len(p) for p in pts}) > 1:
            raise error_at(tok, f"points {tok.text}: points have different lengths")
        self.declare("points", tok)
        self.scene.points[tok.text] = tuple(pts)


def parse_scene(text: str) -> Scene:
    """Parse and fully validate a scene."""
    return _SceneParser(text).parse()


def parse_point(text: str) -> tuple[Fraction, ...]:
    """A single coordinate tuple such as ``(1, -1/2)``."""
    p = _SceneParser(text)
    pt = p.point()
    p.skip_newlines()
    if p.peek().kind != "eof":
        raise error_at(p.peek(), f"unexpected {p.peek().text!r} after point")
    return pt


# printing ---------------------------------------------------------------


def _num(x: Fraction) -> str:
    return str(x)


def _box(names, box) -> str:
    return ", ".join(f"{v} in [{_num(lo)}, {_num(hi)}]" for v, (lo, hi) in zip(names, box))


def _assignments(mor: SuperMorphism, indent: str) -> list[str]:
    names = mor.target.even + mor.target.odd
    return [f"{indent}{n} = {img}" for n, img in zip(names, mor.images)]


def format_domain(d: SuperDomain) -> str:
    line = f"superdomain {d.name} dim {d.dim} coords {', '.join(d.even)} ; {', '.join(d.odd)}".rstrip()
    if d.box is not None:
        line += f" box {_box(d.even, d.box)}"
    return line


def format_morphism(name: str, m: SuperMorphism) -> str:
    lines = [f"morphism {name} : {m.source.name} -> {m.target.name} {{"]
    lines += _assignments(m, "  ")
    lines.append("}")
    return "\n".join(lines)


def format_submanifold(name: str, W: Submanifold) -> str:
    lines = [f"submanifold {name} in {W.ambient.name} {{"]
    for c in W.charts:
        lines.append("  chart {")
        lines.append("    map {")
        lines += _assignments(c.phi, "      ")
        lines.append("    }")
        if c.inverse is not None:
            lines.append("    inverse {")
            lines += _assignments(c.inverse, "      ")
            lines.append("    }")
        lines.append(f"    keep_even = {c.keep_even} ; keep_odd = {c.keep_odd}")
        if c.box is not None:
            lines.append(f"    box {_box(W.ambient.even, c.box)}")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines)


def format_grid(name: str, domain: str, g: Grid) -> str:
    if len(set(g.intervals)) == 1:
        ranges = [g.intervals[0]]
    else:
        ranges = list(g.intervals)
    body = ", ".join(f"[{_num(lo)}, {_num(hi)}]" for lo, hi in ranges)
    return f"grid {name} on {domain} range {body} step {_num(g.step)}"


def format_points(name: str, pts) -> str:
    body = ", ".join("(" + ", ".join(_num(x) for x in p) + ")" for p in pts)
    return f"points {name} = [{body}]"


def format_scene(scene: Scene) -> str:
    """Canonical text; ``parse_scene(format_scene(s)) == s``."""
    blocks = []
    for kind, name in scene.order:
        if kind == "superdomain":
            blocks.append(format_domain(scene.domains[name]))
        elif kind == "morphism":
            blocks.append(format_morphism(name, scene.morphisms[name]))
        elif kind == "submanifold":
            blocks.append(format_submanifold(name, scene.submanifolds[name]))
        elif kind == "grid":
            blocks.append(format_grid(name, *scene.grids[name]))
        else:
            blocks.append(format_points(name, scene.points[name]))
    return "\n".join(blocks) + "\n"
