"""Symbolic subsets of the complex plane with explicit boundary semantics.

Every region has a total membership predicate ``contains(z)`` and an
``expr()`` string that :func:`parse_region` reads back.  The expression
grammar is::

    R := annulus(r,s) | disk(cx,cy,r) | points(z1;z2;...) | halfplane(nx,ny,c)
       | all | empty | !R | R&R | R|R | (R)

with precedence ``!`` > ``&`` > ``|``.  Shape constructors accept an optional
trailing ``open`` argument; the default is closed.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryAmbiguity, DomainError, RegionSyntaxError

__all__ = [
    "Region",
    "Annulus",
    "Disk",
    "PointSet",
    "HalfPlane",
    "Complement",
    "Union",
    "Intersection",
    "All",
    "Empty",
    "parse_region",
]


def _fmt(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _fmt_complex(z):
    z = complex(z)
    if z.imag == 0:
        return _fmt(z.real)
    im = repr(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{_fmt(z.real)}{im}j"


class Region:
    """Base class.  Subclasses implement ``contains`` and ``expr``."""

    def contains(self, z) -> bool:
        raise NotImplementedError

    def __call__(self, z):
        return self.contains(z)

    def expr(self) -> str:
        raise NotImplementedError

    def key(self):
        """Canonical ordering key (the expression string)."""
        return self.expr()

    def boundary_distance(self, z) -> float:
        """Distance from ``z`` to the region boundary (an upper bound for composites)."""
        return math.inf

    def ambiguous(self, z) -> bool:
        """True when membership of ``z`` is numerically undecidable."""
        return False

    def near_boundary(self, z, tol) -> bool:
        """True when a perturbation of size ``tol`` could change membership of ``z``."""
        return self.boundary_distance(z) <= tol

    def complement(self):
        return Complement(self)

    def __invert__(self):
        return self.complement()

    def __and__(self, other):
        return Intersection((self, other))

    def __or__(self, other):
        return Union((self, other))

    def __repr__(self):
        return f"Region({self.expr()!r})"

    def __eq__(self, other):
        return isinstance(other, Region) and self.expr() == other.expr()

    def __hash__(self):
        return hash(self.expr())


def _suffix(closed):
    return "" if closed else ",open"


@dataclass(frozen=True, eq=False, repr=False)
class Annulus(Region):
    """``{r <= |z| <= s}`` (strict inequalities when ``closed`` is False)."""

    r: float
    s: float = math.inf
    closed: bool = True

    def __post_init__(self):
        if not (self.r >= 0 and self.s >= 0):
            raise DomainError("annulus radii must be nonnegative")
        if self.r > self.s:
            raise DomainError(f"annulus requires r <= s, got r={self.r}, s={self.s}")

    def contains(self, z):
        a = abs(z)
        if self.closed:
            return self.r <= a <= self.s
        return self.r < a < self.s

    def boundary_distance(self, z):
        a = abs(z)
        return min(abs(a - self.r), abs(a - self.s))

    def expr(self):
        return f"annulus({_fmt(self.r)},{_fmt(self.s)}{_suffix(self.closed)})"


@dataclass(frozen=True, eq=False, repr=False)
class Disk(Region):
    center: complex = 0j
    radius: float = 1.0
    closed: bool = True

    def __post_init__(self):
        if not self.radius >= 0:
            raise DomainError("disk radius must be nonnegative")
        object.__setattr__(self, "center", complex(self.center))

    def contains(self, z):
        d = abs(z - self.center)
        return d <= self.radius if self.closed else d < self.radius

    def boundary_distance(self, z):
        return abs(abs(z - self.center) - self.radius)

    def expr(self):
        c = self.center
        return f"disk({_fmt(c.real)},{_fmt(c.imag)},{_fmt(self.radius)}{_suffix(self.closed)})"


@dataclass(frozen=True, eq=False, repr=False)
class PointSet(Region):
    """Finite set of points, each capturing a closed disk of radius ``match_tol``.

    A point at distance strictly between ``match_tol`` and ``2*match_tol``
    from the nearest member is reported as ambiguous.
    """

    points: tuple = ()
    match_tol: float = 1e-7

    def __post_init__(self):
        pts = tuple(complex(p) for p in np.atleast_1d(np.asarray(self.points, dtype=complex)))
        object.__setattr__(self, "points", pts)
        if not self.match_tol >= 0:
            raise DomainError("match_tol must be nonnegative")

    def _nearest(self, z):
        if not self.points:
            return math.inf
        return min(abs(z - p) for p in self.points)

    def contains(self, z):
        return self._nearest(z) <= self.match_tol

    def ambiguous(self, z):
        d = self._nearest(z)
        return self.match_tol < d < 2 * self.match_tol

    def boundary_distance(self, z):
        return abs(self._nearest(z) - self.match_tol)

    def near_boundary(self, z, tol):
        # capture radius is the tolerance scale, so cap the band at half of it
        return self.ambiguous(z) or self.boundary_distance(z) <= min(tol, self.match_tol / 2)

    def expr(self):
        body = ";".join(_fmt_complex(p) for p in self.points)
        return f"points({body})"


@dataclass(frozen=True, eq=False, repr=False)
class HalfPlane(Region):
    """``{z : Re(z * conj(normal)) <= offset}``."""

    normal: complex = 1.0
    offset: float = 0.0
    closed: bool = True

    def __post_init__(self):
        n = complex(self.normal)
        if n == 0:
            raise DomainError("half-plane normal must be nonzero")
        object.__setattr__(self, "normal", n)

    def _value(self, z):
        return (complex(z) * self.normal.conjugate()).real

    def contains(self, z):
        v = self._value(z)
        return v <= self.offset if self.closed else v < self.offset

    def boundary_distance(self, z):
        return abs(self._value(z) - self.offset) / abs(self.normal)

    def expr(self):
        n = self.normal
        return (
            f"halfplane({_fmt(n.real)},{_fmt(n.imag)},{_fmt(self.offset)}"
            f"{_suffix(self.closed)})"
        )


@dataclass(frozen=True, eq=False, repr=False)
class Complement(Region):
    inner: Region

    def contains(self, z):
        return not self.inner.contains(z)

    def ambiguous(self, z):
        return self.inner.ambiguous(z)

    def boundary_distance(self, z):
        return self.inner.boundary_distance(z)

    def near_boundary(self, z, tol):
        return self.inner.near_boundary(z, tol)

    def complement(self):
        return self.inner

    def expr(self):
        return f"!({self.inner.expr()})"


@dataclass(frozen=True, eq=False, repr=False)
class Union(Region):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, z):
        return any(p.contains(z) for p in self.parts)

    def ambiguous(self, z):
        return any(p.ambiguous(z) for p in self.parts)

    def boundary_distance(self, z):
        return min((p.boundary_distance(z) for p in self.parts), default=math.inf)

    def near_boundary(self, z, tol):
        return any(p.near_boundary(z, tol) for p in self.parts)

    def expr(self):
        if not self.parts:
            return "empty"
        return "(" + "|".join(p.expr() for p in self.parts) + ")"


@dataclass(frozen=True, eq=False, repr=False)
class Intersection(Region):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, z):
        return all(p.contains(z) for p in self.parts)

    def ambiguous(self, z):
        return any(p.ambiguous(z) for p in self.parts)

    def boundary_distance(self, z):
        return min((p.boundary_distance(z) for p in self.parts), default=math.inf)

    def near_boundary(self, z, tol):
        return any(p.near_boundary(z, tol) for p in self.parts)

    def expr(self):
        if not self.parts:
            return "all"
        return "(" + "&".join(p.expr() for p in self.parts) + ")"


class _AllRegion(Region):
    def contains(self, z):
        return True

    def complement(self):
        return Empty

    def expr(self):
        return "all"


class _EmptyRegion(Region):
    def contains(self, z):
        return False

    def complement(self):
        return All

    def expr(self):
        return "empty"


All = _AllRegion()
Empty = _EmptyRegion()


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_]+)|(?P<op>[!&|(),;])|(?P<num>[^\s!&|(),;]+))")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise RegionSyntaxError(text, pos, "unexpected character")
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def _to_float(tok, text):
    kind, value, pos = tok
    try:
        return float(value)
    except ValueError:
        raise RegionSyntaxError(text, pos, f"expected a number, got {value!r}") from None


def _to_complex(raw, pos, text):
    s = raw.replace(" ", "")
    if s.endswith("i") and not s.endswith("inf"):
        s = s[:-1] + "j"
    if s in ("j", "+j", "-j"):
        s = s.replace("j", "1j")
    try:
        return complex(s)
    except ValueError:
        raise RegionSyntaxError(text, pos, f"expected a complex number, got {raw!r}") from None


class _Parser:
    _arity = {"annulus": 2, "disk": 3, "halfplane": 3}

    def __init__(self, text, match_tol):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.match_tol = match_tol

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise RegionSyntaxError(self.text, tok[2], f"expected {value!r}")
        return tok

    def parse(self):
        node = self.union()
        tok = self.peek()
        if tok[0] != "end":
            raise RegionSyntaxError(self.text, tok[2], f"unexpected {tok[1]!r}")
        return node

    def union(self):
        parts = [self.inter()]
        while self.peek()[1] == "|":
            self.take()
            parts.append(self.inter())
        return parts[0] if len(parts) == 1 else Union(parts)

    def inter(self):
        parts = [self.unary()]
        while self.peek()[1] == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else Intersection(parts)

    def unary(self):
        tok = self.peek()
        if tok[1] == "!":
            self.take()
            return Complement(self.unary())
        if tok[1] == "(":
            self.take()
            node = self.union()
            self.expect(")")
            return node
        if tok[0] == "name":
            return self.atom()
        raise RegionSyntaxError(self.text, tok[2], "expected a region")

    def atom(self):
        kind, name, pos = self.take()
        name = name.lower()
        if name == "all":
            return All
        if name == "empty":
            return Empty
        if name == "points":
            return self.points(pos)
        if name not in self._arity:
            raise RegionSyntaxError(self.text, pos, f"unknown region {name!r}")
        self.expect("(")
        args = []
        closed = True
        while True:
            tok = self.take()
            if tok[0] == "name" and tok[1].lower() in ("open", "closed", "inf"):
                if tok[1].lower() == "inf":
                    args.append(math.inf)
                else:
                    closed = tok[1].lower() == "closed"
            elif tok[0] == "num":
                args.append(_to_float(tok, self.text))
            else:
                raise RegionSyntaxError(self.text, tok[2], "expected an argument")
            sep = self.take()
            if sep[1] == ")":
                break
            if sep[1] != ",":
                raise RegionSyntaxError(self.text, sep[2], "expected ',' or ')'")
        if len(args) != self._arity[name]:
            raise RegionSyntaxError(
                self.text, pos, f"{name} takes {self._arity[name]} numeric arguments"
            )
        try:
            if name == "annulus":
                return Annulus(args[0], args[1], closed)
            if name == "disk":
                return Disk(complex(args[0], args[1]), args[2], closed)
            return HalfPlane(complex(args[0], args[1]), args[2], closed)
        except DomainError as exc:
            raise RegionSyntaxError(self.text, pos, str(exc)) from None

    def points(self, pos):
        open_tok = self.expect("(")
        start = open_tok[2] + 1
        end = self.text.find(")", start)
        if end < 0:
            raise RegionSyntaxError(self.text, len(self.text), "unterminated points(...)")
        body = self.text[start:end]
        pts = []
        offset = start
        for chunk in body.split(";"):
            if chunk.strip():
                pts.append(_to_complex(chunk, offset, self.text))
            offset += len(chunk) + 1
        # skip tokens consumed by the raw slice
        while self.peek()[2] < end:
            self.take()
        self.expect(")")
        return PointSet(tuple(pts), self.match_tol)


def parse_region(text, *, match_tol=1e-7):
    """Parse a region expression.

    Raises
    ------
    RegionSyntaxError
        With the offending offset and a caret diagram in the message.
    """
    return _Parser(text, match_tol).parse()


def region_ambiguous(region, z):
    """Raise :class:`BoundaryAmbiguity` when ``z`` cannot be classified."""
    if region.ambiguous(z):
        raise BoundaryAmbiguity(f"point {z!r} is ambiguous for region {region.expr()}")
