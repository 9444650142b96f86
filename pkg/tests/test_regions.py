import math

import pytest

from hslab.errors import BoundaryAmbiguity, DomainError, RegionSyntaxError
from hslab.regions import (
    All,
    Annulus,
    Disk,
    Empty,
    HalfPlane,
    PointSet,
    parse_region,
    region_ambiguous,
)


def test_closed_annulus_includes_both_radii():
    a = Annulus(1.0, 2.0)
    assert a.contains(1.0) and a.contains(2.0j) and a.contains(1.5)
    assert not a.contains(0.5) and not a.contains(2.5)


def test_open_annulus_excludes_radii():
    a = Annulus(1.0, 2.0, closed=False)
    assert not a.contains(1.0) and not a.contains(-2.0)
    assert a.contains(1.5)


def test_annulus_rejects_bad_radii():
    with pytest.raises(DomainError):
        Annulus(2.0, 1.0)
    with pytest.raises(DomainError):
        Annulus(-1.0, 1.0)


def test_unbounded_annulus():
    a = Annulus(1.0)
    assert a.contains(1e300) and not a.contains(0.0)


def test_disk_and_halfplane():
    assert Disk(1j, 0.5).contains(1.2j)
    assert not Disk(0, 1, closed=False).contains(1.0)
    h = HalfPlane(1.0, 0.0)
    assert h.contains(-3 + 5j) and h.contains(0.0) and not h.contains(0.1)
    assert not HalfPlane(1.0, 0.0, closed=False).contains(0.0)
    # normal i: Im z <= 1
    assert HalfPlane(1j, 1.0).contains(5 + 0.5j)
    assert not HalfPlane(1j, 1.0).contains(2j)


def test_point_set_capture_and_ambiguity():
    p = PointSet((0.0, 1j), match_tol=1e-3)
    assert p.contains(5e-4) and p.contains(1j + 1e-3)
    assert not p.contains(1.5e-3)
    assert p.ambiguous(1.5e-3)
    assert not p.ambiguous(3e-3)
    with pytest.raises(BoundaryAmbiguity):
        region_ambiguous(p, 1.5e-3)


def test_combinators():
    ring = Annulus(1, 2) & ~Disk(1.5, 0.1)
    assert ring.contains(-1.5)
    assert not ring.contains(1.5)
    u = Disk(0, 1) | Disk(3, 1)
    assert u.contains(3.5) and not u.contains(2.0 + 1.5j)
    assert All.contains(1e9) and not Empty.contains(0)
    assert ~All == Empty


@pytest.mark.parametrize(
    "text",
    [
        "annulus(1,2)",
        "annulus(0,inf,open)",
        "disk(0.5,-1,2)",
        "points(0;1+2j;-0.5i)",
        "halfplane(1,0,0.25,open)",
        "!disk(0,0,1)",
        "annulus(1,2)&!points(1.5)|disk(3,0,1)",
        "all",
        "empty",
    ],
)
def test_parse_roundtrip(text):
    r = parse_region(text)
    again = parse_region(r.expr())
    assert again == r
    assert hash(again) == hash(r)


def test_precedence():
    r = parse_region("disk(0,0,1)|disk(5,0,1)&disk(10,0,1)")
    # & binds tighter: the right disks do not overlap, so only the first remains
    assert r.contains(0.5)
    assert not r.contains(5.0)
    r2 = parse_region("(disk(0,0,1)|disk(5,0,1))&disk(5,0,2)")
    assert r2.contains(5.0) and not r2.contains(0.0)


def test_points_accepts_imaginary_suffixes():
    r = parse_region("points(2i;3j;1-1i)")
    assert r.contains(2j) and r.contains(3j) and r.contains(1 - 1j)


@pytest.mark.parametrize(
    "text",
    ["annulus(1)", "annulus(1,2", "circle(0,1)", "disk(0,0,1)&", "annulus(2,1)", "points(1;x)", ""],
)
def test_parse_errors(text):
    with pytest.raises(RegionSyntaxError) as info:
        parse_region(text)
    assert "^" in str(info.value)


def test_match_tol_propagates():
    r = parse_region("points(0)", match_tol=1e-3)
    assert r.contains(5e-4)
    assert math.isclose(r.match_tol, 1e-3)
