from fractions import Fraction

import pytest

from ainfring import formats
from ainfring.ainfty import random_strict_iso
from ainfring.errors import FormatError


def test_structure_round_trip_is_byte_identical(canonical):
    _, m, _ = canonical
    text = formats.structure_to_text(m)
    back = formats.structure_from_text(text)
    assert back.same_ops(m, 4)
    assert formats.structure_to_text(back) == text


def test_morphism_round_trip(canonical):
    _, m, _ = canonical
    g = random_strict_iso(m.algebra, m.window, 4, 2)
    text = formats.morphism_to_text(g, m.algebra, m.window)
    back = formats.morphism_from_doc(formats.parse(text, "morphism"))
    assert back.same(g, 4)
    assert formats.morphism_to_text(back, m.algebra, m.window) == text


def test_tampered_body_is_rejected(canonical):
    _, m, _ = canonical
    text = formats.structure_to_text(m)
    head, body = text.split("---\n", 1)
    lines = body.splitlines()
    lines[0] = lines[0].replace("=1", "=2", 1) if "=1" in lines[0] else lines[0].replace("=-1", "=1", 1)
    with pytest.raises(FormatError, match="hash"):
        formats.parse(head + "---\n" + "\n".join(lines) + "\n")


def test_unknown_version_is_rejected():
    text = formats.emit("structure", [], ["x"]).replace("format: 1", "format: 99")
    with pytest.raises(FormatError, match="version"):
        formats.parse(text)


def test_wrong_kind_is_rejected():
    text = formats.emit("verdict", [], [])
    with pytest.raises(FormatError):
        formats.parse(text, "structure")


def test_algebra_hash_binds_window(canonical):
    _, m, _ = canonical
    text = formats.structure_to_text(m)
    bad = text.replace("window: -4 4 4 8", "window: -3 3 4 8")
    with pytest.raises(FormatError):
        formats.structure_from_text(bad)


@pytest.mark.parametrize("c", [0, 3, -7, Fraction(2, 3), Fraction(-5, 4)])
def test_coefficient_round_trip(c):
    assert formats.parse_coef(formats.fmt_coef(c)) == c


def test_malformed_map_line(canonical):
    _, m, _ = canonical
    with pytest.raises(FormatError):
        formats.parse_multimap_lines(m.algebra, ["2 | nonsense -> 0:0:0=1"])
