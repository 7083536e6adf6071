"""Tests for hyperbolic/tiling_svg.py — SVG fundamental-domain pictures."""

import pytest


def test_depth_zero_single_polygon(regular_group):
    """One tile drawn with 8 geodesic sides."""
    from hyperbolic.tiling_svg import render_tiling

    svg = render_tiling(regular_group, 0)
    assert svg.startswith("<svg")
    assert svg.count("<path") == 1
    assert 'data-word="e"' in svg
    path = svg.split('d="', 1)[1].split('"', 1)[0]
    assert path.count(" A ") + path.count(" L ") == 8


def test_depth_one_adds_side_neighbors(regular_group):
    from hyperbolic.tiling_svg import render_tiling

    svg = render_tiling(regular_group, 1)
    assert svg.count("<path") == 9
    for label in regular_group.labels:
        assert f'data-word="{label}"' in svg


def test_rendering_deterministic(regular_group):
    from hyperbolic.tiling_svg import render_tiling

    assert render_tiling(regular_group, 2) == render_tiling(regular_group, 2)


def test_degenerate_marker_near_origin():
    """The distinguished generator barely moves 0 in a degenerate group."""
    from hyperbolic.fuchsian import build_degenerate
    from hyperbolic.tiling_svg import render_tiling

    group = build_degenerate(2, 0.1)
    svg = render_tiling(group, 1, style="outline")
    assert 'data-label="A1(0)"' in svg
    assert 'fill="none"' in svg
    assert abs(group.generators["A1"].orbit_point) < 0.05


def test_unknown_style_rejected(regular_group):
    from hyperbolic.tiling_svg import render_tiling

    with pytest.raises(ValueError):
        render_tiling(regular_group, 0, style="heatmap")
