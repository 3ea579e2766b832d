import xml.etree.ElementTree as ET

import numpy as np
import pytest

from myocoherence.errors import ShapeError
from myocoherence.figures import (
    edge_color,
    heat_color,
    render_confusion,
    render_heatmap,
    render_network,
)
from myocoherence.netfeat import CoherenceMatrix

_SVG = "{http://www.w3.org/2000/svg}"


def _elements(svg: str, tag: str):
    return ET.fromstring(svg).iter(_SVG + tag)


def _random_matrix(seed=0):
    rng = np.random.default_rng(seed)
    values = rng.uniform(0, 1, size=(12, 12))
    values = (values + values.T) / 2
    np.fill_diagonal(values, 0.0)
    return CoherenceMatrix(values, gesture=3, repetition=2)


def test_heat_color_anchors_and_clamping():
    assert heat_color(0.0) == "#440154"
    assert heat_color(0.25) == "#3b528b"
    assert heat_color(0.5) == "#21918c"
    assert heat_color(0.75) == "#5ec962"
    assert heat_color(1.0) == "#fde725"
    assert heat_color(-3.0) == heat_color(0.0)
    assert heat_color(7.0) == heat_color(1.0)


def test_heat_color_interpolates_between_anchors():
    # red channel rises monotonically across the upper half of the map
    reds = [int(heat_color(v)[1:3], 16) for v in np.linspace(0.5, 1.0, 20)]
    assert all(b >= a for a, b in zip(reds, reds[1:]))


def test_edge_color_endpoints():
    assert edge_color(0.0) == "#0000ff"
    assert edge_color(1.0) == "#ff0000"
    assert edge_color(-1.0) == "#0000ff"
    mid = edge_color(0.5)
    assert mid.startswith("#") and mid[3:5] == "00"


def test_heatmap_has_all_cells_with_correct_fills():
    matrix = _random_matrix()
    svg = render_heatmap(matrix, title="trial")
    cells = {
        el.get("id"): el.get("fill")
        for el in _elements(svg, "rect")
        if el.get("id")
    }
    assert len(cells) == 144
    for i in range(12):
        for j in range(12):
            assert cells[f"cell-{i + 1}-{j + 1}"] == heat_color(matrix.values[i, j])
    # diagonal renders the zero anchor
    assert cells["cell-5-5"] == "#440154"


def test_heatmap_has_labels_and_color_bar():
    svg = render_heatmap(_random_matrix(), title="subject 1")
    texts = [el.text for el in _elements(svg, "text")]
    assert "subject 1" in texts
    for k in range(1, 13):
        assert texts.count(str(k)) == 2  # row and column labels
    assert {"0.0", "0.5", "1.0"} <= set(texts)
    bar = [el for el in _elements(svg, "rect") if el.get("id") is None]
    assert len(bar) == 64


def test_network_edges_and_nodes():
    matrix = _random_matrix(seed=1)
    svg = render_network(matrix)
    edges = {el.get("id"): el for el in _elements(svg, "line")}
    assert len(edges) == 66
    assert set(edges) == {
        f"edge-{i + 1}-{j + 1}" for i in range(12) for j in range(i + 1, 12)
    }
    assert edges["edge-1-2"].get("stroke") == edge_color(matrix.values[0, 1])
    for el in edges.values():
        assert 0.6 <= float(el.get("stroke-width")) <= 3.0
    nodes = [el.get("id") for el in _elements(svg, "circle")]
    assert nodes == [f"node-{k}" for k in range(1, 13)]


def test_network_node_positions_lie_on_a_circle():
    svg = render_network(_random_matrix(seed=2))
    for el in _elements(svg, "circle"):
        dx = float(el.get("cx")) - 170.0
        dy = float(el.get("cy")) - 170.0
        assert np.hypot(dx, dy) == pytest.approx(130.0, abs=0.02)


def test_confusion_annotates_only_positive_counts():
    counts = np.array([[3.0, 0.0, 1.0], [0.0, 4.0, 0.0], [0.5, 0.0, 3.5]])
    svg = render_confusion(counts, classes=(1, 2, 3), title="mean")
    annotations = {
        el.get("id"): float(el.text)
        for el in _elements(svg, "text")
        if el.get("id")
    }
    assert set(annotations) == {"ann-1-1", "ann-1-3", "ann-2-2", "ann-3-1", "ann-3-3"}
    assert annotations["ann-3-1"] == 0.5
    assert sum(annotations.values()) == pytest.approx(counts.sum())
    # one shaded rect per cell, even the zero ones
    rects = list(_elements(svg, "rect"))
    assert len(rects) == 9


def test_confusion_shading_is_relative_to_peak():
    counts = np.array([[4.0, 0.0], [0.0, 2.0]])
    svg = render_confusion(counts, classes=(1, 2))
    fills = [el.get("fill") for el in _elements(svg, "rect")]
    assert fills[0] == heat_color(1.0)
    assert fills[3] == heat_color(0.5)
    assert fills[1] == heat_color(0.0)


def test_confusion_axis_labels_use_class_names():
    svg = render_confusion(np.eye(2), classes=(4, 17))
    texts = [el.text for el in _elements(svg, "text") if el.get("id") is None]
    assert texts.count("4") == 2 and texts.count("17") == 2
    assert "predicted" in texts


def test_confusion_rejects_bad_shapes():
    with pytest.raises(ShapeError):
        render_confusion(np.ones((2, 3)), classes=(1, 2))
    with pytest.raises(ShapeError):
        render_confusion(np.ones((2, 2)), classes=(1, 2, 3))
    with pytest.raises(ShapeError):
        render_confusion(np.ones((0, 0)), classes=())


def test_renderers_are_byte_deterministic():
    matrix = _random_matrix(seed=3)
    counts = np.arange(9.0).reshape(3, 3)
    assert render_heatmap(matrix) == render_heatmap(
        CoherenceMatrix(matrix.values.copy(), gesture=3, repetition=2)
    )
    assert render_network(matrix) == render_network(matrix)
    assert render_confusion(counts, (1, 2, 3)) == render_confusion(counts, (1, 2, 3))


def test_all_outputs_are_well_formed_xml():
    matrix = _random_matrix(seed=4)
    for svg in (
        render_heatmap(matrix, title="a & b"),
        render_network(matrix, title="t"),
        render_confusion(np.eye(3), (1, 2, 3), title="c"),
    ):
        assert svg.endswith("\n")
        ET.fromstring(svg)
