import json

import numpy as np
import pytest

from udom.model import (
    DatasetError,
    UnsplittableNode,
    build_object,
    generate_synthetic,
    leaves_at_depth,
    load_dataset,
    save_dataset_jsonl,
    split,
)


def equal_weight(points):
    return [(p, 1.0) for p in points]


def test_build_single_sample_normalises():
    obj = build_object("a", [((1.0, 2.0), 5.0)])
    assert obj.weights[0] == 1.0
    assert obj.mbr.is_degenerate
    assert obj.mbr.contains_point([1.0, 2.0])


def test_build_four_corner_samples():
    corners = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
    obj = build_object("sq", equal_weight(corners))
    assert (obj.mbr.lo == [0.0, 0.0]).all() and (obj.mbr.hi == [1.0, 1.0]).all()
    root = obj.leaves_at_depth(1)
    assert len(root) == 1 and root[0].mass == 1.0 and root[0].level == 1


def test_constructor_does_not_freeze_caller_arrays():
    from udom.model import UncertainObject

    pts = np.array([[0.0, 0.0], [1.0, 1.0]])
    wts = np.array([0.5, 0.5])
    obj = UncertainObject("x", pts, wts)
    pts[0, 0] = 9.0  # caller's array must stay writable and detached
    assert obj.points[0, 0] == 0.0
    with pytest.raises(ValueError):
        obj.points[0, 0] = 5.0


def test_build_errors():
    with pytest.raises(ValueError):
        build_object("x", [])
    with pytest.raises(ValueError):
        build_object("x", [((np.nan, 0.0), 1.0)])
    with pytest.raises(ValueError):
        build_object("x", [((0.0, 0.0), 0.0)])
    with pytest.raises(ValueError):
        build_object("x", [((0.0, 0.0), -2.0)])


def test_leaf_masses_sum_to_one_at_any_depth(rng):
    pts = rng.uniform(0, 1, size=(1000, 2))
    obj = build_object("u", equal_weight(pts))
    for depth in (1, 2, 3, 5, 8):
        leaves = obj.leaves_at_depth(depth)
        assert abs(sum(p.mass for p in leaves) - 1.0) < 1e-9


def test_split_four_on_a_line():
    obj = build_object("line", equal_weight([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]))
    left, right = split(obj.leaves_at_depth(1)[0])
    assert left.mass == pytest.approx(0.5) and right.mass == pytest.approx(0.5)
    assert left.level == right.level == 2
    assert set(map(tuple, left.points)) == {(0.0, 0.0), (1.0, 0.0)}
    assert set(map(tuple, right.points)) == {(2.0, 0.0), (3.0, 0.0)}


def test_split_three_equal_weights():
    obj = build_object("tri", equal_weight([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]))
    left, right = split(obj.leaves_at_depth(1)[0])
    masses = sorted([left.mass, right.mass])
    assert masses == pytest.approx([1 / 3, 2 / 3])


def test_split_unbalanced_weights_keeps_children_nonempty():
    obj = build_object("w", [((0.0, 0.0), 0.1), ((1.0, 0.0), 0.9)])
    left, right = split(obj.leaves_at_depth(1)[0])
    assert left.mass == pytest.approx(0.1) and right.mass == pytest.approx(0.9)


def test_split_coincident_raises():
    obj = build_object("c", equal_weight([(1.0, 1.0), (1.0, 1.0)]))
    node = obj.leaves_at_depth(1)[0]
    assert node.is_atomic
    with pytest.raises(UnsplittableNode):
        split(node)


def test_split_axis_is_widest_side():
    pts = [(0.0, 0.0), (0.0, 10.0), (1.0, 4.0), (1.0, 6.0)]
    obj = build_object("tall", equal_weight(pts))
    left, right = split(obj.leaves_at_depth(1)[0])
    # Split must be along dimension 1 (extent 10 vs 1): children separate in y.
    assert left.points[:, 1].max() <= right.points[:, 1].min()


def test_leaves_depth_one_is_root():
    obj = build_object("r", equal_weight([(0.0, 0.0), (1.0, 1.0)]))
    leaves = leaves_at_depth(obj, 1)
    assert len(leaves) == 1 and leaves[0].level == 1


def test_eight_samples_fully_separate_at_depth_four():
    pts = [(float(i), float(i % 3)) for i in range(8)]
    obj = build_object("e", equal_weight(pts))
    leaves = obj.leaves_at_depth(4)
    assert len(leaves) == 8
    assert all(p.mass == pytest.approx(1 / 8) for p in leaves)
    assert all(p.rect.is_degenerate for p in leaves)
    # Idempotent beyond full separation.
    assert len(obj.leaves_at_depth(9)) == 8
    assert obj.decomposition.fully_separated(4)


def test_frontier_partitions_sample_set(rng):
    pts = rng.uniform(0, 1, size=(37, 2))
    wts = rng.uniform(0.2, 1.0, size=37)
    obj = build_object("p", list(zip(pts, wts)))
    for depth in (2, 3, 4, 6):
        leaves = obj.leaves_at_depth(depth)
        all_idx = np.concatenate([p.sample_indices for p in leaves])
        assert sorted(all_idx.tolist()) == list(range(37))
        for leaf in leaves:
            assert obj.mbr.contains_rect(leaf.rect)
            np.testing.assert_allclose(leaf.mass, obj.weights[leaf.sample_indices].sum())


def test_child_rects_nested_in_parents(rng):
    pts = rng.uniform(0, 1, size=(64, 2))
    obj = build_object("n", equal_weight(pts))
    parent = obj.leaves_at_depth(1)[0]
    left, right = split(parent)
    assert parent.rect.contains_rect(left.rect)
    assert parent.rect.contains_rect(right.rect)
    assert left.level == parent.level + 1


def test_power_of_two_masses_match_half_rule(rng):
    """2^m equal-weight samples in general position give 0.5^(level-1) masses."""
    pts = rng.uniform(0, 1, size=(16, 2))
    obj = build_object("h", equal_weight(pts))
    for depth in (2, 3, 4, 5):
        for leaf in obj.leaves_at_depth(depth):
            assert leaf.mass == pytest.approx(0.5 ** (leaf.level - 1))


def test_concurrent_lazy_deepening_is_consistent(rng):
    """Readers racing to deepen the same tree all see complete frontiers."""
    import threading

    pts = rng.uniform(0, 1, size=(64, 2))
    obj = build_object("conc", equal_weight(pts))
    obj.decomposition  # materialise the tree before sharing it
    errors = []

    def reader(depth):
        try:
            for _ in range(50):
                leaves = obj.leaves_at_depth(depth)
                total = sum(p.mass for p in leaves)
                if abs(total - 1.0) > 1e-9:
                    errors.append(total)
                idx = np.concatenate([p.sample_indices for p in leaves])
                if sorted(idx.tolist()) != list(range(64)):
                    errors.append("bad partition")
        except Exception as exc:  # surface failures from worker threads
            errors.append(exc)

    threads = [threading.Thread(target=reader, args=(d,)) for d in (2, 4, 6, 7) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors


def test_generate_synthetic_shapes_and_bounds():
    db = generate_synthetic(50, d=2, max_extent=0.004, samples_per_object=20, seed=9)
    assert len(db) == 50
    for obj in db:
        assert obj.n_samples == 20 and obj.ndim == 2
        assert (obj.mbr.lo >= 0.0).all() and (obj.mbr.hi <= 1.004).all()
        assert (obj.mbr.hi - obj.mbr.lo <= 0.004 + 1e-12).all()


def test_generate_synthetic_deterministic(tmp_path):
    a = generate_synthetic(10, 2, 0.01, 5, seed=42)
    b = generate_synthetic(10, 2, 0.01, 5, seed=42)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.points, y.points)
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_dataset_jsonl(a, p1)
    save_dataset_jsonl(b, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_generate_single_point_object():
    db = generate_synthetic(1, 2, 0.5, 1, seed=0)
    assert db[0].n_samples == 1 and db[0].mbr.is_degenerate


def test_generate_validates():
    with pytest.raises(ValueError):
        generate_synthetic(0, 2, 0.004, 10)
    with pytest.raises(ValueError):
        generate_synthetic(5, 2, 1.5, 10)
    with pytest.raises(ValueError):
        generate_synthetic(5, 2, 0.0, 10)


def test_load_jsonl_roundtrip(tmp_path):
    path = tmp_path / "d.jsonl"
    row = {"id": "a", "samples": [[0.0, 0.0, 1 / 3], [1.0, 0.0, 1 / 3], [0.0, 1.0, 1 / 3]]}
    path.write_text(json.dumps(row) + "\n")
    (obj,) = load_dataset(path)
    assert obj.id == "a" and obj.n_samples == 3
    np.testing.assert_allclose(obj.weights, [1 / 3] * 3)

    out = tmp_path / "copy.jsonl"
    save_dataset_jsonl([obj], out)
    (again,) = load_dataset(out)
    np.testing.assert_allclose(again.points, obj.points)


def test_load_jsonl_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a", "samples": [[0, 0, 1]]}\nnot json\n')
    with pytest.raises(DatasetError, match="line 2"):
        load_dataset(path)


def test_load_jsonl_dimension_mismatch(tmp_path):
    path = tmp_path / "dims.jsonl"
    path.write_text(
        '{"id": "a", "samples": [[0, 0, 1]]}\n{"id": "b", "samples": [[0, 0, 0, 1]]}\n'
    )
    with pytest.raises(DatasetError, match="line 2"):
        load_dataset(path)


def test_gaussian_csv_sigma_zero(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("a, 0.5, 0.5, 0, 0, 7\n")
    (obj,) = load_dataset(path, "gaussian-csv", seed=1)
    assert obj.n_samples == 7
    np.testing.assert_array_equal(obj.points, np.full((7, 2), 0.5))


def test_gaussian_csv_reproducible_and_bounded(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("a, 0.0, 0.0, 0.1, 0.2, 500\n")
    (one,) = load_dataset(path, "gaussian-csv", seed=5)
    (two,) = load_dataset(path, "gaussian-csv", seed=5)
    np.testing.assert_array_equal(one.points, two.points)
    assert (np.abs(one.points[:, 0]) <= 0.3 + 1e-12).all()
    assert (np.abs(one.points[:, 1]) <= 0.6 + 1e-12).all()
    (three,) = load_dataset(path, "gaussian-csv", seed=6)
    assert not np.array_equal(one.points, three.points)


def test_gaussian_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a, 0.5, 0.5, 0.1, 3\n")  # sigma column missing
    with pytest.raises(DatasetError, match="line 1"):
        load_dataset(path, "gaussian-csv")
    path.write_text("a, 0.5, 0.5, 0.1, 0.1, 0\n")
    with pytest.raises(DatasetError, match="nsamples"):
        load_dataset(path, "gaussian-csv")


def test_load_unknown_format(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text("{}\n")
    with pytest.raises(ValueError):
        load_dataset(path, "parquet")


def test_empty_dataset(tmp_path):
    path = tmp_path / "e.jsonl"
    path.write_text("\n")
    with pytest.raises(DatasetError):
        load_dataset(path)
