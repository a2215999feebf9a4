import json

import numpy as np
import pytest

from cnn_classifier import (
    DatasetError,
    load_dataset,
    read_trace_csv,
    standardize,
    stratified_split,
)


def write_trace(path, values):
    lines = ["l,phi_rad,re,im"]
    for l, v in enumerate(values):
        lines.append(f"{l},{float(v)!r},1.0,0.0")
    path.write_text("\n".join(lines) + "\n")


def write_corpus(directory, traces_by_label, trace_len=8, dwell=0.06):
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, (label, values) in enumerate(traces_by_label):
        name = f"trace_{i:05d}.csv"
        write_trace(directory / name, values)
        entries.append({"file": name, "label": label, "scenario": "synthetic"})
    manifest = {
        "version": 1,
        "n_traces": len(entries),
        "dwell_interval_s": dwell,
        "trace_len": trace_len,
        "entries": entries,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest))
    return directory


class TestLoadDataset:
    def test_loads_generated_corpus(self, small_dataset_dir):
        ds = load_dataset(small_dataset_dir)
        assert len(ds) == 200
        assert ds.trace_len == 64
        assert ds.dwell_interval_s == 0.06
        assert int(ds.labels.sum()) == 100
        assert ds.labels[:100].all() and not ds.labels[100:].any()
        assert ds.files[0] == "trace_00000.csv"

    def test_trace_values_match_csv(self, small_dataset_dir):
        ds = load_dataset(small_dataset_dir)
        direct = read_trace_csv(small_dataset_dir / ds.files[7])
        assert np.array_equal(ds.traces[7], direct)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DatasetError, match="manifest"):
            load_dataset(tmp_path)

    def test_bad_version(self, tmp_path):
        d = write_corpus(tmp_path / "c", [("HUMAN", np.zeros(8))])
        manifest = json.loads((d / "manifest.json").read_text())
        manifest["version"] = 9
        (d / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(DatasetError, match="version"):
            load_dataset(d)

    def test_count_mismatch(self, tmp_path):
        d = write_corpus(tmp_path / "c", [("HUMAN", np.zeros(8))])
        manifest = json.loads((d / "manifest.json").read_text())
        manifest["n_traces"] = 2
        (d / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(DatasetError, match="n_traces"):
            load_dataset(d)

    def test_unknown_label(self, tmp_path):
        d = write_corpus(tmp_path / "c", [("ROBOT", np.zeros(8))])
        with pytest.raises(DatasetError, match="label"):
            load_dataset(d)

    def test_inconsistent_trace_length(self, tmp_path):
        d = write_corpus(
            tmp_path / "c", [("HUMAN", np.zeros(8)), ("NON_HUMAN", np.zeros(5))]
        )
        with pytest.raises(DatasetError, match="length"):
            load_dataset(d)

    def test_missing_phase_column(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DatasetError, match="phi_rad"):
            read_trace_csv(path)


class TestStandardize:
    def test_rows_become_zero_mean_unit_variance(self):
        rng = np.random.default_rng(3)
        z = standardize(rng.normal(5.0, 3.0, size=(10, 64)))
        assert np.allclose(z.mean(axis=1), 0.0, atol=1e-12)
        assert np.allclose(z.std(axis=1), 1.0, atol=1e-12)

    def test_constant_trace_maps_to_zeros(self):
        z = standardize(np.full((2, 16), 7.5))
        assert np.array_equal(z, np.zeros((2, 16)))

    def test_scale_and_offset_invariance(self):
        rng = np.random.default_rng(4)
        base = rng.standard_normal((3, 32))
        assert np.allclose(standardize(base), standardize(4.0 * base - 11.0), atol=1e-12)


class TestStratifiedSplit:
    def test_same_seed_same_membership(self):
        labels = np.array([0, 1] * 50)
        a_train, a_test = stratified_split(labels, 0.7, seed=5)
        b_train, b_test = stratified_split(labels, 0.7, seed=5)
        assert np.array_equal(a_train, b_train)
        assert np.array_equal(a_test, b_test)

    def test_different_seed_changes_membership(self):
        labels = np.array([0, 1] * 50)
        a_train, _ = stratified_split(labels, 0.7, seed=5)
        b_train, _ = stratified_split(labels, 0.7, seed=6)
        assert not np.array_equal(a_train, b_train)

    def test_disjoint_and_complete(self):
        labels = np.array([0] * 60 + [1] * 40)
        train, test = stratified_split(labels, 0.7, seed=1)
        assert len(np.intersect1d(train, test)) == 0
        assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(100))

    def test_preserves_class_proportions(self):
        labels = np.array([0] * 60 + [1] * 40)
        train, test = stratified_split(labels, 0.7, seed=1)
        assert int(labels[train].sum()) == 28  # 70% of 40 humans
        assert train.size == 70 and test.size == 30

    def test_bad_fraction(self):
        with pytest.raises(DatasetError):
            stratified_split(np.array([0, 1]), 1.0, seed=0)
