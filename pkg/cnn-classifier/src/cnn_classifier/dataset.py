"""Reading the shared phase-trace dataset directory.

A dataset directory holds ``manifest.json`` with ``version``,
``n_traces``, ``dwell_interval_s``, ``trace_len``, and ``entries``
(each ``{file, label, scenario}``, labels ``HUMAN`` / ``NON_HUMAN``),
plus one CSV per trace with header ``l,phi_rad,re,im``. Only the
``phi_rad`` column is consumed here.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import DatasetError

MANIFEST_VERSION = 1
LABELS = ("NON_HUMAN", "HUMAN")


@dataclass(frozen=True)
class TraceDataset:
    """All traces of one directory as a matrix plus 0/1 labels.

    ``traces`` has shape (n, trace_len); ``labels`` holds 1 for HUMAN
    and 0 for NON_HUMAN, matching the sigmoid output convention.
    """

    traces: np.ndarray
    labels: np.ndarray
    files: tuple
    dwell_interval_s: float

    def __post_init__(self):
        if self.traces.ndim != 2 or len(self.labels) != self.traces.shape[0]:
            raise DatasetError("traces and labels are inconsistent")

    def __len__(self) -> int:
        return self.traces.shape[0]

    @property
    def trace_len(self) -> int:
        return self.traces.shape[1]


def read_trace_csv(path) -> np.ndarray:
    """Return the phi_rad column of one trace CSV."""
    values = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "phi_rad" not in reader.fieldnames:
            raise DatasetError(f"{path}: missing phi_rad column")
        for row in reader:
            values.append(float(row["phi_rad"]))
    return np.asarray(values, dtype=np.float64)


def load_dataset(directory) -> TraceDataset:
    """Load a dataset directory into memory, validating the manifest."""
    manifest_path = os.path.join(directory, "manifest.json")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError as exc:
        raise DatasetError(f"{directory}: no manifest.json") from exc
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{manifest_path}: not valid JSON ({exc})") from exc
    if manifest.get("version") != MANIFEST_VERSION:
        raise DatasetError(f"unsupported manifest version {manifest.get('version')!r}")
    entries = manifest.get("entries", [])
    if len(entries) != manifest.get("n_traces"):
        raise DatasetError("manifest n_traces disagrees with entries")
    if not entries:
        raise DatasetError(f"{directory}: empty dataset")
    expected_len = int(manifest["trace_len"])
    traces = np.empty((len(entries), expected_len))
    labels = np.empty(len(entries), dtype=np.int64)
    files = []
    for i, entry in enumerate(entries):
        if entry["label"] not in LABELS:
            raise DatasetError(f"unknown label {entry['label']!r} in manifest")
        trace = read_trace_csv(os.path.join(directory, entry["file"]))
        if trace.size != expected_len:
            raise DatasetError(
                f"{entry['file']}: length {trace.size} != manifest trace_len {expected_len}"
            )
        traces[i] = trace
        labels[i] = 1 if entry["label"] == "HUMAN" else 0
        files.append(entry["file"])
    return TraceDataset(
        traces=traces,
        labels=labels,
        files=tuple(files),
        dwell_interval_s=float(manifest["dwell_interval_s"]),
    )


def standardize(traces: np.ndarray) -> np.ndarray:
    """Zero-mean, unit-variance per trace; all-constant traces map to zeros."""
    traces = np.asarray(traces, dtype=np.float64)
    mean = traces.mean(axis=-1, keepdims=True)
    std = traces.std(axis=-1, keepdims=True)
    return np.where(std > 0.0, (traces - mean) / np.where(std > 0.0, std, 1.0), 0.0)


def stratified_split(labels: np.ndarray, train_fraction: float, seed: int):
    """Seeded per-class split into disjoint train/test index arrays.

    Within each class the indices are shuffled and the first
    ``train_fraction`` go to train, so both splits keep the dataset's
    class proportions. The same seed always yields the same membership.
    """
    if not (0.0 < train_fraction < 1.0):
        raise DatasetError("train_fraction must lie in (0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
    train, test = [], []
    for value in np.unique(labels):
        members = np.flatnonzero(labels == value)
        rng.shuffle(members)
        cut = int(round(train_fraction * members.size))
        train.extend(members[:cut])
        test.extend(members[cut:])
    return np.sort(np.asarray(train, dtype=np.int64)), np.sort(
        np.asarray(test, dtype=np.int64)
    )
