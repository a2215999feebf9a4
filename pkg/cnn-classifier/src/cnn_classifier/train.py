"""Training loop, split bookkeeping, and report serialization."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .dataset import TraceDataset, load_dataset, standardize, stratified_split
from .errors import ValidationError
from .model import CnnSpec, PresenceCnn, save_model


@dataclass(frozen=True)
class ConfusionCounts:
    """2x2 confusion for the HUMAN-positive convention."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "counts": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn},
            "non_human": {"total": self.tn + self.fp, "correct": self.tn},
            "human": {"total": self.tp + self.fn, "correct": self.tp},
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class SplitReport:
    train: ConfusionCounts
    test: ConfusionCounts
    threshold: float = 0.5


@dataclass(frozen=True)
class TrainParams:
    """Conventional defaults; all recorded in report.json."""

    train_fraction: float = 0.7
    val_fraction: float = 0.15
    max_epochs: int = 30
    patience: int = 5
    batch_size: int = 32
    learning_rate: float = 1e-3
    threshold: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValidationError("train_fraction must lie in (0, 1)")
        if not (0.0 < self.val_fraction < 0.5):
            raise ValidationError("val_fraction must lie in (0, 0.5)")
        if self.max_epochs < 1 or self.patience < 1 or self.batch_size < 1:
            raise ValidationError("max_epochs, patience, batch_size must be >= 1")


def _tensor(traces: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(traces, dtype=np.float32)).unsqueeze(1)


def _predict(model: PresenceCnn, traces: np.ndarray, batch_size: int = 256) -> np.ndarray:
    model.eval()
    out = []
    with torch.no_grad():
        for start in range(0, traces.shape[0], batch_size):
            out.append(model(_tensor(traces[start : start + batch_size])).numpy())
    return np.concatenate(out)


def confusion(probabilities: np.ndarray, labels: np.ndarray, threshold: float) -> ConfusionCounts:
    predicted = probabilities >= threshold
    actual = labels.astype(bool)
    return ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )


def _fit(model, traces, labels, val_traces, val_labels, params, rng) -> int:
    """Early-stopped BCE/Adam loop; returns the number of epochs run."""
    optimizer = torch.optim.Adam(model.parameters(), lr=params.learning_rate)
    loss_fn = nn.BCELoss()
    x_val = _tensor(val_traces)
    y_val = torch.from_numpy(val_labels.astype(np.float32))
    best_loss = float("inf")
    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    stale = 0
    epochs_run = 0
    for epoch in range(params.max_epochs):
        epochs_run = epoch + 1
        model.train()
        order = rng.permutation(traces.shape[0])
        for start in range(0, order.size, params.batch_size):
            batch = order[start : start + params.batch_size]
            optimizer.zero_grad()
            loss = loss_fn(
                model(_tensor(traces[batch])),
                torch.from_numpy(labels[batch].astype(np.float32)),
            )
            loss.backward()
            optimizer.step()
        model.eval()
        with torch.no_grad():
            val_loss = float(loss_fn(model(x_val), y_val))
        if val_loss < best_loss - 1e-6:
            best_loss = val_loss
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
            stale = 0
        else:
            stale += 1
            if stale >= params.patience:
                break
    model.load_state_dict(best_state)
    return epochs_run


def train(
    dataset_dir,
    out_dir,
    seed: int,
    params: TrainParams = TrainParams(),
    dataset: TraceDataset = None,
) -> SplitReport:
    """Train on a dataset directory and write model.bin + report.json.

    The split is stratified and fully determined by ``seed``; training
    runs single-threaded so results are reproducible run to run.
    """
    torch.set_num_threads(1)
    if dataset is None:
        dataset = load_dataset(dataset_dir)
    traces = standardize(dataset.traces)
    labels = dataset.labels
    train_idx, test_idx = stratified_split(labels, params.train_fraction, seed)
    inner_fraction = 1.0 - params.val_fraction
    fit_rel, val_rel = stratified_split(labels[train_idx], inner_fraction, seed + 1)
    fit_idx, val_idx = train_idx[fit_rel], train_idx[val_rel]

    torch.manual_seed(seed)
    model = PresenceCnn(CnnSpec(input_len=dataset.trace_len))
    rng = np.random.default_rng(np.random.SeedSequence((seed, 2)))
    epochs_run = _fit(
        model, traces[fit_idx], labels[fit_idx], traces[val_idx], labels[val_idx], params, rng
    )

    report = SplitReport(
        train=confusion(_predict(model, traces[train_idx]), labels[train_idx], params.threshold),
        test=confusion(_predict(model, traces[test_idx]), labels[test_idx], params.threshold),
        threshold=params.threshold,
    )
    os.makedirs(out_dir, exist_ok=True)
    save_model(os.path.join(out_dir, "model.bin"), model)
    payload = {
        "train": report.train.to_dict(),
        "test": report.test.to_dict(),
        "threshold": params.threshold,
        "seed": seed,
        "epochs_run": epochs_run,
        "split": {"train_size": int(train_idx.size), "test_size": int(test_idx.size)},
        "params": {
            "train_fraction": params.train_fraction,
            "val_fraction": params.val_fraction,
            "max_epochs": params.max_epochs,
            "patience": params.patience,
            "batch_size": params.batch_size,
            "learning_rate": params.learning_rate,
            "optimizer": "adam",
            "loss": "bce",
            "kernel_size": model.spec.kernel_size,
            "conv_filters": list(model.spec.conv_filters),
            "dense_units": model.spec.dense_units,
        },
    }
    report_path = os.path.join(out_dir, "report.json")
    tmp = f"{report_path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, report_path)
    return report
