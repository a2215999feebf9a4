"""Single-trace inference against a saved model artifact."""

from __future__ import annotations

import numpy as np
import torch

from .dataset import read_trace_csv, standardize
from .errors import ValidationError
from .model import PresenceCnn, load_model


def infer_trace(model: PresenceCnn, trace: np.ndarray) -> float:
    """Probability that one raw (unstandardized) trace is a human."""
    trace = np.asarray(trace, dtype=np.float64)
    if trace.ndim != 1 or trace.size != model.spec.input_len:
        raise ValidationError(
            f"trace length {trace.size} does not match model input_len {model.spec.input_len}"
        )
    x = torch.from_numpy(
        standardize(trace[None, :]).astype(np.float32)
    ).unsqueeze(1)
    model.eval()
    with torch.no_grad():
        return float(model(x)[0])


def infer_file(model_path, trace_csv_path) -> float:
    """Load a model artifact and score one trace CSV."""
    return infer_trace(load_model(model_path), read_trace_csv(trace_csv_path))
