"""The presence-detection network: three conv stages and a sigmoid head."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ValidationError


@dataclass(frozen=True)
class CnnSpec:
    """Architecture knobs; the filter ladder is fixed at 64/128/256."""

    input_len: int
    conv_filters: tuple = (64, 128, 256)
    kernel_size: int = 5
    pool_size: int = 2
    dense_units: int = 32

    def __post_init__(self):
        if tuple(self.conv_filters) != (64, 128, 256):
            raise ValidationError("conv_filters must be (64, 128, 256)")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValidationError("kernel_size must be a positive odd integer")
        min_len = self.pool_size ** len(self.conv_filters)
        if self.input_len < min_len:
            raise ValidationError(f"input_len must be >= {min_len}")

    @property
    def flat_features(self) -> int:
        length = self.input_len
        for _ in self.conv_filters:
            length //= self.pool_size
        return self.conv_filters[-1] * length


class PresenceCnn(nn.Module):
    """Conv(64) -> Conv(128) -> Conv(256), each ReLU + max-pooled, then
    flatten -> dense(32) -> sigmoid(1). Input shape (batch, 1, input_len);
    output shape (batch,) of probabilities."""

    def __init__(self, spec: CnnSpec):
        super().__init__()
        self.spec = spec
        stages = []
        channels = 1
        for filters in spec.conv_filters:
            stages += [
                nn.Conv1d(channels, filters, spec.kernel_size, padding=spec.kernel_size // 2),
                nn.ReLU(),
                nn.MaxPool1d(spec.pool_size),
            ]
            channels = filters
        self.features = nn.Sequential(*stages)
        self.head = nn.Sequential(
            nn.Flatten(),
            nn.Linear(spec.flat_features, spec.dense_units),
            nn.ReLU(),
            nn.Linear(spec.dense_units, 1),
            nn.Sigmoid(),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 3 or x.shape[1] != 1 or x.shape[2] != self.spec.input_len:
            raise ValidationError(
                f"expected input shape (batch, 1, {self.spec.input_len}), got {tuple(x.shape)}"
            )
        return self.head(self.features(x)).squeeze(-1)


def save_model(path, model: PresenceCnn) -> None:
    torch.save(
        {
            "state_dict": model.state_dict(),
            "input_len": model.spec.input_len,
            "kernel_size": model.spec.kernel_size,
        },
        path,
    )


def load_model(path) -> PresenceCnn:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    spec = CnnSpec(input_len=int(payload["input_len"]), kernel_size=int(payload["kernel_size"]))
    model = PresenceCnn(spec)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
