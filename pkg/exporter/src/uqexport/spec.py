"""Export job description and the error an export can raise."""

from __future__ import annotations

import dataclasses
import os

from types import MappingProxyType

SPLITS = ("train", "validation", "test")


class ExportError(Exception):
    """An export precondition failed; the message says what and how to fix it."""


@dataclasses.dataclass(frozen=True)
class ExportSpec:
    """Everything one export invocation needs besides model and data.

    ``model_paths`` is the member list for ensemble exports; single-model
    exports receive the model (object or path) as a separate argument and
    may leave it empty. ``samples`` is the number of training-mode passes
    for sampled export; point and ensemble exports ignore it. ``batch_size``
    is purely a throughput knob.
    """

    out: str | os.PathLike
    model_paths: tuple = ()
    samples: int = 1
    split: str = "test"
    source: str = "nominal"
    batch_size: int = 32
    seed: int = 0
    id_prefix: str = "x"
    metadata: MappingProxyType = dataclasses.field(
        default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        object.__setattr__(self, "model_paths",
                           tuple(os.fspath(p) for p in self.model_paths))
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ExportError(
                f"samples must be a positive integer, got {self.samples!r}")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ExportError(
                f"batch_size must be a positive integer, got "
                f"{self.batch_size!r}")
        if self.split not in SPLITS:
            raise ExportError(
                f"split must be one of {', '.join(SPLITS)}, got "
                f"{self.split!r}")
        if not isinstance(self.source, str) or not self.source:
            raise ExportError(f"source must be a nonempty string, got "
                              f"{self.source!r}")
        if not isinstance(self.seed, int):
            raise ExportError(f"seed must be an integer, got {self.seed!r}")
        if not isinstance(self.id_prefix, str):
            raise ExportError(
                f"id prefix must be a string, got {self.id_prefix!r}")
        object.__setattr__(self, "metadata", MappingProxyType(
            {str(k): str(v) for k, v in dict(self.metadata).items()}))
