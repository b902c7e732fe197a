"""Evaluation report container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .kie import PRF


@dataclass
class EvalReport:
    """Aggregated metrics of one evaluation run.

    Sections that do not apply to the task are left as ``None``.
    ``per_sample`` holds plain dicts so readers and writers stay schema-free.
    """

    task: str
    protocol: dict[str, Any] = field(default_factory=dict)
    map: float | None = None
    per_class_ap: dict[str, float] | None = None
    structure_accuracy: float | None = None
    n_evaluated: int | None = None
    n_skipped: int | None = None
    mean_teds: float | None = None
    mean_teds_struct: float | None = None
    n_pred_failed: int | None = None
    ser: PRF | None = None
    re: PRF | None = None
    per_sample: list[dict[str, Any]] = field(default_factory=list)

    def ratios(self) -> list[float]:
        vals = [self.map, self.structure_accuracy, self.mean_teds, self.mean_teds_struct]
        vals += list((self.per_class_ap or {}).values())
        for prf in (self.ser, self.re):
            if prf is not None:
                vals.extend(prf)
        return [v for v in vals if v is not None]
