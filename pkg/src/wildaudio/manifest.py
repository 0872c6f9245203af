"""JSONL manifest records for synthesized samples.

One record per synthesized clip: prompt messages, the audio path, the
reference transcript, optional base-model prediction and WER, and an open
metadata map carrying the scenario id, severity, latent, resolved
parameters, seed and language tag. Serialization is key-sorted so
identical jobs produce byte-identical manifests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ManifestRecord", "read_jsonl", "write_jsonl"]


@dataclass(frozen=True)
class ManifestRecord:
    messages: tuple
    audios: tuple
    solution: str
    prediction: str | None = None
    base_wer: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.audios) != 1:
            raise ValueError(f"audios must hold exactly one path, got {len(self.audios)}")
        if not self.solution:
            raise ValueError("solution must be non-empty")
        if (self.prediction is None) != (self.base_wer is None):
            raise ValueError("prediction and base_wer must be present together")
        object.__setattr__(self, "messages", tuple(dict(m) for m in self.messages))
        object.__setattr__(self, "audios", tuple(self.audios))

    def to_json(self) -> str:
        payload = {
            "messages": list(self.messages),
            "audios": list(self.audios),
            "solution": self.solution,
            "meta": self.meta,
        }
        if self.prediction is not None:
            payload["prediction"] = self.prediction
            payload["base_wer"] = self.base_wer
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "ManifestRecord":
        payload = json.loads(line)
        return cls(
            messages=tuple(payload["messages"]),
            audios=tuple(payload["audios"]),
            solution=payload["solution"],
            prediction=payload.get("prediction"),
            base_wer=payload.get("base_wer"),
            meta=payload.get("meta", {}),
        )


def read_jsonl(path: str | Path) -> list:
    """Parse a manifest file into records, in file order."""
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(ManifestRecord.from_json(line))
    return records


def write_jsonl(records, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.to_json() + "\n")
