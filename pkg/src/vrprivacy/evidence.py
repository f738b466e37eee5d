from __future__ import annotations

from dataclasses import dataclass, field

DATA_TYPES = ("Body", "Face", "Eye", "Hand")


@dataclass(frozen=True)
class AccessEvidence:
    """One observed route to a VR-sensitive data source.

    ``path`` runs from an entry point to the matched API (or is just the
    matched key/module/name for presence-only detection).
    """

    data_type: str
    api_name: str
    path: tuple[str, ...]
    detail: str = field(default="", compare=False)

    def __post_init__(self):
        if self.data_type not in DATA_TYPES:
            raise ValueError(f"unknown data type {self.data_type!r}")
        if not self.path:
            raise ValueError("evidence path must be non-empty")

    def to_dict(self) -> dict:
        out = {"data_type": self.data_type, "api_name": self.api_name, "path": list(self.path)}
        if self.detail:
            out["detail"] = self.detail
        return out
