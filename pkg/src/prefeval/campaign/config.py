"""Campaign configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields

_MODES = ("crowdsourced", "tournament")


@dataclass(frozen=True)
class CampaignConfig:
    """Parameters of a top-k assessment campaign.

    ``round_robin_threshold`` is the pool size at or below which every pair
    is judged directly; larger pools go through reduction rounds where each
    candidate is paired against ``pairings_per_round`` others.  The protocol
    needs round_robin_threshold > pairings_per_round > top_k >= 1, which
    guarantees reduction-round survivors are decided by enough evidence and
    that a full round robin can seat the final top-k.
    """

    top_k: int = 5
    round_robin_threshold: int = 9
    pairings_per_round: int = 7
    hit_size: int = 10
    challenges_per_hit: int = 3
    mode: str = "crowdsourced"
    seed: int = 0
    lease_seconds: float = 600.0

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")
        if not self.pairings_per_round > self.top_k:
            raise ValueError(
                f"pairings_per_round ({self.pairings_per_round}) must exceed "
                f"top_k ({self.top_k})"
            )
        if not self.round_robin_threshold > self.pairings_per_round:
            raise ValueError(
                f"round_robin_threshold ({self.round_robin_threshold}) must exceed "
                f"pairings_per_round ({self.pairings_per_round})"
            )
        if self.hit_size < 1:
            raise ValueError(f"hit_size must be >= 1, got {self.hit_size}")
        if self.challenges_per_hit < 0:
            raise ValueError(f"challenges_per_hit must be >= 0, got {self.challenges_per_hit}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.lease_seconds <= 0:
            raise ValueError(f"lease_seconds must be positive, got {self.lease_seconds}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CampaignConfig":
        obj = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**obj)
