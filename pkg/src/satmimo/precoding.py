"""Precoder container shared by the iterative and closed-form designs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TPC = "TPC"
PAPC = "PAPC"


@dataclass
class PrecoderSet:
    """Per-user precoders ``W[k]`` of shape ``(S*M, d_k)``.

    Rows are ordered satellite by satellite, so block ``s`` of ``W[k]`` is the
    precoder satellite ``s`` applies for user ``k``.
    """

    W: list[np.ndarray]
    n_sat: int
    constraint: str = TPC

    def __post_init__(self):
        self.W = [np.asarray(w, dtype=complex).reshape(w.shape[0], -1) for w in self.W]
        if self.n_antennas % self.n_sat:
            raise ValueError("antenna count must be a multiple of the satellite count")

    def __len__(self):
        return len(self.W)

    def __getitem__(self, k):
        return self.W[k]

    @property
    def n_antennas(self) -> int:
        return self.W[0].shape[0]

    @property
    def block(self) -> int:
        return self.n_antennas // self.n_sat

    @property
    def streams(self) -> list[int]:
        return [w.shape[1] for w in self.W]

    def stacked(self) -> np.ndarray:
        return np.hstack(self.W)

    def total_power(self) -> float:
        return float(sum(np.vdot(w, w).real for w in self.W))

    def antenna_powers(self) -> np.ndarray:
        return sum(np.sum(np.abs(w) ** 2, axis=1) for w in self.W)

    def satellite_block(self, k: int, s: int) -> np.ndarray:
        M = self.block
        return self.W[k][s * M:(s + 1) * M]

    def scaled(self, factor: float) -> "PrecoderSet":
        return PrecoderSet([factor * w for w in self.W], self.n_sat, self.constraint)

    def copy(self) -> "PrecoderSet":
        return PrecoderSet([w.copy() for w in self.W], self.n_sat, self.constraint)

    def is_feasible(self, P: float, rel_tol: float = 1e-9) -> bool:
        if self.constraint == PAPC:
            P_m = P / self.n_antennas
            return bool(np.all(self.antenna_powers() <= P_m * (1 + rel_tol)))
        return self.total_power() <= P * (1 + rel_tol)


def scale_into_budget(W: PrecoderSet, P: float, constraint: str) -> PrecoderSet:
    """Shrink ``W`` uniformly until it satisfies the constraint; never scales up."""
    if constraint == PAPC:
        P_m = P / W.n_antennas
        worst = float(np.max(W.antenna_powers()))
        ratio = worst / P_m
    else:
        ratio = W.total_power() / P
    out = W.scaled(1.0 / np.sqrt(ratio)) if ratio > 1 else W.copy()
    out.constraint = constraint
    return out
