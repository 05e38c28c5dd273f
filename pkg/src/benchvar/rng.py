"""Deterministic, splittable random streams.

Every stochastic operation in this package draws from an ``RngStream``,
which names a stream by a 64-bit root seed plus a derivation path of
``(label, index)`` steps.  The stream's state is a pure function of that
name: we hash the canonical encoding of ``(root_seed, path)`` with
SHA-256 and use the first 128 bits as the key of a Philox-4x64 counter
bit generator.  Two consequences the rest of the code relies on:

* reproducibility: the same name always yields the same draws, on any
  platform, independent of call order or worker count;
* splittability: children derived under distinct labels or indices get
  statistically independent streams, so parallel work units can each
  own one without coordination.

The derivation scheme (SHA-256 over the encoding below, Philox key) is
part of the package contract and must not change.  The draws themselves
go through numpy's ``Generator`` distribution methods, so byte-level
reproducibility additionally assumes a pinned numpy version.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Tuple

import numpy as np

__all__ = ["RngStream", "derive_stream", "splitmix64"]

_MASK64 = (1 << 64) - 1

PathStep = Tuple[str, int]


@dataclass(frozen=True)
class RngStream:
    """Name of a deterministic random stream; cheap to copy and derive."""

    root_seed: int
    path: Tuple[PathStep, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not 0 <= self.root_seed <= _MASK64:
            raise ValueError(f"root seed must be a 64-bit integer, got {self.root_seed}")
        for label, index in self.path:
            if "\x00" in label:
                raise ValueError("path labels must not contain NUL")
            if not 0 <= index <= _MASK64:
                raise ValueError(f"path index out of 64-bit range: {index}")

    def child(self, label: str, index: int = 0) -> "RngStream":
        return RngStream(self.root_seed, self.path + ((label, index),))

    def _digest(self) -> bytes:
        # Canonical encoding: root seed as 8 bytes big-endian, then for
        # each step the UTF-8 label, NUL, index as 8 bytes big-endian, NUL.
        h = hashlib.sha256()
        h.update(self.root_seed.to_bytes(8, "big"))
        for label, index in self.path:
            h.update(label.encode("utf-8"))
            h.update(b"\x00")
            h.update(index.to_bytes(8, "big"))
            h.update(b"\x00")
        return h.digest()

    def generator(self) -> np.random.Generator:
        """Fresh generator for this stream; same stream, same sequence."""
        key = int.from_bytes(self._digest()[:16], "little")
        return np.random.Generator(np.random.Philox(key=key))

    def seed64(self) -> int:
        """A 64-bit seed value owned by this stream (from the hash, not
        from the Philox sequence, so it never collides with draws)."""
        return int.from_bytes(self._digest()[16:24], "little")


def derive_stream(root_seed: int, path: Iterable[PathStep] = ()) -> RngStream:
    """Build a stream from a root seed and a derivation path."""
    return RngStream(root_seed, tuple((str(l), int(i)) for l, i in path))


def splitmix64(x: int) -> int:
    """One SplitMix64 finalization round; a cheap 64-bit mixer used where
    constructing a full generator per call would dominate runtime."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)
