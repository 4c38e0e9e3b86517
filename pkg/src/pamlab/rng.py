"""Reproducible, independently seedable random number streams.

Every stochastic routine in the package takes an RngStream instead of touching
global state. Two streams with the same (master_seed, stream_index) derivation
produce bit-identical draws; distinct derivations are statistically independent
(numpy SeedSequence spawn keys). Replicas, Monte Carlo path blocks and sweep
cells each get their own child stream, so results do not depend on execution
order or worker count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RngStream"]


class RngStream:
    """A named, derivable random stream backed by numpy's PCG64.

    Parameters
    ----------
    master_seed : int
        64-bit experiment-level seed.
    stream_index : int
        Index of this stream under the master seed.
    """

    def __init__(self, master_seed, stream_index=0, _key=None):
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        # Full derivation path; stream_index is its first component.
        self._key = tuple(_key) if _key is not None else (self.stream_index,)
        self._gen = None

    @property
    def generator(self):
        """The underlying numpy Generator (created lazily, then stateful)."""
        if self._gen is None:
            seq = np.random.SeedSequence(self.master_seed, spawn_key=self._key)
            self._gen = np.random.Generator(np.random.PCG64(seq))
        return self._gen

    def child(self, index):
        """Derive an independent sub-stream; deterministic in (self, index)."""
        return RngStream(
            self.master_seed, self.stream_index, _key=self._key + (int(index),)
        )

    def children(self, n):
        """n independent sub-streams, indexed 0..n-1."""
        return [self.child(i) for i in range(n)]

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, key={self._key})"

    # Conveniences used throughout the simulators -------------------------

    def uniform(self, *args, **kwargs):
        return self.generator.uniform(*args, **kwargs)

    def integers(self, *args, **kwargs):
        return self.generator.integers(*args, **kwargs)

    def exponential(self, *args, **kwargs):
        return self.generator.exponential(*args, **kwargs)

    def poisson(self, *args, **kwargs):
        return self.generator.poisson(*args, **kwargs)

    def binomial(self, *args, **kwargs):
        return self.generator.binomial(*args, **kwargs)
