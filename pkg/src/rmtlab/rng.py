"""Deterministic, splittable random streams for reproducible Monte Carlo.

Every experiment draws from streams addressed by ``(master_seed, stream_index)``.
Streams are backed by the counter-based Philox generator, so stream ``k`` is
derived arithmetically from its address: no jump-ahead, no dependence on which
worker thread ends up running trial ``k``.

Gaussians are produced by inverse-CDF transform of fixed-width uniforms rather
than a rejection sampler, so a request for ``m`` values always consumes exactly
``m`` uniforms from the stream.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import ndtri

__all__ = ["RngStream", "derive_stream", "trial_map"]

_U64 = 1 << 64
# 52-bit uniforms: (k + 0.5) is exactly representable for k < 2**52, so the
# mapped value lies strictly inside (0, 1) and ndtri never sees 0 or 1.
_UNIFORM_BITS = 52
_UNIFORM_SCALE = 2.0 ** -_UNIFORM_BITS


class RngStream:
    """One independent random stream, addressed by (master_seed, stream_index).

    Identical addresses replay identical sequences.  Distinct stream indices
    select distinct Philox keys, whose keystreams do not overlap within 2**64
    draws.  A stream is cheap to create and safe to hand to another thread,
    but a single instance must not be shared by two threads at once.
    """

    def __init__(self, master_seed, stream_index):
        master_seed = int(master_seed)
        stream_index = int(stream_index)
        if not 0 <= master_seed < _U64:
            raise ValueError(f"master_seed must be a u64, got {master_seed}")
        if not 0 <= stream_index < _U64:
            raise ValueError(f"stream_index must be a u64, got {stream_index}")
        self.master_seed = master_seed
        self.stream_index = stream_index
        self._gen = np.random.Generator(
            np.random.Philox(key=np.array([master_seed, stream_index], dtype=np.uint64))
        )

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"

    def uniform(self, size=None):
        """Uniforms strictly inside (0, 1), one 64-bit word per value."""
        k = self._gen.integers(0, 1 << _UNIFORM_BITS, size=size, dtype=np.int64)
        return (k + 0.5) * _UNIFORM_SCALE

    def gaussian(self, mean, variance, size=None):
        """Normal(mean, variance) draws; variance 0 returns the mean exactly.

        ``variance`` may be an array, broadcast against ``size``; each entry
        must be nonnegative.
        """
        variance = np.asarray(variance, dtype=float)
        if np.any(variance < 0.0):
            raise ValueError("variance must be nonnegative")
        u = self.uniform(size)
        return mean + np.sqrt(variance) * ndtri(u)

    def bernoulli(self, prob, size=None):
        """0/1 draws with P(1) = prob; prob 0 and 1 are exact."""
        prob = float(prob)
        if not 0.0 <= prob <= 1.0:
            raise ValueError(f"prob must lie in [0, 1], got {prob}")
        u = self.uniform(size)
        if size is None:
            return int(u < prob)
        return (u < prob).astype(np.int64)


def derive_stream(master_seed, stream_index):
    """Stream for the given address; a pure function of both arguments."""
    return RngStream(master_seed, stream_index)


def trial_map(fn, n_trials, threads=1):
    """Run ``fn(trial)`` for trial = 0..n_trials-1, returning results in trial order.

    With threads > 1 the trials run on a thread pool, but the result list is
    always assembled by trial index, so downstream reductions see the same
    sequence no matter how the scheduler interleaved the work.  Exceptions are
    re-raised with the offending trial index attached.
    """
    if n_trials < 0:
        raise ValueError("n_trials must be nonnegative")

    def run_one(k):
        try:
            return fn(k)
        except Exception as exc:
            raise type(exc)(f"trial {k}: {exc}") from exc

    if threads <= 1:
        return [run_one(k) for k in range(n_trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_one, range(n_trials)))
