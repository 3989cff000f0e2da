"""Finite distributions over valuations and reproducible random streams."""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, DimensionError, InstanceTooLarge
from .numeric import Number, is_exact, leq
from .valuations import Valuation, bundle_mask

PROB_TOL = 1e-12

# Replication streams are carved out of blocks of pre-drawn uniforms so a
# Monte Carlo run does not pay for one generator per replication.
BLOCK_ROWS = 1024
BLOCK_WIDTH = 32


@dataclass(frozen=True)
class ValuationDistribution:
    support: tuple[Valuation, ...]
    probs: tuple[Number, ...]
    _cumulative: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        support = tuple(self.support)
        probs = tuple(self.probs)
        if not support:
            raise ConfigurationError("distribution support is empty")
        if len(support) != len(probs):
            raise ConfigurationError("support and probs differ in length")
        if any(p <= 0 for p in probs):
            raise ConfigurationError("probabilities must be positive")
        total = sum(probs)
        if is_exact(*probs) and total != 1 or abs(total - 1) > PROB_TOL:
            raise ConfigurationError(f"probabilities sum to {total}, not 1")
        k = support[0].k
        if any(v.k != k for v in support):
            raise DimensionError("support valuations disagree on k")
        cumulative = list(itertools.accumulate(float(p) for p in probs))
        cumulative[-1] = 1.0
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "_cumulative", tuple(cumulative))

    @classmethod
    def point(cls, v: Valuation) -> "ValuationDistribution":
        return cls((v,), (1,))

    @classmethod
    def uniform(cls, support: Sequence[Valuation]) -> "ValuationDistribution":
        from fractions import Fraction

        return cls(tuple(support), tuple(Fraction(1, len(support)) for _ in support))

    @property
    def k(self) -> int:
        return self.support[0].k

    def __len__(self) -> int:
        return len(self.support)

    def index_for(self, u: float) -> int:
        return min(bisect.bisect_right(self._cumulative, u), len(self.support) - 1)


class RngStream:
    """Uniform draws keyed by ``(seed, stream)``.

    The first ``BLOCK_WIDTH`` draws of stream ``s`` are row ``s % BLOCK_ROWS``
    of a block generated from ``(seed, s // BLOCK_ROWS)``; later draws come
    from a generator keyed by ``(seed, s)``.  Building a stream directly or
    through :func:`replication_streams` yields the same sequence.
    """

    __slots__ = ("seed", "stream", "_prefix", "_pos", "_tail")

    def __init__(self, seed: int, stream: int = 0, *, _prefix: list[float] | None = None):
        if seed < 0 or stream < 0:
            raise ValueError("seed and stream must be nonnegative")
        self.seed = seed
        self.stream = stream
        if _prefix is None:
            _prefix = _block(seed, stream // BLOCK_ROWS)[stream % BLOCK_ROWS]
        self._prefix = _prefix
        self._pos = 0
        self._tail = None

    def random(self) -> float:
        pos = self._pos
        if pos < BLOCK_WIDTH:
            self._pos = pos + 1
            return self._prefix[pos]
        if self._tail is None:
            self._tail = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, self.stream, 1])))
        self._pos = pos + 1
        return float(self._tail.random())


def block_array(seed: int, block: int) -> np.ndarray:
    """The ``BLOCK_ROWS x BLOCK_WIDTH`` uniforms behind streams of one block."""
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))
    return gen.random((BLOCK_ROWS, BLOCK_WIDTH))


def _block(seed: int, block: int) -> list[list[float]]:
    return block_array(seed, block).tolist()


def leading_draws(seed: int, count: int, width: int) -> np.ndarray:
    """First ``width`` draws of streams ``0 .. count-1`` as a ``count x width`` array."""
    if width > BLOCK_WIDTH:
        raise ValueError(f"only the first {BLOCK_WIDTH} draws of a stream are pre-drawn")
    blocks = -(-count // BLOCK_ROWS)
    out = np.concatenate([block_array(seed, b)[:, :width] for b in range(blocks)]) if blocks else np.empty((0, width))
    return out[:count]


def replication_streams(seed: int, start: int, count: int) -> Iterator[RngStream]:
    """Streams for replications ``start .. start+count-1``, in order."""
    block_id, rows = None, None
    for r in range(start, start + count):
        b = r // BLOCK_ROWS
        if b != block_id:
            block_id, rows = b, _block(seed, b)
        yield RngStream(seed, r, _prefix=rows[r % BLOCK_ROWS])


class ScriptedRng:
    """Replays a fixed list of uniforms; used to force mechanism coins."""

    def __init__(self, uniforms: Iterable[float]):
        self._values = list(uniforms)
        self._pos = 0

    def random(self) -> float:
        if self._pos >= len(self._values):
            raise IndexError("scripted rng exhausted")
        value = self._values[self._pos]
        self._pos += 1
        return value


def sample(dist: ValuationDistribution, rng) -> Valuation:
    return dist.support[dist.index_for(rng.random())]


def expect(dist: ValuationDistribution, f: Callable[[Valuation], Number]) -> Number:
    """Exact expectation of ``f`` over the finite support."""
    return sum((p * f(v) for v, p in zip(dist.support, dist.probs)), 0)


def cdf_at(dist: ValuationDistribution, items: Iterable[int], x: Number) -> Number:
    """Probability that the drawn valuation values ``items`` at most ``x``."""
    mask = bundle_mask(items)
    return sum((p for v, p in zip(dist.support, dist.probs) if leq(v.value_of_mask(mask), x)), 0)


def joint_support_size(dists: Sequence[ValuationDistribution]) -> int:
    return math.prod(len(d) for d in dists)


def enumerate_profiles(
    dists: Sequence[ValuationDistribution], guard: int = 10**6
) -> Iterator[tuple[Number, tuple[Valuation, ...]]]:
    """Yield ``(probability, profile)`` over the product of the supports."""
    size = joint_support_size(dists)
    if size > guard:
        raise InstanceTooLarge(
            f"joint support has {size} profiles, guard is {guard}",
            hint="use Monte Carlo mode (e.g. --opt mc:100000) or shrink the supports",
        )
    for combo in itertools.product(*(range(len(d)) for d in dists)):
        prob = 1
        for d, i in zip(dists, combo):
            prob = prob * d.probs[i]
        yield prob, tuple(d.support[i] for d, i in zip(dists, combo))


def sample_profile(dists: Sequence[ValuationDistribution], rng) -> tuple[Valuation, ...]:
    return tuple(sample(d, rng) for d in dists)
