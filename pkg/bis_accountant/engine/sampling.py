"""
Balanced Iteration Subsampling sampler
Draws participation vectors and mechanism outputs under P (example present) and Q (absent)
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from bis_accountant.models.schemas import MechanismShape

logger = logging.getLogger(__name__)


class Source(str, Enum):
    FROM_P = "FromP"
    FROM_Q = "FromQ"


def stream_generator(seed: int, stream_id: int) -> np.random.Generator:
    """Counter-based generator for one (seed, stream) pair"""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *key: int) -> int:
    """64-bit child seed for a named sub-computation"""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(part) for part in key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


@dataclass
class RngStream:
    """One independent random stream; owned by a single worker at a time"""
    seed: int
    stream_id: int
    _generator: Optional[np.random.Generator] = field(default=None, init=False, repr=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            self._generator = stream_generator(self.seed, self.stream_id)
        return self._generator


@dataclass(frozen=True)
class ParticipationVector:
    """Sorted 1-based iteration indices an example participates in"""
    indices: Tuple[int, ...]

    def indicator(self, T: int) -> np.ndarray:
        x = np.zeros(T)
        x[np.asarray(self.indices, dtype=np.int64) - 1] = 1.0
        return x


@dataclass(frozen=True)
class Realization:
    """One mechanism output y in R^T"""
    y: np.ndarray
    source: Source
    participation: Optional[ParticipationVector] = None


RandomSource = Union[RngStream, np.random.Generator]


def _as_generator(rng: RandomSource) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    return rng


def sample_participation_batch(shape: MechanismShape, rng: np.random.Generator, n: int) -> np.ndarray:
    """
    n independent uniform k-subsets of {0, ..., T-1}

    Partial Fisher-Yates over each row: position j swaps with a uniform
    position in [j, T), and the first k positions are the subset.

    Returns:
        int64 array of shape (n, k), each row sorted ascending
    """
    T, k = shape.T, shape.k
    perm = np.tile(np.arange(T, dtype=np.int64), (n, 1))
    rows = np.arange(n)
    for j in range(k):
        targets = rng.integers(j, T, size=n)
        chosen = perm[rows, targets]
        perm[rows, targets] = perm[rows, j]
        perm[rows, j] = chosen
    return np.sort(perm[:, :k], axis=1)


def sample_participation(shape: MechanismShape, rng: RandomSource) -> ParticipationVector:
    """Uniform k-subset of [1, T]"""
    subset = sample_participation_batch(shape, _as_generator(rng), 1)[0]
    return ParticipationVector(indices=tuple(int(i) + 1 for i in subset))


def sample_outputs(
    shape: MechanismShape,
    sigma: float,
    source: Source,
    rng: np.random.Generator,
    n: int,
) -> np.ndarray:
    """
    n mechanism outputs as an (n, T) array

    Under Q each row is sigma * w; under P the participation subset is drawn
    first and its indicator is added to the noise.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    subsets = None
    if source == Source.FROM_P:
        subsets = sample_participation_batch(shape, rng, n)
    y = sigma * rng.standard_normal((n, shape.T))
    if subsets is not None:
        y[np.arange(n)[:, None], subsets] += 1.0
    return y


def sample_output(shape: MechanismShape, sigma: float, source: Source, rng: RandomSource) -> Realization:
    """One mechanism output, keeping the participation vector when drawn from P"""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    generator = _as_generator(rng)
    participation = None
    if source == Source.FROM_P:
        participation = sample_participation(shape, generator)
    y = sigma * generator.standard_normal(shape.T)
    if participation is not None:
        y += participation.indicator(shape.T)
    return Realization(y=y, source=Source(source), participation=participation)
