"""Dirichlet sampling on the unit simplex with splittable, deterministic RNG.

Portfolios are represented as 1-D float arrays on the simplex and batches of
portfolios as (count, m) arrays whose rows each satisfy the simplex
invariants (see :mod:`udfp.validation`).
"""

from dataclasses import dataclass

import numpy as np

from .validation import check_alpha_vector

# Normalized components below this are treated as exact zeros so downstream
# log computations never see subnormals.
_CLAMP = 1e-300

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """One reproducible random substream, identified by (master_seed, stream_id).

    Distinct stream ids under the same master seed yield statistically
    independent substreams (Philox keyed through ``SeedSequence`` spawn
    keys), so concurrent consumers each own a stream id and never share
    generator state.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value < _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def generator(self, subkey=None):
        """Build a fresh numpy Generator for this stream.

        ``subkey`` opens an independent child stream, used when one logical
        stream needs several internal sources (e.g. market noise vs. manager
        draws).
        """
        key = (self.stream_id,) if subkey is None else (self.stream_id, int(subkey))
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=key)
        return np.random.Generator(np.random.Philox(seq))


def _coerce_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"rng must be an RngStream or numpy Generator, got {type(rng).__name__}")


def sample_dirichlet(alpha, count, rng):
    """Draw ``count`` portfolios from Dirichlet(alpha).

    Sampling normalizes independent Gamma(alpha_j, 1) draws, which supports
    any strictly positive concentration.  Returns a (count, m) array; row k
    is fully determined by (master_seed, stream_id, alpha, count, k).
    """
    alpha = check_alpha_vector(alpha)
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    gen = _coerce_generator(rng)

    gammas = gen.standard_gamma(alpha, size=(count, alpha.size))
    totals = gammas.sum(axis=1)
    # For very small concentrations every Gamma draw in a row can underflow
    # to zero; redraw those rows (still deterministic: the generator state
    # advances sequentially).
    while np.any(totals == 0.0):
        dead = totals == 0.0
        gammas[dead] = gen.standard_gamma(alpha, size=(int(dead.sum()), alpha.size))
        totals = gammas.sum(axis=1)

    samples = gammas / totals[:, None]
    tiny = samples < _CLAMP
    if np.any(tiny):
        samples[tiny] = 0.0
        clamped = tiny.any(axis=1)
        samples[clamped] /= samples[clamped].sum(axis=1)[:, None]
    return samples


def normalize_to_simplex(v):
    """Rescale a non-negative vector to sum to 1."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError(f"expected a vector of at least 2 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("components must be finite and non-negative")
    total = arr.sum()
    if total <= 0:
        raise ValueError("cannot normalize a vector with no positive component")
    return arr / total
