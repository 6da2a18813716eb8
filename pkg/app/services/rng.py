"""
Reproducible Random Streams

Every random draw in the library goes through a named counter-based bit
generator (Philox-4x64-10, numpy's implementation) keyed by a 128-bit
hash of (seed, stream tag, replicate index). Two draws that differ in
any of the three never share a stream, and the byte stream for a given
key is the same on every platform.

Samples are produced from the raw 64-bit words, never from numpy's
distribution methods, so the word -> sample mapping is fixed:

  uniform   u = ((w >> 11) + 0.5) * 2**-53          (open interval (0, 1))
  gaussian  z = ndtri(u)                            (inverse normal CDF)
  sign      s = +1 if the top bit of w is set else -1
"""

import hashlib
from typing import Tuple, Union

import numpy as np
from scipy.special import ndtri

from app.errors import ParameterError

GENERATOR_NAME = "philox4x64-10"
_PERSON = b"tucker-denoise"

SeedLike = Union[int, np.random.Generator]
Shape = Union[int, Tuple[int, ...]]


def derive_key(seed: int, stream: str, replicate: int = 0) -> int:
    """128-bit Philox key for (seed, stream, replicate)."""
    if seed < 0 or replicate < 0:
        raise ParameterError(f"seed and replicate must be >= 0 (got {seed}, {replicate})")
    message = f"{seed}/{stream}/{replicate}".encode()
    digest = hashlib.blake2b(message, digest_size=16, person=_PERSON).digest()
    return int.from_bytes(digest, "little")


def derive_seed(seed: int, stream: str, replicate: int = 0) -> int:
    """A 63-bit integer seed derived from a parent seed, for nested streams."""
    return derive_key(seed, stream, replicate) >> 65


def generator(seed: SeedLike, stream: str = "default", replicate: int = 0) -> np.random.Generator:
    """Return the generator for a stream. A Generator passed as seed is used as-is."""
    if isinstance(seed, np.random.Generator):
        return seed
    key = derive_key(int(seed), stream, replicate)
    return np.random.Generator(np.random.Philox(key=key))


def uniform(gen: np.random.Generator, shape: Shape) -> np.ndarray:
    words = gen.bit_generator.random_raw(shape)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def standard_normal(gen: np.random.Generator, shape: Shape) -> np.ndarray:
    return ndtri(uniform(gen, shape))


def rademacher(gen: np.random.Generator, shape: Shape) -> np.ndarray:
    words = gen.bit_generator.random_raw(shape)
    return np.where(words >> np.uint64(63), 1.0, -1.0)
