"""SplitMix64: a tiny, portable, splittable 64-bit generator.

Used everywhere randomness enters the package so that every stream can be
re-derived from ``(seed, index)`` alone. The compiled kernels implement the
exact same arithmetic.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_STREAM_GAMMA = 0xD1B54A32D192ED03
_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def substream_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th independent stream derived from ``seed``."""
    return mix64(mix64(seed) ^ ((index * _STREAM_GAMMA) & MASK64))


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    @classmethod
    def stream(cls, seed: int, index: int) -> "SplitMix64":
        return cls(substream_seed(seed, index))

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def bit(self) -> int:
        return self.next_u64() >> 63
