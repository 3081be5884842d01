"""SplitMix64: a tiny, portable, seedable generator.

Used for every random test field and sample so that runs are identical
across numpy versions and platforms.
"""
import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed=0):
        self.state = int(seed) & _MASK

    def next_u64(self):
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self, size=None):
        if size is None:
            return (self.next_u64() >> 11) * 2.0 ** -53
        return np.array([(self.next_u64() >> 11) * 2.0 ** -53 for _ in range(int(np.prod(size)))]).reshape(size)

    def integers(self, lo, hi, size=None):
        """Uniform integers in ``[lo, hi)`` (modulo bias is negligible for small ranges)."""
        span = hi - lo
        if span <= 0:
            raise ValueError("empty integer range")
        if size is None:
            return lo + self.next_u64() % span
        return np.array([lo + self.next_u64() % span for _ in range(int(np.prod(size)))],
                        dtype=np.int64).reshape(size)

    def normal(self, size=None):
        # Box-Muller on two uniforms
        n = 1 if size is None else int(np.prod(size))
        u1 = 1.0 - self.uniform(n)
        u2 = self.uniform(n)
        z = np.sqrt(-2 * np.log(u1)) * np.cos(2 * np.pi * u2)
        return float(z[0]) if size is None else z.reshape(size)
