"""Counter-based uniform streams keyed by (seed, stream, trial, slot).

Each trial owns a fixed block of Philox counters, so the numbers drawn for
trial ``t`` do not depend on how trials are chunked or scheduled.
"""
import numpy as np

# named streams so unrelated draws never share counters
TYPES = 0
LOTTERY = 1
OPPONENTS = 2
QMC = 3

_BLOCK = 4  # uint64 outputs per Philox4x64 counter increment
_SCALE = 2.0 ** -53


def uniforms(seed: int, stream: int, start: int, count: int, width: int = 1) -> np.ndarray:
    """Open-interval uniforms of shape ``(count, width)`` for trials ``start..start+count-1``."""
    blocks = -(-width // _BLOCK)
    bitgen = np.random.Philox(key=[int(seed), int(stream)],
                              counter=[int(start) * blocks, 0, 0, 0])
    raw = bitgen.random_raw(count * blocks * _BLOCK).reshape(count, blocks * _BLOCK)[:, :width]
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _SCALE


def chunks(trials: int, size: int = 1 << 18):
    """Yield ``(start, count)`` pairs covering ``range(trials)``."""
    for start in range(0, trials, size):
        yield start, min(size, trials - start)
