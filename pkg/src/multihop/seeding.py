import numpy as np


def derive_seed(master, *path) -> int:
    """Deterministic 32-bit child seed for ``(master, *path)``.

    Independent of call order, so parallel and serial runs agree.
    """
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint32)[0])
