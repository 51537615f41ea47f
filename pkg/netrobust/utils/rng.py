"""
Reproduzierbare Zufallsströme.

Jeder Replikat-Strom ist ein Philox-Generator (counter-based), dessen Schlüssel
aus (Master-Seed, Replikat-Index, ...) abgeleitet wird. Damit sind parallele
Läufe unabhängig von der Ausführungsreihenfolge reproduzierbar.
"""

import numpy as np


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Erzeugt einen Generator für (seed, *keys).

    Args:
        seed: Master-Seed (nichtnegativ)
        keys: Weitere Schlüssel, z.B. Replikat-Index oder Gitterzelle

    Returns:
        numpy Generator mit Philox-Bitgenerator
    """
    entropy = [int(seed)] + [int(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *keys: int) -> int:
    """Leitet einen ganzzahligen Unter-Seed für (seed, *keys) ab (63 Bit)."""
    entropy = [int(seed)] + [int(k) for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0]
    return int(state >> np.uint64(1))
