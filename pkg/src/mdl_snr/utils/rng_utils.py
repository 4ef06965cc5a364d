import numpy as np


# role codes are part of the stream key; never renumber them
ROLES = {'mdl': 0,
         'waveplates': 1,
         'symbols': 2,
         'noise': 3,
         'bootstrap': 4}


def substream(master_seed, realization_index, role):
    """
    Counter-based random stream keyed by
    (master_seed, realization_index, role).

    The same key always yields the same stream, whatever the order
    in which realizations are run or the number of workers.

    Parameters
    ----------
    master_seed: int
    realization_index: int
    role: str
        one of ROLES

    Returns
    -------
    np.random.Generator backed by Philox
    """
    if role not in ROLES:
        raise ValueError(f"unknown stream role {role}; "
                         f"expected one of {sorted(ROLES)}")
    seq = np.random.SeedSequence(
            entropy=int(master_seed),
            spawn_key=(int(realization_index), ROLES[role]))
    return np.random.Generator(np.random.Philox(seq))
