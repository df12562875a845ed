"""Independent brute-force references used by the tests.

These deliberately avoid the package's own code paths (no Counter scan, no
bincount) so agreement means something.
"""
import numpy as np


def difference_counts(positions):
    pos = np.asarray(positions, dtype=np.int64)
    lags, counts = np.unique(np.subtract.outer(pos, pos).ravel(), return_counts=True)
    return dict(zip(lags.tolist(), counts.tolist()))


def udof(positions):
    lags = set(difference_counts(positions))
    # largest L with the whole symmetric window present
    best = 0
    for L in range(1, max(lags) + 1):
        if L in lags and -L in lags:
            best = L
        else:
            break
    return 2 * best + 1


def weight(positions, n):
    pos = list(positions)
    return sum(1 for a in pos for b in pos if a - b == n)


def positions_from_ies(ies):
    out = [0]
    for s in ies:
        out.append(out[-1] + s)
    return out


def lag_truth(angles_deg, powers, noise_power, L):
    """Exact coarray signal at lags -L..L."""
    n = np.arange(-L, L + 1)
    u = np.sin(np.deg2rad(np.asarray(angles_deg)))
    z = (np.asarray(powers)[None, :] * np.exp(1j * np.pi * np.outer(n, u))).sum(axis=1)
    z[L] += noise_power
    return z
