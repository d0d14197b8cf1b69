import numpy as np


def random_points(rng, n, rmin=0.5, rmax=20.0):
    """Uniform directions, log-uniform radii."""
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = np.exp(rng.uniform(np.log(rmin), np.log(rmax), size=n))
    return d * r[:, None]


def fd_grad(f, x, h=1e-5):
    """Central differences; the derivative axis is appended last."""
    x = np.asarray(x, dtype=float)
    out = []
    for l in range(3):
        e = np.zeros(3)
        e[l] = h
        out.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.stack(out, axis=-1)


def fd_laplacian(f, x, h=1e-3):
    x = np.asarray(x, dtype=float)
    tot = -6 * np.asarray(f(x))
    for l in range(3):
        e = np.zeros(3)
        e[l] = h
        tot = tot + f(x + e) + f(x - e)
    return tot / h ** 2
