"""Shared oracles: finite differences and straight-line reference networks."""

import numpy as np

from elastodyn import autodiff as ad


def fd_grad(f, theta, h=1e-5):
    """Central-difference gradient of a scalar function of a flat vector."""
    theta = np.asarray(theta, dtype=float)
    g = np.zeros_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (f(up) - f(dn)) / (2.0 * h)
    return g


def fd_second(f, x, h=1e-3):
    """Central second difference of a scalar function of a scalar."""
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / h**2


def fd_first(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def max_rel_err(got, want, floor=1e-8):
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    denom = np.maximum(np.abs(want), floor)
    return float(np.max(np.abs(got - want) / denom))


def tiny_mlp_loss(theta, x, n_in=2, n_hidden=8):
    """Plain-numpy scalar loss of a 2-layer tanh MLP (oracle network)."""
    theta = np.asarray(theta, dtype=float)
    w1 = theta[:n_in * n_hidden].reshape(n_in, n_hidden)
    b1 = theta[n_in * n_hidden:n_in * n_hidden + n_hidden]
    rest = theta[n_in * n_hidden + n_hidden:]
    w2 = rest[:n_hidden].reshape(n_hidden, 1)
    b2 = rest[n_hidden]
    h = np.tanh(x @ w1 + b1)
    out = h @ w2 + b2
    return float(np.mean(np.square(out)))


def tiny_mlp_loss_tracked(theta, x, n_in=2, n_hidden=8):
    """Same loss built on the tape; returns (loss Value, leaves)."""
    theta = np.asarray(theta, dtype=float)
    w1 = ad.Value(theta[:n_in * n_hidden].reshape(n_in, n_hidden))
    b1 = ad.Value(theta[n_in * n_hidden:n_in * n_hidden + n_hidden])
    rest = theta[n_in * n_hidden + n_hidden:]
    w2 = ad.Value(rest[:n_hidden].reshape(n_hidden, 1))
    b2 = ad.Value(np.asarray(rest[n_hidden]))
    h = ad.tanh(ad.matmul(x, w1) + b1)
    out = ad.matmul(h, w2) + b2
    return ad.amean(ad.square(out)), [w1, b1, w2, b2]


def n_tiny(n_in=2, n_hidden=8):
    return n_in * n_hidden + n_hidden + n_hidden + 1
