"""Gated multilayer perceptron with two input encoders.

The forward pass mixes two encoded views of the input through per-layer
gates:

    u = tanh(x w1 + b1)            v = tanh(x w2 + b2)
    h1 = tanh(x wa + ba)
    z_l = tanh(h_l w_l + b_l)      h_{l+1} = (1 - z_l) * u + z_l * v
    output = h_L w_out + b_out     (linear head)

The first hidden affine map (wa, ba) takes the raw input; the remaining
hidden maps act as gates.  All activations are tanh, the head is linear.
Written against the generic ops in :mod:`elastodyn.autodiff`, so the same
code evaluates plain arrays, tape nodes and second-order jets.

Output column order is fixed:

* 2D (n_out=5):  u_x, u_y, s_xx, s_yy, s_xy
* 3D (n_out=9):  u_x, u_y, u_z, s_xx, s_yy, s_zz, s_xy, s_yz, s_xz

Surrogate variants append the scaled shear modulus as the last input
coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import autodiff as ad

OUTPUTS_2D = ("u_x", "u_y", "s_xx", "s_yy", "s_xy")
OUTPUTS_3D = ("u_x", "u_y", "u_z", "s_xx", "s_yy", "s_zz", "s_xy", "s_yz", "s_xz")


class NetworkDims(NamedTuple):
    n_in: int
    n_hidden: int
    n_layers: int
    n_out: int


@dataclass
class ModifiedMlpParams:
    """Weights and biases of the gated architecture.

    ``hidden[0]`` maps input -> hidden (produces h1); ``hidden[1:]`` are the
    hidden -> hidden gate maps.  Leaves may be numpy arrays or Value nodes;
    :meth:`lifted` produces the tracked variant for training.
    """

    dims: NetworkDims
    enc1_w: np.ndarray
    enc1_b: np.ndarray
    enc2_w: np.ndarray
    enc2_b: np.ndarray
    hidden: list  # [(w, b), ...], length dims.n_layers
    out_w: np.ndarray
    out_b: np.ndarray

    def leaves(self):
        """Parameter leaves in flat-vector order."""
        flat = [self.enc1_w, self.enc1_b, self.enc2_w, self.enc2_b]
        for w, b in self.hidden:
            flat += [w, b]
        flat += [self.out_w, self.out_b]
        return flat

    @property
    def n_params(self):
        return sum(int(np.size(ad.payload(a))) for a in self.leaves())

    def to_vector(self):
        return np.concatenate([ad.payload(a).ravel() for a in self.leaves()])

    def lifted(self):
        """Copy with Value leaves; returns (params, leaves in vector order)."""
        vals = [ad.Value(ad.payload(a)) for a in self.leaves()]
        it = iter(vals)
        enc1_w, enc1_b, enc2_w, enc2_b = next(it), next(it), next(it), next(it)
        hidden = [(next(it), next(it)) for _ in range(self.dims.n_layers)]
        out_w, out_b = next(it), next(it)
        lifted = ModifiedMlpParams(self.dims, enc1_w, enc1_b, enc2_w, enc2_b,
                                   hidden, out_w, out_b)
        return lifted, vals


def _layer_shapes(dims: NetworkDims):
    """(w_shape, b_shape) per leaf, in flat-vector order."""
    n_in, nh, nl, n_out = dims
    shapes = [((n_in, nh), (nh,)), ((n_in, nh), (nh,)), ((n_in, nh), (nh,))]
    shapes += [((nh, nh), (nh,))] * (nl - 1)
    shapes += [((nh, n_out), (n_out,))]
    return shapes


def init(dims, seed):
    """Glorot-uniform weights, zero biases; deterministic per seed."""
    dims = NetworkDims(*dims)
    if min(dims) <= 0:
        raise ValueError(f"all network dims must be positive, got {tuple(dims)}")
    rng = np.random.default_rng(seed)

    def glorot(shape):
        bound = np.sqrt(6.0 / (shape[0] + shape[1]))
        return rng.uniform(-bound, bound, size=shape)

    shapes = _layer_shapes(dims)
    pairs = [(glorot(ws), np.zeros(bs)) for ws, bs in shapes]
    enc1, enc2 = pairs[0], pairs[1]
    hidden = pairs[2:2 + dims.n_layers]
    out = pairs[-1]
    return ModifiedMlpParams(dims, enc1[0], enc1[1], enc2[0], enc2[1],
                             list(hidden), out[0], out[1])


def from_vector(dims, vec):
    """Rebuild params from a flat vector (inverse of ``to_vector``)."""
    dims = NetworkDims(*dims)
    vec = np.asarray(vec, dtype=float)
    arrays = []
    pos = 0
    for ws, bs in _layer_shapes(dims):
        for shape in (ws, bs):
            n = int(np.prod(shape))
            arrays.append(vec[pos:pos + n].reshape(shape))
            pos += n
    if pos != vec.size:
        raise ValueError(f"parameter vector has {vec.size} entries, expected {pos}")
    it = iter(arrays)
    enc1_w, enc1_b, enc2_w, enc2_b = next(it), next(it), next(it), next(it)
    hidden = [(next(it), next(it)) for _ in range(dims.n_layers)]
    out_w, out_b = next(it), next(it)
    return ModifiedMlpParams(dims, enc1_w, enc1_b, enc2_w, enc2_b, hidden,
                             out_w, out_b)


def n_params(dims):
    dims = NetworkDims(*dims)
    return sum(int(np.prod(ws)) + int(np.prod(bs)) for ws, bs in _layer_shapes(dims))


def forward(params, x):
    """Evaluate the network at ``x`` ((n_in,) or (N, n_in); array, Value or Jet2)."""
    n_in = params.dims.n_in
    shape = ad.payload(x).shape
    if shape[-1] != n_in:
        raise ValueError(f"input has {shape[-1]} coordinates, network expects {n_in}")
    u = ad.tanh(ad.matmul(x, params.enc1_w) + params.enc1_b)
    v = ad.tanh(ad.matmul(x, params.enc2_w) + params.enc2_b)
    w0, b0 = params.hidden[0]
    h = ad.tanh(ad.matmul(x, w0) + b0)
    if len(params.hidden) > 1:
        vu = v - u  # gate mix (1-z)*u + z*v written as u + z*(v-u)
        for w, b in params.hidden[1:]:
            z = ad.tanh(ad.matmul(h, w) + b)
            h = u + z * vu
    return ad.matmul(h, params.out_w) + params.out_b


# ---------------------------------------------------------------------------
# Parameter checkpoint file: plain text, one value per line after a header.
#
#   line 1:  "modified-mlp v1"
#   line 2:  "dims <n_in> <n_hidden> <n_layers> <n_out>"
#   lines 3..: repr() of each parameter in flat-vector order
#
# repr round-trips float64 exactly, so save/load is bit-exact.


def save_params(path, params):
    vec = params.to_vector()
    with open(path, "w") as fh:
        fh.write("modified-mlp v1\n")
        fh.write("dims %d %d %d %d\n" % tuple(params.dims))
        for v in vec:
            fh.write(repr(float(v)) + "\n")


def load_params(path):
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != "modified-mlp v1":
            raise ValueError(f"{path}: not a modified-mlp checkpoint (header {magic!r})")
        head = fh.readline().split()
        if len(head) != 5 or head[0] != "dims":
            raise ValueError(f"{path}: malformed dims header")
        dims = NetworkDims(*(int(t) for t in head[1:]))
        vec = np.array([float(line) for line in fh if line.strip()], dtype=float)
    if vec.size != n_params(dims):
        raise ValueError(f"{path}: expected {n_params(dims)} values, found {vec.size}")
    return from_vector(dims, vec)
