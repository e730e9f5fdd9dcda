"""Adam-based training for the forward, inverse and surrogate modes.

One gradient step = one shuffled data batch plus one fresh Latin
hypercube collocation batch; the total loss is the weighted sum of the
per-output data misfits and the per-residual equation losses.  In inverse
mode two extra raw trainables are appended to the parameter vector and
mapped to the scaled Lame constants; in surrogate mode the scaled shear
modulus rides along as an extra network input and collocation dimension.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import autodiff as ad
from . import data as data_mod
from . import network
from . import physics
from . import sampling
from .network import NetworkDims

MODES = ("forward", "inverse", "surrogate")
MAPPINGS = ("linear", "sigmoid", "tanh")


class UnsupportedInversePresetWarning(UserWarning):
    """Inverse preset other than sigmoid + hard constraints."""


class TrainingDiverged(RuntimeError):
    """Total loss went non-finite; carries the last good state."""

    def __init__(self, message, pack, history):
        super().__init__(message)
        self.pack = pack
        self.history = history


# ---------------------------------------------------------------------------
# Optimizer


@dataclass
class AdamState:
    """First/second moment accumulators plus hyperparameters."""

    m: np.ndarray
    v: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr: float = 1e-3

    @classmethod
    def fresh(cls, n, lr=1e-3):
        return cls(m=np.zeros(n), v=np.zeros(n), lr=lr)


def adam_step(state, params, gradient):
    """One Adam update with bias correction; returns (new state, new params)."""
    g = np.asarray(gradient, dtype=float)
    params = np.asarray(params, dtype=float)
    if g.shape != params.shape or g.shape != state.m.shape:
        raise ValueError("parameter/gradient/state shapes disagree")
    if not np.all(np.isfinite(g)):
        raise ad.NonFiniteError(
            f"non-finite gradient at optimizer step {state.step_count + 1}")
    t = state.step_count + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, m=m, v=v, step_count=t), new_params


def lr_schedule(epoch, stages):
    """Piecewise-constant learning rate; ``stages`` is [(epochs, lr), ...]."""
    epoch = int(epoch)
    if epoch < 0:
        raise ValueError("epoch must be nonnegative")
    start = 0
    for n_epochs, lr in stages:
        if epoch < start + n_epochs:
            return float(lr)
        start += n_epochs
    raise ValueError(f"epoch {epoch} beyond the {start} scheduled epochs")


# ---------------------------------------------------------------------------
# Output transform and material mapping


def apply_output_transform(raw_outputs, point, hard_bc):
    """Multiply displacement heads by x* so u = 0 at the clamped end x = 0.

    Stress heads pass through.  ``point`` may be a plain array or the input
    jet, in which case the multiplier carries the matching derivative seeds
    so that residual derivatives see the transform exactly.
    """
    if not hard_bc:
        return raw_outputs
    n_out = ad.payload(raw_outputs).shape[-1]
    n_disp = 2 if n_out == 5 else 3

    def tile(col_vals, rest):
        # x* (or its seed) spread over the displacement heads, `rest` elsewhere
        arr = np.asarray(col_vals, dtype=float)
        m = np.full(arr.shape + (n_out,), rest)
        m[..., :n_disp] = arr[..., None]
        return m

    def seed_or_zero(comp):
        if not isinstance(comp, np.ndarray):
            return 0.0
        x_col = comp[..., 0]
        return tile(x_col, 0.0) if x_col.any() else 0.0

    if isinstance(point, ad.MultiJet):
        mult = ad.MultiJet(tile(ad.payload(point.value)[..., 0], 1.0),
                           seed_or_zero(point.d1), seed_or_zero(point.e1), 0.0)
    elif isinstance(point, ad.Jet2):
        mult = ad.Jet2(tile(ad.payload(point.value)[..., 0], 1.0),
                       seed_or_zero(point.d1), 0.0)
    else:
        arr = ad.payload(point)[..., 0] if ad.payload(point).ndim > 1 \
            else ad.payload(point)[0]
        mult = tile(arr, 1.0)
    return raw_outputs * mult


def map_material(raw, mapping, lam_c):
    """Scaled moduli from the raw trainables: lam* = f(N_lam), mu* = f(N_mu);
    physical values are lam_c * lam*, mu_c * mu* (mu_c == lam_c)."""
    if mapping not in MAPPINGS:
        raise ValueError(f"mapping must be one of {MAPPINGS}, got {mapping!r}")
    n_lam, n_mu = raw
    f = {"linear": lambda x: x, "sigmoid": ad.sigmoid, "tanh": ad.tanh}[mapping]
    lam_star, mu_star = f(n_lam), f(n_mu)
    return lam_star, mu_star, lam_c * lam_star, lam_c * mu_star


# ---------------------------------------------------------------------------
# Configuration and trainable state


@dataclass
class TrainConfig:
    mode: str
    dims: NetworkDims
    stages: tuple  # ((epochs, lr), ...); lr non-increasing across stages
    batch_size: int
    n_collocation: int
    seed: int
    material: Optional[physics.MaterialParams] = None
    alpha: Optional[tuple] = None
    lam1: float = 1.0
    lam2: float = 1.0
    mapping: str = "sigmoid"
    hard_bc: Optional[bool] = None
    checkpoint_every: int = 100
    checkpoint_dir: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        self.dims = NetworkDims(*self.dims)
        self.stages = tuple((int(n), float(lr)) for n, lr in self.stages)
        if any(n < 0 or lr <= 0 for n, lr in self.stages):
            raise ValueError("stages need nonnegative epochs and positive lr")
        lrs = [lr for _, lr in self.stages]
        if any(b > a for a, b in zip(lrs, lrs[1:])):
            raise ValueError("stage learning rates must be non-increasing")
        if self.batch_size < 1 or self.n_collocation < 1:
            raise ValueError("batch_size and n_collocation must be positive")
        if self.mapping not in MAPPINGS:
            raise ValueError(f"mapping must be one of {MAPPINGS}")
        if self.hard_bc is None:
            self.hard_bc = self.mode == "inverse"
        if self.alpha is None:
            n_eqn = 5 if self.dims.n_out == 5 else 9
            self.alpha = tuple([1e3, 1e3] + [1.0] * (n_eqn - 2)) \
                if self.mode == "surrogate" and n_eqn == 5 else (1.0,) * n_eqn
        self.alpha = tuple(float(a) for a in self.alpha)

    @property
    def total_epochs(self):
        return sum(n for n, _ in self.stages)


@dataclass
class TrainablePack:
    """Everything the optimizer touches, plus how outputs are interpreted."""

    net: network.ModifiedMlpParams
    extra: Optional[tuple] = None  # (N_lam, N_mu) raw trainables
    mapping: str = "sigmoid"
    hard_bc: bool = False

    def theta(self):
        vec = self.net.to_vector()
        if self.extra is not None:
            vec = np.concatenate([vec, np.asarray(self.extra, dtype=float)])
        return vec


@dataclass
class StepRecord:
    epoch: int
    step: int
    data_terms: tuple
    eqn_terms: tuple
    data_total: float
    eqn_total: float
    total: float
    lr: float
    lam: Optional[float] = None
    mu: Optional[float] = None


@dataclass
class TrainResult:
    pack: TrainablePack
    history: list
    recovered: Optional[physics.MaterialParams] = None
    scales: Optional[physics.ScaleSet] = None


# ---------------------------------------------------------------------------
# Problem assembly


def scale_points(points, scales, schema):
    """Physical coordinates -> scaled network inputs, per schema column order."""
    points = np.asarray(points, dtype=float)
    spatial = 3 if schema.startswith("3d") else 2
    div = [scales.l_c] * spatial + [scales.t_c]
    if schema.endswith("surrogate"):
        div.append(scales.mu_c)
    return points / np.asarray(div)


class TrainingProblem:
    """Precomputed arrays and the per-step loss/gradient evaluation."""

    def __init__(self, config, dataset, scales):
        if len(dataset) == 0:
            raise ValueError("training dataset is empty")
        self.config = config
        self.dataset = dataset
        self.scales = scales
        self.spatial = dataset.spatial_dim()

        n_in = len(dataset.coord_names())
        n_out = len(dataset.field_names())
        if (config.dims.n_in, config.dims.n_out) != (n_in, n_out):
            raise ValueError(
                f"network dims {config.dims.n_in}->{config.dims.n_out} do not "
                f"match schema {dataset.schema} ({n_in}->{n_out})")
        if config.mode == "surrogate" and not dataset.has_mu():
            raise ValueError("surrogate mode needs a dataset with a mu column")
        if config.mode != "surrogate" and dataset.has_mu():
            raise ValueError(f"schema {dataset.schema} is surrogate-only")
        if config.material is None:
            # inverse mode still needs the (known) density from here
            raise ValueError(f"{config.mode} mode needs material parameters")

        self.x = scale_points(dataset.points, scales, dataset.schema)
        self.y = dataset.fields / scales.field_scales()
        self.n_net = network.n_params(config.dims)
        self.bounds = self._collocation_bounds()
        self.rho_star = self._rho() / scales.rho_c

        if config.mode == "inverse" and (config.mapping != "sigmoid"
                                         or not config.hard_bc):
            warnings.warn(
                "inverse preset other than sigmoid mapping with hard "
                "displacement constraints: these combinations are known to "
                "converge to nonphysical minima (lam + 2*mu -> 0) and are "
                "unsupported", UnsupportedInversePresetWarning, stacklevel=3)

    def _rho(self):
        if self.config.material is not None:
            return self.config.material.rho
        raise ValueError("density must be supplied through config.material")

    def _collocation_bounds(self):
        s = self.scales
        geo = self.dataset.geometry
        bounds = [(geo[i, 0] / s.l_c, geo[i, 1] / s.l_c) for i in range(self.spatial)]
        t = self.dataset.times()
        bounds.append((float(t.min()) / s.t_c, float(t.max()) / s.t_c))
        if self.dataset.has_mu():
            mu = self.dataset.points[:, -1]
            lo, hi = float(mu.min()) / s.mu_c, float(mu.max()) / s.mu_c
            if not lo < hi:
                raise ValueError("surrogate training needs at least two distinct "
                                 "mu values to span a collocation range")
            bounds.append((lo, hi))
        return np.asarray(bounds)

    def init_theta(self):
        net = network.init(self.config.dims, self.config.seed)
        vec = net.to_vector()
        if self.config.mode == "inverse":
            vec = np.concatenate([vec, np.zeros(2)])  # sigmoid(0) = 0.5 each
        return vec

    def pack(self, theta):
        net = network.from_vector(self.config.dims, theta[:self.n_net])
        extra = tuple(theta[self.n_net:]) if self.config.mode == "inverse" else None
        return TrainablePack(net, extra, self.config.mapping,
                             bool(self.config.hard_bc))

    def recovered_lam_mu(self, theta):
        _, _, lam, mu = map_material(theta[self.n_net:], self.config.mapping,
                                     self.scales.lam_c)
        return float(lam), float(mu)

    def recovered_material(self, theta):
        """Recovered moduli as MaterialParams, or None when the mapping
        produced nonphysical (non-positive) values."""
        if self.config.mode != "inverse":
            return None
        lam, mu = self.recovered_lam_mu(theta)
        if lam <= 0 or mu <= 0:
            return None
        return physics.MaterialParams(lam, mu, self._rho())

    def stars(self, extra_values, colloc_pts):
        cfg = self.config
        if cfg.mode == "inverse":
            lam_star, mu_star, _, _ = map_material(extra_values, cfg.mapping, 1.0)
            return lam_star, mu_star, self.rho_star
        lam_star = cfg.material.lam / self.scales.lam_c
        if cfg.mode == "surrogate":
            mu_star = colloc_pts[:, -1]
        else:
            mu_star = cfg.material.mu / self.scales.mu_c
        return lam_star, mu_star, self.rho_star

    def loss_and_grad(self, theta, data_idx, colloc_pts):
        """LossBreakdown (Value total) and flat gradient at ``theta``."""
        cfg = self.config
        lifted, leaves = network.from_vector(cfg.dims, theta[:self.n_net]).lifted()
        extra_vals = None
        if cfg.mode == "inverse":
            extra_vals = (ad.Value(theta[self.n_net]), ad.Value(theta[self.n_net + 1]))
            leaves = leaves + list(extra_vals)

        def net_fn(xin):
            return network.forward(lifted, xin)

        transform = None
        if cfg.hard_bc:
            def transform(out, xin):
                return apply_output_transform(out, xin, True)

        xb = self.x[data_idx]
        pred = net_fn(xb)
        if transform is not None:
            pred = transform(pred, xb)
        data_terms = physics.data_loss(pred, self.y[data_idx])

        if self.spatial == 2:
            fe = physics.field_eval_2d(net_fn, colloc_pts, transform)
            res = physics.residual_2d(fe, self.stars(extra_vals, colloc_pts),
                                      self.scales)
        else:
            fe = physics.field_eval_3d(net_fn, colloc_pts, transform)
            res = physics.residual_3d(fe, self.stars(extra_vals, colloc_pts),
                                      self.scales)
        eqn_terms = tuple(ad.amean(ad.square(r)) for r in res)
        breakdown = physics.total_loss(data_terms, eqn_terms, cfg.alpha,
                                       cfg.lam1, cfg.lam2)
        gradient = ad.grad(breakdown.total, leaves)
        return breakdown, gradient

    def collocation(self, step):
        batch = sampling.lhs(self.config.n_collocation, self.bounds,
                             seed=[self.config.seed, 7919, step])
        return batch.points


def train(config, dataset, scales):
    """Run the configured optimization; returns pack, history and, in
    inverse mode, the recovered material parameters."""
    problem = TrainingProblem(config, dataset, scales)
    theta = problem.init_theta()
    adam = AdamState.fresh(theta.size)
    history = []
    step = 0
    n = len(dataset)
    batch_size = min(config.batch_size, n)
    for epoch in range(config.total_epochs):
        lr = lr_schedule(epoch, config.stages)
        adam = replace(adam, lr=lr)
        for idx in sampling.epoch_batches(n, batch_size, config.seed, epoch):
            colloc = problem.collocation(step)
            try:
                breakdown, gradient = problem.loss_and_grad(theta, idx, colloc)
                adam, theta = adam_step(adam, theta, gradient)
            except ad.NonFiniteError as err:
                raise TrainingDiverged(
                    f"diverged at epoch {epoch} step {step}: {err}",
                    problem.pack(theta), history) from err
            history.append(_record(problem, epoch, step, breakdown, lr, theta))
            step += 1
        if (config.checkpoint_dir is not None
                and config.checkpoint_every > 0
                and (epoch + 1) % config.checkpoint_every == 0):
            save_pack(f"{config.checkpoint_dir}/checkpoint.json",
                      problem.pack(theta))
    return TrainResult(problem.pack(theta), history,
                       problem.recovered_material(theta), scales)


def _record(problem, epoch, step, breakdown, lr, theta):
    fb = breakdown.to_floats()
    lam = mu = None
    if problem.config.mode == "inverse":
        lam, mu = problem.recovered_lam_mu(theta)
    return StepRecord(epoch, step, fb.data_terms, fb.eqn_terms,
                      fb.data_total, fb.eqn_total, fb.total, lr, lam, mu)


# ---------------------------------------------------------------------------
# Prediction and persistence


def predict(pack, scales, points, schema):
    """Physical-unit field predictions at physical-unit points."""
    x = scale_points(points, scales, schema)
    out = network.forward(pack.net, x)
    out = apply_output_transform(out, x, pack.hard_bc)
    return ad.payload(out) * scales.field_scales()


def evaluate_nrmse(pack, scales, reference):
    """Per-field NRMSE of pack predictions against a reference dataset."""
    pred = predict(pack, scales, reference.points, reference.schema)
    return {name: data_mod.nrmse(pred[:, j], reference.fields[:, j])
            for j, name in enumerate(reference.field_names())}


def history_csv_rows(history, field_names, eqn_names, inverse):
    """Header plus formatted rows for the loss-history CSV."""
    header = ["epoch", "step", "L_data_total", "L_eqn_total"]
    header += [f"data_{n}" for n in field_names]
    header += [f"eqn_{n}" for n in eqn_names]
    header += ["lr"]
    if inverse:
        header += ["lam", "mu"]
    rows = [header]
    for rec in history:
        row = [str(rec.epoch), str(rec.step), repr(rec.data_total),
               repr(rec.eqn_total)]
        row += [repr(v) for v in rec.data_terms]
        row += [repr(v) for v in rec.eqn_terms]
        row += [repr(rec.lr)]
        if inverse:
            row += [repr(rec.lam), repr(rec.mu)]
        rows.append(row)
    return rows


EQN_NAMES_2D = ("x", "y", "xx", "yy", "xy")
EQN_NAMES_3D = ("x", "y", "z", "xx", "yy", "zz", "xy", "yz", "xz")


def write_history_csv(path, history, dataset, mode):
    eqn = EQN_NAMES_2D if dataset.spatial_dim() == 2 else EQN_NAMES_3D
    rows = history_csv_rows(history, dataset.field_names(), eqn,
                            inverse=(mode == "inverse"))
    with open(path, "w") as fh:
        for row in rows:
            fh.write(",".join(row) + "\n")


def save_pack(path, pack):
    blob = {
        "dims": list(pack.net.dims),
        "theta_net": [float(v) for v in pack.net.to_vector()],
        "extra": None if pack.extra is None else [float(v) for v in pack.extra],
        "mapping": pack.mapping,
        "hard_bc": bool(pack.hard_bc),
    }
    with open(path, "w") as fh:
        json.dump(blob, fh)


def load_pack(path):
    with open(path) as fh:
        blob = json.load(fh)
    dims = NetworkDims(*blob["dims"])
    net = network.from_vector(dims, np.asarray(blob["theta_net"], dtype=float))
    extra = None if blob["extra"] is None else tuple(blob["extra"])
    return TrainablePack(net, extra, blob["mapping"], blob["hard_bc"])
