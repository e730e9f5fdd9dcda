"""Scaled elastodynamic residual operators and loss assembly.

Everything here lives in scaled (starred) variables: coordinates divided
by the length/time scales, fields divided by their per-field scales, and
moduli divided by a common modulus scale.  The residual operators return
the bracketed expressions of the scaled momentum-balance and constitutive
relations; squaring and averaging them gives the equation-loss terms.

Residual operators accept plain arrays, tape Values or jet components,
so the same code serves oracle checks and gradient-based training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import autodiff as ad


@dataclass(frozen=True)
class MaterialParams:
    """Lame constants (MPa) and density (kg/mm^3)."""

    lam: float
    mu: float
    rho: float

    def __post_init__(self):
        if not (self.lam > 0 and self.mu > 0 and self.rho > 0):
            raise ValueError("material parameters must be strictly positive")
        if not all(map(math.isfinite, (self.lam, self.mu, self.rho))):
            raise ValueError("material parameters must be finite")

    def star(self, scales):
        """Scaled (lam*, mu*, rho*) under the given scale set."""
        return (self.lam / scales.lam_c, self.mu / scales.mu_c,
                self.rho / scales.rho_c)

    @property
    def p_speed(self):
        return math.sqrt((self.lam + 2.0 * self.mu) / self.rho)

    @property
    def s_speed(self):
        return math.sqrt(self.mu / self.rho)


@dataclass(frozen=True)
class ScaleSet:
    """Characteristic scales; one per coordinate and field, plus moduli.

    The spatial scales share a single length l_c, and the modulus scale is
    shared between both Lame constants (mu_c == lam_c).  Optional members
    are present only for 3D problems.
    """

    l_c: float
    t_c: float
    u_x_c: float
    u_y_c: float
    s_xx_c: float
    s_yy_c: float
    s_xy_c: float
    lam_c: float
    rho_c: float
    u_z_c: Optional[float] = None
    s_zz_c: Optional[float] = None
    s_yz_c: Optional[float] = None
    s_xz_c: Optional[float] = None

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if v is None:
                continue
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"scale {name} must be strictly positive, got {v}")

    @property
    def mu_c(self):
        return self.lam_c

    @property
    def is3d(self):
        return self.u_z_c is not None

    def field_scales(self):
        """Per-output scales in network output order."""
        if self.is3d:
            return np.array([self.u_x_c, self.u_y_c, self.u_z_c, self.s_xx_c,
                             self.s_yy_c, self.s_zz_c, self.s_xy_c,
                             self.s_yz_c, self.s_xz_c])
        return np.array([self.u_x_c, self.u_y_c, self.s_xx_c, self.s_yy_c,
                         self.s_xy_c])

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


_SCALE_OF_FIELD = {
    "u_x": "u_x_c", "u_y": "u_y_c", "u_z": "u_z_c",
    "s_xx": "s_xx_c", "s_yy": "s_yy_c", "s_zz": "s_zz_c",
    "s_xy": "s_xy_c", "s_yz": "s_yz_c", "s_xz": "s_xz_c",
}


def make_scales(reference, overrides=None, material=None):
    """Scale set from a reference dataset: each scale is the field's max |.|.

    ``overrides`` maps scale names (e.g. ``"lam_c"``, ``"u_x_c"``) to values
    and wins over the dataset; inverse problems must override ``lam_c``
    since the moduli are unknown.  ``material``, when given, supplies the
    defaults for ``lam_c`` (max of the Lame constants) and ``rho_c``.
    A field whose maximum is zero has no usable scale; that is an error
    directing the caller to the override.
    """
    overrides = dict(overrides or {})
    names = list(reference.field_names())
    got = {}

    def take(key, default):
        if key in overrides:
            got[key] = float(overrides.pop(key))
        else:
            if default is None:
                raise ValueError(f"no value for scale {key}; pass overrides={{{key!r}: ...}}")
            if default == 0:
                raise ValueError(
                    f"field for scale {key} is identically zero; "
                    f"pass overrides={{{key!r}: ...}}")
            got[key] = float(default)

    spatial = reference.spatial_dim()
    take("l_c", float(np.max(np.abs(reference.points[:, :spatial]))))
    take("t_c", float(np.max(np.abs(reference.points[:, spatial]))))
    for name in names:
        col = reference.fields[:, names.index(name)]
        take(_SCALE_OF_FIELD[name], float(np.max(np.abs(col))))
    take("lam_c", max(material.lam, material.mu) if material is not None else None)
    take("rho_c", material.rho if material is not None else None)
    if overrides:
        raise ValueError(f"unknown scale overrides: {sorted(overrides)}")
    return ScaleSet(**got)


# ---------------------------------------------------------------------------
# Field evaluations: outputs plus the jets the residuals need, at a batch of
# scaled points.  Components are arrays for oracle checks and Values during
# training.


@dataclass
class FieldEval2D:
    sxx: object
    syy: object
    sxy: object
    dsxx_dx: object
    dsyy_dy: object
    dsxy_dx: object
    dsxy_dy: object
    dux_dx: object
    dux_dy: object
    duy_dx: object
    duy_dy: object
    d2ux_dtt: object
    d2uy_dtt: object


@dataclass
class FieldEval3D:
    sxx: object
    syy: object
    szz: object
    sxy: object
    syz: object
    sxz: object
    dsxx_dx: object
    dsyy_dy: object
    dszz_dz: object
    dsxy_dx: object
    dsxy_dy: object
    dsyz_dy: object
    dsyz_dz: object
    dsxz_dx: object
    dsxz_dz: object
    dux_dx: object
    dux_dy: object
    dux_dz: object
    duy_dx: object
    duy_dy: object
    duy_dz: object
    duz_dx: object
    duz_dy: object
    duz_dz: object
    d2ux_dtt: object
    d2uy_dtt: object
    d2uz_dtt: object


def _jet_pass(net_fn, pts, n_spatial):
    """Single multi-jet forward pass over scaled points.

    The input carries one stacked first-derivative slab per spatial
    coordinate and a second-order channel along the time coordinate; extra
    trailing inputs (the surrogate modulus column) are never seeded.
    Returns the output MultiJet.
    """
    pts = np.asarray(pts, dtype=float)
    spatial_seeds = np.zeros((n_spatial,) + pts.shape)
    for k in range(n_spatial):
        spatial_seeds[k, :, k] = 1.0
    time_seed = np.zeros_like(pts)
    time_seed[:, n_spatial] = 1.0
    return net_fn(ad.MultiJet(pts, spatial_seeds, time_seed, 0.0))


def field_eval_2d(net_fn, pts, transform=None):
    """FieldEval2D of a network over scaled points (x*, y*, t*[, mu*])."""
    out = _jet_pass(_wrap(net_fn, transform), pts, 2)
    col = ad.column
    dx = ad.take0(out.d1, 0)
    dy = ad.take0(out.d1, 1)
    return FieldEval2D(
        sxx=col(out.value, 2), syy=col(out.value, 3), sxy=col(out.value, 4),
        dsxx_dx=col(dx, 2), dsyy_dy=col(dy, 3),
        dsxy_dx=col(dx, 4), dsxy_dy=col(dy, 4),
        dux_dx=col(dx, 0), dux_dy=col(dy, 0),
        duy_dx=col(dx, 1), duy_dy=col(dy, 1),
        d2ux_dtt=col(out.e2, 0), d2uy_dtt=col(out.e2, 1),
    )


def field_eval_3d(net_fn, pts, transform=None):
    """FieldEval3D of a network over scaled points (x*, y*, z*, t*[, mu*])."""
    out = _jet_pass(_wrap(net_fn, transform), pts, 3)
    col = ad.column
    dx = ad.take0(out.d1, 0)
    dy = ad.take0(out.d1, 1)
    dz = ad.take0(out.d1, 2)
    return FieldEval3D(
        sxx=col(out.value, 3), syy=col(out.value, 4), szz=col(out.value, 5),
        sxy=col(out.value, 6), syz=col(out.value, 7), sxz=col(out.value, 8),
        dsxx_dx=col(dx, 3), dsyy_dy=col(dy, 4), dszz_dz=col(dz, 5),
        dsxy_dx=col(dx, 6), dsxy_dy=col(dy, 6),
        dsyz_dy=col(dy, 7), dsyz_dz=col(dz, 7),
        dsxz_dx=col(dx, 8), dsxz_dz=col(dz, 8),
        dux_dx=col(dx, 0), dux_dy=col(dy, 0), dux_dz=col(dz, 0),
        duy_dx=col(dx, 1), duy_dy=col(dy, 1), duy_dz=col(dz, 1),
        duz_dx=col(dx, 2), duz_dy=col(dy, 2), duz_dz=col(dz, 2),
        d2ux_dtt=col(out.e2, 0), d2uy_dtt=col(out.e2, 1), d2uz_dtt=col(out.e2, 2),
    )


def _wrap(net_fn, transform):
    if transform is None:
        return net_fn
    return lambda x: transform(net_fn(x), x)


def scaled_field_eval(derivs, scales):
    """FieldEval from a dict of physical-unit fields and derivatives.

    ``derivs`` uses the naming of :func:`elastodyn.data.wave_derivs`
    (``u_x``, ``s_xy``, ``d_s_xx_dx``, ``d2_u_x_dtt``, ...).  Chain rule:
    a scaled derivative d q*/d a* equals (a_c / q_c) dq/da.
    """
    s = scales
    l = s.l_c
    t2 = s.t_c**2

    def f(name, scale):
        return derivs[name] / scale

    def dx(name, scale):
        return derivs[name] * (l / scale)

    def dtt(name, scale):
        return derivs[name] * (t2 / scale)

    if not s.is3d:
        return FieldEval2D(
            sxx=f("s_xx", s.s_xx_c), syy=f("s_yy", s.s_yy_c), sxy=f("s_xy", s.s_xy_c),
            dsxx_dx=dx("d_s_xx_dx", s.s_xx_c), dsyy_dy=dx("d_s_yy_dy", s.s_yy_c),
            dsxy_dx=dx("d_s_xy_dx", s.s_xy_c), dsxy_dy=dx("d_s_xy_dy", s.s_xy_c),
            dux_dx=dx("d_u_x_dx", s.u_x_c), dux_dy=dx("d_u_x_dy", s.u_x_c),
            duy_dx=dx("d_u_y_dx", s.u_y_c), duy_dy=dx("d_u_y_dy", s.u_y_c),
            d2ux_dtt=dtt("d2_u_x_dtt", s.u_x_c), d2uy_dtt=dtt("d2_u_y_dtt", s.u_y_c),
        )
    return FieldEval3D(
        sxx=f("s_xx", s.s_xx_c), syy=f("s_yy", s.s_yy_c), szz=f("s_zz", s.s_zz_c),
        sxy=f("s_xy", s.s_xy_c), syz=f("s_yz", s.s_yz_c), sxz=f("s_xz", s.s_xz_c),
        dsxx_dx=dx("d_s_xx_dx", s.s_xx_c), dsyy_dy=dx("d_s_yy_dy", s.s_yy_c),
        dszz_dz=dx("d_s_zz_dz", s.s_zz_c),
        dsxy_dx=dx("d_s_xy_dx", s.s_xy_c), dsxy_dy=dx("d_s_xy_dy", s.s_xy_c),
        dsyz_dy=dx("d_s_yz_dy", s.s_yz_c), dsyz_dz=dx("d_s_yz_dz", s.s_yz_c),
        dsxz_dx=dx("d_s_xz_dx", s.s_xz_c), dsxz_dz=dx("d_s_xz_dz", s.s_xz_c),
        dux_dx=dx("d_u_x_dx", s.u_x_c), dux_dy=dx("d_u_x_dy", s.u_x_c),
        dux_dz=dx("d_u_x_dz", s.u_x_c),
        duy_dx=dx("d_u_y_dx", s.u_y_c), duy_dy=dx("d_u_y_dy", s.u_y_c),
        duy_dz=dx("d_u_y_dz", s.u_y_c),
        duz_dx=dx("d_u_z_dx", s.u_z_c), duz_dy=dx("d_u_z_dy", s.u_z_c),
        duz_dz=dx("d_u_z_dz", s.u_z_c),
        d2ux_dtt=dtt("d2_u_x_dtt", s.u_x_c), d2uy_dtt=dtt("d2_u_y_dtt", s.u_y_c),
        d2uz_dtt=dtt("d2_u_z_dtt", s.u_z_c),
    )


# ---------------------------------------------------------------------------
# Residual operators


def _stars(mat, scales):
    if isinstance(mat, MaterialParams):
        return mat.star(scales)
    lam_star, mu_star, rho_star = mat
    return lam_star, mu_star, rho_star


def residual_2d(f, mat, s, source=None):
    """Five scaled residuals (r_x, r_y, r_xx, r_yy, r_xy) at each point.

    ``mat`` is a MaterialParams or a (lam*, mu*, rho*) triple; the triple
    may hold per-point arrays or tape nodes (inverse / surrogate modes).
    ``source`` is an optional 2-vector body-force term already expressed in
    the units of the momentum residuals; it defaults to zero, matching the
    body-force-free equations.
    """
    lam_star, mu_star, rho_star = _stars(mat, s)
    pre_x = (s.u_x_c * s.rho_c * s.l_c) / (s.s_xx_c * s.t_c**2)
    pre_y = (s.u_y_c * s.rho_c * s.l_c) / (s.s_xx_c * s.t_c**2)
    r_x = f.dsxx_dx + (s.s_xy_c / s.s_xx_c) * f.dsxy_dy \
        - pre_x * (rho_star * f.d2ux_dtt)
    r_y = (s.s_xy_c / s.s_xx_c) * f.dsxy_dx + (s.s_yy_c / s.s_xx_c) * f.dsyy_dy \
        - pre_y * (rho_star * f.d2uy_dtt)
    lam2mu = lam_star + 2.0 * mu_star
    r_xx = (s.s_xx_c * s.l_c) / (s.u_y_c * s.lam_c) * f.sxx \
        - (s.u_x_c / s.u_y_c) * (lam2mu * f.dux_dx) - lam_star * f.duy_dy
    r_yy = (s.s_yy_c * s.l_c) / (s.u_y_c * s.lam_c) * f.syy \
        - (s.u_x_c / s.u_y_c) * (lam_star * f.dux_dx) - lam2mu * f.duy_dy
    r_xy = (s.s_xy_c * s.l_c) / (s.u_y_c * s.lam_c) * f.sxy \
        - mu_star * (f.duy_dx + (s.u_x_c / s.u_y_c) * f.dux_dy)
    if source is not None:
        r_x = r_x - source[0]
        r_y = r_y - source[1]
    return r_x, r_y, r_xx, r_yy, r_xy


def residual_3d(f, mat, s, source=None):
    """Nine scaled residuals (r_x, r_y, r_z, r_xx, r_yy, r_zz, r_xy, r_yz, r_xz)."""
    lam_star, mu_star, rho_star = _stars(mat, s)
    pre = s.rho_c * s.l_c / (s.s_xx_c * s.t_c**2)
    r_x = f.dsxx_dx + (s.s_xy_c / s.s_xx_c) * f.dsxy_dy \
        + (s.s_xz_c / s.s_xx_c) * f.dsxz_dz \
        - (s.u_x_c * pre) * (rho_star * f.d2ux_dtt)
    r_y = (s.s_xy_c / s.s_xx_c) * f.dsxy_dx + (s.s_yy_c / s.s_xx_c) * f.dsyy_dy \
        + (s.s_yz_c / s.s_xx_c) * f.dsyz_dz \
        - (s.u_y_c * pre) * (rho_star * f.d2uy_dtt)
    r_z = (s.s_xz_c / s.s_xx_c) * f.dsxz_dx + (s.s_yz_c / s.s_xx_c) * f.dsyz_dy \
        + (s.s_zz_c / s.s_xx_c) * f.dszz_dz \
        - (s.u_z_c * pre) * (rho_star * f.d2uz_dtt)
    lam2mu = lam_star + 2.0 * mu_star
    kx = s.u_x_c / s.u_z_c
    ky = s.u_y_c / s.u_z_c
    r_xx = (s.s_xx_c * s.l_c) / (s.u_z_c * s.lam_c) * f.sxx \
        - kx * (lam2mu * f.dux_dx) - ky * (lam_star * f.duy_dy) \
        - lam_star * f.duz_dz
    r_yy = (s.s_yy_c * s.l_c) / (s.u_z_c * s.lam_c) * f.syy \
        - kx * (lam_star * f.dux_dx) - ky * (lam2mu * f.duy_dy) \
        - lam_star * f.duz_dz
    r_zz = (s.s_zz_c * s.l_c) / (s.u_z_c * s.lam_c) * f.szz \
        - kx * (lam_star * f.dux_dx) - ky * (lam_star * f.duy_dy) \
        - lam2mu * f.duz_dz
    r_xy = (s.s_xy_c * s.l_c) / (s.u_z_c * s.lam_c) * f.sxy \
        - mu_star * (ky * f.duy_dx + kx * f.dux_dy)
    r_yz = (s.s_yz_c * s.l_c) / (s.u_z_c * s.lam_c) * f.syz \
        - mu_star * (ky * f.duy_dz + f.duz_dy)
    r_xz = (s.s_xz_c * s.l_c) / (s.u_z_c * s.lam_c) * f.sxz \
        - mu_star * (kx * f.dux_dz + f.duz_dx)
    if source is not None:
        r_x = r_x - source[0]
        r_y = r_y - source[1]
        r_z = r_z - source[2]
    return r_x, r_y, r_z, r_xx, r_yy, r_zz, r_xy, r_yz, r_xz


# ---------------------------------------------------------------------------
# Loss assembly


@dataclass
class LossBreakdown:
    """Per-term losses with their weights; total = lam1*sum(data) + lam2*sum(a*eqn)."""

    data_terms: tuple
    eqn_terms: tuple
    alpha: tuple
    lam1: float
    lam2: float
    total: object

    def to_floats(self):
        return LossBreakdown(
            tuple(float(ad.payload(t)) for t in self.data_terms),
            tuple(float(ad.payload(t)) for t in self.eqn_terms),
            self.alpha, self.lam1, self.lam2, float(ad.payload(self.total)))

    @property
    def data_total(self):
        """Sum of the data terms (the lam1 weight is applied in ``total``)."""
        return sum(float(ad.payload(t)) for t in self.data_terms)

    @property
    def eqn_total(self):
        """Alpha-weighted sum of the equation terms."""
        return sum(a * float(ad.payload(t))
                   for a, t in zip(self.alpha, self.eqn_terms))


def data_loss(pred, ref):
    """Per-output mean-squared misfits between predictions and labels."""
    ref = np.asarray(ref, dtype=float)
    n, n_out = ref.shape
    if ad.payload(pred).shape != (n, n_out):
        raise ValueError(f"prediction shape {ad.payload(pred).shape} does not "
                         f"match labels {(n, n_out)}")
    return tuple(ad.amean(ad.square(ad.column(pred, j) - ref[:, j]))
                 for j in range(n_out))


def total_loss(data_terms, eqn_terms, alpha=None, lam1=1.0, lam2=1.0):
    """Weighted total; defaults lam1 = lam2 = 1 and all alpha = 1."""
    data_terms = tuple(data_terms)
    eqn_terms = tuple(eqn_terms)
    if len(data_terms) != len(eqn_terms) or len(data_terms) not in (5, 9):
        raise ValueError(f"expected 5+5 or 9+9 terms, got "
                         f"{len(data_terms)}+{len(eqn_terms)}")
    if alpha is None:
        alpha = (1.0,) * len(eqn_terms)
    alpha = tuple(float(a) for a in alpha)
    if len(alpha) != len(eqn_terms):
        raise ValueError("one alpha per equation term")
    if min(alpha) < 0 or lam1 < 0 or lam2 < 0:
        raise ValueError("loss weights must be nonnegative")
    data_sum = data_terms[0]
    for t in data_terms[1:]:
        data_sum = data_sum + t
    eqn_sum = alpha[0] * eqn_terms[0]
    for a, t in zip(alpha[1:], eqn_terms[1:]):
        eqn_sum = eqn_sum + a * t
    total = lam1 * data_sum + lam2 * eqn_sum
    return LossBreakdown(data_terms, eqn_terms, alpha, float(lam1), float(lam2),
                         total)
