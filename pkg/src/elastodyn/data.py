"""Reference-solution management.

Labeled field datasets come either from CSV import (FEM or experimental
exports) or from manufactured plane-wave solutions, which satisfy the
homogeneous elastodynamic equations exactly and therefore double as the
verification oracle of the whole package.

CSV schema (comma separated, '.' decimal point, header row):

* ``2d``:            x,y,t,u_x,u_y,s_xx,s_yy,s_xy
* ``2d-surrogate``:  x,y,t,mu,u_x,u_y,s_xx,s_yy,s_xy
* ``3d``:            x,y,z,t,u_x,u_y,u_z,s_xx,s_yy,s_zz,s_xy,s_yz,s_xz
* ``3d-surrogate``:  x,y,z,t,mu,...same nine fields

Coordinates are mm and s, displacements mm, stresses MPa, the optional
``mu`` column MPa.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .physics import MaterialParams

_AXES = "xyz"

_COORDS = {
    "2d": ("x", "y", "t"),
    "2d-surrogate": ("x", "y", "t", "mu"),
    "3d": ("x", "y", "z", "t"),
    "3d-surrogate": ("x", "y", "z", "t", "mu"),
}
_FIELDS = {
    2: ("u_x", "u_y", "s_xx", "s_yy", "s_xy"),
    3: ("u_x", "u_y", "u_z", "s_xx", "s_yy", "s_zz", "s_xy", "s_yz", "s_xz"),
}

SCHEMAS = tuple(_COORDS)


def _check_schema(schema):
    if schema not in _COORDS:
        raise ValueError(f"unknown schema {schema!r}; expected one of {SCHEMAS}")


@dataclass
class ReferenceDataset:
    """Labeled displacement/stress samples at space-time(-mu) points.

    ``points`` columns follow the schema's coordinate order and ``fields``
    the network output order; everything is in physical units.
    """

    schema: str
    points: np.ndarray
    fields: np.ndarray
    geometry: np.ndarray  # (n_spatial, 2) box extents
    boundary_mask: np.ndarray
    provenance: str = "imported"

    def __post_init__(self):
        _check_schema(self.schema)
        self.points = np.asarray(self.points, dtype=float)
        self.fields = np.asarray(self.fields, dtype=float)
        self.geometry = np.asarray(self.geometry, dtype=float)
        self.boundary_mask = np.asarray(self.boundary_mask, dtype=bool)
        n_coord = len(_COORDS[self.schema])
        n_field = len(self.field_names())
        if self.points.ndim != 2 or self.points.shape[1] != n_coord:
            raise ValueError(f"points must be (N, {n_coord}) for schema {self.schema}")
        if self.fields.shape != (len(self.points), n_field):
            raise ValueError(f"fields must be (N, {n_field}) for schema {self.schema}")
        if self.geometry.shape != (self.spatial_dim(), 2):
            raise ValueError("geometry must give [lo, hi] per spatial axis")
        tol = 1e-9 * max(1.0, float(np.max(np.abs(self.geometry))))
        sp = self.points[:, :self.spatial_dim()]
        lo, hi = self.geometry[:, 0], self.geometry[:, 1]
        if np.any(sp < lo - tol) or np.any(sp > hi + tol):
            raise ValueError("dataset contains points outside the geometry extents")

    def coord_names(self):
        return _COORDS[self.schema]

    def field_names(self):
        return _FIELDS[self.spatial_dim()]

    def spatial_dim(self):
        return 3 if self.schema.startswith("3d") else 2

    def has_mu(self):
        return self.schema.endswith("surrogate")

    def time_col(self):
        return self.spatial_dim()

    def __len__(self):
        return len(self.points)

    def times(self):
        return self.points[:, self.time_col()]


def _boundary_mask(points, geometry, spatial):
    geometry = np.asarray(geometry, dtype=float)
    l_c = float(np.max(np.abs(geometry)))
    tol = 1e-9 * max(l_c, 1.0)
    sp = points[:, :spatial]
    lo, hi = geometry[:, 0], geometry[:, 1]
    return np.any((np.abs(sp - lo) <= tol) | (np.abs(sp - hi) <= tol), axis=1)


# ---------------------------------------------------------------------------
# Manufactured plane waves


@dataclass(frozen=True)
class PlaneWaveSpec:
    """A traveling elastic plane wave.

    ``kind`` 'P' (compressional, displacement along the travel axis) or
    'S' (shear, displacement along ``polarization``).  The displacement is
    A sin(k a - sign * omega * t) along the relevant axis, with
    omega = k * speed.  Two specs with opposite ``sign`` superpose into a
    standing wave, which vanishes at a = 0 for all times (handy for
    hard-constraint runs).
    """

    kind: str
    amplitude: float
    wavenumber: float
    axis: str
    material: MaterialParams
    polarization: Optional[str] = None
    sign: int = 1

    def __post_init__(self):
        if self.kind not in ("P", "S"):
            raise ValueError(f"kind must be 'P' or 'S', got {self.kind!r}")
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of {_AXES!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not (self.wavenumber > 0 and math.isfinite(self.amplitude)):
            raise ValueError("need positive wavenumber and finite amplitude")
        pol = self.polarization
        if self.kind == "P":
            if pol is not None and pol != self.axis:
                raise ValueError("P waves are polarized along their axis")
        elif pol is not None and (pol not in _AXES or pol == self.axis):
            raise ValueError("S-wave polarization must be a different axis")

    @property
    def speed(self):
        """Phase speed: sqrt((lam+2mu)/rho) for P, sqrt(mu/rho) for S."""
        return self.material.p_speed if self.kind == "P" else self.material.s_speed

    def pol_axis(self):
        if self.kind == "P":
            return self.axis
        if self.polarization is not None:
            return self.polarization
        return "y" if self.axis == "x" else "x"


def standing_wave(kind, amplitude, wavenumber, axis, material, polarization=None):
    """Two counter-propagating half-amplitude specs; their sum is
    A sin(k a) cos(omega t) along the polarization axis."""
    half = dict(kind=kind, amplitude=amplitude / 2.0, wavenumber=wavenumber,
                axis=axis, material=material, polarization=polarization)
    return [PlaneWaveSpec(sign=1, **half), PlaneWaveSpec(sign=-1, **half)]


def _as_spec_list(specs):
    if isinstance(specs, PlaneWaveSpec):
        specs = [specs]
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one wave spec")
    m0 = specs[0].material
    for sp in specs[1:]:
        if (sp.material.lam, sp.material.mu, sp.material.rho) != (m0.lam, m0.mu, m0.rho):
            raise ValueError("superposed waves must share one material")
    return specs


def wave_derivs(specs, x, y, t, z=None):
    """Exact fields and derivatives of a plane-wave superposition.

    Returns a dict of arrays in physical units: displacements ``u_i``,
    stresses ``s_ij``, spatial stress derivatives ``d_s_ij_d<a>``,
    displacement gradients ``d_u_i_d<a>`` and second time derivatives
    ``d2_u_i_dtt``.
    """
    specs = _as_spec_list(specs)
    ndim = 2 if z is None else 3
    coords = [np.asarray(x, dtype=float), np.asarray(y, dtype=float)]
    if ndim == 3:
        coords.append(np.asarray(z, dtype=float))
    t = np.asarray(t, dtype=float)
    axes = _AXES[:ndim]
    pairs = [("x", "x"), ("y", "y"), ("x", "y")]
    if ndim == 3:
        pairs = [("x", "x"), ("y", "y"), ("z", "z"),
                 ("x", "y"), ("y", "z"), ("x", "z")]

    zero = np.zeros(np.broadcast(*coords, t).shape)
    out = {}
    for i in axes:
        out[f"u_{i}"] = zero.copy()
        out[f"d2_u_{i}_dtt"] = zero.copy()
        for a in axes:
            out[f"d_u_{i}_d{a}"] = zero.copy()
    for i, j in pairs:
        out[f"s_{i}{j}"] = zero.copy()
        for a in axes:
            out[f"d_s_{i}{j}_d{a}"] = zero.copy()

    for sp in specs:
        if sp.axis not in axes or sp.pol_axis() not in axes:
            raise ValueError(f"wave axes {sp.axis}/{sp.pol_axis()} outside a "
                             f"{ndim}D domain")
        lam, mu = sp.material.lam, sp.material.mu
        a = sp.axis
        p = sp.pol_axis()
        k = sp.wavenumber
        omega = k * sp.speed
        phase = k * coords[axes.index(a)] - sp.sign * omega * t
        sin_p, cos_p = np.sin(phase), np.cos(phase)
        amp = sp.amplitude

        out[f"u_{p}"] += amp * sin_p
        out[f"d_u_{p}_d{a}"] += amp * k * cos_p
        out[f"d2_u_{p}_dtt"] += -amp * omega**2 * sin_p

        stress_coeff = {}
        if sp.kind == "P":
            for i in axes:
                stress_coeff[(i, i)] = (lam + 2.0 * mu if i == a else lam) * amp * k
        else:
            key = (a, p) if (a, p) in pairs else (p, a)
            stress_coeff[key] = mu * amp * k
        for (i, j), c in stress_coeff.items():
            out[f"s_{i}{j}"] += c * cos_p
            out[f"d_s_{i}{j}_d{a}"] += -c * k * sin_p
    return out


def _field_matrix(specs, pts, spatial):
    cols = [pts[:, i] for i in range(spatial)]
    t = pts[:, spatial]
    z = cols[2] if spatial == 3 else None
    d = wave_derivs(specs, cols[0], cols[1], t, z=z)
    return np.column_stack([d[name] for name in _FIELDS[spatial]])


def _spatial_samples(geometry, n_points, seed, boundary_share):
    """Random spatial points, a share of them exactly on the box boundary."""
    geometry = np.asarray(geometry, dtype=float)
    ndim = geometry.shape[0]
    rng = np.random.default_rng(seed)
    n_b = int(round(boundary_share * n_points))
    n_i = n_points - n_b
    lo, hi = geometry[:, 0], geometry[:, 1]
    interior = rng.uniform(lo, hi, size=(n_i, ndim))

    # faces indexed by (axis, side); weight by face measure
    faces = [(ax, side) for ax in range(ndim) for side in (0, 1)]
    span = hi - lo
    measures = []
    for ax, _ in faces:
        m = 1.0
        for other in range(ndim):
            if other != ax:
                m *= span[other]
        measures.append(m)
    weights = np.asarray(measures) / np.sum(measures)
    choice = rng.choice(len(faces), size=n_b, p=weights)
    boundary = rng.uniform(lo, hi, size=(n_b, ndim))
    for row, fidx in enumerate(choice):
        ax, side = faces[fidx]
        boundary[row, ax] = geometry[ax, side]
    return np.vstack([boundary, interior])


def manufactured(specs, geometry, n_points, times, seed, boundary_share=0.5,
                 mu=None):
    """Exact plane-wave dataset: ``n_points`` spatial samples x ``times``.

    Half of the spatial points sit exactly on the box boundary by default
    (so boundary subsampling has something to draw from).  ``mu`` appends a
    constant parameter column and switches to the surrogate schema.
    """
    specs = _as_spec_list(specs)
    geometry = np.asarray(geometry, dtype=float)
    spatial = geometry.shape[0]
    times = np.asarray(times, dtype=float).reshape(-1)
    space = _spatial_samples(geometry, int(n_points), seed, boundary_share)
    pts = np.hstack([np.repeat(space, len(times), axis=0),
                     np.tile(times, len(space))[:, None]])
    return _assemble(specs, pts, geometry, spatial, mu, "manufactured")


def manufactured_grid(specs, geometry, shape, times, mu=None):
    """Exact plane-wave dataset on a regular spatial grid x ``times``."""
    specs = _as_spec_list(specs)
    geometry = np.asarray(geometry, dtype=float)
    spatial = geometry.shape[0]
    shape = tuple(int(s) for s in shape)
    if len(shape) != spatial:
        raise ValueError(f"grid shape needs {spatial} entries")
    axes = [np.linspace(geometry[i, 0], geometry[i, 1], shape[i])
            for i in range(spatial)]
    mesh = np.meshgrid(*axes, indexing="ij")
    space = np.column_stack([m.ravel() for m in mesh])
    times = np.asarray(times, dtype=float).reshape(-1)
    pts = np.hstack([np.repeat(space, len(times), axis=0),
                     np.tile(times, len(space))[:, None]])
    return _assemble(specs, pts, geometry, spatial, mu, "manufactured")


def _assemble(specs, pts, geometry, spatial, mu, provenance):
    fields = _field_matrix(specs, pts, spatial)
    schema = f"{spatial}d"
    if mu is not None:
        pts = np.hstack([pts, np.full((len(pts), 1), float(mu))])
        schema += "-surrogate"
    return ReferenceDataset(schema, pts, fields, geometry,
                            _boundary_mask(pts, geometry, spatial), provenance)


def concat(datasets):
    """Concatenate datasets with identical schema and geometry."""
    first = datasets[0]
    for ds in datasets[1:]:
        if ds.schema != first.schema or not np.array_equal(ds.geometry,
                                                           first.geometry):
            raise ValueError("datasets must share schema and geometry")
    return ReferenceDataset(
        first.schema,
        np.vstack([ds.points for ds in datasets]),
        np.vstack([ds.fields for ds in datasets]),
        first.geometry,
        np.concatenate([ds.boundary_mask for ds in datasets]),
        first.provenance)


# ---------------------------------------------------------------------------
# Subsampling and the error metric


def subsample_boundary(ds, fraction, seed):
    """Uniform random subset of the boundary points, round(fraction * N_b) large."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    idx = np.flatnonzero(ds.boundary_mask)
    if idx.size == 0:
        raise ValueError("dataset has no boundary points")
    k = int(round(fraction * idx.size))
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(idx, size=k, replace=False))
    return replace(ds, points=ds.points[chosen], fields=ds.fields[chosen],
                   boundary_mask=ds.boundary_mask[chosen])


def subsample(ds, fraction, seed):
    """Uniform random subset of all points (boundary and interior)."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    k = int(round(fraction * len(ds)))
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(ds), size=k, replace=False))
    return replace(ds, points=ds.points[chosen], fields=ds.fields[chosen],
                   boundary_mask=ds.boundary_mask[chosen])


def nrmse(pred, ref):
    """Root-mean-square error normalized by the reference range."""
    pred = np.asarray(pred, dtype=float).ravel()
    ref = np.asarray(ref, dtype=float).ravel()
    if pred.shape != ref.shape or ref.size < 2:
        raise ValueError("need two equal-length samples of at least 2 points")
    span = float(np.max(ref) - np.min(ref))
    if span <= 0.0:
        raise ValueError("reference field has zero range; NRMSE undefined")
    return float(np.sqrt(np.mean((pred - ref) ** 2)) / span)


# ---------------------------------------------------------------------------
# CSV import/export


def load_csv(path, schema, geometry=None):
    """Read a dataset in the documented schema; extents default to the
    per-axis min/max of the file's coordinates."""
    _check_schema(schema)
    spatial = 3 if schema.startswith("3d") else 2
    columns = _COORDS[schema] + _FIELDS[spatial]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise ValueError(f"{path}: missing column {missing[0]!r}")
        extra = [c for c in header if c not in columns]
        if extra:
            raise ValueError(f"{path}: unexpected column {extra[0]!r}")
        order = [header.index(c) for c in columns]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(row[i]) for i in order])
            except (ValueError, IndexError):
                raise ValueError(f"{path}: non-numeric cell in row {lineno}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=float)
    n_coord = len(_COORDS[schema])
    pts, fields = table[:, :n_coord], table[:, n_coord:]
    if geometry is None:
        geometry = np.column_stack([pts[:, :spatial].min(axis=0),
                                    pts[:, :spatial].max(axis=0)])
    geometry = np.asarray(geometry, dtype=float)
    return ReferenceDataset(schema, pts, fields, geometry,
                            _boundary_mask(pts, geometry, spatial), "imported")


def write_csv(path, ds):
    """Write a dataset in the documented schema (repr floats: exact round trip)."""
    columns = ds.coord_names() + ds.field_names()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for p, f in zip(ds.points, ds.fields):
            writer.writerow([repr(float(v)) for v in p] +
                            [repr(float(v)) for v in f])
