"""Sampled immersions of a point, a circle or a 2-torus into a flat ambient space.

Parameter grids are uniform and periodic with spacing ``2*pi/N`` per
direction. Derivatives use central stencils of selectable even order (8 by
default); integrals use the rectangle rule, which is the trapezoidal rule on
a periodic grid.

Every per-sample quantity is computed with elementwise operations in a fixed
order, and integrals use :func:`math.fsum`. As a result cyclic grid shifts
(:func:`reparametrize`) commute bit-for-bit with everything in this module.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, DimensionError, ImmersionError, NormalityError

IMMERSION_TOL = 1e-8
NORMAL_TOL = 1e-10

# Central-difference weights for offsets 1, 2, ... on a periodic grid.
# First derivative: f'(i) ~ sum_j w_j (f[i+j] - f[i-j]) / h.
# Second derivative: f''(i) ~ sum_j w_j (f[i+j] + f[i-j] - 2 f[i]) / h^2.
FIRST_WEIGHTS = {
    2: (1.0 / 2.0,),
    4: (2.0 / 3.0, -1.0 / 12.0),
    6: (3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0),
    8: (4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0),
}
SECOND_WEIGHTS = {
    2: (1.0,),
    4: (4.0 / 3.0, -1.0 / 12.0),
    6: (3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0),
    8: (8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0),
}
DEFAULT_ORDER = 8


def dot(a, b):
    """Pointwise inner product over the last axis, summed in a fixed order."""
    total = a[..., 0] * b[..., 0]
    for k in range(1, a.shape[-1]):
        total = total + a[..., k] * b[..., k]
    return total


def integrate(values, spacings):
    """Rectangle-rule quadrature on the periodic grid (order independent)."""
    return math.fsum(np.ravel(values)) * math.prod(spacings)


@dataclass(frozen=True)
class ParamGrid:
    """Periodic parameter grid; ``order`` is the accuracy order of its derivative stencils."""

    sizes: tuple
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if len(sizes) > 2:
            raise DimensionError("sizes", "at most 2 grid directions", len(sizes))
        if self.order not in FIRST_WEIGHTS:
            raise DimensionError("order", sorted(FIRST_WEIGHTS), self.order)
        if any(n < max(5, self.order) for n in sizes):
            raise DimensionError("sizes", f"at least {max(5, self.order)} samples per direction", sizes)
        object.__setattr__(self, "sizes", sizes)

    @property
    def d(self):
        return len(self.sizes)

    @property
    def spacings(self):
        return tuple(2.0 * np.pi / n for n in self.sizes)

    def coordinates(self):
        """Parameter values, one array of shape ``sizes`` per direction."""
        axes = [np.arange(n) * (2.0 * np.pi / n) for n in self.sizes]
        return np.meshgrid(*axes, indexing="ij") if axes else []


def periodic_derivative(values, axis, spacing, unwrap=None, order=DEFAULT_ORDER, second=False):
    """Periodic central difference along ``axis`` of a ``sizes + (m,)`` array.

    Neighbour differences ``f[i+j] - f[i]`` are formed first and passed
    through ``unwrap`` (needed for torus-valued positions) before weighting.
    """

    def diff(offset):
        d = np.roll(values, -offset, axis=axis) - values
        return d if unwrap is None else unwrap(d)

    weights = SECOND_WEIGHTS[order] if second else FIRST_WEIGHTS[order]
    total = None
    for j, w in enumerate(weights, start=1):
        term = w * (diff(j) + diff(-j)) if second else w * (diff(j) - diff(-j))
        total = term if total is None else total + term
    return total / (spacing * spacing if second else spacing)


@dataclass(frozen=True, eq=False)
class TangentFrame:
    """Orthonormal oriented frames (``sizes + (d, m)``) and raw parameter derivatives."""

    frames: np.ndarray
    raw_jacobian: np.ndarray

    @property
    def d(self):
        return self.frames.shape[-2]


@dataclass(frozen=True, eq=False)
class NormalField:
    """Values (``sizes + (m,)``) orthogonal to the tangent frame at every sample."""

    values: np.ndarray
    frame: TangentFrame

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = self.frame.frames.shape[:-2] + self.frame.frames.shape[-1:]
        if values.shape != expected:
            raise DimensionError("values", expected, values.shape)
        violation = normality_violation(self.frame, values)
        scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
        if violation > NORMAL_TOL * scale:
            raise NormalityError("field is not normal to the immersion", violation)
        object.__setattr__(self, "values", values)


def normality_violation(frame, values):
    if frame.d == 0:
        return 0.0
    return max(float(np.max(np.abs(dot(values, frame.frames[..., i, :])))) for i in range(frame.d))


@dataclass(frozen=True, eq=False)
class DiscreteImmersion:
    """Samples ``points`` (``grid.sizes + (m,)``) of an immersion into ``space``."""

    space: object
    grid: ParamGrid
    points: np.ndarray

    def __post_init__(self):
        pts = self.space.reduce(np.asarray(self.points, dtype=float))
        expected = self.grid.sizes + (self.space.m,)
        if pts.shape != expected:
            raise DimensionError("points", expected, pts.shape)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.grid.d:
            sigma = self.min_singular_value
            worst = int(np.argmin(sigma))
            if not sigma.flat[worst] > IMMERSION_TOL:
                raise ImmersionError(
                    f"parameter derivatives are degenerate (smallest singular value {sigma.flat[worst]:.3e})",
                    np.unravel_index(worst, self.grid.sizes),
                )

    @property
    def m(self):
        return self.space.m

    @property
    def d(self):
        return self.grid.d

    @cached_property
    def jacobian(self):
        """Parameter derivatives, shape ``sizes + (d, m)``."""
        if self.d == 0:
            return np.zeros((0, self.m))
        parts = [
            periodic_derivative(self.points, axis, h, unwrap=self.space.unwrap, order=self.grid.order)
            for axis, h in enumerate(self.grid.spacings)
        ]
        return np.stack(parts, axis=-2)

    @cached_property
    def gram(self):
        J = self.jacobian
        d = self.d
        G = np.empty(self.grid.sizes + (d, d))
        for a in range(d):
            for b in range(d):
                G[..., a, b] = dot(J[..., a, :], J[..., b, :])
        return G

    @cached_property
    def min_singular_value(self):
        G = self.gram
        if self.d == 1:
            return np.sqrt(G[..., 0, 0])
        tr = G[..., 0, 0] + G[..., 1, 1]
        det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
        return np.sqrt(np.maximum(0.5 * (tr - disc), 0.0))

    @cached_property
    def frame(self):
        return tangent_frame(self)

    @cached_property
    def volume(self):
        return induced_volume(self)


def tangent_frame(imm):
    """Orthonormalize the parameter derivatives sample-wise (modified Gram-Schmidt)."""
    J = imm.jacobian
    if imm.d == 0:
        return TangentFrame(np.zeros((0, imm.m)), J)
    frames = np.empty_like(J)
    for a in range(imm.d):
        w = J[..., a, :]
        for b in range(a):
            fb = frames[..., b, :]
            w = w - dot(w, fb)[..., None] * fb
        frames[..., a, :] = w / np.sqrt(dot(w, w))[..., None]
    return TangentFrame(frames, J)


def project(frame, values):
    """Pointwise ``v - sum_i <v, f_i> f_i`` on raw arrays."""
    values = np.asarray(values, dtype=float)
    out = values
    for i in range(frame.d):
        f = frame.frames[..., i, :]
        out = out - dot(values, f)[..., None] * f
    return out


def normal_project(frame, ambient_field):
    ambient_field = np.asarray(ambient_field, dtype=float)
    expected = frame.frames.shape[:-2] + frame.frames.shape[-1:]
    if ambient_field.shape != expected:
        raise DimensionError("ambient_field", expected, ambient_field.shape)
    return NormalField(project(frame, ambient_field), frame)


def induced_volume(imm):
    """Density ``sqrt(det G)`` of the pulled-back metric; 1 for a point."""
    G = imm.gram if imm.d else None
    if imm.d == 0:
        return np.array(1.0)
    if imm.d == 1:
        return np.sqrt(G[..., 0, 0])
    det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
    if not np.all(det > 0):
        raise ImmersionError("degenerate Gram matrix", np.unravel_index(int(np.argmin(det)), imm.grid.sizes))
    return np.sqrt(det)


def total_volume(imm):
    return integrate(imm.volume, imm.grid.spacings)


def mean_curvature(imm):
    """Mean curvature vector ``H = (1/d) (G^{ab} d_a d_b P)^perp``."""
    if imm.d == 0:
        raise DimensionError("imm", "an immersion of dimension >= 1", "a point")
    sp = imm.grid.spacings
    kw = dict(unwrap=imm.space.unwrap, order=imm.grid.order, second=True)
    if imm.d == 1:
        second = periodic_derivative(imm.points, 0, sp[0], **kw)
        trace = second / imm.gram[..., 0, 0][..., None]
    else:
        G = imm.gram
        det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
        p00 = periodic_derivative(imm.points, 0, sp[0], **kw)
        p11 = periodic_derivative(imm.points, 1, sp[1], **kw)
        p01 = periodic_derivative(imm.jacobian[..., 1, :], 0, sp[0], order=imm.grid.order)
        trace = (G[..., 1, 1][..., None] * p00 - 2.0 * G[..., 0, 1][..., None] * p01 + G[..., 0, 0][..., None] * p11) / det[..., None]
    return NormalField(project(imm.frame, trace) / imm.d, imm.frame)


def gradient_field_W(imm):
    """L2-gradient of the volume functional, ``W = -d * H`` (zero for a point)."""
    if imm.d == 0:
        return NormalField(np.zeros(imm.m), imm.frame)
    return NormalField(-imm.d * mean_curvature(imm).values, imm.frame)


def reparametrize(imm, shift):
    """Cyclic index shift of the samples, the discrete orientation-preserving reparametrization."""
    shift = tuple(int(s) for s in np.atleast_1d(shift)) if imm.d else ()
    if len(shift) != imm.d:
        raise DimensionError("shift", f"{imm.d} integers", len(shift))
    pts = np.roll(imm.points, shift, axis=tuple(range(imm.d))) if imm.d else imm.points
    return DiscreteImmersion(imm.space, imm.grid, pts)


def shift_values(values, shift):
    """Apply the same cyclic shift to a per-sample array."""
    shift = tuple(int(s) for s in np.atleast_1d(shift))
    if not shift:
        return values
    return np.roll(values, shift, axis=tuple(range(len(shift))))


# --------------------------------------------------------------------------
# presets


def _embed(space, components, axes):
    shape = np.shape(components[0])
    pts = np.zeros(shape + (space.m,))
    for axis, comp in zip(axes, components):
        pts[..., axis] = comp
    return pts


def point(space, location=None):
    loc = np.zeros(space.m) if location is None else np.asarray(location, dtype=float)
    return DiscreteImmersion(space, ParamGrid(()), loc)


def circle(space, N, radius=1.0, plane=(0, 1), center=None, order=DEFAULT_ORDER):
    """``theta -> center + radius (cos theta e_a + sin theta e_b)``."""
    grid = ParamGrid((N,), order)
    (t,) = grid.coordinates()
    pts = _embed(space, [radius * np.cos(t), radius * np.sin(t)], plane)
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return DiscreteImmersion(space, grid, pts)


def trefoil(space, N, scale=1.0, axes=(0, 1, 2), order=DEFAULT_ORDER):
    """Trefoil knot ``(sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t)``."""
    grid = ParamGrid((N,), order)
    (t,) = grid.coordinates()
    comps = [np.sin(t) + 2 * np.sin(2 * t), np.cos(t) - 2 * np.cos(2 * t), -np.sin(3 * t)]
    return DiscreteImmersion(space, grid, _embed(space, [scale * c for c in comps], axes))


def clifford_torus(space, N, radii=(1.0, 1.0), axes=(0, 1, 2, 3), order=DEFAULT_ORDER):
    """Flat torus ``(a cos t, a sin t, b cos s, b sin s)``."""
    sizes = (N, N) if np.ndim(N) == 0 else tuple(N)
    grid = ParamGrid(sizes, order)
    t, s = grid.coordinates()
    a, b = radii
    comps = [a * np.cos(t), a * np.sin(t), b * np.cos(s), b * np.sin(s)]
    return DiscreteImmersion(space, grid, _embed(space, comps, axes))


def winding_loop(space, N, amplitude=0.3, axis=0, order=DEFAULT_ORDER):
    """Loop winding once around the ``axis`` direction of a flat torus, with a transverse wiggle."""
    if space.periods is None:
        raise ConfigError("immersion.preset", "winding_loop needs a torus ambient")
    grid = ParamGrid((N,), order)
    (t,) = grid.coordinates()
    pts = np.zeros((N, space.m))
    pts[:, axis] = space.periods[axis] * t / (2 * np.pi)
    others = [k for k in range(space.m) if k != axis]
    pts[:, others[0]] = amplitude * np.cos(t)
    if len(others) > 1:
        pts[:, others[1]] = amplitude * np.sin(2 * t)
    return DiscreteImmersion(space, grid, pts)


def fourier_field(grid, m, modes, rng, decay=2.0):
    """Random real band-limited field on the grid (modes ``<= modes`` per direction).

    Coefficients are drawn independently of the grid resolution, so the same
    generator state yields samples of the same continuous field at every N.
    """
    coords = grid.coordinates()
    if grid.d == 0:
        return rng.normal(size=m)
    out = np.zeros(grid.sizes + (m,))
    for ks in np.ndindex(*(2 * modes + 1,) * grid.d):
        k = np.array(ks) - modes
        weight = 1.0 / (1.0 + float(np.dot(k, k))) ** (decay / 2)
        a = rng.normal(size=m) * weight
        b = rng.normal(size=m) * weight
        phase = sum(kk * c for kk, c in zip(k, coords))
        out += np.cos(phase)[..., None] * a + np.sin(phase)[..., None] * b
    return out


def perturb(imm, amplitude=0.1, modes=2, seed=0):
    """Add a seeded random band-limited displacement to an immersion."""
    rng = np.random.default_rng(seed)
    disp = fourier_field(imm.grid, imm.m, modes, rng)
    disp *= amplitude / max(float(np.max(np.abs(disp))), 1e-300)
    return DiscreteImmersion(imm.space, imm.grid, imm.points + disp)


PRESETS = {
    "point": lambda space, N, order=DEFAULT_ORDER, **kw: point(space, **kw),
    "circle": circle,
    "trefoil": trefoil,
    "clifford_torus": clifford_torus,
    "winding_loop": winding_loop,
}


def from_config(space, cfg, N, order=DEFAULT_ORDER):
    """Build the immersion described by the ``immersion`` block of a config."""
    if "file" in cfg:
        return load_immersion(space, cfg["file"], order)
    name = cfg.get("preset")
    if name not in PRESETS:
        raise ConfigError("immersion.preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    params = dict(cfg.get("params", {}))
    try:
        imm = PRESETS[name](space, N, order=order, **params)
    except TypeError as exc:
        raise ConfigError("immersion.params", str(exc)) from None
    pert = cfg.get("perturbation")
    if pert:
        imm = perturb(imm, float(pert.get("amplitude", 0.1)), int(pert.get("modes", 2)), int(pert.get("seed", 0)))
    return imm


def load_immersion(space, source, order=DEFAULT_ORDER):
    """Load ``{"grid": {"sizes": [...]}, "points": [[...], ...]}`` (row-major samples)."""
    if isinstance(source, dict):
        data = source
    else:
        with open(source) as fh:
            data = json.load(fh)
    try:
        sizes = tuple(data["grid"]["sizes"])
    except (KeyError, TypeError):
        raise ConfigError("grid.sizes", "required list of grid sizes") from None
    pts = np.asarray(data.get("points"), dtype=float)
    expected = int(np.prod(sizes)) if sizes else 1
    if pts.ndim != 2 or pts.shape != (expected, space.m):
        raise ConfigError("points", f"expected {expected} points of dimension {space.m}, got shape {pts.shape}")
    return DiscreteImmersion(space, ParamGrid(sizes, order), pts.reshape(sizes + (space.m,)))
