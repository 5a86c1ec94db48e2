"""Flat ambient spaces (R^m and flat tori) carrying a VCP field."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import vcp as _vcp
from .errors import ConfigError, DimensionError


@dataclass(frozen=True, eq=False)
class ParallelField:
    """Constant-coefficient VCP field; parallel for the flat connection."""

    vcp: _vcp.LinearVcp
    parallel = True

    def at(self, p):
        return self.vcp

    def contract(self, points, *vectors):
        return self.vcp.contract(*vectors)

    def form(self, points, *vectors):
        return self.vcp.form(*vectors)


@dataclass(frozen=True, eq=False)
class TwistedField:
    """Non-parallel control field ``chi_p = R(p) . chi_0`` with ``R(p) = exp(rate * p_1 * A)``.

    ``A`` generates rotations of the ``(e_a, e_b)`` coordinate plane given by
    ``plane`` (0-based, default ``(1, 2)``: the ``(e2, e3)``-plane). All slots
    are rotated simultaneously, so every ``chi_p`` is again a VCP, but
    ``d chi / d p_1`` is nonzero whenever ``rate != 0`` and the rotation does
    not preserve ``chi_0``.
    """

    base: _vcp.LinearVcp
    rate: float
    plane: tuple = (1, 2)
    parallel = False

    def rotation(self, p):
        a, b = self.plane
        theta = self.rate * float(p[0])
        R = np.eye(self.base.m)
        c, s = np.cos(theta), np.sin(theta)
        R[a, a], R[a, b], R[b, a], R[b, b] = c, -s, s, c
        return R

    def at(self, p):
        R = self.rotation(p)
        t = self.base.tensor
        # chi_p(v_1..v_r) = R chi_0(R^T v_1, ..., R^T v_r); (R^T e_i)_j = R[i, j]
        t = np.tensordot(t, R, axes=([t.ndim - 1], [1]))
        for slot in range(self.base.r):
            t = np.moveaxis(np.tensordot(R, t, axes=([1], [slot])), 0, slot)
        return _vcp.LinearVcp(self.base.m, self.base.r, self.base.kind, t)

    def _rotate(self, vectors, c, s, inverse):
        a, b = self.plane
        out = np.array(vectors, dtype=float)
        va, vb = vectors[..., a], vectors[..., b]
        if inverse:
            out[..., a] = c * va + s * vb
            out[..., b] = c * vb - s * va
        else:
            out[..., a] = c * va - s * vb
            out[..., b] = s * va + c * vb
        return out

    def contract(self, points, *vectors):
        theta = self.rate * np.asarray(points, dtype=float)[..., 0]
        c, s = np.cos(theta), np.sin(theta)
        rotated = [self._rotate(v, c, s, inverse=True) for v in vectors]
        return self._rotate(self.base.contract(*rotated), c, s, inverse=False)

    def form(self, points, *vectors):
        # phi_p(v, ...) = phi_0(R^T v, ...)
        theta = self.rate * np.asarray(points, dtype=float)[..., 0]
        c, s = np.cos(theta), np.sin(theta)
        return self.base.form(*(self._rotate(v, c, s, inverse=True) for v in vectors))


@dataclass(frozen=True, eq=False)
class AmbientSpace:
    """Flat R^m (``periods=None``) or the flat torus R^m / diag(periods) Z^m."""

    m: int
    field: object
    periods: tuple | None = None

    def __post_init__(self):
        if self.field.at(np.zeros(self.m)).m != self.m:
            raise DimensionError("field", f"VCP on R^{self.m}", f"VCP on R^{self.field.at(np.zeros(self.m)).m}")
        if self.periods is not None:
            periods = tuple(float(x) for x in self.periods)
            if len(periods) != self.m or min(periods) <= 0:
                raise DimensionError("periods", f"{self.m} positive reals", self.periods)
            if not self.field.parallel:
                raise ConfigError("vcp.parallel", "twisted control fields are only defined on euclidean space")
            object.__setattr__(self, "periods", periods)

    @property
    def topology(self):
        return "euclidean" if self.periods is None else "torus"

    @property
    def vcp(self):
        """The VCP at the origin (the constant VCP for parallel fields)."""
        return self.field.at(np.zeros(self.m))

    def reduce(self, points):
        points = np.asarray(points, dtype=float)
        if self.periods is None:
            return points
        return np.mod(points, np.asarray(self.periods))

    def unwrap(self, displacement):
        """Shortest representative of a displacement modulo the periods."""
        displacement = np.asarray(displacement, dtype=float)
        if self.periods is None:
            return displacement
        L = np.asarray(self.periods)
        return displacement - L * np.round(displacement / L)


def euclidean(vcp):
    return AmbientSpace(vcp.m, ParallelField(vcp))


def torus(vcp, periods):
    return AmbientSpace(vcp.m, ParallelField(vcp), tuple(periods))


def twisted(vcp, rate, plane=(1, 2)):
    return AmbientSpace(vcp.m, TwistedField(vcp, float(rate), tuple(plane)))


def exp_map(space, p, v):
    """Riemannian exponential of the flat metric: translation, reduced on tori."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if p.shape[-1:] != (space.m,):
        raise DimensionError("p", f"(..., {space.m})", p.shape)
    if v.shape != p.shape:
        raise DimensionError("v", p.shape, v.shape)
    return space.reduce(p + v)


def vcp_at(space, p):
    p = np.asarray(p, dtype=float)
    if p.shape != (space.m,):
        raise DimensionError("p", (space.m,), p.shape)
    return space.field.at(p)


def ambient_derivative(space, path, field_along_path, t, h, wrap=False):
    """Covariant derivative of a vector field along a path, by central differences.

    In flat coordinates the pulled-back Levi-Civita derivative is the
    componentwise derivative. ``path`` is accepted for interface symmetry and
    is only evaluated to check dimensions. With ``wrap=True`` the field is
    treated as torus-valued and its increment is unwrapped before dividing.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    p = np.asarray(path(t), dtype=float)
    if p.shape != (space.m,):
        raise DimensionError("path", (space.m,), p.shape)
    delta = np.asarray(field_along_path(t + h), dtype=float) - np.asarray(field_along_path(t - h), dtype=float)
    if wrap:
        delta = space.unwrap(delta)
    return delta / (2.0 * h)


def from_config(cfg):
    """Build an ambient space from the ``ambient`` block of an experiment config."""
    try:
        m = int(cfg["m"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("ambient.m", "required positive integer") from None
    vcfg = cfg.get("vcp")
    if not isinstance(vcfg, dict) or "kind" not in vcfg:
        raise ConfigError("ambient.vcp.kind", "required")
    try:
        base = _vcp.from_kind(vcfg["kind"], m)
    except ValueError as exc:
        raise ConfigError("ambient.vcp.kind", str(exc)) from None
    topology = cfg.get("topology", "euclidean")
    parallel = bool(vcfg.get("parallel", True))
    if topology == "euclidean":
        if parallel:
            return euclidean(base)
        return twisted(base, float(vcfg.get("twist_rate", 0.5)))
    if topology == "torus":
        periods = cfg.get("periods", [2 * np.pi] * m)
        if not parallel:
            raise ConfigError("ambient.vcp.parallel", "twisted control fields require euclidean topology")
        return torus(base, periods)
    raise ConfigError("ambient.topology", f"unknown topology {topology!r}")
