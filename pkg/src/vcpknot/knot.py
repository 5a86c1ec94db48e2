"""Weak L2 geometry of the discretized space of unparametrized immersions.

Tangent vectors at an immersion are normal fields along it. Vector fields are
given by extension schemes that assign a normal field to every nearby
immersion; derivatives of those schemes along a tangent vector ``u`` are
central differences along the straight flow ``P + t u`` (the flat exponential
map), optionally Richardson-extrapolated.

Slot convention: the tangent frame of the immersion fills the leading slots
of ``chi`` and ``phi`` in orientation order, then the normal arguments follow.
``sign=-1`` selects the opposite orientation and flips ``J`` and ``omega2``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import immersion as _imm
from .ambient import exp_map
from .errors import DimensionError

DEFAULT_STEP = 1e-4


class ConnectionKind(str, Enum):
    PERP = "perp"
    LEVI_CIVITA = "levi_civita"


class ExtensionRule(str, Enum):
    CONSTANT = "constant"
    EXPONENTIAL = "exponential"
    AFFINE = "affine"


def _check_same_base(a, b):
    if a is b:
        return
    if a.space is not b.space or a.grid != b.grid or not np.array_equal(a.points, b.points):
        raise ValueError("tangent vectors live at different base immersions")


@dataclass(frozen=True, eq=False)
class KnotTangent:
    """A normal field along ``base``: a tangent vector of the knot space."""

    base: _imm.DiscreteImmersion
    values: np.ndarray

    def __post_init__(self):
        nf = _imm.NormalField(self.values, self.base.frame)
        object.__setattr__(self, "values", nf.values)

    @classmethod
    def from_ambient(cls, base, ambient_values):
        """Normal projection of an arbitrary ambient field along ``base``."""
        return cls(base, _imm.normal_project(base.frame, ambient_values).values)

    def __add__(self, other):
        _check_same_base(self.base, other.base)
        return KnotTangent(self.base, self.values + other.values)

    def __sub__(self, other):
        _check_same_base(self.base, other.base)
        return KnotTangent(self.base, self.values - other.values)

    def __neg__(self):
        return KnotTangent(self.base, -self.values)

    def __mul__(self, scalar):
        return KnotTangent(self.base, float(scalar) * self.values)

    __rmul__ = __mul__

    def max_norm(self):
        """Largest pointwise Euclidean norm."""
        return float(np.max(np.sqrt(_imm.dot(self.values, self.values))))


# --------------------------------------------------------------------------
# pointwise algebra on raw arrays


def _J(imm, values, sign=1):
    frames = [imm.frame.frames[..., i, :] for i in range(imm.d)]
    return sign * imm.space.field.contract(imm.points, *frames, values)


def _phi(imm, x, y, sign=1):
    frames = [imm.frame.frames[..., i, :] for i in range(imm.d)]
    return sign * imm.space.field.form(imm.points, *frames, x, y)


def _l2(imm, x, y):
    return _imm.integrate(_imm.dot(x, y) * imm.volume, imm.grid.spacings)


def _omega(imm, x, y, sign=1):
    return _imm.integrate(_phi(imm, x, y, sign) * imm.volume, imm.grid.spacings)


def _b_tensor(imm, u, v, W):
    guv = _imm.dot(u, v)[..., None]
    guw = _imm.dot(u, W)[..., None]
    gvw = _imm.dot(v, W)[..., None]
    # grouped as a sum so that swapping u and v is bit-exact
    return guv * W - (guw * v + gvw * u)


# --------------------------------------------------------------------------
# metric, complex structure, fundamental form


def l2_inner(u, v):
    """Weak L2 inner product ``int_S g(u, v) vol``."""
    _check_same_base(u.base, v.base)
    return _l2(u.base, u.values, v.values)


def apply_J(u, sign=1):
    """Pointwise ``(J u)(s) = chi(f_1(s), ..., f_d(s), u(s))``."""
    return KnotTangent(u.base, _J(u.base, u.values, sign))


def omega2(u, v, sign=1):
    """Transgressed 2-form ``int_S phi(f_1, ..., f_d, u, v) vol``."""
    _check_same_base(u.base, v.base)
    return _omega(u.base, u.values, v.values, sign)


def b_tensor(u, v):
    """Symmetric correction ``g(u,v) W - g(u,W) v - g(v,W) u`` (pointwise module structure)."""
    _check_same_base(u.base, v.base)
    W = _imm.gradient_field_W(u.base).values
    return KnotTangent(u.base, _b_tensor(u.base, u.values, v.values, W))


# --------------------------------------------------------------------------
# vector fields on the knot space


@dataclass(frozen=True, eq=False)
class KnotVectorFieldScheme:
    """Extension of a normal field ``seed`` at ``base`` to nearby immersions.

    ``CONSTANT`` and ``EXPONENTIAL`` both project the seed's ambient values onto
    the normal bundle of the new immersion; in flat space the differential of
    the exponential map is the identity, so the two rules agree. ``AFFINE``
    adds ``matrix @ (P' - P)`` sample-wise before projecting, a genuinely
    different extension with the same value at ``base``. With ``compose_J``
    the scheme returns ``J`` of the extended field, ``J`` being re-evaluated at
    each immersion.
    """

    base: _imm.DiscreteImmersion
    seed: np.ndarray
    rule: ExtensionRule = ExtensionRule.CONSTANT
    compose_J: bool = False
    sign: int = 1
    matrix: np.ndarray | None = None

    def __post_init__(self):
        seed = _imm.NormalField(self.seed, self.base.frame).values
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "rule", ExtensionRule(self.rule))
        if self.rule is ExtensionRule.AFFINE:
            if self.matrix is None or np.shape(self.matrix) != (self.base.m, self.base.m):
                raise DimensionError("matrix", (self.base.m, self.base.m), np.shape(self.matrix))

    @classmethod
    def extend(cls, u, rule=ExtensionRule.CONSTANT, **kwargs):
        return cls(u.base, u.values, rule, **kwargs)

    def with_J(self):
        if self.compose_J:
            raise ValueError("scheme is already J-composed")
        return replace(self, compose_J=True)

    def raw_value(self, imm):
        if imm is self.base:
            v = self.seed
        else:
            if imm.grid != self.base.grid or imm.space is not self.base.space:
                raise ValueError("immersion does not share the scheme's grid and ambient space")
            v = self.seed
            if self.rule is ExtensionRule.AFFINE:
                disp = imm.space.unwrap(imm.points - self.base.points)
                v = v + sum(disp[..., j, None] * self.matrix[:, j] for j in range(imm.m))
            v = _imm.project(imm.frame, v)
        return _J(imm, v, self.sign) if self.compose_J else v

    @property
    def seed_tangent(self):
        """The field's value at ``base`` (``J`` applied when J-composed)."""
        return KnotTangent(self.base, self.raw_value(self.base))


def field_value(scheme, imm):
    return KnotTangent(imm, scheme.raw_value(imm))


def _as_scheme(x):
    return x if isinstance(x, KnotVectorFieldScheme) else KnotVectorFieldScheme.extend(x)


def _flow_raw(imm, direction, t):
    return _imm.DiscreteImmersion(imm.space, imm.grid, exp_map(imm.space, imm.points, t * direction))


def flow(imm, u, t):
    """Immersion ``s -> Exp_{P(s)}(t u(s))``."""
    values = u.values if isinstance(u, KnotTangent) else np.asarray(u, dtype=float)
    return _flow_raw(imm, values, t)


def directional_derivative(fun, imm, direction, h=DEFAULT_STEP, richardson=False):
    """``d/dt fun(P + t direction)`` at ``t = 0`` by central differences.

    With ``richardson`` the steps ``h`` and ``h/2`` are combined into a
    fourth-order estimate.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")

    def diff(step):
        return (fun(_flow_raw(imm, direction, step)) - fun(_flow_raw(imm, direction, -step))) / (2.0 * step)

    coarse = diff(h)
    if not richardson:
        return coarse
    return (4.0 * diff(0.5 * h) - coarse) / 3.0


def _derivative_of(scheme, direction, h, richardson):
    return directional_derivative(scheme.raw_value, scheme.base, direction, h, richardson)


def lie_bracket(a, b, h=DEFAULT_STEP, richardson=False):
    """``[A, B]`` at the base immersion, normal-projected there."""
    a, b = _as_scheme(a), _as_scheme(b)
    _check_same_base(a.base, b.base)
    base = a.base
    da_b = _derivative_of(b, a.raw_value(base), h, richardson)
    db_a = _derivative_of(a, b.raw_value(base), h, richardson)
    return KnotTangent(base, _imm.project(base.frame, da_b - db_a))


def covariant_derivative(kind, u, field, h=DEFAULT_STEP, richardson=False):
    """``nabla^perp_u X`` or the Levi-Civita derivative ``nabla^perp_u X - B(u, X)/2``."""
    kind = ConnectionKind(kind)
    field = _as_scheme(field)
    _check_same_base(u.base, field.base)
    base = u.base
    out = _imm.project(base.frame, _derivative_of(field, u.values, h, richardson))
    if kind is ConnectionKind.LEVI_CIVITA and base.d:
        W = _imm.gradient_field_W(base).values
        out = out - 0.5 * _b_tensor(base, u.values, field.raw_value(base), W)
    return KnotTangent(base, out)


def torsion(kind, a, b, h=DEFAULT_STEP, richardson=False):
    """``nabla_A B - nabla_B A - [A, B]`` at the base."""
    a, b = _as_scheme(a), _as_scheme(b)
    nab = covariant_derivative(kind, a.seed_tangent, b, h, richardson)
    nba = covariant_derivative(kind, b.seed_tangent, a, h, richardson)
    return nab - nba - lie_bracket(a, b, h, richardson)


def nijenhuis(u, v, h=DEFAULT_STEP, richardson=False, sign=1):
    """``N_J(X, Y) = 2 ([JX, JY] - [X, Y] - J[X, JY] - J[JX, Y])``.

    ``u`` and ``v`` may be tangent vectors (extended by the constant rule) or
    extension schemes.
    """
    X, Y = _as_scheme(u), _as_scheme(v)
    if sign != 1:
        X, Y = replace(X, sign=sign), replace(Y, sign=sign)
    _check_same_base(X.base, Y.base)
    JX, JY = X.with_J(), Y.with_J()
    b1 = lie_bracket(JX, JY, h, richardson)
    b2 = lie_bracket(X, Y, h, richardson)
    b3 = apply_J(lie_bracket(X, JY, h, richardson), sign)
    b4 = apply_J(lie_bracket(JX, Y, h, richardson), sign)
    return 2.0 * (b1 - b2 - b3 - b4)


def nabla_J_defect(kind, u, field, h=DEFAULT_STEP, richardson=False):
    """``(nabla_u J) X = nabla_u (J X) - J (nabla_u X)``."""
    field = _as_scheme(field)
    first = covariant_derivative(kind, u, field.with_J(), h, richardson)
    second = apply_J(covariant_derivative(kind, u, field, h, richardson), field.sign)
    return first - second


def metric_compatibility_defect(kind, u, b, c, h=DEFAULT_STEP, richardson=False):
    """``u <B, C> - <nabla_u B, C> - <B, nabla_u C>``."""
    b, c = _as_scheme(b), _as_scheme(c)
    _check_same_base(u.base, b.base)
    _check_same_base(u.base, c.base)

    def inner(imm):
        return _l2(imm, b.raw_value(imm), c.raw_value(imm))

    lhs = directional_derivative(inner, u.base, u.values, h, richardson)
    nb = covariant_derivative(kind, u, b, h, richardson)
    nc = covariant_derivative(kind, u, c, h, richardson)
    return lhs - l2_inner(nb, c.seed_tangent) - l2_inner(b.seed_tangent, nc)


def volume_variation_term(u, b, c):
    """``int_S g(u, W) g(b, c) vol``: the metric defect of ``nabla^perp``."""
    W = _imm.gradient_field_W(u.base).values
    return _imm.integrate(
        _imm.dot(u.values, W) * _imm.dot(b.values, c.values) * u.base.volume, u.base.grid.spacings
    )


def d_omega2_defect(u, v, w, h=DEFAULT_STEP, richardson=False, sign=1):
    """Exterior derivative ``d omega2(U, V, W)`` from the invariant formula.

    ``U omega(V,W) - V omega(U,W) + W omega(U,V)
    - omega([U,V],W) + omega([U,W],V) - omega([V,W],U)``.
    """
    U, V, Wf = _as_scheme(u), _as_scheme(v), _as_scheme(w)
    base = U.base

    def omega_along(p, q):
        return lambda imm: _omega(imm, p.raw_value(imm), q.raw_value(imm), sign)

    def deriv(x, p, q):
        return directional_derivative(omega_along(p, q), base, x.raw_value(base), h, richardson)

    def om(t, q):
        return _omega(base, t.values, q.raw_value(base), sign)

    value = deriv(U, V, Wf) - deriv(V, U, Wf) + deriv(Wf, U, V)
    value -= om(lie_bracket(U, V, h, richardson), Wf)
    value += om(lie_bracket(U, Wf, h, richardson), V)
    value -= om(lie_bracket(V, Wf, h, richardson), U)
    return float(value)
