"""Linear r-fold vector cross products on R^m.

The four Brown-Gray families are supported: Kaehler forms (r = 1, m even),
volume forms (r = m - 1), the G2 cross product (m = 7, r = 2) and the Spin(7)
triple product (m = 8, r = 3). Structure tensors are dense, hold exact
``0, ±1`` coefficients and are built once per instance.

Tensor layout: ``tensor[i_1, ..., i_r, k]`` is the ``k``-th component of
``chi(e_{i_1}, ..., e_{i_r})``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import octonions
from .errors import DimensionError, FrameError, NormalityError

FRAME_TOL = 1e-10


class VcpKind(str, Enum):
    KAEHLER = "kaehler"
    VOLUME = "volume"
    G2 = "g2"
    SPIN7 = "spin7"


@dataclass(frozen=True, eq=False)
class LinearVcp:
    """A linear r-fold vector cross product on R^m."""

    m: int
    r: int
    kind: VcpKind
    tensor: np.ndarray
    _terms: tuple = field(init=False, repr=False)
    _form_terms: tuple = field(init=False, repr=False)
    _packed: tuple = field(init=False, repr=False)
    _form_packed: tuple = field(init=False, repr=False)

    def __post_init__(self):
        t = np.array(self.tensor, dtype=float)
        if t.shape != (self.m,) * (self.r + 1):
            raise DimensionError("tensor", (self.m,) * (self.r + 1), t.shape)
        t.setflags(write=False)
        object.__setattr__(self, "tensor", t)
        # sparse term list grouped by output component, fixed order so that
        # per-sample evaluation is bitwise reproducible
        terms = []
        for k in range(self.m):
            nz = np.argwhere(t[..., k] != 0.0)
            terms.append(tuple((tuple(int(i) for i in idx), float(t[tuple(idx) + (k,)])) for idx in nz))
        object.__setattr__(self, "_terms", tuple(terms))
        form_terms = tuple((tuple(int(i) for i in idx), float(t[tuple(idx)])) for idx in np.argwhere(t != 0.0))
        object.__setattr__(self, "_form_terms", form_terms)
        object.__setattr__(self, "_packed", _pack(terms, self.r))
        object.__setattr__(self, "_form_packed", _pack([form_terms], self.r + 1))

    # -- evaluation on (batched) arrays; inputs are validated by callers --

    def contract(self, *vectors):
        """``chi(v_1, ..., v_r)`` for arrays of shape ``(..., m)``."""
        if all(np.ndim(v) == 1 for v in vectors):
            return _single(self._packed, vectors)
        shape = np.broadcast_shapes(*(np.shape(v) for v in vectors))
        out = np.zeros(shape, dtype=float)
        for k, terms in enumerate(self._terms):
            acc = np.zeros(shape[:-1])
            for idx, c in terms:
                prod = c * vectors[0][..., idx[0]]
                for v, i in zip(vectors[1:], idx[1:]):
                    prod = prod * v[..., i]
                acc = acc + prod
            out[..., k] = acc
        return out

    def form(self, *vectors):
        """``phi(v_1, ..., v_{r+1}) = <chi(v_1, ..., v_r), v_{r+1}>``.

        Summed directly over the nonzero entries of the full tensor rather than
        through :meth:`contract`.
        """
        if all(np.ndim(v) == 1 for v in vectors):
            return float(_single(self._form_packed, vectors)[0])
        shape = np.broadcast_shapes(*(np.shape(v)[:-1] for v in vectors))
        total = np.zeros(shape)
        for idx, c in self._form_terms:
            prod = c * vectors[0][..., idx[0]]
            for v, i in zip(vectors[1:], idx[1:]):
                prod = prod * v[..., i]
            total = total + prod
        return total

    @property
    def nonzero_count(self):
        return int(np.count_nonzero(self.tensor))

    def to_json(self):
        entries = [[list(map(int, idx)), float(self.tensor[tuple(idx)])] for idx in np.argwhere(self.tensor != 0)]
        return json.dumps({"kind": self.kind.value, "m": self.m, "r": self.r, "entries": entries})

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        m, r = int(data["m"]), int(data["r"])
        t = np.zeros((m,) * (r + 1))
        for idx, c in data["entries"]:
            t[tuple(idx)] = c
        return cls(m, r, VcpKind(data["kind"]), t)


def _pack(groups, arity):
    # one zero-padded row per output component
    width = max(1, max(len(g) for g in groups))
    coef = np.zeros((len(groups), width))
    idx = np.zeros((len(groups), width, arity), dtype=np.intp)
    for k, group in enumerate(groups):
        for j, (i, c) in enumerate(group):
            coef[k, j] = c
            idx[k, j] = i
    return coef, idx


def _single(packed, vectors):
    # same product and summation order as the batched path (cumsum adds left
    # to right, trailing zero padding is exact), so results agree bitwise
    coef, idx = packed
    prod = coef * np.asarray(vectors[0], dtype=float)[idx[..., 0]]
    for j in range(1, idx.shape[-1]):
        prod = prod * np.asarray(vectors[j], dtype=float)[idx[..., j]]
    return np.cumsum(prod, axis=1)[:, -1]


def kaehler(m=4):
    """Standard Kaehler VCP on R^m: ``e_{2i-1} -> e_{2i}``, ``e_{2i} -> -e_{2i-1}``."""
    if m < 2 or m % 2:
        raise DimensionError("m", "a positive even integer", m)
    t = np.zeros((m, m))
    for i in range(0, m, 2):
        t[i, i + 1] = 1.0
        t[i + 1, i] = -1.0
    return LinearVcp(m, 1, VcpKind.KAEHLER, t)


def _permutation_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        while seq[i] != i:
            j = seq[i]
            seq[i], seq[j] = seq[j], seq[i]
            sign = -sign
    return sign


def volume_form(m=3):
    """The (m-1)-fold VCP dual to the standard volume form (Hodge star)."""
    if m < 2:
        raise DimensionError("m", "an integer >= 2", m)
    t = np.zeros((m,) * m)
    for perm in itertools.permutations(range(m)):
        t[perm] = _permutation_sign(perm)
    return LinearVcp(m, m - 1, VcpKind.VOLUME, t)


def g2():
    """Cross product of imaginary octonions on R^7."""
    t = np.zeros((7, 7, 7))
    for i in range(7):
        for j in range(7):
            t[i, j] = octonions.MULT[i + 1, j + 1, 1:]
    return LinearVcp(7, 2, VcpKind.G2, t)


def spin7():
    """Triple cross product ``(x (ȳ z) - z (ȳ x)) / 2`` on the octonions R^8."""
    eye = np.eye(8)
    t = np.zeros((8, 8, 8, 8))
    for i, j, k in itertools.product(range(8), repeat=3):
        if len({i, j, k}) == 3:
            t[i, j, k] = octonions.triple_cross(eye[i], eye[j], eye[k])
    # coefficients are exactly 0 or ±1; strip rounding noise
    return LinearVcp(8, 3, VcpKind.SPIN7, np.rint(t))


def from_kind(kind, m=None):
    kind = VcpKind(kind)
    if kind is VcpKind.KAEHLER:
        return kaehler(4 if m is None else m)
    if kind is VcpKind.VOLUME:
        return volume_form(3 if m is None else m)
    expected = 7 if kind is VcpKind.G2 else 8
    if m is not None and m != expected:
        raise DimensionError("m", expected, m)
    return g2() if kind is VcpKind.G2 else spin7()


def corrupted(vcp, index=None):
    """Copy of ``vcp`` with one structure coefficient sign-flipped (test fixture)."""
    t = np.array(vcp.tensor)
    if index is None:
        index = tuple(int(i) for i in np.argwhere(t != 0)[0])
    t[index] = -t[index]
    return LinearVcp(vcp.m, vcp.r, vcp.kind, t)


# --------------------------------------------------------------------------
# operations on single vectors


def _as_vector(v, m, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (m,):
        raise DimensionError(name, (m,), v.shape)
    return v


def evaluate_chi(vcp, *args):
    """Evaluate ``chi(v_1, ..., v_r)``."""
    if len(args) != vcp.r:
        raise DimensionError("args", f"{vcp.r} vectors", f"{len(args)} vectors")
    vs = [_as_vector(v, vcp.m, f"args[{i}]") for i, v in enumerate(args)]
    return vcp.contract(*vs)


def vcp_form(vcp, *args):
    """Evaluate the (r+1)-form ``<chi(v_1, ..., v_r), v_{r+1}>``."""
    if len(args) != vcp.r + 1:
        raise DimensionError("args", f"{vcp.r + 1} vectors", f"{len(args)} vectors")
    vs = [_as_vector(v, vcp.m, f"args[{i}]") for i, v in enumerate(args)]
    return float(vcp.form(*vs))


def orthonormalize(vectors):
    """Modified Gram-Schmidt, preserving order and orientation of the span."""
    vs = np.array(vectors, dtype=float, ndmin=2)
    out = np.zeros_like(vs)
    for i in range(len(vs)):
        w = vs[i].copy()
        for j in range(i):
            w -= np.dot(w, out[j]) * out[j]
        norm = np.linalg.norm(w)
        if norm < 1e-14:
            raise FrameError(f"vector {i} is linearly dependent on the previous ones")
        out[i] = w / norm
    return out


@dataclass(frozen=True, eq=False)
class OrientedPlaneElement:
    """An oriented k-plane given by an orthonormal frame (rows of ``frame``)."""

    frame: np.ndarray

    def __post_init__(self):
        f = np.array(self.frame, dtype=float).reshape(-1, np.shape(self.frame)[-1])
        gram = f @ f.T
        err = np.max(np.abs(gram - np.eye(len(f)))) if len(f) else 0.0
        if err > FRAME_TOL:
            raise FrameError(f"frame is not orthonormal (max |<f_i, f_j> - delta_ij| = {err:.3e})")
        f.setflags(write=False)
        object.__setattr__(self, "frame", f)

    @classmethod
    def from_vectors(cls, vectors):
        return cls(orthonormalize(vectors))

    @property
    def k(self):
        return self.frame.shape[0]

    @property
    def m(self):
        return self.frame.shape[1]

    def project_out(self, v):
        v = np.asarray(v, dtype=float)
        return v - self.frame.T @ (self.frame @ v)


def induced_complex_structure(vcp, plane, xi, sign=1):
    """Complex structure ``J(chi, v) xi = chi(f_1, ..., f_{r-1}, xi)`` on ``v^perp``.

    ``plane`` must carry ``r - 1`` frame vectors. ``sign=-1`` selects the
    opposite orientation of the plane.
    """
    if plane.m != vcp.m:
        raise DimensionError("plane", f"frame in R^{vcp.m}", f"frame in R^{plane.m}")
    if plane.k != vcp.r - 1:
        raise DimensionError("plane", f"{vcp.r - 1} frame vectors", f"{plane.k} frame vectors")
    xi = _as_vector(xi, vcp.m, "xi")
    if plane.k:
        violation = float(np.max(np.abs(plane.frame @ xi)))
        if violation > FRAME_TOL * max(1.0, float(np.linalg.norm(xi))):
            raise NormalityError("xi is not orthogonal to the plane", violation)
    return sign * vcp.contract(*plane.frame, xi)


@dataclass(frozen=True)
class AxiomReport:
    orthogonality: float
    norm: float
    alternation: float
    tuples_checked: int

    @property
    def max_violation(self):
        return max(self.orthogonality, self.norm, self.alternation)


def verify_vcp_axioms(vcp, trials=1000, seed=0):
    """Largest violation of the VCP axioms on all basis tuples plus random tuples.

    Random tuples are drawn from the unit sphere so that violations are on an
    absolute O(1) scale.
    """
    eye = np.eye(vcp.m)
    basis = np.array([[eye[i] for i in idx] for idx in itertools.product(range(vcp.m), repeat=vcp.r)])
    rng = np.random.default_rng(seed)
    rand = rng.normal(size=(trials, vcp.r, vcp.m))
    rand /= np.linalg.norm(rand, axis=-1, keepdims=True)
    tuples = np.concatenate([basis, rand]) if trials else basis

    args = [tuples[:, i] for i in range(vcp.r)]
    value = vcp.contract(*args)
    ortho = max(float(np.max(np.abs(np.einsum("nk,nk->n", value, a)))) for a in args)
    gram = np.einsum("nik,njk->nij", tuples, tuples)
    wedge2 = np.linalg.det(gram)
    norm = float(np.max(np.abs(np.einsum("nk,nk->n", value, value) - wedge2)))
    alt = 0.0
    if vcp.r >= 2:
        swapped = [args[1], args[0], *args[2:]]
        alt = float(np.max(np.abs(value + vcp.contract(*swapped))))
    return AxiomReport(ortho, norm, alt, len(tuples))
