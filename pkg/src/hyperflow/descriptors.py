"""Recursive grammar of isoparametric submanifolds of H^m(-1).

A descriptor names a submanifold by how it is built:

* ``Ambient(m, r)``          -- the hyperboloid H^m(-r) itself (codimension 0);
* ``FullProduct(l, r, leaf)``-- H^l(-r) x M' placed with the Lorentz block on
  the first l and last coordinates and the spherical leaf M' (a product of
  spheres, or a single point) in the middle block;
* ``Umbilic(umb, inner)``    -- a submanifold of the totally umbilical
  hypersurface {<x, xi> = a} in H^m(-1), whose inner structure is another
  descriptor, a product of spheres, or a Euclidean configuration, matching
  the hypersurface's intrinsic type.

All descriptor values are immutable and hashable; vector data is stored as
tuples and materialized to ndarrays on use.  Charts are explicit: hyperbolic
factors use polar coordinates on R^l, sphere factors use angles, so every
immersion is a smooth map from a box in R^n that finite differencing can
probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Union

import numpy as np

from .errors import (
    DomainError,
    EmptyHypersurfaceError,
    InvalidArgumentError,
)
from .lorentz import as_vector, minkowski_inner

_XI_NORM_TOL = 1e-12
_POINT_TOL = 1e-8


# ---------------------------------------------------------------------------
# umbilical hypersurface data


@dataclass(frozen=True)
class UmbilicData:
    """Invariants of the totally umbilical hypersurface {<x, xi> = a}.

    ``beta = 1/sqrt(<xi,xi> + a^2)`` and ``alpha = beta a``; the hypersurface
    is intrinsically hyperbolic, Euclidean or spherical according to
    <xi,xi> = +1, 0, -1 (equivalently alpha <, =, > 1).  When alpha != 1 the
    center ``eta = alpha beta/(1-alpha^2) xi`` satisfies
    <x - eta, x - eta> = 1/(alpha^2 - 1) on the hypersurface.  ``c`` is the
    constant beta/(alpha+1) of the boundary map.
    """

    xi: tuple[float, ...]
    a: float
    alpha: float
    beta: float
    c: float
    kind: str
    totally_geodesic: bool
    eta: tuple[float, ...] | None
    #: 1 - alpha^2 evaluated as <xi,xi> beta^2; exact where the direct
    #: difference would cancel catastrophically near alpha = 1
    one_minus_alpha2: float = 0.0

    @property
    def m(self) -> int:
        return len(self.xi) - 1

    @property
    def xi_array(self) -> np.ndarray:
        return np.asarray(self.xi, dtype=float)

    @property
    def eta_array(self) -> np.ndarray | None:
        return None if self.eta is None else np.asarray(self.eta, dtype=float)


def derive_umbilic(xi, a: float) -> UmbilicData:
    """Canonical umbilical data from a normal direction and its level.

    ``xi`` must have <xi,xi> in {-1, 0, +1}; the sign of ``a`` is normalized
    to a >= 0 by flipping xi.  Raises when the hypersurface would be empty
    on the upper sheet (<xi,xi> + a^2 <= 0, or a time orientation of xi
    incompatible with a > 0).
    """
    xiv = as_vector(xi)
    q = minkowski_inner(xiv, xiv)
    q_exact = round(q)
    if q_exact not in (-1, 0, 1) or abs(q - q_exact) > _XI_NORM_TOL:
        raise InvalidArgumentError(f"<xi,xi> = {q!r} must be -1, 0 or +1")
    a = float(a)
    if a < 0:
        xiv, a = -xiv, -a
    if q_exact + a * a <= 0:
        raise EmptyHypersurfaceError(f"<xi,xi> + a^2 = {q_exact + a * a:.6f} <= 0: empty hypersurface")
    if q_exact <= 0 and xiv[-1] >= 0:
        raise EmptyHypersurfaceError(
            "a non-spacelike xi with a > 0 must point to the past (xi_{m+1} < 0) "
            "for the hypersurface to meet the upper sheet"
        )

    if q_exact == 0:
        alpha, beta, one = 1.0, 1.0 / a, 0.0
        eta = None
        kind = "euclidean"
    else:
        beta = 1.0 / math.sqrt(q_exact + a * a)
        alpha = beta * a
        one = q_exact * beta * beta  # = 1 - alpha^2 without cancellation
        # alpha beta / (1 - alpha^2) collapses to a / (q beta) = q a
        eta = tuple((q_exact * a) * xiv)
        kind = "hyperbolic" if q_exact == 1 else "spherical"
    return UmbilicData(
        xi=tuple(xiv),
        a=a,
        alpha=alpha,
        beta=beta,
        c=beta / (alpha + 1.0),
        kind=kind,
        totally_geodesic=(a == 0.0),
        eta=eta,
        one_minus_alpha2=one,
    )


# ---------------------------------------------------------------------------
# leaf types


@dataclass(frozen=True)
class ProductOfSpheres:
    """S^{p_1}(s_1) x ... x S^{p_k}(s_k), or a single point on a sphere.

    Factors are (dimension, squared radius) pairs placed in consecutive
    coordinate blocks of size p_i + 1.  The point variant has no factors and
    a fixed unit ``point_position``; its actual location is
    sqrt(R^2) * point_position on the context sphere of squared radius R^2.
    """

    factors: tuple[tuple[int, float], ...] = ()
    point_position: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.factors and self.point_position is not None:
            raise InvalidArgumentError("a product of spheres is either factors or a point, not both")
        if not self.factors and self.point_position is None:
            raise InvalidArgumentError("a point leaf needs an explicit unit position")
        fac = tuple((int(p), float(s)) for p, s in self.factors)
        for p, s in fac:
            if p < 1 or s <= 0:
                raise InvalidArgumentError(f"bad sphere factor (p={p}, s={s})")
        object.__setattr__(self, "factors", fac)
        if self.point_position is not None:
            pos = tuple(float(v) for v in self.point_position)
            if abs(np.linalg.norm(pos) - 1.0) > _XI_NORM_TOL:
                raise InvalidArgumentError("point position must be a unit vector")
            object.__setattr__(self, "point_position", pos)

    @property
    def is_point(self) -> bool:
        return not self.factors

    @property
    def dim(self) -> int:
        return sum(p for p, _ in self.factors)

    @property
    def coords_dim(self) -> int:
        if self.is_point:
            return len(self.point_position)
        return sum(p + 1 for p, _ in self.factors)

    @property
    def ambient_radius2(self) -> float | None:
        """Squared radius of the sphere the product fills; None for a point."""
        if self.is_point:
            return None
        return sum(s for _, s in self.factors)


@dataclass(frozen=True)
class EuclideanIso:
    """Flat R^k times an optional product of spheres inside Euclidean space.

    ``ambient_dim`` defaults to the coordinates the blocks occupy; a larger
    value pads with constant coordinates.  ``offset`` translates the whole
    configuration.  Totally geodesic (an affine subspace) iff there are no
    sphere factors.
    """

    flat_dim: int
    spheres: ProductOfSpheres | None = None
    offset: tuple[float, ...] | None = None
    ambient_dim: int | None = None

    def __post_init__(self):
        if self.flat_dim < 0:
            raise InvalidArgumentError("flat_dim must be >= 0")
        if self.spheres is not None and self.spheres.is_point:
            raise InvalidArgumentError("use offset, not a point leaf, to translate a Euclidean flat")
        base = self.flat_dim + (self.spheres.coords_dim if self.spheres else 0)
        amb = base if self.ambient_dim is None else int(self.ambient_dim)
        if amb < base:
            raise InvalidArgumentError(f"ambient_dim {amb} cannot hold the blocks ({base})")
        object.__setattr__(self, "ambient_dim", amb)
        if self.offset is not None:
            off = tuple(float(v) for v in self.offset)
            if len(off) != amb:
                raise InvalidArgumentError(f"offset length {len(off)} != ambient_dim {amb}")
            object.__setattr__(self, "offset", off)

    @property
    def dim(self) -> int:
        return self.flat_dim + (self.spheres.dim if self.spheres else 0)

    @property
    def offset_array(self) -> np.ndarray:
        if self.offset is None:
            return np.zeros(self.ambient_dim)
        return np.asarray(self.offset, dtype=float)


# ---------------------------------------------------------------------------
# descriptor variants


@dataclass(frozen=True)
class Ambient:
    """The whole hyperboloid H^m(-r) as a codimension-0 submanifold."""

    m: int
    r: float = 1.0

    def __post_init__(self):
        if self.m < 1 or self.r <= 0:
            raise InvalidArgumentError(f"bad ambient H^{self.m}(-{self.r})")


@dataclass(frozen=True)
class FullProduct:
    """H^l(-r) x leaf inside H^m(-1), m = l + leaf coordinates."""

    l: int
    r: float
    leaf: ProductOfSpheres

    def __post_init__(self):
        if self.l < 1:
            raise InvalidArgumentError("the Lorentz factor needs l >= 1")
        if self.r < 1:
            raise InvalidArgumentError("a full product requires r >= 1")
        if not self.leaf.is_point:
            if self.r <= 1:
                raise InvalidArgumentError("a non-point leaf requires r > 1")
            if abs(self.leaf.ambient_radius2 - (self.r - 1.0)) > 1e-9:
                raise InvalidArgumentError(
                    f"leaf fills a sphere of squared radius {self.leaf.ambient_radius2}, "
                    f"but r - 1 = {self.r - 1.0}"
                )


@dataclass(frozen=True)
class Umbilic:
    """A submanifold of the umbilical hypersurface {<x, xi> = a} in H^m(-1)."""

    umb: UmbilicData
    inner: Union["Ambient", "FullProduct", "Umbilic", ProductOfSpheres, EuclideanIso]

    def __post_init__(self):
        umb, inner = self.umb, self.inner
        m = umb.m
        if umb.kind == "hyperbolic":
            if not isinstance(inner, (Ambient, FullProduct, Umbilic)):
                raise InvalidArgumentError("a hyperbolic hypersurface needs a hyperbolic descriptor inside")
            inner_m = dimensions(inner).m
            if inner_m != m - 1:
                raise InvalidArgumentError(f"inner ambient dimension {inner_m} != {m - 1}")
            if isinstance(inner, Ambient) and abs(inner.r - 1.0) > 0:
                raise InvalidArgumentError("the inner hyperbolic model is normalized to curvature -1")
        elif umb.kind == "spherical":
            if not isinstance(inner, ProductOfSpheres):
                raise InvalidArgumentError("a spherical hypersurface needs a product of spheres inside")
            if inner.coords_dim != m:
                raise InvalidArgumentError(f"leaf occupies {inner.coords_dim} coordinates, expected {m}")
            want = umb.a**2 - 1.0
            if not inner.is_point and abs(inner.ambient_radius2 - want) > 1e-9:
                raise InvalidArgumentError(
                    f"leaf squared radius {inner.ambient_radius2} != a^2 - 1 = {want}"
                )
        else:
            if not isinstance(inner, EuclideanIso):
                raise InvalidArgumentError("a Euclidean hypersurface needs a Euclidean configuration inside")
            if inner.ambient_dim != m - 1:
                raise InvalidArgumentError(f"Euclidean ambient {inner.ambient_dim} != {m - 1}")
        n = dimensions(self).n
        if not (0 <= n < m):
            raise InvalidArgumentError(f"umbilic level requires 0 <= n < m, got n={n}, m={m}")


IsoDescriptor = Union[Ambient, FullProduct, Umbilic]


class Dimensions(NamedTuple):
    n: int
    m: int
    codim: int


def dimensions(d) -> Dimensions:
    """Submanifold dimension, ambient dimension and codimension."""
    if isinstance(d, Ambient):
        return Dimensions(d.m, d.m, 0)
    if isinstance(d, FullProduct):
        n = d.l + d.leaf.dim
        m = d.l + d.leaf.coords_dim
        return Dimensions(n, m, m - n)
    if isinstance(d, Umbilic):
        inner = d.inner
        if isinstance(inner, ProductOfSpheres):
            n = inner.dim
        elif isinstance(inner, EuclideanIso):
            n = inner.dim
        else:
            n = dimensions(inner).n
        m = d.umb.m
        return Dimensions(n, m, m - n)
    raise InvalidArgumentError(f"not a descriptor: {type(d).__name__}")


# ---------------------------------------------------------------------------
# charts

_ANGLE_POLAR = (0.35, math.pi - 0.35)
_ANGLE_AZIMUTH = (-math.pi + 0.3, math.pi - 0.3)
_FLAT_BOX = (-1.2, 1.2)


def _sphere_box(leaf: ProductOfSpheres) -> list[tuple[float, float]]:
    box: list[tuple[float, float]] = []
    for p, _ in leaf.factors:
        box.extend([_ANGLE_POLAR] * (p - 1))
        box.append(_ANGLE_AZIMUTH)
    return box


def chart_dim(d) -> int:
    return dimensions(d).n


def chart_box(d) -> list[tuple[float, float]]:
    """Per-coordinate sampling box of the canonical chart."""
    if isinstance(d, Ambient):
        return [_FLAT_BOX] * d.m
    if isinstance(d, FullProduct):
        return [_FLAT_BOX] * d.l + _sphere_box(d.leaf)
    if isinstance(d, Umbilic):
        inner = d.inner
        if isinstance(inner, ProductOfSpheres):
            return _sphere_box(inner)
        if isinstance(inner, EuclideanIso):
            return [_FLAT_BOX] * inner.flat_dim + (_sphere_box(inner.spheres) if inner.spheres else [])
        return chart_box(inner)
    raise InvalidArgumentError(f"not a descriptor: {type(d).__name__}")


def _sinhc(q: float) -> float:
    if abs(q) < 1e-6:
        return 1.0 + q * q / 6.0
    return math.sinh(q) / q


def _hyperbolic_chart(s: np.ndarray, r: float) -> np.ndarray:
    """Polar chart R^l -> H^l(-r), Lorentz coordinates with time last."""
    q = float(np.linalg.norm(s))
    return math.sqrt(r) * np.concatenate([_sinhc(q) * s, [math.cosh(q)]])


def _sphere_chart(angles: np.ndarray, radius2: float) -> np.ndarray:
    """Polar angles -> point of S^p(radius2) in R^(p+1)."""
    p = angles.size
    x = np.empty(p + 1)
    sin_prod = 1.0
    for i in range(p):
        x[i] = sin_prod * math.cos(angles[i])
        sin_prod *= math.sin(angles[i])
    x[p] = sin_prod
    return math.sqrt(radius2) * x


def _leaf_immersion(leaf: ProductOfSpheres, u: np.ndarray, ambient_radius2: float | None) -> np.ndarray:
    if leaf.is_point:
        if ambient_radius2 is None:
            raise InvalidArgumentError("a point leaf needs its context sphere radius")
        return math.sqrt(max(ambient_radius2, 0.0)) * np.asarray(leaf.point_position, dtype=float)
    blocks, k = [], 0
    for p, s in leaf.factors:
        blocks.append(_sphere_chart(u[k : k + p], s))
        k += p
    return np.concatenate(blocks)


def _euclidean_immersion(e: EuclideanIso, u: np.ndarray) -> np.ndarray:
    w = e.offset_array.copy()
    w[: e.flat_dim] += u[: e.flat_dim]
    if e.spheres is not None:
        k0 = e.flat_dim
        w[k0 : k0 + e.spheres.coords_dim] += _leaf_immersion(e.spheres, u[e.flat_dim :], None)
    return w


# placement of a full product: V occupies the first l and last coordinates


def _product_assemble(d: FullProduct, xv: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.concatenate([xv[:-1], y, [xv[-1]]])


def _product_split(d: FullProduct, x: np.ndarray, validate: bool = False) -> tuple[np.ndarray, np.ndarray]:
    xv, y = np.concatenate([x[: d.l], [x[-1]]]), x[d.l : -1]
    if validate:
        if abs(minkowski_inner(xv, xv) + d.r) > _POINT_TOL * max(1.0, d.r) or xv[-1] <= 0:
            raise DomainError("Lorentz block is not on the upper sheet of H^l(-r)")
        if d.leaf.is_point:
            want = math.sqrt(max(d.r - 1.0, 0.0)) * np.asarray(d.leaf.point_position)
            if np.max(np.abs(y - want)) > _POINT_TOL:
                raise DomainError("point leaf block is away from its fixed position")
        else:
            k = 0
            for p, s in d.leaf.factors:
                block = y[k : k + p + 1]
                if abs(float(np.dot(block, block)) - s) > _POINT_TOL * max(1.0, s):
                    raise DomainError(f"leaf factor block has squared radius != {s}")
                k += p + 1
    return xv, y


# placement of an umbilic level: deterministic orthonormal complement of xi


def _complement_basis(span: list[np.ndarray]) -> list[np.ndarray]:
    """Orthonormal basis of the complement of mutually orthogonal, non-null span vectors."""
    dim = span[0].size
    cand = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        v = e.copy()
        for w in span:
            v -= (minkowski_inner(v, w) / minkowski_inner(w, w)) * w
        cand.append(v)
    basis: list[np.ndarray] = []
    need = dim - len(span)
    for _ in range(need):
        for v in cand:
            for u in basis:
                v -= (minkowski_inner(v, u) / minkowski_inner(u, u)) * u
        norms2 = [abs(minkowski_inner(v, v)) for v in cand]
        k = int(np.argmax(norms2))
        v = cand.pop(k)
        q = minkowski_inner(v, v)
        if abs(q) < 1e-12:
            raise InvalidArgumentError("degenerate complement while placing an umbilic level")
        basis.append(v / math.sqrt(abs(q)))
    return basis


class _HyperbolicPlacement(NamedTuple):
    J: np.ndarray          # (m+1, m) columns: m-1 spacelike then 1 future timelike
    scale: float           # sqrt(R), R = 1/(1 - alpha^2)
    eta: np.ndarray


class _SphericalPlacement(NamedTuple):
    J: np.ndarray          # (m+1, m) spacelike columns spanning xi^perp
    radius2: float         # a^2 - 1
    eta: np.ndarray


class _EuclideanPlacement(NamedTuple):
    x0: np.ndarray         # base point of the horospherical chart
    W: np.ndarray          # (m+1, m-1) spacelike columns, orthogonal to xi and x0
    xi: np.ndarray
    a: float


@lru_cache(maxsize=None)
def _umbilic_placement(umb: UmbilicData):
    xi = umb.xi_array
    m = umb.m
    if umb.kind == "hyperbolic":
        cols = _complement_basis([xi])
        timelike = [v for v in cols if minkowski_inner(v, v) < 0]
        spacelike = [v for v in cols if minkowski_inner(v, v) > 0]
        if len(timelike) != 1 or len(spacelike) != m - 1:
            raise InvalidArgumentError("complement of a spacelike xi must have signature (m-1, 1)")
        t = timelike[0]
        R = 1.0 / umb.one_minus_alpha2
        eta = umb.eta_array
        base = eta + math.sqrt(R) * t
        if base[-1] <= 0:
            t = -t
        return _HyperbolicPlacement(np.column_stack(spacelike + [t]), math.sqrt(R), eta)
    if umb.kind == "spherical":
        cols = _complement_basis([xi])
        if any(minkowski_inner(v, v) < 0 for v in cols):
            raise InvalidArgumentError("complement of a timelike xi must be spacelike")
        return _SphericalPlacement(np.column_stack(cols), umb.a**2 - 1.0, umb.eta_array)
    # euclidean: horospherical chart around a canonical base point; the span
    # of {xi, x0} is projected out through the orthogonal pair {x0, xi/a + x0}
    # because the null xi itself cannot normalize a projection
    a = umb.a
    nu = np.concatenate([-xi[:-1], [xi[-1]]])
    x0 = -xi / (2.0 * a) - (a / (2.0 * xi[-1] ** 2)) * nu
    zeta = xi / a + x0
    cols = _complement_basis([x0, zeta])
    return _EuclideanPlacement(x0, np.column_stack(cols), xi, a)


def _umbilic_embed(d: Umbilic, inner_point: np.ndarray) -> np.ndarray:
    """Map an inner-model point into H^m(-1) through the level's placement."""
    pl = _umbilic_placement(d.umb)
    if isinstance(pl, _HyperbolicPlacement):
        return pl.eta + pl.scale * (pl.J @ inner_point)
    if isinstance(pl, _SphericalPlacement):
        return pl.eta + pl.J @ inner_point
    w = inner_point
    return pl.x0 + pl.W @ w - (float(np.dot(w, w)) / (2.0 * pl.a)) * pl.xi


def _umbilic_split(d: Umbilic, x: np.ndarray, tol: float = _POINT_TOL) -> np.ndarray:
    """Inner-model coordinates of an ambient point, with membership checks."""
    pl = _umbilic_placement(d.umb)
    if isinstance(pl, _HyperbolicPlacement):
        rel = (x - pl.eta) / pl.scale
        signs = np.append(np.ones(pl.J.shape[1] - 1), -1.0)
        inner = signs * np.array([minkowski_inner(rel, pl.J[:, i]) for i in range(pl.J.shape[1])])
    elif isinstance(pl, _SphericalPlacement):
        rel = x - pl.eta
        inner = np.array([minkowski_inner(rel, pl.J[:, i]) for i in range(pl.J.shape[1])])
    else:
        rel = x - pl.x0
        inner = np.array([minkowski_inner(rel, pl.W[:, i]) for i in range(pl.W.shape[1])])
    if np.max(np.abs(_umbilic_embed(d, inner) - x)) > tol:
        raise DomainError("point is not on the umbilical hypersurface of this level")
    return inner


def immerse(d, u) -> np.ndarray:
    """Evaluate the canonical chart of a descriptor at chart parameters u."""
    uv = np.atleast_1d(np.asarray(u, dtype=float))
    if uv.size != chart_dim(d):
        raise InvalidArgumentError(f"chart needs {chart_dim(d)} parameters, got {uv.size}")
    if not np.all(np.isfinite(uv)):
        raise InvalidArgumentError("chart parameters must be finite")
    return _immerse(d, uv)


def _immerse(d, u: np.ndarray) -> np.ndarray:
    if isinstance(d, Ambient):
        return _hyperbolic_chart(u, d.r)
    if isinstance(d, FullProduct):
        xv = _hyperbolic_chart(u[: d.l], d.r)
        y = _leaf_immersion(d.leaf, u[d.l :], d.r - 1.0)
        return _product_assemble(d, xv, y)
    if isinstance(d, Umbilic):
        inner = d.inner
        if isinstance(inner, ProductOfSpheres):
            z = _leaf_immersion(inner, u, d.umb.a**2 - 1.0)
        elif isinstance(inner, EuclideanIso):
            z = _euclidean_immersion(inner, u)
        else:
            z = _immerse(inner, u)
        return _umbilic_embed(d, z)
    raise InvalidArgumentError(f"not a descriptor: {type(d).__name__}")


# ---------------------------------------------------------------------------
# closed-form mean curvature


class MeanCurvature(NamedTuple):
    hyperbolic: np.ndarray
    lorentzian: np.ndarray


def _leaf_euclidean_H(leaf: ProductOfSpheres, y: np.ndarray, tol: float = _POINT_TOL) -> np.ndarray:
    """Euclidean mean curvature of a product of spheres: -(p_i/s_i) per block."""
    if leaf.is_point:
        return np.zeros_like(y)
    H = np.empty_like(y)
    k = 0
    for p, s in leaf.factors:
        block = y[k : k + p + 1]
        if abs(float(np.dot(block, block)) - s) > tol * max(1.0, s):
            raise DomainError(f"factor block has squared radius {float(np.dot(block, block)):.6f}, expected {s}")
        H[k : k + p + 1] = -(p / s) * block
        k += p + 1
    return H


def _euclidean_H(e: EuclideanIso, w: np.ndarray) -> np.ndarray:
    H = np.zeros_like(w)
    if e.spheres is not None:
        k0 = e.flat_dim
        rel = w - e.offset_array
        H[k0 : k0 + e.spheres.coords_dim] = _leaf_euclidean_H(e.spheres, rel[k0 : k0 + e.spheres.coords_dim])
    return H


def _hyperbolic_H(d, x: np.ndarray) -> np.ndarray:
    """Mean curvature of the descriptor's immersion inside H^m(-1) (or H^m(-r))."""
    if isinstance(d, Ambient):
        return np.zeros_like(x)
    if isinstance(d, FullProduct):
        xv, y = _product_split(d, x)
        if abs(minkowski_inner(xv, xv) + d.r) > _POINT_TOL or xv[-1] <= 0:
            raise DomainError("Lorentz block is not on H^l(-r)")
        n = dimensions(d).n
        HL_V = (d.l / d.r) * xv
        HL_perp = _leaf_euclidean_H(d.leaf, y) if not d.leaf.is_point else np.zeros_like(y)
        HL = _product_assemble(d, HL_V, HL_perp)
        return HL - n * x
    if isinstance(d, Umbilic):
        umb = d.umb
        n = dimensions(d).n
        inner_coords = _umbilic_split(d, x)
        inner = d.inner
        if isinstance(inner, ProductOfSpheres):
            pl = _umbilic_placement(umb)
            if inner.is_point:
                H1 = np.zeros_like(x)
            else:
                He = _leaf_euclidean_H(inner, inner_coords)
                Hs = He + (inner.dim / pl.radius2) * inner_coords
                H1 = pl.J @ Hs
        elif isinstance(inner, EuclideanIso):
            pl = _umbilic_placement(umb)
            Hw = _euclidean_H(inner, inner_coords)
            H1 = pl.W @ Hw - (float(np.dot(inner_coords, Hw)) / pl.a) * pl.xi
        else:
            pl = _umbilic_placement(umb)
            Ht = _hyperbolic_H(inner, inner_coords)
            H1 = (pl.J @ Ht) / pl.scale
        return H1 - n * umb.alpha * (umb.alpha * x + umb.beta * umb.xi_array)
    raise InvalidArgumentError(f"not a descriptor: {type(d).__name__}")


def mean_curvature(d, x) -> MeanCurvature:
    """Closed-form mean curvature at a point of the immersion.

    Returns both the hyperbolic vector H (tangent to the hyperboloid) and the
    Lorentzian vector H^L = H + (n/r) x of the same submanifold viewed in
    R^(m,1).
    """
    dims = dimensions(d)
    xv = as_vector(x, dims.m)
    r_top = d.r if isinstance(d, Ambient) else 1.0
    floor = 1e-12 * float(np.dot(xv, xv))
    if abs(minkowski_inner(xv, xv) + r_top) > max(_POINT_TOL, floor) or xv[-1] <= 0:
        raise DomainError("point is not on the ambient hyperboloid")
    H = _hyperbolic_H(d, xv)
    return MeanCurvature(hyperbolic=H, lorentzian=H + (dims.n / r_top) * xv)


# ---------------------------------------------------------------------------
# shape classification


class ShapeFlags(NamedTuple):
    minimal: bool
    totally_geodesic: bool
    intrinsically_flat: bool


def _leaf_flat(leaf: ProductOfSpheres) -> bool:
    return all(p <= 1 for p, _ in leaf.factors)


def _leaf_totally_geodesic(leaf: ProductOfSpheres) -> bool:
    # a great subsphere is the single factor filling the whole sphere
    return leaf.is_point or len(leaf.factors) == 1


def classify_shape(d) -> ShapeFlags:
    """Minimality, total geodesy and intrinsic flatness from the closed form.

    For this construction universe minimal and totally geodesic coincide:
    every non-geodesic level contributes a nonzero normal mean curvature
    component that nothing downstream can cancel.
    """
    if isinstance(d, Ambient):
        return ShapeFlags(True, True, d.m <= 1)
    if isinstance(d, FullProduct):
        tg = d.leaf.is_point and abs(d.r - 1.0) <= 1e-12
        flat = d.l <= 1 and _leaf_flat(d.leaf)
        return ShapeFlags(tg, tg, flat)
    if isinstance(d, Umbilic):
        inner = d.inner
        if isinstance(inner, ProductOfSpheres):
            inner_tg = _leaf_totally_geodesic(inner)
            inner_flat = _leaf_flat(inner)
        elif isinstance(inner, EuclideanIso):
            inner_tg = inner.spheres is None
            inner_flat = inner.spheres is None or _leaf_flat(inner.spheres)
        else:
            s = classify_shape(inner)
            inner_tg, inner_flat = s.totally_geodesic, s.intrinsically_flat
        tg = d.umb.totally_geodesic and inner_tg
        return ShapeFlags(tg, tg, inner_flat)
    raise InvalidArgumentError(f"not a descriptor: {type(d).__name__}")


# ---------------------------------------------------------------------------
# JSON wire format (tagged unions, keys lower_snake_case)


def descriptor_to_json(d) -> dict:
    if isinstance(d, Ambient):
        return {"type": "ambient", "m": d.m, "r": d.r}
    if isinstance(d, FullProduct):
        return {"type": "full_product", "l": d.l, "r": d.r, "leaf": _leaf_to_json(d.leaf)}
    if isinstance(d, Umbilic):
        return {
            "type": "umbilic",
            "xi": list(d.umb.xi),
            "a": d.umb.a,
            "inner": _inner_to_json(d.inner),
        }
    raise InvalidArgumentError(f"not a descriptor: {type(d).__name__}")


def _leaf_to_json(leaf: ProductOfSpheres) -> dict:
    if leaf.is_point:
        return {"type": "point", "position": list(leaf.point_position)}
    return {"type": "product_of_spheres", "factors": [[p, s] for p, s in leaf.factors]}


def _inner_to_json(inner) -> dict:
    if isinstance(inner, ProductOfSpheres):
        return _leaf_to_json(inner)
    if isinstance(inner, EuclideanIso):
        return {
            "type": "euclidean",
            "flat_dim": inner.flat_dim,
            "spheres": _leaf_to_json(inner.spheres) if inner.spheres else None,
            "offset": list(inner.offset) if inner.offset else None,
            "ambient_dim": inner.ambient_dim,
        }
    return descriptor_to_json(inner)


def descriptor_from_json(obj: dict):
    if not isinstance(obj, dict) or "type" not in obj:
        raise InvalidArgumentError("descriptor JSON must be a tagged object")
    tag = obj["type"]
    try:
        if tag == "ambient":
            return Ambient(int(obj["m"]), float(obj.get("r", 1.0)))
        if tag == "full_product":
            return FullProduct(int(obj["l"]), float(obj["r"]), _leaf_from_json(obj["leaf"]))
        if tag == "umbilic":
            return Umbilic(derive_umbilic(obj["xi"], float(obj["a"])), _inner_from_json(obj["inner"]))
    except KeyError as exc:
        raise InvalidArgumentError(f"descriptor JSON is missing field {exc}") from exc
    raise InvalidArgumentError(f"unknown descriptor type {tag!r}")


def _leaf_from_json(obj: dict) -> ProductOfSpheres:
    if obj.get("type") == "point":
        return ProductOfSpheres(point_position=tuple(obj["position"]))
    if obj.get("type") == "product_of_spheres":
        return ProductOfSpheres(tuple((int(p), float(s)) for p, s in obj["factors"]))
    raise InvalidArgumentError(f"unknown leaf type {obj.get('type')!r}")


def _inner_from_json(obj: dict):
    tag = obj.get("type")
    if tag in ("point", "product_of_spheres"):
        return _leaf_from_json(obj)
    if tag == "euclidean":
        return EuclideanIso(
            flat_dim=int(obj["flat_dim"]),
            spheres=_leaf_from_json(obj["spheres"]) if obj.get("spheres") else None,
            offset=tuple(obj["offset"]) if obj.get("offset") else None,
            ambient_dim=obj.get("ambient_dim"),
        )
    return descriptor_from_json(obj)
