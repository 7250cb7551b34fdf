"""Helix characterizations in the Darboux and Frenet-type frames.

A curve is a xi-, mu- or v-helix when that frame vector keeps a constant
angle with a fixed direction. Each case is decided by the constancy of a
function sigma = cot(angle) built from (G, K, T) and first derivatives.
The W_n-, W_r- and W_o-helices (unit truncations of the Darboux vector
W = T xi - K mu + G v) are dual to the xi-, mu- and v-helices: the same
curves, with the complementary cone angle and the same axis line.

Where the ∓ sign of a characterization is free, the upper sign is used and
axes are oriented so that their inner product with the defining vector is
non-negative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .expr import SampledFunc
from .model import (DARBOUX, FRENET, DarbouxInvariants, FrameTrajectory,
                    FrenetInvariants, HelixVerdict)

__all__ = [
    "DegenerateError", "ConstancyPolicy", "DarbouxVector",
    "sigma", "sigma_reduced", "classify", "classify_w", "axis",
    "darboux_vector", "verify_axis", "best_constant_axis", "PAIRS", "DUAL",
]

DEGENERATE_TOL = 1e-12

# invariants whose joint vanishing makes each characterization undefined
PAIRS = {"xi": ("G", "K"), "mu": ("G", "T"), "v": ("T", "K"),
         "wn": ("G", "K"), "wr": ("G", "T"), "wo": ("T", "K"), "xi1": ("K1",)}
DUAL = {"wn": "xi", "wr": "mu", "wo": "v"}
_BASIS = {"xi": 0, "mu": 1, "v": 2, "xi1": 0}


class DegenerateError(ValueError):
    def __init__(self, pair, where=None):
        label = "(" + ",".join(pair) + ")"
        msg = f"degenerate pair {label}"
        if where is not None:
            msg += f" at s = {where:.6g}"
        super().__init__(msg)
        self.pair = pair


@dataclass(frozen=True)
class ConstancyPolicy:
    """sigma counts as constant iff
    max - min <= abs_tol + rel_tol * median(|sigma|) on interior points."""
    abs_tol: float = 1e-6
    rel_tol: float = 1e-4

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")

    def is_constant(self, values) -> bool:
        values = np.asarray(values)
        if len(values) == 0:
            return False
        spread = np.ptp(values)
        return bool(spread <= self.abs_tol + self.rel_tol * np.median(np.abs(values)))


@dataclass(frozen=True)
class DarbouxVector:
    """Darboux vector (or a truncation) in (xi, mu, v) coordinates."""
    variant: str
    components: np.ndarray

    @property
    def norm(self):
        return float(np.linalg.norm(self.components))

    @property
    def unit(self):
        n = self.norm
        if n == 0.0:
            raise ValueError(f"W_{self.variant} vanishes; no unit vector")
        return self.components / n


def darboux_vector(variant: str, inv: DarbouxInvariants, s) -> DarbouxVector:
    """full: (T, -K, G); n: (0, -K, G); r: (T, 0, G); o: (T, -K, 0)."""
    G, K, T = float(inv.G(s)), float(inv.K(s)), float(inv.T(s))
    comps = {"full": (T, -K, G), "n": (0.0, -K, G),
             "r": (T, 0.0, G), "o": (T, -K, 0.0)}
    if variant not in comps:
        raise ValueError(f"unknown Darboux vector variant {variant!r}")
    return DarbouxVector(variant, np.array(comps[variant]))


def _values(inv, s, derivs=True):
    s = np.asarray(s, dtype=float)
    out = {n: np.broadcast_to(getattr(inv, n)(s), s.shape).astype(float)
           for n in ("G", "K", "T")}
    if derivs:
        for n in ("G", "K", "T"):
            out["d" + n] = np.broadcast_to(getattr(inv, n).diff()(s), s.shape).astype(float)
    return out


def _check_pair(kind, vals, s):
    names = PAIRS[kind]
    norm = np.sqrt(sum(vals[n] ** 2 for n in names))
    bad = norm <= DEGENERATE_TOL
    if np.any(bad):
        where = np.asarray(s, dtype=float)
        where = float(where.reshape(-1)[np.flatnonzero(bad.reshape(-1))[0]])
        raise DegenerateError(names, where)


def _sigma_from(kind, v):
    G, K, T, dG, dK, dT = v["G"], v["K"], v["T"], v["dG"], v["dK"], v["dT"]
    if kind == "xi":
        q = G ** 2 + K ** 2
        return (q * T - (dG * K - G * dK)) / q ** 1.5
    if kind == "mu":
        q = G ** 2 + T ** 2
        return (q * K - (G * dT - T * dG)) / q ** 1.5
    if kind == "v":
        q = T ** 2 + K ** 2
        return -((dT * K - T * dK) + q * G) / q ** 1.5
    raise ValueError(f"sigma is defined for xi, mu, v; got {kind!r}")


def sigma(kind: str, inv: DarbouxInvariants, s):
    """Characteristic function of the xi-, mu- or v-helix at s (scalar or
    array), upper-sign convention. Numerators use expanded derivatives
    (G'K - GK' etc.) so a vanishing component is harmless."""
    if kind not in ("xi", "mu", "v"):
        raise ValueError(f"sigma is defined for xi, mu, v; got {kind!r}")
    vals = _values(inv, s)
    _check_pair(kind, vals, s)
    out = _sigma_from(kind, vals)
    return float(out) if np.ndim(out) == 0 else out


def sigma_reduced(kind: str, pinned: str, inv: DarbouxInvariants, s):
    """Simplified sigma when invariant `pinned` (G, K or T) vanishes
    identically. With the upper-sign convention the ±T/G type quotients
    carry the sign of their denominator, i.e. become T/|G|."""
    v = _values(inv, s)
    G, K, T, dG, dK, dT = v["G"], v["K"], v["T"], v["dG"], v["dK"], v["dT"]
    table = {
        ("xi", "K"): lambda: T / np.abs(G),
        ("xi", "G"): lambda: T / np.abs(K),
        ("xi", "T"): lambda: -(dG * K - G * dK) / (G ** 2 + K ** 2) ** 1.5,
        ("mu", "K"): lambda: -(dT * G - T * dG) / (G ** 2 + T ** 2) ** 1.5,
        ("mu", "G"): lambda: K / np.abs(T),
        ("mu", "T"): lambda: K / np.abs(G),
        ("v", "K"): lambda: -G / np.abs(T),
        ("v", "G"): lambda: -(dT * K - T * dK) / (T ** 2 + K ** 2) ** 1.5,
        ("v", "T"): lambda: -G / np.abs(K),
    }
    try:
        out = table[(kind, pinned)]()
    except KeyError:
        raise ValueError(f"no reduced form for kind={kind!r}, pinned={pinned!r}") from None
    return float(out) if np.ndim(out) == 0 else out


def _unit_pair(a, b):
    n = np.hypot(a, b)
    return a / n, b / n


def axis(kind: str, inv, s, cone_angle: float, sign: float = 1.0):
    """Axis of the helix of `kind` in moving-frame coordinates at s.

    `cone_angle` is the constant angle between the defining vector and the
    axis, in [0, pi/2]; `sign` is the sign of sigma (choose +1 for sigma = 0).
    Accepts scalar or array s; array input gives shape (n, 3).
    """
    s_arr = np.asarray(s, dtype=float)
    c, sn = math.cos(cone_angle), math.sin(cone_angle)
    sgn = -1.0 if sign < 0 else 1.0
    if kind == "xi1":
        K1 = np.broadcast_to(inv.K1(s_arr), s_arr.shape)
        if np.any(K1 <= DEGENERATE_TOL):
            raise DegenerateError(("K1",))
        zero = np.zeros(s_arr.shape)
        out = np.stack([zero + c, zero, zero + sgn * sn], axis=-1)
        return out
    vals = _values(inv, s_arr, derivs=False)
    _check_pair(kind, vals, s_arr)
    G, K, T = vals["G"], vals["K"], vals["T"]
    zero = np.zeros(s_arr.shape)
    if kind == "xi":
        k, g = _unit_pair(K, G)
        out = [zero + c, -sgn * sn * k, sgn * sn * g]
    elif kind == "mu":
        t, g = _unit_pair(T, G)
        out = [-sgn * sn * t, zero + c, -sgn * sn * g]
    elif kind == "v":
        t, k = _unit_pair(T, K)
        out = [-sgn * sn * t, sgn * sn * k, zero + c]
    elif kind == "wn":
        k, g = _unit_pair(K, G)
        out = [zero + sgn * sn, -c * k, c * g]
    elif kind == "wr":
        t, g = _unit_pair(T, G)
        out = [c * t, zero - sgn * sn, c * g]
    elif kind == "wo":
        t, k = _unit_pair(T, K)
        out = [c * t, -c * k, zero - sgn * sn]
    else:
        raise ValueError(f"unknown helix kind {kind!r}")
    return np.stack(out, axis=-1)


def _defining_vectors(kind, inv, grid):
    """Unit vector whose angle with the axis is constant, in frame coords."""
    n = len(grid)
    if kind in _BASIS:
        out = np.zeros((n, 3))
        out[:, _BASIS[kind]] = 1.0
        return out
    vals = _values(inv, grid, derivs=False)
    G, K, T = vals["G"], vals["K"], vals["T"]
    zero = np.zeros(n)
    comps = {"wn": (zero, -K, G), "wr": (T, zero, G), "wo": (T, -K, zero)}[kind]
    vec = np.stack(comps, axis=-1)
    return vec / np.linalg.norm(vec, axis=1, keepdims=True)


def _interior(inv, n):
    names = ("K1", "K2") if isinstance(inv, FrenetInvariants) else ("G", "K", "T")
    if any(isinstance(getattr(inv, name), SampledFunc) for name in names) and n > 4:
        return slice(2, n - 2)
    return slice(0, n)


def _undefined(kind, grid, series, interior, pair):
    bad = np.flatnonzero(~np.isfinite(series[interior])) + (interior.start or 0)
    region = (float(grid[bad[0]]), float(grid[bad[-1]]))
    label = "(" + ",".join(pair) + ")"
    return HelixVerdict(
        kind=kind, grid=grid, sigma_series=series, is_helix=False,
        interior=interior, undefined_region=region,
        message=f"degenerate pair {label} on s in [{region[0]:.6g}, {region[1]:.6g}]")


def classify(kind: str, inv, grid, policy: ConstancyPolicy = None) -> HelixVerdict:
    """Decide whether the curve is a helix of `kind` (xi, mu, v or xi1).

    xi1 takes Frenet-type invariants and tests constancy of K2/K1. If the
    relevant pair vanishes anywhere on the interior grid, no decision is
    made and `undefined_region` is set.
    """
    policy = policy or ConstancyPolicy()
    grid = np.asarray(grid, dtype=float)
    interior = _interior(inv, len(grid))
    if kind == "xi1":
        if not isinstance(inv, FrenetInvariants):
            raise TypeError("kind 'xi1' needs Frenet-type invariants")
        K1 = np.broadcast_to(inv.K1(grid), grid.shape).astype(float)
        K2 = np.broadcast_to(inv.K2(grid), grid.shape).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            series = np.where(K1 > DEGENERATE_TOL, K2 / K1, np.nan)
    elif kind in ("xi", "mu", "v"):
        if not isinstance(inv, DarbouxInvariants):
            raise TypeError(f"kind {kind!r} needs Darboux invariants")
        vals = _values(inv, grid)
        norm = np.sqrt(sum(vals[n] ** 2 for n in PAIRS[kind]))
        with np.errstate(divide="ignore", invalid="ignore"):
            series = np.where(norm > DEGENERATE_TOL, _sigma_from(kind, vals), np.nan)
    else:
        raise ValueError(f"classify handles xi, mu, v, xi1; got {kind!r}")
    series.setflags(write=False)

    if not np.all(np.isfinite(series[interior])):
        return _undefined(kind, grid, series, interior, PAIRS[kind])

    inner = series[interior]
    is_helix = policy.is_constant(inner)
    med = float(np.median(inner))
    verdict = HelixVerdict(kind=kind, grid=grid, sigma_series=series,
                           is_helix=is_helix, interior=interior)
    if not is_helix:
        return verdict
    cone = math.atan2(1.0, abs(med))
    sign = -1.0 if med < 0 else 1.0
    return replace(verdict, cone_angle=cone,
                   axis_frame_coords=axis(kind, inv, grid, cone, sign),
                   vector_frame_coords=_defining_vectors(kind, inv, grid),
                   message=f"sigma ~ {med:.12g}")


def classify_w(kind: str, inv: DarbouxInvariants, grid,
               policy: ConstancyPolicy = None) -> HelixVerdict:
    """W_n/W_r/W_o-helix test through the dual xi/mu/v characterization.

    The cone angle phi between the unit truncated Darboux vector and its
    axis satisfies cot(phi) = 1/|sigma| (phi = 0 when sigma = 0).
    """
    if kind not in DUAL:
        raise ValueError(f"classify_w handles wn, wr, wo; got {kind!r}")
    dual = classify(DUAL[kind], inv, grid, policy)
    verdict = replace(dual, kind=kind, cone_angle=None, axis_frame_coords=None,
                      vector_frame_coords=None)
    if dual.undefined_region is not None:
        return verdict
    verdict = replace(verdict, vector_frame_coords=_defining_vectors(kind, inv, dual.grid))
    if not dual.is_helix:
        return verdict
    med = dual.sigma_median
    phi = math.atan(abs(med))
    sign = -1.0 if med < 0 else 1.0
    grid = dual.grid
    return replace(verdict, cone_angle=phi,
                   axis_frame_coords=axis(kind, inv, grid, phi, sign))


def best_constant_axis(vectors) -> np.ndarray:
    """Fixed unit direction d minimizing the variance of <x_i, d> over the
    sample vectors x_i, oriented so that the mean inner product is >= 0."""
    x = np.asarray(vectors, dtype=float)
    cov = np.cov(x.T, bias=True)
    w, V = np.linalg.eigh(cov)
    d = V[:, 0]
    if np.mean(x @ d) < 0:
        d = -d
    return d


def _angles(vecs, d):
    # atan2 form stays accurate near 0 and pi, unlike arccos
    return np.arctan2(np.linalg.norm(np.cross(vecs, d), axis=1), vecs @ d)


def verify_axis(traj: FrameTrajectory, verdict: HelixVerdict,
                which_vector: str = None) -> HelixVerdict:
    """Check a verdict against an integrated trajectory in world coordinates.

    Residuals: ``axis_drift`` = max |d(s) - d(s0)| for the world axis d,
    ``angle_spread`` = max - min of the angle between the defining vector
    and d(s0), and ``angle_error`` = max |angle - cone_angle|. For a
    non-helix verdict the best fixed direction is used instead of an axis
    (drift 0). Returns a new verdict with residuals and `axis_world` set.
    """
    which = which_vector or verdict.kind
    if len(traj) != len(verdict.grid) or not np.allclose(
            traj.grid, verdict.grid, rtol=0, atol=1e-12):
        raise ValueError("trajectory grid does not match verdict grid")
    expected = FRENET if which == "xi1" else DARBOUX
    if traj.frame_kind != expected:
        raise ValueError(f"{which!r} needs a {expected} trajectory")
    E = traj.frames
    if which in _BASIS:
        vecs = E[:, _BASIS[which], :]
    elif which == verdict.kind and verdict.vector_frame_coords is not None:
        vecs = np.einsum("ni,nij->nj", verdict.vector_frame_coords, E)
    else:
        raise ValueError(f"cannot form vector {which!r} from this verdict")

    if verdict.is_helix and verdict.axis_frame_coords is not None:
        d = np.einsum("ni,nij->nj", verdict.axis_frame_coords, E)
        d0 = d[0]
        drift = float(np.max(np.linalg.norm(d - d0, axis=1)))
    else:
        d0 = best_constant_axis(vecs)
        drift = 0.0
    ang = _angles(vecs, d0)
    residuals = {"axis_drift": drift, "angle_spread": float(np.ptp(ang)),
                 "mean_angle": float(np.mean(ang))}
    if verdict.cone_angle is not None:
        residuals["angle_error"] = float(np.max(np.abs(ang - verdict.cone_angle)))
    residuals["sigma_spread"] = verdict.sigma_spread
    return replace(verdict, axis_world=d0, residuals=residuals)
