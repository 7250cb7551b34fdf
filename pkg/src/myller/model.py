"""Invariant tuples, frames, trajectories, verdicts and scenarios."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .expr import ScalarFunc, as_func, ExprError

FRENET = "frenet"
DARBOUX = "darboux"
FRAME_KINDS = (FRENET, DARBOUX)

HELIX_KINDS = ("xi", "mu", "v", "xi1", "wn", "wr", "wo")

UNIT_TOL = 1e-9


def _funcs(obj, names):
    for name in names:
        object.__setattr__(obj, name, as_func(getattr(obj, name)))


@dataclass(frozen=True)
class FrenetInvariants:
    """Curvature K1, torsion K2 and tangent direction cosines (a1, a2, a3)
    of a versor field in its Frenet-type frame."""
    K1: ScalarFunc
    K2: ScalarFunc
    a1: ScalarFunc = 1.0
    a2: ScalarFunc = 0.0
    a3: ScalarFunc = 0.0

    names = ("K1", "K2", "a1", "a2", "a3")

    def __post_init__(self):
        _funcs(self, self.names)

    def evaluate(self, s):
        """Dict of arrays, one per invariant, broadcast to s."""
        s = np.asarray(s, dtype=float)
        return {n: np.broadcast_to(getattr(self, n)(s), s.shape) for n in self.names}


@dataclass(frozen=True)
class DarbouxInvariants:
    """Geodesic curvature G, normal curvature K, geodesic torsion T and
    tangent direction cosines (c1, c2, c3) in the Darboux frame."""
    G: ScalarFunc
    K: ScalarFunc
    T: ScalarFunc
    c1: ScalarFunc = 1.0
    c2: ScalarFunc = 0.0
    c3: ScalarFunc = 0.0

    names = ("G", "K", "T", "c1", "c2", "c3")

    def __post_init__(self):
        _funcs(self, self.names)

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        return {n: np.broadcast_to(getattr(self, n)(s), s.shape) for n in self.names}


def orthonormality_error(E) -> float:
    """max |E E^T - I| for a 3x3 frame matrix (rows are frame vectors),
    or the max over a stack of them."""
    E = np.asarray(E, dtype=float)
    gram = E @ np.swapaxes(E, -1, -2)
    return float(np.max(np.abs(gram - np.eye(3))))


@dataclass(frozen=True)
class FramePose:
    """Curve point `r` and frame vectors e1, e2, e3 (world coordinates).

    For a Darboux frame these are (xi, mu, v); for a Frenet-type frame
    (xi1, xi2, xi3).
    """
    r: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    def __post_init__(self):
        for name in ("r", "e1", "e2", "e3"):
            v = np.array(getattr(self, name), dtype=float).reshape(3)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def identity(cls, origin=(0.0, 0.0, 0.0)):
        return cls(origin, (1, 0, 0), (0, 1, 0), (0, 0, 1))

    @classmethod
    def from_matrix(cls, r, E):
        E = np.asarray(E, dtype=float)
        return cls(r, E[0], E[1], E[2])

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack([self.e1, self.e2, self.e3])

    def violations(self, tol=UNIT_TOL):
        E = self.matrix
        out = []
        err = orthonormality_error(E)
        if err > tol:
            out.append(f"frame not orthonormal (|E E^T - I| = {err:.3g})")
        det = np.linalg.det(E)
        if abs(det - 1.0) > tol:
            out.append(f"frame not positively oriented (det = {det:.12g})")
        return out


@dataclass(frozen=True)
class FrameTrajectory:
    """Poses sampled on a strictly increasing s-grid.

    Stored as arrays: `grid` (n,), `r` (n, 3), `frames` (n, 3, 3) where
    frames[i] has the frame vectors as rows.
    """
    grid: np.ndarray
    r: np.ndarray
    frames: np.ndarray
    frame_kind: str = DARBOUX

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float).reshape(-1)
        r = np.array(self.r, dtype=float).reshape(-1, 3)
        frames = np.array(self.frames, dtype=float).reshape(-1, 3, 3)
        if not (len(grid) == len(r) == len(frames)):
            raise ValueError("grid, points and frames differ in length")
        if len(grid) > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.frame_kind not in FRAME_KINDS:
            raise ValueError(f"unknown frame kind {self.frame_kind!r}")
        for name, arr in (("grid", grid), ("r", r), ("frames", frames)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_poses(cls, grid, poses, frame_kind=DARBOUX):
        return cls(grid, [p.r for p in poses], [p.matrix for p in poses], frame_kind)

    def __len__(self):
        return len(self.grid)

    def pose(self, i) -> FramePose:
        return FramePose.from_matrix(self.r[i], self.frames[i])

    @property
    def poses(self):
        return [self.pose(i) for i in range(len(self))]

    @property
    def e1(self):
        return self.frames[:, 0, :]

    @property
    def e2(self):
        return self.frames[:, 1, :]

    @property
    def e3(self):
        return self.frames[:, 2, :]

    def max_orthonormality_error(self) -> float:
        return orthonormality_error(self.frames)


@dataclass(frozen=True)
class HelixVerdict:
    """Outcome of a helix test of one kind.

    `sigma_series` holds the characteristic function on `grid` (for the
    W-kinds, the sigma of the dual frame vector; for xi1, K2/K1).
    `axis_frame_coords` is (n, 3): the axis expressed in the moving frame at
    every grid point. `vector_frame_coords` is the unit vector whose angle to
    the axis is constant, also in frame coordinates.
    """
    kind: str
    grid: np.ndarray
    sigma_series: np.ndarray
    is_helix: bool
    interior: slice = slice(None)
    cone_angle: Optional[float] = None
    axis_frame_coords: Optional[np.ndarray] = None
    vector_frame_coords: Optional[np.ndarray] = None
    axis_world: Optional[np.ndarray] = None
    residuals: dict = field(default_factory=dict)
    undefined_region: Optional[tuple] = None
    message: str = ""

    @property
    def sigma_median(self) -> float:
        vals = self.sigma_series[self.interior]
        return float(np.median(vals)) if len(vals) else float("nan")

    @property
    def sigma_spread(self) -> float:
        vals = self.sigma_series[self.interior]
        return float(np.ptp(vals)) if len(vals) else float("nan")


@dataclass(frozen=True)
class Scenario:
    name: str
    frame_kind: str
    invariants: object  # FrenetInvariants | DarbouxInvariants
    s_start: float
    s_end: float
    step: float
    initial: FramePose = field(default_factory=FramePose.identity)
    analyses: tuple = ()
    outputs: tuple = ()
    psi: Optional[ScalarFunc] = None

    @property
    def grid(self) -> np.ndarray:
        n = int(round((self.s_end - self.s_start) / self.step))
        grid = self.s_start + self.step * np.arange(n + 1)
        if grid[-1] < self.s_end - 1e-9 * self.step:
            grid = np.append(grid, self.s_end)
        grid[-1] = self.s_end
        return grid


def validate(scenario: Scenario) -> list:
    """List of violated invariants; empty when the scenario is usable."""
    out = []
    if scenario.frame_kind not in FRAME_KINDS:
        out.append(f"unknown frame kind {scenario.frame_kind!r}")
    if not scenario.s_end > scenario.s_start:
        out.append("domain end must exceed start")
    if not scenario.step > 0:
        out.append("step must be positive")
    elif scenario.step > (scenario.s_end - scenario.s_start) / 10:
        out.append("step must be at most a tenth of the domain length")
    for kind in scenario.analyses:
        if kind not in HELIX_KINDS:
            out.append(f"unknown analysis kind {kind!r}")
    out.extend(scenario.initial.violations())
    if out:
        return out

    inv = scenario.invariants
    grid = scenario.grid
    try:
        vals = inv.evaluate(grid)
    except ExprError as exc:
        return out + [f"invariant evaluation failed: {exc}"]
    if isinstance(inv, FrenetInvariants):
        if scenario.frame_kind != FRENET:
            out.append("Frenet invariants given for a Darboux scenario")
        if np.any(vals["K1"] <= 0):
            out.append("K1 must be positive")
        norm = vals["a1"] ** 2 + vals["a2"] ** 2 + vals["a3"] ** 2
        if np.max(np.abs(norm - 1)) > UNIT_TOL:
            out.append("a not unit: a1^2 + a2^2 + a3^2 != 1")
        if scenario.psi is None:
            darboux_kinds = [k for k in scenario.analyses if k != "xi1"]
            if darboux_kinds:
                out.append(f"analyses {darboux_kinds} need psi for a Frenet scenario")
        else:
            try:
                scenario.psi(grid)
                scenario.psi.diff()(grid)
            except ExprError as exc:
                out.append(f"psi evaluation failed: {exc}")
    elif isinstance(inv, DarbouxInvariants):
        if scenario.frame_kind != DARBOUX:
            out.append("Darboux invariants given for a Frenet scenario")
        norm = vals["c1"] ** 2 + vals["c2"] ** 2 + vals["c3"] ** 2
        if np.max(np.abs(norm - 1)) > UNIT_TOL:
            out.append("c not unit: c1^2 + c2^2 + c3^2 != 1")
        if "xi1" in scenario.analyses:
            out.append("analysis 'xi1' needs a Frenet scenario")
    else:
        out.append("invariants must be a Frenet or Darboux tuple")
    return out
