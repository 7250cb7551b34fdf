"""Recover invariants from sampled trajectories by differencing the frames."""
from __future__ import annotations

import numpy as np

from .expr import SampledFunc, derivative_samples
from .model import (DARBOUX, FRENET, DarbouxInvariants, FrameTrajectory,
                    FrenetInvariants)

__all__ = ["ExtractionError", "extract_darboux", "extract_frenet", "extract_psi"]

MIN_POINTS = 5


class ExtractionError(ValueError):
    pass


def _derivatives(traj):
    if len(traj) < MIN_POINTS:
        raise ExtractionError(f"need at least {MIN_POINTS} grid points, got {len(traj)}")
    dr = derivative_samples(traj.grid, traj.r)
    dE = derivative_samples(traj.grid, traj.frames)
    return dr, dE


def _dot(a, b):
    return np.einsum("ij,ij->i", a, b)


def extract_darboux(traj: FrameTrajectory) -> DarbouxInvariants:
    """G = <xi', mu>, K = <xi', v>, T = <mu', v>; c = dr/ds in (xi, mu, v)."""
    if traj.frame_kind != DARBOUX:
        raise ExtractionError("expected a Darboux trajectory")
    dr, dE = _derivatives(traj)
    xi, mu, v = traj.e1, traj.e2, traj.e3
    s = traj.grid
    return DarbouxInvariants(
        G=SampledFunc(s, _dot(dE[:, 0], mu)),
        K=SampledFunc(s, _dot(dE[:, 0], v)),
        T=SampledFunc(s, _dot(dE[:, 1], v)),
        c1=SampledFunc(s, _dot(dr, xi)),
        c2=SampledFunc(s, _dot(dr, mu)),
        c3=SampledFunc(s, _dot(dr, v)),
    )


def extract_frenet(traj: FrameTrajectory, tol_K1: float = 1e-8) -> FrenetInvariants:
    """K1 = |xi1'|, K2 = <xi2', xi3>; a = dr/ds in (xi1, xi2, xi3).

    Raises ExtractionError naming the s-interval where K1 <= tol_K1, since
    the Frenet-type frame is undefined there.
    """
    if traj.frame_kind != FRENET:
        raise ExtractionError("expected a Frenet-type trajectory")
    dr, dE = _derivatives(traj)
    s = traj.grid
    K1 = np.linalg.norm(dE[:, 0], axis=1)
    low = np.flatnonzero(K1 <= tol_K1)
    if len(low):
        raise ExtractionError(
            f"K1 <= {tol_K1:g} on s in [{s[low[0]]:.6g}, {s[low[-1]]:.6g}]; "
            "the Frenet-type frame is undefined there")
    return FrenetInvariants(
        K1=SampledFunc(s, K1),
        K2=SampledFunc(s, _dot(dE[:, 1], traj.e3)),
        a1=SampledFunc(s, _dot(dr, traj.e1)),
        a2=SampledFunc(s, _dot(dr, traj.e2)),
        a3=SampledFunc(s, _dot(dr, traj.e3)),
    )


def extract_psi(traj_F: FrameTrajectory, traj_D: FrameTrajectory,
                tol: float = 1e-6) -> SampledFunc:
    """Angle from v to xi2 measured towards mu (cos psi = <xi2, v>,
    sin psi = <xi2, mu>), continued across branches so it has no 2*pi jumps."""
    if traj_F.frame_kind != FRENET or traj_D.frame_kind != DARBOUX:
        raise ExtractionError("expected a Frenet-type and a Darboux trajectory")
    if len(traj_F) != len(traj_D) or not np.allclose(traj_F.grid, traj_D.grid,
                                                     rtol=0, atol=1e-12):
        raise ExtractionError("trajectories must share the same grid")
    mismatch = np.max(np.linalg.norm(traj_F.e1 - traj_D.e1, axis=1))
    if mismatch > tol:
        raise ExtractionError(f"frame mismatch: |xi - xi1| reaches {mismatch:.3g}")
    xi2 = traj_F.e2
    raw = np.arctan2(_dot(xi2, traj_D.e2), _dot(xi2, traj_D.e3))
    return SampledFunc(traj_F.grid, np.unwrap(raw))
