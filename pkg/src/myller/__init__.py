"""Curves and versor fields in Myller configurations: reconstruction from
invariants, invariant extraction, and helix detection."""
from .expr import ExprFunc, SampledFunc, ScalarFunc, parse_expr, evaluate, diff
from .model import (DarbouxInvariants, FramePose, FrameTrajectory,
                    FrenetInvariants, HelixVerdict, Scenario, validate)
from .frames import (IntegratorConfig, align_trajectories, darboux_from_frenet,
                     frames_from_frenet_frames, integrate_darboux, integrate_frenet)
from .extraction import extract_darboux, extract_frenet, extract_psi
from .helix import (ConstancyPolicy, axis, classify, classify_w, darboux_vector,
                    sigma, verify_axis)
from .io import export_trajectory, ingest_trajectory

__version__ = "0.1.0"
