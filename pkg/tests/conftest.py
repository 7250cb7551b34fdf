import math
import re

import numpy as np
import pytest

from myller.expr import (Binary, Const, ExprDomainError, Unary, Var, differentiate,
                         evaluate_ast, to_text)

SAFE_UNARY = ("sin", "cos", "exp", "log", "sqrt", "abs", "tan", "neg")


def random_ast(rng, depth=3):
    """Small random expression in s; may be invalid on parts of the domain."""
    if depth == 0 or rng.random() < 0.15:
        if rng.random() < 0.7:
            return Var()
        return Const(float(np.round(rng.uniform(0.2, 3.0), 3)))
    if rng.random() < 0.4:
        op = SAFE_UNARY[rng.integers(len(SAFE_UNARY))]
        return Unary(op, random_ast(rng, depth - 1))
    op = "+-*/^"[rng.integers(5)]
    if op == "^":
        exp = Const(float(rng.integers(1, 4))) if rng.random() < 0.7 \
            else Const(float(np.round(rng.uniform(0.5, 2.5), 2)))
        return Binary("^", random_ast(rng, depth - 1), exp)
    return Binary(op, random_ast(rng, depth - 1), random_ast(rng, depth - 1))


def usable_asts(seed, count, points, bound=1e3, h=1e-6):
    """`count` random ASTs that evaluate finitely (|f| <= bound) at points +- h
    and whose derivative is defined at the points."""
    rng = np.random.default_rng(seed)
    out, seen = [], set()
    while len(out) < count:
        ast = random_ast(rng, depth=int(rng.integers(2, 5)))
        text = to_text(ast)
        if not re.search(r"\bs\b", text) or text in seen:
            continue
        try:
            vals = [evaluate_ast(ast, points + d) for d in (-2 * h, 0, 2 * h)]
            vals.append(evaluate_ast(differentiate(ast), points))
        except (ExprDomainError, ZeroDivisionError):
            continue
        if all(np.all(np.isfinite(v)) and np.max(np.abs(v)) <= bound for v in vals):
            out.append(ast)
            seen.add(text)
    return out


def central_difference(fn, s, h=1e-5):
    """Richardson-extrapolated central difference (fourth order in h)."""
    def d(k):
        return (fn(s + k) - fn(s - k)) / (2 * k)
    return (4 * d(h / 2) - d(h)) / 3


def rotate(axis_unit, angle, vec):
    """Rodrigues rotation of vec about a unit axis."""
    k = np.asarray(axis_unit, dtype=float)
    v = np.asarray(vec, dtype=float)
    return (v * math.cos(angle) + np.cross(k, v) * math.sin(angle)
            + k * (k @ v) * (1 - math.cos(angle)))


def constant_invariant_oracle(G, K, T, c, E0, r0, s):
    """Closed-form frame and curve for constant (G, K, T, c).

    The frame rotates rigidly about the fixed world vector
    W = T xi0 - K mu0 + G v0 with angular speed |W|.
    """
    E0 = np.asarray(E0, dtype=float)
    W = T * E0[0] - K * E0[1] + G * E0[2]
    w = np.linalg.norm(W)
    alpha0 = c[0] * E0[0] + c[1] * E0[1] + c[2] * E0[2]
    frames, points = [], []
    for t in np.atleast_1d(s):
        if w == 0:
            frames.append(E0.copy())
            points.append(r0 + alpha0 * t)
            continue
        k = W / w
        frames.append(np.array([rotate(k, w * t, e) for e in E0]))
        par = k * (k @ alpha0)
        perp = alpha0 - par
        points.append(r0 + par * t + perp * math.sin(w * t) / w
                      + np.cross(k, alpha0) * (1 - math.cos(w * t)) / w)
    return np.array(frames), np.array(points)


def fit_circle(points2d):
    """Algebraic least-squares circle fit; returns (center, radius)."""
    x, y = points2d[:, 0], points2d[:, 1]
    A = np.column_stack([x, y, np.ones_like(x)])
    b = x ** 2 + y ** 2
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    cx, cy = sol[0] / 2, sol[1] / 2
    return np.array([cx, cy]), math.sqrt(sol[2] + cx ** 2 + cy ** 2)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q


def smooth_family(rng):
    """Random smooth invariants bounded by 10 with unit c."""
    amp = rng.uniform(0.5, 10.0, 3)
    om = rng.uniform(0.1, 2.0, 5)
    ph = rng.uniform(0, 2 * math.pi, 5)
    G = f"{amp[0]:.4f}*sin({om[0]:.4f}*s + {ph[0]:.4f})"
    K = f"{amp[1]:.4f}*cos({om[1]:.4f}*s + {ph[1]:.4f})"
    T = f"{amp[2] / 2:.4f}*(1 + sin({om[2]:.4f}*s + {ph[2]:.4f}))/2"
    a = f"({om[3]:.4f}*s + {ph[3]:.4f})"
    b = f"0.5*sin({om[4]:.4f}*s + {ph[4]:.4f})"
    c1, c2, c3 = f"cos({b})*cos{a}", f"cos({b})*sin{a}", f"sin({b})"
    return G, K, T, c1, c2, c3


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


# --------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion

_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Call ``criterion(n, title, ok, detail)``; records, prints and asserts."""
    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})"
        _ACCEPTANCE[number] = line
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
