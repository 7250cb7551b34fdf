"""Invariant sets with known helix status, shared by helix and acceptance tests.

A xi-helix with prescribed sigma = c is built by choosing G, K freely and
solving the characterization for T; mu- and v-helices likewise solve for K
and G respectively.
"""
import numpy as np

from myller.expr import differentiate, parse_expr, to_text
from myller.model import DarbouxInvariants


def _d(text):
    return to_text(differentiate(parse_expr(text)))


def xi_helix(G, K, c):
    q = f"(({G})^2 + ({K})^2)"
    T = f"{c!r}*sqrt{q} + (({_d(G)})*({K}) - ({G})*({_d(K)}))/{q}"
    return DarbouxInvariants(G, K, T)


def mu_helix(G, T, c):
    q = f"(({G})^2 + ({T})^2)"
    K = f"{c!r}*sqrt{q} + (({G})*({_d(T)}) - ({T})*({_d(G)}))/{q}"
    return DarbouxInvariants(G, K, T)


def v_helix(T, K, c):
    q = f"(({T})^2 + ({K})^2)"
    G = f"-{c!r}*sqrt{q} - (({_d(T)})*({K}) - ({T})*({_d(K)}))/{q}"
    return DarbouxInvariants(G, K, T)


BUILDERS = {"xi": xi_helix, "mu": mu_helix, "v": v_helix}


def random_pair(rng):
    """Two smooth functions with no common zero (first one is positive)."""
    a, b, w1, w2, p = rng.uniform(0.3, 1.5, 5)
    return (f"{1.2 + a:.4f} + {a:.4f}*sin({w1:.4f}*s)",
            f"{b:.4f}*cos({w2:.4f}*s + {p:.4f})")


def helix_battery(rng, n_helix=10, n_other=10):
    """[(kind, invariants, is_helix, sigma)] mixing helices of all three
    kinds with non-helices (a non-constant term added to the solved one)."""
    kinds = ("xi", "mu", "v")
    out = []
    for i in range(n_helix):
        kind = kinds[i % 3]
        c = float(np.round(rng.uniform(-2, 2), 3))
        if i == 0:
            c = 0.0
        out.append((kind, BUILDERS[kind](*random_pair(rng), c), True, c))
    for i in range(n_other):
        kind = kinds[i % 3]
        x, y = random_pair(rng)
        inv = BUILDERS[kind](x, y, 0.5)
        bump = f"0.4*sin({rng.uniform(0.5, 1.5):.4f}*s)"
        # perturb the solved invariant so sigma varies
        if kind == "xi":
            inv = DarbouxInvariants(inv.G, inv.K, f"{inv.T.text} + {bump}")
        elif kind == "mu":
            inv = DarbouxInvariants(inv.G, f"{inv.K.text} + {bump}", inv.T)
        else:
            inv = DarbouxInvariants(f"{inv.G.text} + {bump}", inv.K, inv.T)
        out.append((kind, inv, False, None))
    return out
