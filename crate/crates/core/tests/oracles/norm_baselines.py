"""Independent oracle for the norm-equivalence spread baselines.

Recomputes, with numpy only, the ratio spread
    max_f r(f) / min_f r(f),   r(f) = ||W_tau(f, g)|| / ||V_g f||
over the v1 signal family, for modulation (L^{p,q}_m) and Wiener amalgam
norms. tau-Wigner and STFT are evaluated by direct Riemann sums; nothing
is shared with the Rust implementation.

Usage: python3 norm_baselines.py > ../data/norm_baselines_v1.json
"""

import json
import math

import numpy as np
from numpy.polynomial.hermite import hermval

N = 256
L = 16.0
H = L / N
T = (np.arange(N) - N // 2) * H  # time nodes; frequency nodes coincide


def gaussian(sigma):
    return lambda t: sigma ** -0.5 * 2 ** 0.25 * np.exp(-np.pi * (t / sigma) ** 2)


def hermite(m):
    coef = np.zeros(m + 1)
    coef[m] = 1.0
    norm = (2.0 ** m * math.factorial(m) * math.sqrt(math.pi)) ** -0.5

    def h(t):
        u = math.sqrt(2 * math.pi) * np.asarray(t, dtype=float)
        return (2 * math.pi) ** 0.25 * norm * hermval(u, coef) * np.exp(-u * u / 2)

    return h


def tf_shift(f, x, xi):
    return lambda t: np.exp(2j * np.pi * xi * t) * f(t - x)


def family():
    g = gaussian(1.0)
    bump_norm = math.sqrt(2 + 2 * math.exp(-4.5 * math.pi))
    return [
        gaussian(0.7),
        gaussian(1.0),
        gaussian(1.5),
        hermite(1),
        hermite(2),
        hermite(3),
        tf_shift(g, 1.0, 0.5),
        tf_shift(g, -1.5, -1.0),
        lambda t: g(t) * np.exp(1j * np.pi * 0.8 * t * t),
        lambda t: (g(t + 1.5) + g(t - 1.5)) / bump_norm,
    ]


PHASE = np.exp(-2j * np.pi * np.outer(T, T))  # [xi, t]


def tau_wigner(f, g, tau):
    x = T[:, None]
    t = T[None, :]
    prod = f(x + tau * t) * np.conj(g(x - (1 - tau) * t))  # [x, t]
    return prod @ PHASE.T * H  # [x, xi]


def stft(f, g):
    x = T[:, None]
    t = T[None, :]
    prod = f(t) * np.conj(g(t - x))  # [x, t]
    return prod @ PHASE.T * H


def weight(spec, a, b=None):
    kind = spec["type"]
    r = np.abs(a) if b is None else np.hypot(a, b)
    if kind == "constant":
        return np.ones_like(r)
    if kind == "vs":
        return (1 + r) ** spec["s"]
    raise ValueError(kind)


def lp(v, p, h, axis):
    if p == "inf":
        return v.max(axis=axis)
    return (np.sum(v ** p, axis=axis) * h) ** (1.0 / p)


def modulation_mixed(F, p, q, w):
    m = weight(w, T[:, None], T[None, :])
    inner = lp(np.abs(F) * m, p, H, axis=0)  # over x
    return lp(inner, q, H, axis=0)


def amalgam_mixed(F, p, q, w):
    m1, m2 = (w["m1"], w["m2"]) if w["type"] == "product" else (w, w)
    inner = lp(np.abs(F) * weight(m1, T[None, :]), p, H, axis=1)  # over xi
    return lp(inner * weight(m2, T), q, H, axis=0)


CASES = [
    {"id": "mod-tau0.5-p2-q2-const", "kind": "modulation", "tau": 0.5, "p": 2, "q": 2,
     "weight": {"type": "constant"}},
    {"id": "mod-tau0.333-p2-q2-vs1", "kind": "modulation", "tau": 1 / 3, "p": 2, "q": 2,
     "weight": {"type": "vs", "s": 1.0}},
    {"id": "mod-tau0.25-p1-q1-const", "kind": "modulation", "tau": 0.25, "p": 1, "q": 1,
     "weight": {"type": "constant"}},
    {"id": "mod-tau0.75-p2-q1-vs0.5", "kind": "modulation", "tau": 0.75, "p": 2, "q": 1,
     "weight": {"type": "vs", "s": 0.5}},
    {"id": "amalgam-tau0.5-p2-q2-vs1", "kind": "amalgam", "tau": 0.5, "p": 2, "q": 2,
     "weight": {"type": "vs", "s": 1.0}},
    {"id": "amalgam-tau0.333-p1-q2-v1xv0.5", "kind": "amalgam", "tau": 1 / 3, "p": 1, "q": 2,
     "weight": {"type": "product", "m1": {"type": "vs", "s": 1.0}, "m2": {"type": "vs", "s": 0.5}}},
]


def main():
    g = gaussian(1.0)
    fam = family()
    out = []
    for case in CASES:
        norm = modulation_mixed if case["kind"] == "modulation" else amalgam_mixed
        ratios = []
        for f in fam:
            w = norm(tau_wigner(f, g, case["tau"]), case["p"], case["q"], case["weight"])
            v = norm(stft(f, g), case["p"], case["q"], case["weight"])
            ratios.append(w / v)
        entry = dict(case)
        entry["ratios"] = [float(r) for r in ratios]
        entry["spread"] = float(max(ratios) / min(ratios))
        out.append(entry)
    doc = {
        "family": "v1",
        "grid": {"n": N, "length": L},
        "window": {"type": "gaussian", "sigma": 1.0},
        "tolerance": 0.05,
        "cases": out,
    }
    print(json.dumps(doc, indent=2))


if __name__ == "__main__":
    main()
