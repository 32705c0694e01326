"""Development-time accuracy study of the population quadrature engine.

Compares S, R, b1' against adaptive scipy integration (reference accurate to
~1e-12) across a battery of states spanning eta from 0.1 to 20 and b1 from
tiny to the saturated limit. Run manually; not part of the test suite.
"""

import math

import numpy as np
from scipy import integrate
from scipy.stats import norm

from mlr_em.population import _planar_core, default_quadrature


def ref_inner(kind, k, c, sigma2):
    """Adaptive reference for one inner row integral."""
    def f(y):
        u = k * (y + c)
        t = np.tanh(u)
        tp = 1.0 - t * t
        pdf = norm.pdf(y, scale=sigma2)
        if kind == "T":
            return t * pdf
        if kind == "UT":
            return u * tp * pdf
        if kind == "TP":
            return tp * pdf
        if kind == "TY":
            return t * y * pdf
        raise ValueError(kind)

    pts = sorted({-c, 0.0})
    total = 0.0
    lims = [-np.inf] + pts + [np.inf]
    for a, b in zip(lims[:-1], lims[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)
        total += val
    return total


def ref_core(b1, b1s, b2s, sigma):
    """Reference S, R, b1_direct by nested adaptive quadrature."""
    sigma_sq = sigma * sigma
    sigma2 = math.sqrt(sigma_sq + b2s * b2s)
    bs_sq = b1s * b1s + b2s * b2s

    def h(alpha, kind):
        k = b1 * alpha / sigma_sq
        c = alpha * b1s
        return ref_inner(kind, k, c, sigma2)

    def outer(fun):
        val, _ = integrate.quad(
            lambda a: fun(a) * norm.pdf(a), 0, np.inf,
            epsabs=1e-13, epsrel=1e-12, limit=400)
        return 2.0 * val  # integrands are even in alpha

    S = outer(lambda a: h(a, "T") + h(a, "UT"))
    R = (sigma_sq + bs_sq) * (b1 / sigma_sq) * outer(
        lambda a: a * a * h(a, "TP"))
    direct = outer(lambda a: a * h(a, "TY") + a * a * b1s * h(a, "T"))
    return S, R, direct


def main():
    rng = np.random.default_rng(0)
    quad = default_quadrature(100)
    cases = []
    for eta in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0]:
        sigma = 1.0 / eta
        for _ in range(4):
            theta = rng.uniform(0.05, math.pi / 2 - 0.05)
            b1 = rng.uniform(0.05, 3.0) * math.sqrt(sigma**2 + 1.0)
            cases.append((b1, math.cos(theta), math.sin(theta), sigma))
    # saturated / extreme cases
    cases += [
        (1e6, 0.6, 0.8, 1.0),
        (1e6 * 0.05, 0.9, math.sqrt(1 - 0.81), 0.05),
        (50.0, 1.0, 0.0, 0.1),
        (3.0, 1.0, 0.0, 0.05),
        (0.3, 1.0, 0.0, 0.05),
        (0.3, 0.0, 1.0, 0.05),
    ]
    worst = 0.0
    for b1, b1s, b2s, sigma in cases:
        S, R, direct = _planar_core(b1, b1s, b2s, sigma, quad)
        Sr, Rr, dr = ref_core(b1, b1s, b2s, sigma)
        errs = [abs(S - Sr), abs(R - Rr) / (1 + abs(Rr)),
                abs(direct - dr) / (1 + abs(dr))]
        worst = max(worst, max(errs))
        flag = " <-- " if max(errs) > 1e-9 else ""
        print(f"b1={b1:10.3g} b1s={b1s:6.3f} b2s={b2s:6.3f} sig={sigma:6.3f} "
              f"errS={errs[0]:.2e} errR={errs[1]:.2e} errD={errs[2]:.2e}{flag}")
    print(f"worst: {worst:.3e}")


if __name__ == "__main__":
    main()
