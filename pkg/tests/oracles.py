"""
Independent reference computations for the test suite.

These use mpmath at 30 digits and plain grid scans with bisection; they
share no code with the package. Their outputs are frozen as constants in
the tests; ``python tests/oracles.py`` reprints them.
"""

import mpmath as mp

mp.mp.dps = 30

# constant diffusivities in both phases
CONSTANT_CASE = dict(a1=1.0, a2=1.0, R=1.0, u_v=2.0, u_m=1.0, v_m=1.0, v_inf=0.0,
           H_v=1.0, H_m=1.0, q=5.0)
# fast diffusion d1(u) = 1/u in the liquid, constant solid diffusivity
FAST_CASE = dict(D=1.0, a2=1.0, R=1.0, u_v=1.0, u_m=2.0, v_m=0.0, v_inf=1.0,
           H_v=1.0, H_m=1.0, q=-2.0)


def _solid_slope(p, w2, mu):
    # v = v_inf + (v_m - v_inf) E1(mu w/(2 a2)) / E1(mu w2/(2 a2))
    k = mu / (2 * p["a2"])
    return (p["v_m"] - p["v_inf"]) * (-mp.exp(-k * w2) / w2) / mp.e1(k * w2)


def constant_residuals(w2, mu, p=CONSTANT_CASE):
    w2, mu = mp.mpf(w2), mp.mpf(mu)
    k = mu / (2 * p["a1"])
    den = mp.e1(k * w2) - mp.e1(k * p["R"])

    def du(w):
        return (p["u_m"] - p["u_v"]) * (-mp.exp(-k * w) / w) / den

    f1 = 2 * p["a1"] * du(p["R"]) - (mu * p["H_v"] - p["q"])
    f2 = 2 * p["a2"] * _solid_slope(p, w2, mu) - 2 * p["a1"] * du(w2) - mu * p["H_m"]
    return f1, f2


def fast_flux_ratio(nu, mu, p=FAST_CASE):
    """p(nu) = omega u'/u as a function of nu = omega u, from ln p + p = A(nu)."""
    c = mu / (2 * p["D"])
    d1v = p["D"] / p["u_v"]
    pR = p["R"] * (mu * p["H_v"] - p["q"]) / (2 * d1v * p["u_v"])
    A = -c * nu + mp.log(pR) + pR + c * p["R"] * p["u_v"]
    return mp.lambertw(mp.exp(A)).real


def fast_residuals(w2, mu, p=FAST_CASE):
    w2, mu = mp.mpf(w2), mp.mpf(mu)
    lo, hi = p["R"] * p["u_v"], w2 * p["u_m"]
    integral = mp.quad(lambda nu: 1 / (nu * (1 + fast_flux_ratio(nu, mu, p))), [lo, hi])
    f1 = integral - mp.log(w2 / p["R"])
    d1m = p["D"] / p["u_m"]
    du_m = fast_flux_ratio(hi, mu, p) * p["u_m"] / w2
    f2 = 2 * p["a2"] * _solid_slope(p, w2, mu) - 2 * d1m * du_m - mu * p["H_m"]
    return f1, f2


def _bisect(f, a, b, it=70):
    fa = f(a)
    for _ in range(it):
        m = (a + b) / 2
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return (a + b) / 2


def _scan_root(f, lo, hi, n):
    xs = [lo + (hi - lo) * i / n for i in range(n + 1)]
    vals = [f(x) for x in xs]
    for a, b, fa, fb in zip(xs, xs[1:], vals, vals[1:]):
        if not (mp.isfinite(fa) and mp.isfinite(fb)):
            continue
        if fa == 0:
            return a
        if (fa > 0) != (fb > 0):
            return _bisect(f, mp.mpf(a), mp.mpf(b))
    return None


def nested_root(residuals, w_range, mu_range, n_w=40, n_mu=40):
    """(omega2, mu): for each omega2 solve F1 = 0 in mu by scan and bisection,
    then solve F2(omega2, mu(omega2)) = 0 in omega2 the same way."""
    def mu_of(w):
        return _scan_root(lambda m: residuals(w, m)[0], *mu_range, n_mu)

    def g(w):
        m = mu_of(w)
        return mp.mpf("nan") if m is None else residuals(w, m)[1]

    w = _scan_root(g, *w_range, n_w)
    return w, mu_of(w)


if __name__ == "__main__":
    import sys
    if "fast" not in sys.argv[1:]:
        w, m = nested_root(constant_residuals, (1.05, 3.0), (0.05, 5.0))
        print("CONSTANT_CASE", mp.nstr(w, 20), mp.nstr(m, 20), flush=True)
    if "constant" not in sys.argv[1:]:
        mp.mp.dps = 20
        w, m = nested_root(fast_residuals, (1.05, 3.0), (0.2, 5.0), n_w=20, n_mu=20)
        print("FAST_CASE", mp.nstr(w, 17), mp.nstr(m, 17), flush=True)
