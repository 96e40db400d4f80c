"""Independent high-precision reference values for the frozen tests in
tests/oracle_values.rs. Requires mpmath. Run: python3 gen_oracles.py"""

from mpmath import mp, mpf, exp, factorial, findroot, log, sqrt, e

mp.dps = 50
N = 400  # summation cutoff, far into the tail for every rate used here


def pmf(j, z):
    return exp(-z) * z**j / factorial(j)


def tail(k, z):
    if k <= 0:
        return mpf(1)
    return sum(pmf(j, z) for j in range(k, N))


def cond_moments(k, z):
    w = [pmf(j, z) for j in range(max(k, 0), N)]
    js = list(range(max(k, 0), N))
    s = sum(w)
    m1 = sum(j * x for j, x in zip(js, w)) / s
    m2 = sum(j * j * x for j, x in zip(js, w)) / s
    return m1, m2 - m1 * m1


def phi(r, z):
    if r <= 0:
        return mpf(0)
    return z * pmf(r - 1, z) / tail(r, z)


def psi(k, z):
    return cond_moments(k, z)[0]


def inv_psi(k, t):
    lo, hi = mpf("1e-30"), mpf(t)
    for _ in range(200):
        mid = (lo + hi) / 2
        if psi(k, mid) < t:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def big_h(k1, k2, zi, zo):
    return (1 - phi(k1, zi)) * (1 - phi(k2, zo)) - phi(k1 - 1, zi) * phi(k2 - 1, zo)


def big_psi(k1, k2, zi, zo):
    a = zi / (tail(k1, zi) * tail(k2 - 1, zo))
    b = zo / (tail(k2, zo) * tail(k1 - 1, zi))
    return max(a, b)


def fixed_point(c, k1, k2):
    zi = zo = mpf(c)
    for _ in range(100000):
        ni = c * tail(k1, zi) * tail(k2 - 1, zo)
        no = c * tail(k2, zo) * tail(k1 - 1, zi)
        step = max(abs(ni - zi), abs(no - zo))
        zi, zo = ni, no
        if step < mpf("1e-40"):
            break
    return zi, zo, tail(k1, zi) * tail(k2, zo)


def ode_rhs_t0(c, k1, k2):
    """Physical-time derivative of the normalised detailed state at t = 0."""
    c = mpf(c)
    P = lambda a: pmf(a, c)
    vab = [[P(a) * P(b) for b in range(k2)] for a in range(k1)]
    vad = [P(a) * tail(k2, c) for a in range(k1)]
    vdb = [tail(k1, c) * P(b) for b in range(k2)]
    v = tail(k1, c) * tail(k2, c)
    mu = c
    zi = zo = c
    mu_i = sum(a * (sum(vab[a]) + vad[a]) for a in range(k1))
    mu_o = sum(b * (sum(vab[a][b] for a in range(k1)) + vdb[b]) for b in range(k2))
    vi = v + sum(vdb)
    vo = v + sum(vad)
    L = sum(vab[a][b] for a in range(k1) for b in range(k2) if (a, b) != (0, 0)) + sum(vad) + sum(vdb)
    Ei = mu_i + psi(k1, zi) * (vi - v)
    Eo = mu_o + psi(k2, zo) * (vo - v)
    Pi = phi(k1, zi) / k1
    Po = phi(k2, zo) / k2

    def g(a, b):
        if a == k1 and b == k2:
            raise ValueError
        if a == k1:
            return vdb[b] * Pi
        if b == k2:
            return vad[a] * Po
        return vab[a][b]

    d_vab = [[None] * k2 for _ in range(k1)]
    for a in range(k1):
        for b in range(k2):
            # every chosen vertex becomes isolated, hence the +L/L = 1
            own = mpf(1) if (a, b) == (0, 0) else -vab[a][b] / L
            d_vab[a][b] = own + Eo / L * ((a + 1) * g(a + 1, b) - a * vab[a][b]) / mu \
                + Ei / L * ((b + 1) * g(a, b + 1) - b * vab[a][b]) / mu
    v_k1_dot = v * Pi
    v_dot_k2 = v * Po
    d_vad = []
    for a in range(k1):
        nxt = v_k1_dot if a + 1 == k1 else vad[a + 1]
        d_vad.append(-vad[a] / L + Eo / L * ((a + 1) * nxt - a * vad[a]) / mu
                     - Ei / L * k2 * vad[a] * Po / mu)
    d_vdb = []
    for b in range(k2):
        nxt = v_dot_k2 if b + 1 == k2 else vdb[b + 1]
        d_vdb.append(-vdb[b] / L + Ei / L * ((b + 1) * nxt - b * vdb[b]) / mu
                     - Eo / L * k1 * vdb[b] * Pi / mu)
    d_v = -(Eo * k1 * v_k1_dot + Ei * k2 * v_dot_k2) / (L * mu)
    d_mu = -(Ei + Eo) / L
    return d_vab, d_vad, d_vdb, d_v, d_mu


def show(name, x):
    print(f"{name} = {mp.nstr(x, 20)}")


if __name__ == "__main__":
    show("tail(3,2.5)", tail(3, mpf("2.5")))
    show("pmf(40,10)", pmf(40, mpf(10)))
    show("psi(2,2)", psi(2, mpf(2)))
    show("phi(2,3)", phi(2, mpf(3)))
    show("var(1,1)", cond_moments(1, mpf(1))[1])
    show("var(3,0.5)", cond_moments(3, mpf("0.5"))[1])
    show("invert_psi(3,4)", inv_psi(3, mpf(4)))
    show("H(2,2;5,5)", big_h(2, 2, mpf(5), mpf(5)))
    show("Psi(2,3;2,3)", big_psi(2, 3, mpf(2), mpf(3)))
    show("constraint_zo(2,3;4)", inv_psi(3, psi(2, mpf(4))))
    zi, zo, beta = fixed_point(mpf(4), 2, 2)
    show("fp(4;2,2).z_i", zi)
    show("fp(4;2,2).z_o", zo)
    show("fp(4;2,2).beta", beta)
    zi, zo, beta = fixed_point(mpf("3.4"), 1, 2)
    show("predict(3.4;1,2;1e6).vertices", beta * 10**6)
    show("predict(3.4;1,2;1e6).arcs", zi * zo / mpf("3.4") * 10**6)
    show("alpha crossing k=2", findroot(lambda c: (e**3 * c**2 / 4) - 2 / (c * e), 0.5))
    show("v0(3.4;1,2)", tail(1, mpf("3.4")) * tail(2, mpf("3.4")))
    d_vab, d_vad, d_vdb, d_v, d_mu = ode_rhs_t0(4, 2, 2)
    for a in range(2):
        for b in range(2):
            show(f"rhs(4;2,2).v_ab[{a}][{b}]", d_vab[a][b])
    for a in range(2):
        show(f"rhs(4;2,2).v_a_dot[{a}]", d_vad[a])
    for b in range(2):
        show(f"rhs(4;2,2).v_dot_b[{b}]", d_vdb[b])
    show("rhs(4;2,2).v", d_v)
    show("rhs(4;2,2).mu", d_mu)
