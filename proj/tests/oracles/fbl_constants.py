"""High-precision reference values for the finite-blocklength tests.

Run once; the printed constants are frozen in tests/oracles/fbl_constants.hpp. Uses only mpmath, independent of the C++ code.
"""
import mpmath as mp

mp.mp.dps = 60


def q_tail(x):
    return mp.erfc(x / mp.sqrt(2)) / 2


def q_inv_bisect(eps):
    lo, hi = mp.mpf(-40), mp.mpf(40)
    for _ in range(400):
        mid = (lo + hi) / 2
        if q_tail(mid) > eps:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def capacity(g):
    return mp.log(1 + g) / mp.log(2)


def dispersion(g):
    return (1 - 1 / (1 + g) ** 2) / mp.log(2) ** 2


def channel_usage(d, eps, g):
    q = q_inv_bisect(eps)
    c, v = capacity(g), dispersion(g)
    return d / c + q * q * v / (2 * c * c) * (1 + mp.sqrt(1 + 4 * d * c / (q * q * v)))


if __name__ == "__main__":
    for eps in ["0.5", "1e-1", "1e-2", "1e-3", "1e-5", "1e-8", "1e-12"]:
        # use the binary double value the C++ side sees
        e = mp.mpf(float(eps))
        print(f"q_inv({eps}) = {mp.nstr(q_inv_bisect(e), 25)}")
    print(f"V(1) = {mp.nstr(dispersion(mp.mpf(1)), 25)}")
    print(f"V(inf) = {mp.nstr(1 / mp.log(2) ** 2, 25)}")
    print(f"R(256, 1e-5, 10) = {mp.nstr(channel_usage(256, mp.mpf(1e-5), mp.mpf(10)), 25)}")
    print(f"R(100, 1e-3, 2) = {mp.nstr(channel_usage(100, mp.mpf(1e-3), mp.mpf(2)), 25)}")
