"""Golden values for the oracle suite, computed from the integral definition.

J^a f(x) = 1/Gamma(a) int_0^inf e^{-ct} t^{a-1} f(x e^{-t}) dt
D^a f(x) = J^{m-a}(Theta_c^m f)(x),  Theta_c^m f(y) = y^{-c} (d/du)^m [e^{cu} f(e^u)] at u = log y
"""
import csv
import sys

import mpmath as mp

mp.mp.dps = 40

C = 1.0
ORDERS = [0.5, 1.3, 2.7]
POWER_B = 1.0
LOG_K = 2
EXP_B = 1.0


def grid(x_min, x_max, n):
    a, b = mp.log(x_min), mp.log(x_max)
    return [float(mp.exp(a + (b - a) * i / (n - 1))) for i in range(n)]


def families():
    return [
        ("power", POWER_B, 0, lambda y: y ** POWER_B),
        ("log_k", 0.0, LOG_K, lambda y: mp.log(y) ** LOG_K),
        ("exp", EXP_B, 0, lambda y: mp.exp(EXP_B * y)),
        ("sinc", 0.0, 0, lambda y: mp.sinc(mp.pi * y)),
    ]


def integral(g, a, c, x):
    f = lambda t: mp.exp(-c * t) * t ** (a - 1) * g(x * mp.exp(-t))
    return mp.quad(f, [0, 0.5, 2, 8, 32, mp.inf]) / mp.gamma(a)


def theta_pow(f, m, c):
    def h(u):
        return mp.exp(c * u) * f(mp.exp(u))

    return lambda y: y ** (-c) * mp.diff(h, mp.log(y), m)


def main(path):
    xs = grid(0.5, 2.0, 5)
    c = mp.mpf(C)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["family", "op", "b", "k", "c", "alpha", "s", "x", "re", "im"])
        for name, b, k, f in families():
            for op in ["J", "D"]:
                for a in ORDERS:
                    for x in xs:
                        am = mp.mpf(a)
                        if op == "J":
                            v = integral(f, am, c, x)
                        else:
                            m = int(mp.floor(am)) + 1
                            v = integral(theta_pow(f, m, c), m - am, c, x)
                        w.writerow([name, op, repr(b), k, repr(C), repr(a), 0, repr(x),
                                    mp.nstr(v, 20, min_fixed=-1, max_fixed=-1), "0.0"])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures/oracle_suite.csv")
