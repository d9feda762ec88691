"""High-precision reference values frozen into the Rust test suite.

Run with `python3 oracles.py`; requires mpmath. Every value is computed from
first principles (mpmath's arbitrary-precision gamma / hypergeometric series)
and is independent of the Rust implementation.
"""
from mpmath import mp, mpf, gamma, hyp2f1, erfc, findroot, exp, log

mp.dps = 50


def psi(r, k, s, d):
    r, s = mpf(r), mpf(s)
    if r <= 1:
        pref = gamma(s + mpf(d) / 2) * gamma(k + 1 + s) / (mpf(4) ** (-s) * gamma(k + 1) * gamma(mpf(d) / 2))
        return pref * hyp2f1(mpf(d) / 2 + s, -k, mpf(d) / 2, r * r)
    pref = mpf(4) ** s * gamma(s + mpf(d) / 2) * gamma(k + 1 + s) / (
        gamma(k + 1 + s + mpf(d) / 2) * gamma(-s) * r ** (d + 2 * s))
    return pref * hyp2f1(mpf(d) / 2 + s, 1 + s, k + 1 + mpf(d) / 2 + s, 1 / (r * r))


def exit_constant(s, d):
    s = mpf(s)
    return gamma(mpf(d) / 2) / (mpf(4) ** s * gamma(1 + s) * gamma(mpf(d) / 2 + s))


print("gamma(1.875)      =", gamma(mpf("1.875")))
print("gamma(-0.875)     =", gamma(mpf("-0.875")))
print("gamma(-9.5)       =", gamma(mpf("-9.5")))
print("gamma(29.3)       =", gamma(mpf("29.3")))
print("gamma(0.1)        =", gamma(mpf("0.1")))
print("2F1(.5,-2;1.5;.25)=", hyp2f1(mpf("0.5"), -2, mpf("1.5"), mpf("0.25")))
print("2F1(1,1;2;.5)     =", hyp2f1(1, 1, 2, mpf("0.5")), "(= 2 ln 2)", 2 * log(2))
print("2F1(1.375,1.875;2.375;1/1.21) =", hyp2f1(mpf("0.5") + mpf("0.875"), mpf("1.875"), 1 + mpf("0.5") + mpf("0.875"), 1 / mpf("1.21")))
print("psi d1 s.875 k0 x0 =", psi(0, 0, "0.875", 1))
print("psi d1 s.875 k1 x.5=", psi("0.5", 1, "0.875", 1))
print("psi d10 s.875 k0 x0=", psi(0, 0, "0.875", 10))
print("psi d10 s.875 k3 x.5=", psi("0.5", 3, "0.875", 10))
print("psi d1 s.875 k0 x1.1=", psi("1.1", 0, "0.875", 1))
print("psi d3 s.75 k2 x2  =", psi(2, 2, "0.75", 3))
print("exit const d1 s.875 =", exit_constant("0.875", 1))
print("exit const d10 s.875=", exit_constant("0.875", 10))
print("0.75^1.875        =", mpf("0.75") ** mpf("1.875"))
print("levy(c=1) median  =", findroot(lambda m: erfc(1 / (2 * m) ** mpf("0.5")) - mpf("0.5"), 2))
print("exp(-2^0.875)     =", exp(-mpf(2) ** mpf("0.875")))
