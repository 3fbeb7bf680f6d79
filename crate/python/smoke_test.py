"""Smoke test for the p3tau_py extension.

Build and stage the module next to this file, then run it:

    cargo build --release -p p3tau-py --features extension-module
    cp target/release/libp3tau_py.so python/p3tau_py.so
    python3 python/smoke_test.py
"""

import cmath
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import p3tau_py as p3  # noqa: E402


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    # normalization point: the connection constant is exactly 1
    r = p3.log_tau_ratio(0.25, 0.25)
    assert r.method == "closed_form" and abs(r.log_ratio) < 1e-12, r
    q = p3.log_tau_ratio(0.25, 0.25, method="quadrature")
    assert abs(q.log_ratio) < 1e-8, q

    # closed form against quadrature
    cf = p3.log_tau_ratio(0.3, 0.15).log_ratio
    assert close(cf, complex(-0.010692884832398609, 0.059390281779609870), 1e-12), cf
    quad = p3.log_tau_ratio(0.3, 0.15, method="quadrature")
    assert abs(quad.log_ratio - cf) <= quad.error_estimate, quad

    # parameter maps
    alpha, beta = p3.cauchy_from_monodromy(0.3, 0.15)
    s, e = p3.cauchy_to_monodromy(alpha, beta)
    assert close(s, 0.3, 1e-12) and close(e, 0.15, 1e-12)
    d = p3.connect(0.3, 0.15)
    assert close(d["b_plus"] * d["b_minus"], -4 * d["nu"], 1e-10)
    assert close(cmath.exp(math.pi * d["nu"]) * math.sin(0.6 * math.pi), math.sin(0.3 * math.pi), 1e-12)
    assert p3.connect(0.25, 0.25)["rho"] is None

    a, b = p3.chi(0.3, 0.15)
    assert abs(a - b) < 1e-10 * abs(a)

    # trajectory samples land on the requested points
    pts = p3.solve(alpha, beta, [1.0, 2.0, 5.0])
    assert [x for x, _, _ in pts] == [1.0, 2.0, 5.0]

    c = p3.closure_check(0.3, 0.15, [1.0, 5.0])
    assert c["max_defect"] < 1e-5 and 3.0 < c["shrink_factor"] < 5.0, c

    nu = d["nu"]
    (ds, dn), (eta, irho) = p3.generating_function_gradient(0.3, nu)
    assert abs(ds - eta) < 1e-7 and abs(dn - irho) < 1e-7

    assert close(p3.log_barnes_g(4.0), math.log(2.0), 1e-12)
    assert close(p3.log_gamma(5.0), math.log(24.0), 1e-13)
    assert close(p3.dilog(1.0), math.pi**2 / 6, 1e-14)

    for exc, call in [
        (ValueError, lambda: p3.log_tau_ratio(0.6, 0.15)),
        (ValueError, lambda: p3.log_tau_ratio(0.3, 0.15, method="nope")),
        (ArithmeticError, lambda: p3.solve(0.0, complex(3.14159, 3.0), [20.0])),
    ]:
        try:
            call()
        except exc:
            pass
        else:
            raise AssertionError(f"expected {exc.__name__}")

    assert all(ok for _, _, ok, _, _, _ in p3.run_acceptance())
    print(f"p3tau_py {p3.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
