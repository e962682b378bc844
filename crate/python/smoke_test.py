"""Smoke test for the holmgren extension module.

Build first:  pip install -e crates/py --no-build-isolation
Then run:     python python/smoke_test.py
"""

import json
import math
import tempfile

import holmgren


def check(label, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {label} {detail}")
    return ok


def main():
    results = []

    lr, rl = holmgren.factorize3d()
    results.append(check("factorize3d products agree", lr == rl, lr.splitlines()[0] if lr else ""))

    # u = |z|^2 x  is biharmonic: u = x^3 + x y^2
    u = {"terms": [{"a": 3, "b": 0, "num": "1", "den": "1"}, {"a": 1, "b": 2, "num": "1", "den": "1"}]}
    parts = [json.loads(p) for p in holmgren.almansi2(json.dumps(u), 2)]
    results.append(check("almansi2 returns two harmonic parts", len(parts) == 2))

    ell = holmgren.Ellipse(2.0, 1.0)
    results.append(check("ellipse boundary residual", ell.boundary_residual() < 1e-10, f"{ell.boundary_residual():.2e}"))
    mismatch = ell.monodromy(complex(ell.focal, 0.0), 0.5)
    results.append(check("ellipse focus monodromy", mismatch > 0.1, f"{mismatch:.3f}"))
    circ = holmgren.Ellipse(1.0, 1.0)
    results.append(check("circle is single valued", circ.monodromy(0j, 0.5) < 1e-9))

    dom = holmgren.QuadratureDomain.quadratic(0.3)
    results.append(check("quadratic Schwarz residual", dom.boundary_residual() < 1e-10))
    nodes, fit = dom.fit_quadrature()
    results.append(check("quadrature fit", fit < 1e-8, f"{fit:.2e}"))

    kernel = holmgren.CubicKernel(0.0)
    exps = kernel.decay_exponents()
    ok = all(e is None or e >= t for e, t in zip(exps, (2.8, 1.8, 0.8)))
    results.append(check("kernel flatness", ok, str([round(e, 3) if e else e for e in exps])))

    sol = holmgren.ArcFlat.build(0.3)
    ver = json.loads(sol.verify())
    results.append(check("arc-flat build on quadratic map", ver["pass"], f"constraint {ver['constraint_residual']:.1e}"))
    again = holmgren.ArcFlat.from_json(sol.to_json())
    z = complex(0.1, -0.2)
    results.append(check("stored solution round trip", math.isclose(sol(z), again(z), rel_tol=1e-12, abs_tol=1e-15)))

    with tempfile.TemporaryDirectory() as out:
        report = json.loads(holmgren.run("x1field", out=out))
    results.append(check("in-process x1field run", report["pass"]))

    if not all(results):
        raise SystemExit(1)
    print("smoke test passed")


if __name__ == "__main__":
    main()
