"""Expression trees: exact differentiation against finite differences,
guarded evaluation, residual oracles, and the group maps."""

import math
import random
from fractions import Fraction

import pytest

from dlwlab.analytic import (
    DomainError,
    T,
    UnboundParameter,
    X,
    add,
    compile_expr,
    const,
    diff,
    div,
    evaluate,
    exp,
    free_params,
    group_orbit,
    mul,
    neg,
    param,
    pow_,
    residual_max,
    sech,
    sqrt_const,
    sub,
    tanh,
    transported_solution,
)


def kink_pair():
    mu = param("mu")
    arg = sub(mul(mu, T), X)
    u = add(mu, neg(mul(div(const(2), sqrt_const(3)), tanh(arg))))
    v = add(const(Fraction(2, 3)), neg(mul(const(Fraction(2, 3)), pow_(tanh(arg), 2))))
    return u, v


SAMPLES = [(random.Random(7).uniform(-5, 5), random.Random(i).uniform(0, 2)) for i in range(40)]


class TestDiff:
    def test_tanh_chain_rule(self):
        e = tanh(sub(X, mul(param("mu"), T)))
        d = diff(e, "x")
        for x0, t0 in SAMPLES[:8]:
            want = 1.0 / math.cosh(x0 - 0.7 * t0) ** 2
            assert evaluate(d, x0, t0, {"mu": 0.7}) == pytest.approx(want, rel=1e-12)

    def test_constant_derivative(self):
        assert diff(const(5), "x") == const(0)
        assert diff(sqrt_const(3), "t") == const(0)

    def test_finite_difference_agreement(self):
        trees = [
            mul(tanh(sub(X, T)), exp(mul(const(Fraction(1, 10)), X))),
            div(add(X, const(2)), add(T, const(2))),
            pow_(sech(add(X, mul(const(Fraction(-1, 2)), T))), 3),
            mul(param("a"), exp(mul(param("a"), X))),
        ]
        binding = {"a": 0.6}
        rng = random.Random(3)
        for e in trees:
            for var in ("x", "t"):
                d = diff(e, var)
                for _ in range(20):
                    x0, t0 = rng.uniform(-2, 2), rng.uniform(0.1, 2)
                    h = 1e-5
                    if var == "x":
                        fd = (evaluate(e, x0 + h, t0, binding) - evaluate(e, x0 - h, t0, binding)) / (2 * h)
                    else:
                        fd = (evaluate(e, x0, t0 + h, binding) - evaluate(e, x0, t0 - h, binding)) / (2 * h)
                    sy = evaluate(d, x0, t0, binding)
                    if abs(sy) > 1e-3:
                        assert abs(fd - sy) / abs(sy) < 1e-6


class TestEvaluation:
    def test_unbound_parameter(self):
        with pytest.raises(UnboundParameter):
            evaluate(param("zeta"), 0.0, 0.0, {})

    def test_singularity_guard(self):
        e = div(const(1), X)
        with pytest.raises(DomainError):
            evaluate(e, 1e-12, 0.0, {})

    def test_free_params(self):
        u, v = kink_pair()
        assert free_params(u) == {"mu"}
        assert free_params(v) == {"mu"}

    def test_compile_matches_interpreter(self):
        import numpy as np

        u, _ = kink_pair()
        f = compile_expr(u, {"mu": 1.3})
        xs = np.linspace(-3, 3, 11)
        want = [evaluate(u, float(x0), 0.4, {"mu": 1.3}) for x0 in xs]
        assert np.allclose(f(xs, 0.4), want, atol=1e-14)


class TestResidualOracle:
    def test_kink_solves(self, phys):
        u, v = kink_pair()
        for mu in (0.5, 1.0, 2.0):
            rep = residual_max(phys, (u, v), {"mu": mu}, SAMPLES)
            assert rep.max_residual < 1e-10

    def test_rational_family_solves(self, phys):
        u = div(add(X, const(2)), T)
        v = div(param("c1"), T)
        samples = [(x, 0.5 + abs(t)) for x, t in SAMPLES]
        rep = residual_max(phys, (u, v), {"c1": 2.0}, samples)
        assert rep.max_residual < 1e-12

    def test_non_solution_control(self, phys):
        rep = residual_max(phys, (X, const(0)), {}, [(1.0, 0.0)])
        assert rep.per_equation[0] == pytest.approx(1.0)
        assert rep.per_equation[1] == pytest.approx(0.0)

    def test_linear_family_leaves_constant(self, phys):
        u = add(T, param("c1"))
        v = add(mul(const(Fraction(1, 2)), pow_(T, 2)), neg(X), param("c2"))
        rep = residual_max(phys, (u, v), {"c1": 1.0, "c2": 0.3}, SAMPLES)
        assert rep.per_equation[0] < 1e-12
        assert rep.per_equation[1] == pytest.approx(1.0, rel=1e-9)

    def test_singular_samples_are_counted(self, phys):
        u = div(add(X, const(2)), T)
        v = div(const(1), T)
        rep = residual_max(phys, (u, v), {}, [(0.0, 0.0), (1.0, 1.0)])
        assert rep.samples_skipped == 1
        assert rep.samples_used == 1


class TestGroupMaps:
    def test_time_translation(self):
        assert group_orbit(1, 0.5, (1.0, 2.0, 3.0, 4.0)) == (1.0, 2.5, 3.0, 4.0)

    def test_scaling_map(self):
        x, t, u, v = group_orbit(4, 0.4, (1.0, 1.0, 1.0, 1.0))
        assert x == pytest.approx(math.exp(0.2))
        assert t == pytest.approx(math.exp(0.4))
        assert u == pytest.approx(math.exp(-0.2))
        assert v == pytest.approx(math.exp(-0.4))

    def test_identity_at_zero(self):
        pt = (0.3, 1.7, -0.2, 0.9)
        for gid in (1, 2, 3, 4):
            assert group_orbit(gid, 0.0, pt) == pt

    def test_inverse_composition(self):
        pt = (0.7, 1.3, -0.2, 0.9)
        for gid in (1, 2, 3, 4):
            fwd = group_orbit(gid, 0.37, pt)
            back = group_orbit(gid, -0.37, fwd)
            assert max(abs(a - b) for a, b in zip(pt, back)) < 1e-12

    def test_orbit_derivative_matches_generator(self):
        # d/d(eps) of the map at eps = 0 gives the field coefficients
        from dlwlab.symmetry import point_symmetries
        from dlwlab.jet import JetPoly, JetVar

        pt = (0.8, 1.4, -0.3, 0.6)  # (x, t, u, v)
        h = 1e-6
        for gid, xsym in zip((1, 2, 3, 4), point_symmetries()):
            plus = group_orbit(gid, h, pt)
            minus = group_orbit(gid, -h, pt)
            deriv = [(a - b) / (2 * h) for a, b in zip(plus, minus)]
            # evaluate the coefficient polynomials at the point
            def val(p: JetPoly) -> float:
                out = 0.0
                for m, c in p.items():
                    term = float(c) * pt[0] ** m.xpow * pt[1] ** m.tpow
                    for var, e in m.jet:
                        term *= {"u": pt[2], "v": pt[3]}[var.name] ** e
                    out += term
                return out

            expected = [val(xsym.xi2), val(xsym.xi1), val(xsym.eta1), val(xsym.eta2)]
            assert deriv == pytest.approx(expected, abs=1e-6), gid

    def test_transported_kink_still_solves(self, phys):
        u, v = kink_pair()
        for gid in (1, 2, 3, 4):
            tu, tv = transported_solution(gid, u, v)
            for eps in (0.3, -0.3):
                rep = residual_max(phys, (tu, tv), {"mu": 1.0, "eps": eps}, SAMPLES)
                assert rep.max_residual < 1e-8, (gid, eps)
