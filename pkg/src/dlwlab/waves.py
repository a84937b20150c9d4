"""Traveling-wave reduction U(xi), V(xi) with xi = x - mu t, first
integrals induced by x,t-free conservation laws, and the hyperbolic-
tangent ansatz whose coefficient system certifies the kink family.

The wave speed mu is carried symbolically (an exact parameter), so the
"constant along the reduced flow" statements are polynomial identities
in mu, not spot checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .conslaw import ConservationLaw
from .jet import (
    EvolutionSystem,
    JetError,
    JetMonomial,
    JetPoly,
    JetVar,
    SolvedSystem,
    reduce_on_shell,
    total_derivative,
)

__all__ = [
    "ExplicitCoordinateError",
    "TravelingWaveODE",
    "FirstIntegral",
    "MU",
    "traveling_substitute",
    "reduce_traveling",
    "traveling_solved_system",
    "first_integral",
    "first_integral_derivative",
    "printed_first_integrals",
    "tanh_ansatz_system",
    "tanh_solution_point",
    "Root3",
    "evaluate_at_tanh_point",
]


class ExplicitCoordinateError(JetError):
    """The law depends on explicit x or t and induces no first integral."""


MU = JetPoly.param("mu")


@dataclass(frozen=True)
class TravelingWaveODE:
    """Reduced system in the one-variable family (U, V); derivative
    counts live in the dx slot and the speed enters as the parameter mu."""

    equations: tuple[JetPoly, JetPoly]


@dataclass(frozen=True)
class FirstIntegral:
    """flux - mu * density of a conserved pair, written in the traveling
    profile variables; constant along the reduced flow."""

    expr: JetPoly
    source_label: str


_TRAVELING_NAME = {"u": "U", "v": "V"}


def traveling_substitute(p: JetPoly, mu: JetPoly | Fraction | int = MU) -> JetPoly:
    """Substitute u -> U(xi), v -> V(xi): D_x becomes d/dxi and D_t
    becomes -mu d/dxi, so the coordinate (dep, a, b) maps to
    (-mu)^b * dep[a+b]."""
    mu_poly = mu if isinstance(mu, JetPoly) else JetPoly.const(Fraction(mu))
    if p.has_explicit_xt():
        raise ExplicitCoordinateError("expression depends on explicit x or t")

    out = JetPoly.zero()
    for m, c in p.items():
        term = JetPoly({JetMonomial((), 0, 0, m.params): c})
        for v, e in m.jet:
            name = _TRAVELING_NAME.get(v.name)
            if name is None:
                raise JetError(f"unexpected dependent variable {v.name!r}")
            factor = JetPoly.var(name, v.dx + v.dt) * (-mu_poly) ** v.dt
            term = term * factor**e
        out = out + term
    return out


def reduce_traveling(sys: EvolutionSystem, mu: JetPoly | Fraction | int = MU) -> TravelingWaveODE:
    """Apply the traveling substitution to both equations."""
    eqs = tuple(traveling_substitute(g, mu) for g in sys.equation_polys())
    return TravelingWaveODE(equations=eqs)  # type: ignore[arg-type]


def traveling_solved_system(mu: JetPoly | Fraction | int = MU) -> SolvedSystem:
    """The reduced system in solved form: V' from the first equation and
    U''' from the second with V' eliminated."""
    mu_poly = mu if isinstance(mu, JetPoly) else JetPoly.const(Fraction(mu))
    u, u1 = JetPoly.var("U"), JetPoly.var("U", 1)
    v = JetPoly.var("V")
    v1_rhs = (mu_poly - u) * u1
    u3_rhs = (mu_poly - u) ** 2 * u1 * 3 - v * u1 * 3
    return SolvedSystem(rules=((JetVar("V", 1, 0), v1_rhs), (JetVar("U", 3, 0), u3_rhs)))


def first_integral(
    cl: ConservationLaw, mu: JetPoly | Fraction | int = MU
) -> FirstIntegral:
    """flux - mu * density in the traveling variables. Raises
    ExplicitCoordinateError when the law carries explicit x or t."""
    if cl.density.has_explicit_xt() or cl.flux.has_explicit_xt():
        raise ExplicitCoordinateError(f"law {cl.label or '?'} depends on x or t")
    mu_poly = mu if isinstance(mu, JetPoly) else JetPoly.const(Fraction(mu))
    expr = traveling_substitute(cl.flux, mu_poly) - mu_poly * traveling_substitute(
        cl.density, mu_poly
    )
    return FirstIntegral(expr=expr, source_label=cl.label)


def first_integral_derivative(
    fi: FirstIntegral, mu: JetPoly | Fraction | int = MU
) -> JetPoly:
    """d/dxi of the integral reduced modulo the traveling system; zero
    certifies constancy along the reduced flow."""
    return reduce_on_shell(total_derivative(fi.expr, "x"), traveling_solved_system(mu))


def printed_first_integrals() -> dict[str, JetPoly]:
    """The printed constant expressions keyed by catalog id (the first
    one is reconstructed by the verifier instead; its printed display is
    not well formed)."""
    f = Fraction
    U, V = JetPoly.var("U"), JetPoly.var("V")
    U1, U2 = JetPoly.var("U", 1), JetPoly.var("U", 2)
    V1 = JetPoly.var("V", 1)
    mu = MU
    c2 = (
        U**3 * V * f(1, 2)
        - U**2 * V * mu * f(1, 2)
        + U**2 * U2 * f(1, 6)
        + V**2 * U
        - V**2 * mu * f(1, 2)
        - mu * U1**2 * f(1, 6)
        + V * U2 * f(1, 3)
    )
    c3 = V**2 * f(1, 2) + U**2 * V + U * U2 * f(1, 3) - U1**2 * f(1, 6) - mu * U * V
    c4 = U * V + U2 * f(1, 3) + U**2 * f(1, 2) + V - mu * U - mu * V
    return {"eq79": c2, "eq80": c3, "eq81": c4}


# ---------------------------------------------------------------------------
# hyperbolic-tangent ansatz


def tanh_ansatz_system() -> list[JetPoly]:
    """Coefficient system of the ansatz u = a0 + a1 T, v = b0 + b1 T +
    b2 T^2 with T = tanh(xi), dT/dxi = 1 - T^2, xi = x - mu t.

    Substituting into both equations and collecting powers of T yields
    polynomial equations in (a0, a1, b0, b1, b2, mu); the returned list
    concatenates the nonzero coefficients of both equations.
    """
    a0, a1 = JetPoly.param("a0"), JetPoly.param("a1")
    b0, b1, b2 = JetPoly.param("b0"), JetPoly.param("b1"), JetPoly.param("b2")
    mu = MU
    T = JetPoly.param("T")

    def ddxi(p: JetPoly) -> JetPoly:
        return p.partial_param("T") * (JetPoly.one() - T**2)

    u = a0 + a1 * T
    v = b0 + b1 * T + b2 * T**2
    ux, vx = ddxi(u), ddxi(v)
    ut, vt = -mu * ux, -mu * vx
    uxxx = ddxi(ddxi(ux))
    eq1 = ut + u * ux + vx
    eq2 = vt + ux * v + u * vx + uxxx * Fraction(1, 3)

    system: list[JetPoly] = []
    for eq in (eq1, eq2):
        by_power: dict[int, JetPoly] = {}
        for m, c in eq.items():
            params = dict(m.params)
            k = params.pop("T", 0)
            rest = JetPoly({JetMonomial.make(dict(m.jet), m.xpow, m.tpow, params): c})
            by_power[k] = by_power.get(k, JetPoly.zero()) + rest
        for k in sorted(by_power):
            if not by_power[k].is_zero():
                system.append(by_power[k])
    return system


@dataclass(frozen=True)
class Root3:
    """Exact arithmetic in the quadratic field a + b*sqrt(3)."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __add__(self, other: "Root3") -> "Root3":
        return Root3(self.a + other.a, self.b + other.b)

    def __mul__(self, other: "Root3") -> "Root3":
        return Root3(
            self.a * other.a + 3 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    def __pow__(self, n: int) -> "Root3":
        out = Root3(Fraction(1))
        base = self
        for _ in range(n):
            out = out * base
        return out

    def scale(self, c: Fraction) -> "Root3":
        return Root3(self.a * c, self.b * c)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0


def tanh_solution_point() -> dict[str, Root3]:
    """The kink coefficients: a1 = 2 sqrt(3)/3, b0 = 2/3, b1 = 0,
    b2 = -2/3, with a0 identified with the free speed mu."""
    return {
        "a1": Root3(Fraction(0), Fraction(2, 3)),
        "b0": Root3(Fraction(2, 3)),
        "b1": Root3(),
        "b2": Root3(Fraction(-2, 3)),
    }


def evaluate_at_tanh_point(
    eq: JetPoly, binding: Mapping[str, Root3], identify: Mapping[str, str] = {"a0": "mu"}
) -> dict[int, Root3]:
    """Evaluate a coefficient equation at a quadratic-field point,
    keeping unbound parameters symbolic (after identifying parameters per
    ``identify``, e.g. a0 = mu). Returns {mu exponent: value}; the point
    satisfies the equation iff every value is zero."""
    acc: dict[int, Root3] = {}
    for m, c in eq.items():
        if m.jet or m.xpow or m.tpow:
            raise JetError("coefficient equations must be pure parameter polynomials")
        val = Root3(Fraction(1))
        mu_exp = 0
        for name, e in m.params:
            name = identify.get(name, name)
            if name == "mu":
                mu_exp += e
            elif name in binding:
                val = val * binding[name] ** e
            else:
                raise JetError(f"parameter {name} not bound")
        val = val.scale(c)
        cur = acc.get(mu_exp, Root3())
        acc[mu_exp] = cur + val
    return {k: v for k, v in acc.items() if not v.is_zero()} or {0: Root3()}
