"""Closed-form expression trees over elementary functions of affine
phases: exact differentiation, guarded numeric evaluation, residual
oracles for candidate solutions, and the one-parameter group maps.

The node set (rational constants, square roots of positive rationals,
the coordinates x and t, named parameters, sums, products, quotients,
integer powers, exp, tanh, sech) is closed under d/dx and d/dt, so every
residual can be formed symbolically and only the final evaluation is
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .jet import EvolutionSystem, JetPoly

__all__ = [
    "AnalyticError",
    "DomainError",
    "UnboundParameter",
    "Expr",
    "Const",
    "SqrtConst",
    "Coord",
    "Param",
    "Add",
    "Mul",
    "Div",
    "Pow",
    "Exp",
    "Tanh",
    "Sech",
    "const",
    "sqrt_const",
    "X",
    "T",
    "param",
    "add",
    "mul",
    "div",
    "neg",
    "sub",
    "pow_",
    "exp",
    "tanh",
    "sech",
    "diff",
    "free_params",
    "evaluate",
    "substitute_coords",
    "compile_expr",
    "system_residual_exprs",
    "residual_max",
    "ResidualReport",
    "group_orbit",
    "transported_solution",
]

SINGULARITY_GUARD = 1e-8


class AnalyticError(Exception):
    pass


class DomainError(AnalyticError):
    """Evaluation hit a (near-)singular denominator or overflowed."""


class UnboundParameter(AnalyticError):
    pass


# ---------------------------------------------------------------------------
# nodes


class Expr:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True, slots=True)
class SqrtConst(Expr):
    value: Fraction  # the radicand; must be positive

    def __post_init__(self) -> None:
        if self.value <= 0:
            raise AnalyticError("square roots of positive rationals only")


@dataclass(frozen=True, slots=True)
class Coord(Expr):
    name: str  # "x" or "t"

    def __post_init__(self) -> None:
        if self.name not in ("x", "t"):
            raise AnalyticError("coordinates are x and t")


@dataclass(frozen=True, slots=True)
class Param(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Add(Expr):
    args: tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    args: tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class Div(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, slots=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Tanh(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Sech(Expr):
    arg: Expr


# ---------------------------------------------------------------------------
# smart constructors

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
X = Coord("x")
T = Coord("t")


def const(v: int | Fraction | str) -> Const:
    return Const(Fraction(v))


def sqrt_const(v: int | Fraction | str) -> Expr:
    f = Fraction(v)
    root = math.isqrt(f.numerator)
    if root * root == f.numerator and f.denominator == 1:
        return Const(Fraction(root))
    return SqrtConst(f)


def param(name: str) -> Param:
    return Param(name)


def add(*args: Expr) -> Expr:
    flat: list[Expr] = []
    acc = Fraction(0)
    for a in args:
        if isinstance(a, Add):
            sub = a.args
        else:
            sub = (a,)
        for s in sub:
            if isinstance(s, Const):
                acc += s.value
            else:
                flat.append(s)
    if acc != 0:
        flat.insert(0, Const(acc))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*args: Expr) -> Expr:
    flat: list[Expr] = []
    acc = Fraction(1)
    for a in args:
        sub = a.args if isinstance(a, Mul) else (a,)
        for s in sub:
            if isinstance(s, Const):
                acc *= s.value
            else:
                flat.append(s)
    if acc == 0:
        return ZERO
    if acc != 1:
        flat.insert(0, Const(acc))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def div(num: Expr, den: Expr) -> Expr:
    if isinstance(num, Const) and num.value == 0:
        return ZERO
    if isinstance(den, Const):
        if den.value == 0:
            raise AnalyticError("division by the zero constant")
        if den.value == 1:
            return num
        if isinstance(num, Const):
            return Const(num.value / den.value)
    return Div(num, den)


def pow_(base: Expr, exponent: int) -> Expr:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and exponent < 0:
            raise AnalyticError("zero to a negative power")
        return Const(base.value**exponent)
    return Pow(base, exponent)


def exp(arg: Expr) -> Expr:
    if isinstance(arg, Const) and arg.value == 0:
        return ONE
    return Exp(arg)


def tanh(arg: Expr) -> Expr:
    if isinstance(arg, Const) and arg.value == 0:
        return ZERO
    return Tanh(arg)


def sech(arg: Expr) -> Expr:
    if isinstance(arg, Const) and arg.value == 0:
        return ONE
    return Sech(arg)


def neg(e: Expr) -> Expr:
    return mul(Const(Fraction(-1)), e)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


# ---------------------------------------------------------------------------
# differentiation


def diff(e: Expr, var: str) -> Expr:
    """Exact derivative with respect to coordinate ``x`` or ``t``."""
    if var not in ("x", "t"):
        raise AnalyticError("differentiate with respect to x or t")
    if isinstance(e, (Const, SqrtConst, Param)):
        return ZERO
    if isinstance(e, Coord):
        return ONE if e.name == var else ZERO
    if isinstance(e, Add):
        return add(*(diff(a, var) for a in e.args))
    if isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            da = diff(a, var)
            if da is ZERO or (isinstance(da, Const) and da.value == 0):
                continue
            rest = e.args[:i] + e.args[i + 1 :]
            terms.append(mul(da, *rest))
        return add(*terms)
    if isinstance(e, Div):
        dn = diff(e.num, var)
        dd = diff(e.den, var)
        return div(sub(mul(dn, e.den), mul(e.num, dd)), pow_(e.den, 2))
    if isinstance(e, Pow):
        return mul(Const(Fraction(e.exponent)), pow_(e.base, e.exponent - 1), diff(e.base, var))
    if isinstance(e, Exp):
        return mul(e, diff(e.arg, var))
    if isinstance(e, Tanh):
        return mul(pow_(sech(e.arg), 2), diff(e.arg, var))
    if isinstance(e, Sech):
        return mul(Const(Fraction(-1)), sech(e.arg), tanh(e.arg), diff(e.arg, var))
    raise AnalyticError(f"unknown node {type(e).__name__}")


def free_params(e: Expr) -> set[str]:
    if isinstance(e, Param):
        return {e.name}
    if isinstance(e, Add) or isinstance(e, Mul):
        out: set[str] = set()
        for a in e.args:
            out |= free_params(a)
        return out
    if isinstance(e, Div):
        return free_params(e.num) | free_params(e.den)
    if isinstance(e, Pow):
        return free_params(e.base)
    if isinstance(e, (Exp, Tanh, Sech)):
        return free_params(e.arg)
    return set()


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr, x: float, t: float, binding: Mapping[str, float | Fraction]) -> float:
    """Guarded double-precision evaluation; all free parameters must be
    bound. Near-zero denominators and non-finite intermediates raise
    DomainError so residual scans never silently average over a pole."""
    val = _eval(e, x, t, binding)
    if not math.isfinite(val):
        raise DomainError("non-finite value")
    return val


def _eval(e: Expr, x: float, t: float, b: Mapping[str, float | Fraction]) -> float:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, SqrtConst):
        return math.sqrt(float(e.value))
    if isinstance(e, Coord):
        return x if e.name == "x" else t
    if isinstance(e, Param):
        try:
            return float(b[e.name])
        except KeyError:
            raise UnboundParameter(e.name) from None
    if isinstance(e, Add):
        return sum(_eval(a, x, t, b) for a in e.args)
    if isinstance(e, Mul):
        out = 1.0
        for a in e.args:
            out *= _eval(a, x, t, b)
        return out
    if isinstance(e, Div):
        den = _eval(e.den, x, t, b)
        if abs(den) < SINGULARITY_GUARD:
            raise DomainError("denominator below guard")
        return _eval(e.num, x, t, b) / den
    if isinstance(e, Pow):
        base = _eval(e.base, x, t, b)
        if e.exponent < 0 and abs(base) < SINGULARITY_GUARD:
            raise DomainError("negative power of near-zero base")
        try:
            return base**e.exponent
        except OverflowError:
            raise DomainError("overflow in power") from None
    if isinstance(e, Exp):
        arg = _eval(e.arg, x, t, b)
        if arg > 700.0:
            raise DomainError("exp overflow")
        return math.exp(arg)
    if isinstance(e, Tanh):
        return math.tanh(_eval(e.arg, x, t, b))
    if isinstance(e, Sech):
        return 1.0 / math.cosh(_eval(e.arg, x, t, b))
    raise AnalyticError(f"unknown node {type(e).__name__}")


def substitute_coords(e: Expr, x_image: Expr | None = None, t_image: Expr | None = None) -> Expr:
    """Replace the coordinate leaves by expression trees (used by the
    group transport maps)."""
    if isinstance(e, Coord):
        if e.name == "x" and x_image is not None:
            return x_image
        if e.name == "t" and t_image is not None:
            return t_image
        return e
    if isinstance(e, Add):
        return add(*(substitute_coords(a, x_image, t_image) for a in e.args))
    if isinstance(e, Mul):
        return mul(*(substitute_coords(a, x_image, t_image) for a in e.args))
    if isinstance(e, Div):
        return div(
            substitute_coords(e.num, x_image, t_image),
            substitute_coords(e.den, x_image, t_image),
        )
    if isinstance(e, Pow):
        return pow_(substitute_coords(e.base, x_image, t_image), e.exponent)
    if isinstance(e, Exp):
        return exp(substitute_coords(e.arg, x_image, t_image))
    if isinstance(e, Tanh):
        return tanh(substitute_coords(e.arg, x_image, t_image))
    if isinstance(e, Sech):
        return sech(substitute_coords(e.arg, x_image, t_image))
    return e


def compile_expr(e: Expr, binding: Mapping[str, float | Fraction]) -> Callable:
    """Compile to a vectorizable ``f(x, t)`` with parameters baked in.
    No singularity guards; intended for pole-free fields inside the
    finite-difference solver."""
    import numpy as np

    def emit(node: Expr) -> str:
        if isinstance(node, Const):
            return repr(float(node.value))
        if isinstance(node, SqrtConst):
            return repr(math.sqrt(float(node.value)))
        if isinstance(node, Coord):
            return node.name
        if isinstance(node, Param):
            if node.name not in binding:
                raise UnboundParameter(node.name)
            return repr(float(binding[node.name]))
        if isinstance(node, Add):
            return "(" + "+".join(emit(a) for a in node.args) + ")"
        if isinstance(node, Mul):
            return "(" + "*".join(emit(a) for a in node.args) + ")"
        if isinstance(node, Div):
            return f"({emit(node.num)}/{emit(node.den)})"
        if isinstance(node, Pow):
            return f"({emit(node.base)}**{node.exponent})"
        if isinstance(node, Exp):
            return f"_np.exp({emit(node.arg)})"
        if isinstance(node, Tanh):
            return f"_np.tanh({emit(node.arg)})"
        if isinstance(node, Sech):
            return f"(1.0/_np.cosh({emit(node.arg)}))"
        raise AnalyticError(f"unknown node {type(node).__name__}")

    code = f"lambda x, t: ({emit(e)}) + 0.0*x"
    return eval(code, {"_np": np})  # noqa: S307 (generated from our own AST)


# ---------------------------------------------------------------------------
# residual oracle


@dataclass(frozen=True)
class ResidualReport:
    max_residual: float
    per_equation: tuple[float, ...]
    samples_used: int
    samples_skipped: int


def system_residual_exprs(
    sys: EvolutionSystem, candidate: Sequence[Expr]
) -> tuple[Expr, ...]:
    """Substitute a candidate field tuple into each equation of the
    system, taking every derivative symbolically."""
    if len(candidate) != sys.width:
        raise AnalyticError("candidate width does not match the system")
    index = {name: k for k, name in enumerate(sys.deps)}
    deriv_cache: dict[tuple[str, int, int], Expr] = {}

    def field_derivative(name: str, dx: int, dt: int) -> Expr:
        key = (name, dx, dt)
        got = deriv_cache.get(key)
        if got is None:
            if dt > 0:
                got = diff(field_derivative(name, dx, dt - 1), "t")
            elif dx > 0:
                got = diff(field_derivative(name, dx - 1, 0), "x")
            else:
                got = candidate[index[name]]
            deriv_cache[key] = got
        return got

    def poly_to_expr(p: JetPoly) -> Expr:
        terms = []
        for m, c in p.items():
            factors: list[Expr] = [Const(c)]
            for v, e in m.jet:
                factors.append(pow_(field_derivative(v.name, v.dx, v.dt), e))
            if m.xpow:
                factors.append(pow_(X, m.xpow))
            if m.tpow:
                factors.append(pow_(T, m.tpow))
            for n, e in m.params:
                factors.append(pow_(Param(n), e))
            terms.append(mul(*factors))
        return add(*terms)

    return tuple(poly_to_expr(g) for g in sys.equation_polys())


def residual_max(
    sys: EvolutionSystem,
    candidate: Sequence[Expr],
    binding: Mapping[str, float | Fraction],
    samples: Iterable[tuple[float, float]],
) -> ResidualReport:
    """Max absolute residual of the candidate over the samples and over
    all equations; singular samples are skipped and counted."""
    residuals = system_residual_exprs(sys, candidate)
    worst = [0.0] * len(residuals)
    used = 0
    skipped = 0
    for x, t in samples:
        try:
            vals = [abs(evaluate(r, x, t, binding)) for r in residuals]
        except DomainError:
            skipped += 1
            continue
        used += 1
        for k, v in enumerate(vals):
            worst[k] = max(worst[k], v)
    return ResidualReport(
        max_residual=max(worst) if used else math.nan,
        per_equation=tuple(worst),
        samples_used=used,
        samples_skipped=skipped,
    )


# ---------------------------------------------------------------------------
# one-parameter group maps


def group_orbit(
    generator_id: int, eps: float, point: tuple[float, float, float, float]
) -> tuple[float, float, float, float]:
    """Closed-form group map applied to a point (x, t, u, v)."""
    x, t, u, v = point
    if generator_id == 1:
        return (x, t + eps, u, v)
    if generator_id == 2:
        return (x + eps, t, u, v)
    if generator_id == 3:
        return (x + t * eps, t, u + eps, v)
    if generator_id == 4:
        return (
            x * math.exp(eps / 2),
            t * math.exp(eps),
            u * math.exp(-eps / 2),
            v * math.exp(-eps),
        )
    raise AnalyticError("generator id must be 1..4")


def transported_solution(
    generator_id: int, u_expr: Expr, v_expr: Expr
) -> tuple[Expr, Expr]:
    """Push a solution pair along a group map; the group parameter enters
    as the free parameter ``eps`` (bind it at evaluation time).

    The returned pair is the solution-to-solution action consistent with
    the group maps themselves: shifting for the translations, a Galilean
    tilt-and-lift for the third generator, and the scaling weights
    e^(-eps/2), e^(-eps) for the fourth.
    """
    eps = Param("eps")
    if generator_id == 1:
        im_t = sub(T, eps)
        return (
            substitute_coords(u_expr, t_image=im_t),
            substitute_coords(v_expr, t_image=im_t),
        )
    if generator_id == 2:
        im_x = sub(X, eps)
        return (
            substitute_coords(u_expr, x_image=im_x),
            substitute_coords(v_expr, x_image=im_x),
        )
    if generator_id == 3:
        im_x = sub(X, mul(eps, T))
        return (
            add(substitute_coords(u_expr, x_image=im_x), eps),
            substitute_coords(v_expr, x_image=im_x),
        )
    if generator_id == 4:
        shrink_x = mul(X, exp(mul(Const(Fraction(-1, 2)), eps)))
        shrink_t = mul(T, exp(neg(eps)))
        return (
            mul(
                exp(mul(Const(Fraction(-1, 2)), eps)),
                substitute_coords(u_expr, x_image=shrink_x, t_image=shrink_t),
            ),
            mul(
                exp(neg(eps)),
                substitute_coords(v_expr, x_image=shrink_x, t_image=shrink_t),
            ),
        )
    raise AnalyticError("generator id must be 1..4")
