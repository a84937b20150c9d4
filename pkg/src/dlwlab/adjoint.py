"""Adjoint symmetries, the multiplier test, symmetry actions on the
adjoint-symmetry space, and the induced bilinear bracket.

For an evolution system G = 0 the linearization G' acts on symmetry
characteristics and its formal adjoint G'* on adjoint symmetries Q. Both
G'(P) and G'*(Q) vanish on shell, so each can be rewritten exactly as a
linear differential operator applied to the equation tuple; those lifted
operators (R_P and R_Q) drive the two symmetry actions

    action1: Q -> Q'(P) + R_P*(Q)
    action2: Q -> R_P*(Q) - R_Q*(P)

which agree for this system and close on the six-dimensional catalog
space, reproducing the published action table up to flagged cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg
from .jet import (
    EvolutionSystem,
    JetError,
    JetPoly,
    JetVar,
    LinearDiffOp,
    OpTerm,
    apply_op,
    euler_operator,
    formal_adjoint,
    reduce_on_shell,
    total_derivative_n,
)
from .symmetry import Characteristic, char_bracket, frechet_derivative

__all__ = [
    "AdjointSymmetry",
    "DecompositionError",
    "NotInRange",
    "AmbiguousPreimage",
    "NotOnShell",
    "adjoint_symmetries",
    "printed_q3",
    "linearization",
    "adjoint_determining_residual",
    "multiplier_test",
    "lift_onshell_operator",
    "symmetry_operator",
    "adjoint_symmetry_operator",
    "action1",
    "action2",
    "ActionTable",
    "build_action_table",
    "decompose_components",
    "sq_bracket",
    "PRINTED_ACTION_TABLE",
    "PRINTED_BRACKET_CONSTANTS",
]


class DecompositionError(JetError):
    """A tuple left the span of the catalog basis."""


class NotInRange(JetError):
    """No preimage exists under the fixed symmetry action."""


class AmbiguousPreimage(JetError):
    """The kernel quotient cannot be resolved canonically."""


class NotOnShell(JetError):
    """A tuple expected to vanish on solutions does not."""


@dataclass(frozen=True)
class AdjointSymmetry:
    """Candidate solution (Q1, Q2) of the adjoint linearization system."""

    comp: tuple[JetPoly, JetPoly]
    name: str = ""

    def __iter__(self):
        return iter(self.comp)

    def scaled(self, c: Fraction | int) -> "AdjointSymmetry":
        c = Fraction(c)
        return AdjointSymmetry(tuple(p * c for p in self.comp))

    def __add__(self, other: "AdjointSymmetry") -> "AdjointSymmetry":
        return AdjointSymmetry(tuple(a + b for a, b in zip(self.comp, other.comp)))

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.comp)


def _p(name: str, dx: int = 0, dt: int = 0) -> JetPoly:
    return JetPoly.var(name, dx, dt)


def adjoint_symmetries() -> tuple[AdjointSymmetry, ...]:
    """The six catalog adjoint symmetries Q1..Q6.

    Q3 is stored as the gradient pair (u v + u_xx/3, u^2/2 + v); the
    printed first component duplicates Q2's and fails the determining
    system (see :func:`printed_q3` and the flagged report entry).
    """
    u, v = _p("u"), _p("v")
    q1 = AdjointSymmetry(
        (
            _p("v", 2)
            + v**2 * Fraction(9, 4)
            + u**2 * v * Fraction(9, 4)
            + u * _p("u", 2) * Fraction(3, 2)
            + _p("u", 1) ** 2 * Fraction(3, 4),
            _p("u", 2) + u**3 * Fraction(3, 4) + u * v * Fraction(9, 2),
        ),
        name="Q1",
    )
    q2 = AdjointSymmetry((JetPoly.t() * v, JetPoly.t() * u - JetPoly.x()), name="Q2")
    q3 = AdjointSymmetry(
        (u * v + _p("u", 2) * Fraction(1, 3), u**2 * Fraction(1, 2) + v), name="Q3"
    )
    q4 = AdjointSymmetry((v, u), name="Q4")
    q5 = AdjointSymmetry((JetPoly.one(), JetPoly.zero()), name="Q5")
    q6 = AdjointSymmetry((JetPoly.zero(), JetPoly.one()), name="Q6")
    return (q1, q2, q3, q4, q5, q6)


def printed_q3() -> AdjointSymmetry:
    """The third catalog entry exactly as printed (first component tv)."""
    return AdjointSymmetry(
        (JetPoly.t() * _p("v"), _p("u") ** 2 * Fraction(1, 2) + _p("v")),
        name="Q3-printed",
    )


# ---------------------------------------------------------------------------
# linearization and its adjoint


def linearization(sys: EvolutionSystem) -> LinearDiffOp:
    """Frechet derivative of the system map as an operator matrix:
    entry (i, j) collects (d G^i / d u^j_[a,b]) * D_x^a D_t^b."""
    rows = []
    for g in sys.equation_polys():
        row = []
        for dep in sys.deps:
            terms = []
            for v in sorted(g.jet_vars()):
                if v.name != dep:
                    continue
                coeff = g.partial(v)
                if not coeff.is_zero():
                    terms.append(OpTerm(coeff, v.dx, v.dt))
            row.append(tuple(terms))
        rows.append(tuple(row))
    return LinearDiffOp(tuple(rows)).canonical()


def adjoint_determining_residual(
    q: AdjointSymmetry | Sequence[JetPoly], sys: EvolutionSystem
) -> tuple[JetPoly, ...]:
    """G'*(Q) reduced on shell; the zero tuple certifies an adjoint
    symmetry."""
    comp = tuple(q.comp if isinstance(q, AdjointSymmetry) else q)
    out = apply_op(formal_adjoint(linearization(sys)), comp)
    return tuple(reduce_on_shell(p, sys) for p in out)


def multiplier_test(q: AdjointSymmetry | Sequence[JetPoly], sys: EvolutionSystem) -> bool:
    """True iff every Euler operator annihilates sum_j G^j Q_j
    identically off shell, i.e. the pairing is a total divergence."""
    comp = tuple(q.comp if isinstance(q, AdjointSymmetry) else q)
    paired = JetPoly.zero()
    for g, qc in zip(sys.equation_polys(), comp):
        paired = paired + g * qc
    return all(euler_operator(paired, dep).is_zero() for dep in sys.deps)


# ---------------------------------------------------------------------------
# lifting on-shell-vanishing tuples to operators on the equations


def _extract_powers(p: JetPoly, w: JetVar) -> dict[int, JetPoly]:
    """Write p as sum_k a_k * w^k; returns {k: a_k} with a_k free of w."""
    out: dict[int, JetPoly] = {}
    for m, c in p.items():
        jet = dict(m.jet)
        k = jet.pop(w, 0)
        from .jet import JetMonomial

        rest = JetPoly({JetMonomial.make(jet, m.xpow, m.tpow, dict(m.params)): c})
        out[k] = out.get(k, JetPoly.zero()) + rest
    return {k: v for k, v in out.items() if not v.is_zero()}


def lift_onshell_operator(
    rho: Sequence[JetPoly], sys: EvolutionSystem
) -> LinearDiffOp:
    """Express a tuple that vanishes on shell as an operator applied to
    the equation tuple: returns M with M(G) = rho identically.

    Works leading-derivative by leading-derivative: each reducible
    coordinate w equals the prolonged equation minus lower-order terms,
    so polynomial division by that prolonged equation eliminates w while
    recording the quotient as the operator coefficient. Raises NotOnShell
    if a nonzero remainder survives with no reducible coordinate left.
    """
    eqs = sys.equation_polys()
    dep_index = {name: k for k, name in enumerate(sys.deps)}
    solved = sys.solved()
    n = len(eqs)
    entries: list[list[list[OpTerm]]] = [[[] for _ in range(n)] for _ in range(n)]
    for i, rho_i in enumerate(rho):
        current = rho_i
        while True:
            reducible = [v for v in current.jet_vars() if solved.is_reducible(v)]
            if not reducible:
                break
            w = max(reducible, key=lambda v: (v.dt, v.dx))
            j = dep_index[w.name]
            lifted_eq = total_derivative_n(eqs[j], w.dx - sys.lead_dx, w.dt - 1)
            lower = lifted_eq - JetPoly.from_var(w)  # strictly smaller dt
            coeffs = _extract_powers(current, w)
            degree = max(coeffs)
            # synthetic division of current by (w - root), root = -lower
            root = -lower
            quotient: dict[int, JetPoly] = {}
            carry = JetPoly.zero()
            for k in range(degree, 0, -1):
                b = coeffs.get(k, JetPoly.zero()) + carry
                quotient[k - 1] = b
                carry = root * b
            remainder = coeffs.get(0, JetPoly.zero()) + carry
            qpoly = JetPoly.zero()
            for k, b in quotient.items():
                qpoly = qpoly + b * JetPoly.from_var(w) ** k
            if not qpoly.is_zero():
                entries[i][j].append(
                    OpTerm(reduce_on_shell(qpoly, sys), w.dx - sys.lead_dx, w.dt - 1)
                )
            current = remainder
        if not current.is_zero():
            raise NotOnShell(
                f"component {i} does not vanish on shell (remainder {current})"
            )
    return LinearDiffOp.from_lists(entries).canonical()


def symmetry_operator(p: Characteristic, sys: EvolutionSystem) -> LinearDiffOp:
    """R_P with R_P(G) = G'(P), lifted from the linearization applied to
    the characteristic."""
    gp = frechet_derivative(sys.equation_polys(), tuple(p.comp), sys.deps)
    return lift_onshell_operator(gp, sys)


def adjoint_symmetry_operator(q: AdjointSymmetry, sys: EvolutionSystem) -> LinearDiffOp:
    """R_Q with R_Q(G) = G'*(Q), lifted from the adjoint linearization
    applied to the adjoint symmetry."""
    comp = tuple(q.comp)
    gq = apply_op(formal_adjoint(linearization(sys)), comp)
    return lift_onshell_operator(gq, sys)


# ---------------------------------------------------------------------------
# the two symmetry actions


def action1(
    p: Characteristic, q: AdjointSymmetry, sys: EvolutionSystem
) -> tuple[JetPoly, ...]:
    """First action: Q'(P) + R_P*(Q), reduced on shell."""
    qp = frechet_derivative(tuple(q.comp), tuple(p.comp), sys.deps)
    rp_star = formal_adjoint(symmetry_operator(p, sys))
    extra = apply_op(rp_star, tuple(q.comp))
    return tuple(reduce_on_shell(a + b, sys) for a, b in zip(qp, extra))


def action2(
    p: Characteristic, q: AdjointSymmetry, sys: EvolutionSystem
) -> tuple[JetPoly, ...]:
    """Second action: R_P*(Q) - R_Q*(P), reduced on shell."""
    rp_star = formal_adjoint(symmetry_operator(p, sys))
    rq_star = formal_adjoint(adjoint_symmetry_operator(q, sys))
    first = apply_op(rp_star, tuple(q.comp))
    second = apply_op(rq_star, tuple(p.comp))
    return tuple(reduce_on_shell(a - b, sys) for a, b in zip(first, second))


# ---------------------------------------------------------------------------
# exact decomposition in catalog bases


def decompose_components(
    target: Sequence[JetPoly],
    basis: Sequence[Sequence[JetPoly]],
) -> list[Fraction] | None:
    """Exact coordinates of a component tuple in the span of basis
    tuples, matching monomial coefficients slot by slot."""
    width = len(target)
    rows = []
    rhs = []
    keys: list[tuple[int, object]] = []
    seen = set()
    for slot in range(width):
        polys = [b[slot] for b in basis] + [target[slot]]
        for p in polys:
            for m in p.terms:
                if (slot, m) not in seen:
                    seen.add((slot, m))
                    keys.append((slot, m))
    for slot, m in keys:
        rows.append([b[slot].terms.get(m, Fraction(0)) for b in basis])
        rhs.append(target[slot].terms.get(m, Fraction(0)))
    return linalg.solve_exact(rows, rhs)


@dataclass(frozen=True)
class ActionTable:
    """entries[(qi, pj)] (1-based) holds the exact coordinates of
    action1(P_j, Q_i) in the catalog adjoint-symmetry basis."""

    entries: Mapping[tuple[int, int], tuple[Fraction, ...]]

    def coeff(self, qi: int, pj: int) -> tuple[Fraction, ...]:
        return self.entries[(qi, pj)]

    def matrix_for_fixed_q(self, qi: int) -> list[list[Fraction]]:
        """6x4 matrix of the map S_Q: P_j -> action1(P_j, Q_qi)."""
        return [
            [self.entries[(qi, pj)][row] for pj in range(1, 5)] for row in range(6)
        ]


def build_action_table(
    chars: Sequence[Characteristic],
    adjoints: Sequence[AdjointSymmetry],
    sys: EvolutionSystem,
) -> ActionTable:
    """All action1 images decomposed exactly over the adjoint catalog;
    an unmatched residue raises DecompositionError."""
    basis = [tuple(reduce_on_shell(c, sys) for c in q.comp) for q in adjoints]
    entries: dict[tuple[int, int], tuple[Fraction, ...]] = {}
    for qi, q in enumerate(adjoints, start=1):
        for pj, p in enumerate(chars, start=1):
            image = action1(p, q, sys)
            coords = decompose_components(image, basis)
            if coords is None:
                raise DecompositionError(
                    f"action of P{pj} on Q{qi} left the catalog span: "
                    f"({', '.join(str(c) for c in image)})"
                )
            entries[(qi, pj)] = tuple(coords)
    return ActionTable(entries)


#: Cell values as printed in the source catalog (basis coordinates over
#: Q1..Q6); the engine's computed table disagrees only at (Q6, P4).
PRINTED_ACTION_TABLE: dict[tuple[int, int], dict[int, Fraction]] = {
    (1, 3): {3: Fraction(9, 2)},
    (1, 4): {1: Fraction(-2)},
    (2, 1): {4: Fraction(1)},
    (2, 2): {6: Fraction(-1)},
    (3, 3): {4: Fraction(1)},
    (3, 4): {3: Fraction(-3, 2)},
    (4, 3): {6: Fraction(1)},
    (4, 4): {4: Fraction(-1)},
}

#: Bracket constants as printed: fixing Q1, Q3, Q4 respectively.
PRINTED_BRACKET_CONSTANTS = {
    (1, 1, 3): (3, Fraction(-1, 4)),  # fix Q1: [Q1,Q3] = -Q3/4
    (3, 3, 4): (4, Fraction(1, 3)),  # fix Q3: [Q3,Q4] = +Q4/3
    (4, 4, 6): (6, Fraction(1, 2)),  # fix Q4: [Q4,Q6] = +Q6/2
}


# ---------------------------------------------------------------------------
# the induced bracket on the range of a fixed action


def _char_combination(
    coords: Sequence[Fraction], chars: Sequence[Characteristic]
) -> Characteristic:
    comp = [JetPoly.zero(), JetPoly.zero()]
    for c, p in zip(coords, chars):
        if c:
            comp[0] = comp[0] + p.comp[0] * c
            comp[1] = comp[1] + p.comp[1] * c
    return Characteristic((comp[0], comp[1]))


def sq_bracket(
    fix: int,
    a: AdjointSymmetry | Sequence[JetPoly],
    b: AdjointSymmetry | Sequence[JetPoly],
    chars: Sequence[Characteristic],
    adjoints: Sequence[AdjointSymmetry],
    sys: EvolutionSystem,
    table: ActionTable | None = None,
) -> tuple[AdjointSymmetry, tuple[Fraction, ...]]:
    """Bilinear bracket on the range of S_Q for the fixed catalog entry:
    map both arguments back through S_Q (canonical preimage with zero
    kernel components), bracket the characteristics, and push forward.

    Requires the kernel of S_Q to be an ideal of the symmetry algebra;
    raises NotInRange when an argument has no preimage and
    AmbiguousPreimage when the kernel is not spanned by basis directions
    (the canonical-complement choice then has no meaning).
    """
    if table is None:
        table = build_action_table(chars, adjoints, sys)
    m = table.matrix_for_fixed_q(fix)
    kernel = linalg.nullspace_exact(m)
    # canonical complement needs the kernel to be coordinate-spanned
    for vec in kernel:
        if sum(1 for v in vec if v != 0) != 1:
            raise AmbiguousPreimage("kernel is not spanned by basis directions")
    # ideal check: bracketing a kernel generator with any generator must
    # stay in the kernel
    basis_red = [tuple(reduce_on_shell(c, sys) for c in q.comp) for q in adjoints]
    char_basis_red = [
        [reduce_on_shell(c, sys) for c in p.comp] for p in chars
    ]
    kernel_cols = {next(i for i, v in enumerate(vec) if v != 0) for vec in kernel}
    for i in kernel_cols:
        for j in range(len(chars)):
            br = char_bracket(chars[i], chars[j], sys)
            coords = decompose_components(tuple(br.comp), char_basis_red)
            if coords is None:
                raise DecompositionError("bracket left the symmetry span")
            if any(c != 0 for k, c in enumerate(coords) if k not in kernel_cols):
                raise AmbiguousPreimage("kernel of the fixed action is not an ideal")

    def preimage(arg: AdjointSymmetry | Sequence[JetPoly]) -> list[Fraction]:
        comp = tuple(arg.comp if isinstance(arg, AdjointSymmetry) else arg)
        comp = tuple(reduce_on_shell(c, sys) for c in comp)
        coords = decompose_components(comp, basis_red)
        if coords is None:
            raise NotInRange("argument is outside the adjoint catalog span")
        pre = linalg.solve_exact(m, list(coords))
        if pre is None:
            raise NotInRange("argument is outside the range of the fixed action")
        return pre

    pa = preimage(a)
    pb = preimage(b)
    bracket = char_bracket(
        _char_combination(pa, chars), _char_combination(pb, chars), sys
    )
    image = action1(Characteristic(tuple(bracket.comp)), adjoints[fix - 1], sys)
    coords = decompose_components(image, basis_red)
    if coords is None:
        raise DecompositionError("bracket image left the adjoint catalog span")
    return AdjointSymmetry(tuple(image)), tuple(coords)
