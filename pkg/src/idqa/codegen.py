"""Unrolled source-text generation for the blended-dynamics RHS.

Builds, per basis state, the explicit expression

    dc_i = -i (H c)_i + alpha / (2 max(|c_i|^2, eps)) * c_i
           * [ (L |c|^2)_i - 2 Im(conj(c_i) (H c)_i) ]

with the rate-matrix entries folded to 1/(1 + exp(dE * B/T)) and all
model constants folded in. Simplification is limited to constant folding
plus hoisting of (H c)_i and (L |c|^2)_i into per-equation temporaries;
emission targets are C99 (``c``) and a Python-syntax expression list
(``exprs``). Output is deterministic and stable across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .ising import IsingModel, classical_energies

MAX_CODEGEN_SPINS = 12

EMIT_TARGETS = ("c", "exprs")


# ---------------------------------------------------------------------------
# Expression tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Cpx:
    re: float
    im: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Amp:
    index: int


@dataclass(frozen=True)
class Temp:
    name: str


@dataclass(frozen=True)
class Conj:
    arg: object


@dataclass(frozen=True)
class Abs2:
    arg: object


@dataclass(frozen=True)
class Im:
    arg: object


@dataclass(frozen=True)
class Exp:
    arg: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Add:
    terms: tuple


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Div:
    num: object
    den: object


@dataclass(frozen=True)
class Maximum:
    a: object
    b: object


def _add(*terms):
    """Sum with numeric folding; zero terms drop out."""
    flat = []
    const = 0.0
    for t in terms:
        if isinstance(t, Num):
            const += t.value
        else:
            flat.append(t)
    if const != 0.0 or not flat:
        flat.append(Num(const))
    return flat[0] if len(flat) == 1 else Add(tuple(flat))


def _mul(*factors):
    """Product with numeric folding; a zero factor collapses the product."""
    flat = []
    const = 1.0
    for f in factors:
        if isinstance(f, Num):
            const *= f.value
        else:
            flat.append(f)
    if const == 0.0:
        return Num(0.0)
    if const != 1.0 or not flat:
        flat.insert(0, Num(const))
    return flat[0] if len(flat) == 1 else Mul(tuple(flat))


def _exp(arg):
    return Num(math.exp(arg.value)) if isinstance(arg, Num) else Exp(arg)


def _div(num, den):
    if isinstance(num, Num) and isinstance(den, Num):
        return Num(num.value / den.value)
    return Div(num, den)


def amplitude_indices(expr, out=None) -> set[int]:
    """Distinct amplitude variables referenced anywhere in the expression."""
    if out is None:
        out = set()
    if isinstance(expr, Amp):
        out.add(expr.index)
    elif isinstance(expr, (Conj, Abs2, Im, Exp, Neg)):
        amplitude_indices(expr.arg, out)
    elif isinstance(expr, Add):
        for t in expr.terms:
            amplitude_indices(t, out)
    elif isinstance(expr, Mul):
        for f in expr.factors:
            amplitude_indices(f, out)
    elif isinstance(expr, Div):
        amplitude_indices(expr.num, out)
        amplitude_indices(expr.den, out)
    elif isinstance(expr, Maximum):
        amplitude_indices(expr.a, out)
        amplitude_indices(expr.b, out)
    return out


@dataclass(frozen=True)
class Equation:
    """One basis state's derivative: hoisted (H c)_i and (L p)_i plus the RHS."""

    index: int
    hc: object
    lp: object
    rhs: object
    amp_vars: tuple[int, ...]


@dataclass(frozen=True)
class RhsProgram:
    n: int
    equations: tuple[Equation, ...]


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def _rate_expr(de: float) -> object:
    """1 / (1 + exp(de * B/T)) with the scaled-energy convention."""
    return _div(Num(1.0), _add(Num(1.0), _exp(_mul(Num(de), Sym("BoT")))))


def generate_rhs_program(model: IsingModel) -> RhsProgram:
    """Expression tree of the full RHS for every basis state.

    Each equation references exactly n+1 amplitude variables: the state
    itself plus its n single-flip neighbors.
    """
    if model.n > MAX_CODEGEN_SPINS:
        raise ValidationError(
            f"n={model.n} exceeds the source-size guard {MAX_CODEGEN_SPINS}")
    e = classical_energies(model)
    n, N = model.n, model.dim
    equations = []
    for i in range(N):
        neighbors = [i ^ (1 << b) for b in range(n)]
        hc = _add(
            _mul(Num(float(e[i])), Sym("B"), Amp(i)),
            *(_mul(Num(-model.transverse[b]), Sym("A"), Amp(j))
              for b, j in enumerate(neighbors)),
        )
        in_terms = []
        out_terms = []
        for b, j in enumerate(neighbors):
            de_in = float(e[i] - e[j])
            in_terms.append(_mul(_rate_expr(de_in), Abs2(Amp(j))))
            out_terms.append(_rate_expr(-de_in))
        lp = _add(*in_terms, Neg(_mul(Abs2(Amp(i)), _add(*out_terms))))
        rhs = _add(
            _mul(Cpx(0.0, -1.0), Temp("hc")),
            _mul(
                Sym("alpha"),
                _div(Amp(i), _mul(Num(2.0), Maximum(Abs2(Amp(i)), Sym("eps")))),
                _add(Temp("lp"),
                     Neg(_mul(Num(2.0), Im(_mul(Conj(Amp(i)), Temp("hc")))))),
            ),
        )
        amp_vars = tuple(sorted(
            amplitude_indices(hc) | amplitude_indices(lp) | amplitude_indices(rhs)))
        if len(amp_vars) != n + 1:
            raise AssertionError(
                f"equation {i} references {len(amp_vars)} amplitudes, expected {n + 1}")
        equations.append(Equation(index=i, hc=hc, lp=lp, rhs=rhs, amp_vars=amp_vars))
    return RhsProgram(n=n, equations=tuple(equations))


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _print_expr(expr, subst: dict | None, python: bool) -> str:
    p = lambda e: _print_expr(e, subst, python)  # noqa: E731
    if isinstance(expr, Num):
        return _fmt(expr.value)
    if isinstance(expr, Cpx):
        unit = "1j" if python else "I"
        return f"({_fmt(expr.re)} + {_fmt(expr.im)}*{unit})"
    if isinstance(expr, Sym):
        if python and expr.name == "BoT":
            return "(B/T)"
        return expr.name
    if isinstance(expr, Amp):
        return f"c[{expr.index}]"
    if isinstance(expr, Temp):
        if subst is not None:
            return p(subst[expr.name])
        return expr.name
    if isinstance(expr, Conj):
        return f"conj({p(expr.arg)})"
    if isinstance(expr, Abs2):
        return f"cabs2({p(expr.arg)})"
    if isinstance(expr, Im):
        return f"cimag({p(expr.arg)})"
    if isinstance(expr, Exp):
        return f"exp({p(expr.arg)})"
    if isinstance(expr, Neg):
        return f"(-{p(expr.arg)})"
    if isinstance(expr, Add):
        return "(" + " + ".join(p(t) for t in expr.terms) + ")"
    if isinstance(expr, Mul):
        return "(" + "*".join(p(f) for f in expr.factors) + ")"
    if isinstance(expr, Div):
        return f"({p(expr.num)}/{p(expr.den)})"
    if isinstance(expr, Maximum):
        return f"rmax({p(expr.a)}, {p(expr.b)})"
    raise TypeError(f"unknown node {expr!r}")


def _emit_c(program: RhsProgram) -> str:
    N = 1 << program.n
    lines = [
        "/* Generated derivative of the blended quantum-thermal dynamics. */",
        "/* dc = rhs(c; A, B, alpha, T, eps); dimensions fixed at build time. */",
        "#include <complex.h>",
        "#include <math.h>",
        "",
        "static double rmax(double a, double b) { return a > b ? a : b; }",
        "static double cabs2(double complex z)",
        "{ return creal(z)*creal(z) + cimag(z)*cimag(z); }",
        "",
        f"void id_rhs(const double complex c[{N}], double A, double B,",
        f"            double alpha, double T, double eps, double complex dc[{N}])",
        "{",
        "    const double BoT = B / T;",
        "    (void)BoT;",
    ]
    for eq in program.equations:
        lines.append("    {")
        lines.append(f"        const double complex hc = {_print_expr(eq.hc, None, False)};")
        lines.append(f"        const double lp = {_print_expr(eq.lp, None, False)};")
        lines.append(f"        dc[{eq.index}] = {_print_expr(eq.rhs, None, False)};")
        lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n"


_EXPRS_HEADER = """\
# Generated derivative of the blended quantum-thermal dynamics.
# Grammar: Python expressions over the complex array c and the real scalars
# A, B, alpha, T, eps, with the helpers
#   conj(z), cabs2(z) = |z|^2, cimag(z), exp(x), rmax(a, b) = max(a, b).
# One assignment per basis state.
"""


def _emit_exprs(program: RhsProgram) -> str:
    lines = [_EXPRS_HEADER]
    for eq in program.equations:
        subst = {"hc": eq.hc, "lp": eq.lp}
        lines.append(f"dc[{eq.index}] = {_print_expr(eq.rhs, subst, True)}")
    return "\n".join(lines) + "\n"


def emit(program: RhsProgram, target: str = "c") -> str:
    """Render the program as source text; deterministic for a given program."""
    if target == "c":
        return _emit_c(program)
    if target == "exprs":
        return _emit_exprs(program)
    raise ValidationError(f"unsupported target {target!r}; choose from {EMIT_TARGETS}")
