"""Self-contained oracle suites, runnable via ``idqa verify``.

Each check returns (name, passed, detail). These are fast consistency
checks between independent formulations: the hand-derived two-level
closed form, the one-step mixing protocol, the generated source text,
and the runtime RHS must all agree; the rate matrix must conserve
probability and hold the Boltzmann vector stationary.
"""

from __future__ import annotations

import math

import numpy as np

from . import codegen, kernel
from .dynamics import (DynamicsParams, StateVector, discrete_step_reference,
                       id_rhs, transition_rate_apply, two_level_closed_form_rhs,
                       _flip_tables)
from .ising import apply_hamiltonian, build_quantum_signature, classical_energies, \
    make_model
from .schedule import LINEAR_CURVES, make_pause_path


def random_model(rng, n: int):
    """Random all-pairs Ising instance with unit-scale parameters."""
    couplings = [(i, j, float(rng.normal())) for i in range(n) for j in range(i + 1, n)]
    fields = rng.normal(size=n)
    transverse = rng.uniform(0.5, 1.5, size=n)
    return make_model(n, couplings, fields, transverse)


def random_state(rng, dim: int) -> np.ndarray:
    c = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return c / np.linalg.norm(c)


def compile_expression_program(text: str):
    """Build a callable from the ``exprs`` emission target (test harness use).

    Returns f(c, A, B, alpha, T, eps) -> complex ndarray.
    """
    assigns = []
    for line in text.splitlines():
        if line.startswith("dc["):
            target, expr = line.split(" = ", 1)
            index = int(target[3:target.index("]")])
            assigns.append((index, compile(expr, "<generated>", "eval")))
    namespace = {
        "conj": np.conj,
        "cabs2": lambda z: (z * np.conj(z)).real,
        "cimag": lambda z: complex(z).imag,
        "exp": math.exp,
        "rmax": max,
    }

    def evaluate(c, A, B, alpha, T, eps):
        env = dict(namespace, c=np.asarray(c, dtype=np.complex128),
                   A=A, B=B, alpha=alpha, T=T, eps=eps)
        out = np.empty(len(assigns), dtype=np.complex128)
        for index, code in assigns:
            out[index] = eval(code, {"__builtins__": {}}, env)  # noqa: S307
        return out

    return evaluate


def check_two_level_oracle(samples: int = 100, tol: float = 1e-12):
    """id_rhs for one spin vs the hand-written zero-temperature closed form."""
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(samples):
        h = rng.uniform(0.1, 2.0)
        g = rng.uniform(0.1, 2.0)
        alpha = rng.uniform(0.0, 1.0)
        c = random_state(rng, 2)
        model = make_model(1, [], [h], [g])
        params = DynamicsParams(alpha=alpha, temperature=1e-8)
        dc = id_rhs(model, 1.0, 1.0, params, c)
        du, dd = two_level_closed_form_rhs(h, g, alpha, c[1], c[0])
        worst = max(worst, abs(dc[1] - du), abs(dc[0] - dd))
    return "two-level closed form", worst <= tol, f"max |diff| = {worst:.3e}"


def check_alpha_limits(samples: int = 100, tol: float = 1e-12):
    """alpha=0 reduces exactly to -iHc; alpha=1 makes |c|^2 follow L|c|^2."""
    rng = np.random.default_rng(202)
    model = build_quantum_signature()
    exact = True
    worst = 0.0
    for _ in range(samples):
        c = random_state(rng, model.dim)
        a_val, b_val = rng.uniform(0.0, 1.0, size=2)
        hc = apply_hamiltonian(model, a_val, b_val, c)
        dc0 = id_rhs(model, a_val, b_val, DynamicsParams(alpha=0.0), c)
        exact = exact and np.array_equal(dc0, -1j * hc)
        dc1 = id_rhs(model, a_val, b_val, DynamicsParams(alpha=1.0), c)
        dpdt = 2.0 * (np.conj(c) * dc1).real
        lp = transition_rate_apply(model, b_val, 0.3, np.abs(c) ** 2)
        worst = max(worst, float(np.max(np.abs(dpdt - lp))))
    ok = exact and worst <= tol
    return "alpha limiting cases", ok, f"alpha0 exact = {exact}, alpha1 max |diff| = {worst:.3e}"


def check_rate_matrix(tol: float = 1e-12):
    """Zero column sums and Boltzmann stationarity of the rate matrix."""
    model = build_quantum_signature()
    T, B = 0.3, 0.7
    e = classical_energies(model)
    boltz = np.exp(-B * e / T)
    boltz /= boltz.sum()
    resid_boltz = float(np.max(np.abs(transition_rate_apply(model, B, T, boltz))))
    worst_col = 0.0
    for j in range(0, model.dim, 7):
        col = np.zeros(model.dim)
        col[j] = 1.0
        with np.errstate(all="ignore"):
            import warnings as _w
            with _w.catch_warnings():
                _w.simplefilter("ignore")
                lcol = transition_rate_apply(model, B, T, col)
        worst_col = max(worst_col, abs(float(lcol.sum())))
    ok = resid_boltz <= tol and worst_col <= tol
    return ("rate-matrix conservation", ok,
            f"|L boltz|_max = {resid_boltz:.3e}, |colsum|_max = {worst_col:.3e}")


def check_discrete_convergence():
    """Finite difference of the one-step protocol converges to the RHS as O(dt)."""
    model = build_quantum_signature()
    params = DynamicsParams(alpha=0.3)
    c = StateVector.uniform(model.n)
    a_val, b_val = 0.5, 0.5
    f = id_rhs(model, a_val, b_val, params, c.amplitudes)
    errs = []
    for dt in (1e-2, 1e-3, 1e-4):
        stepped = discrete_step_reference(model, a_val, b_val, params, c, dt)
        fd = (stepped.amplitudes - c.amplitudes) / dt
        errs.append(float(np.linalg.norm(fd - f)))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(7.0 <= r <= 13.0 for r in ratios)
    return ("discrete-protocol convergence", ok,
            f"error ratios per decade = {ratios[0]:.2f}, {ratios[1]:.2f}")


def check_self_adjoint(samples: int = 50, tol: float = 1e-12):
    """<a|Hb> = conj(<b|Ha>) for the matrix-free Hamiltonian application."""
    rng = np.random.default_rng(404)
    model = build_quantum_signature()
    worst = 0.0
    for _ in range(samples):
        a = random_state(rng, model.dim)
        b = random_state(rng, model.dim)
        a_val, b_val = rng.uniform(0.0, 1.0, size=2)
        lhs = np.vdot(a, apply_hamiltonian(model, a_val, b_val, b))
        rhs_ = np.vdot(b, apply_hamiltonian(model, a_val, b_val, a))
        worst = max(worst, abs(lhs - np.conj(rhs_)))
    return "Hamiltonian self-adjointness", worst <= tol, f"max |diff| = {worst:.3e}"


def check_codegen(tol: float = 1e-12, samples: int = 25):
    """Emitted expression list evaluates identically to the runtime RHS."""
    rng = np.random.default_rng(505)
    worst = 0.0
    for n in (1, 3):
        model = random_model(rng, n)
        program = codegen.generate_rhs_program(model)
        fn = compile_expression_program(codegen.emit(program, "exprs"))
        params = DynamicsParams(alpha=0.37, temperature=0.3)
        for _ in range(samples):
            c = random_state(rng, model.dim)
            a_val, b_val = rng.uniform(0.1, 1.0, size=2)
            got = fn(c, a_val, b_val, params.alpha, params.temperature, params.reg_floor)
            want = id_rhs(model, a_val, b_val, params, c)
            worst = max(worst, float(np.max(np.abs(got - want))))
    return "generated-source equivalence", worst <= tol, f"max |diff| = {worst:.3e}"


def check_backend_agreement(tol: float = 1e-12):
    """Compiled and pure-Python kernels produce the same derivatives."""
    backends = kernel.available_backends()
    if len(backends) < 2:
        return "kernel backend agreement", True, "single backend present; skipped"
    rng = np.random.default_rng(606)
    model = build_quantum_signature()
    params = DynamicsParams(alpha=0.0045)
    path = make_pause_path(5.0, 5.0, 0.46)
    e, uniq, de_idx = _flip_tables(model)
    plans = {
        name: mod.build_plan(
            energies=e, gamma=np.asarray(model.transverse, dtype=float),
            de_unique=uniq, de_idx=de_idx,
            path_t=path.times(), path_s=path.fractions(),
            curve_s=LINEAR_CURVES.s_grid(), curve_a=LINEAR_CURVES.a_values(),
            curve_b=LINEAR_CURVES.b_values(),
            alpha=params.alpha, temperature=params.temperature,
            reg_floor=params.reg_floor, atol=params.atol, rtol=params.rtol,
            bare_energies=params.bare_energies, max_steps=params.max_steps,
            drift_tol=params.drift_tol)
        for name, mod in backends.items()
    }
    worst = 0.0
    for _ in range(20):
        c = random_state(rng, model.dim)
        t = rng.uniform(0.0, 10.0)
        outs = [backends[name].rhs(plans[name], t, c) for name in sorted(backends)]
        worst = max(worst, float(np.max(np.abs(outs[0] - outs[1]))))
    return "kernel backend agreement", worst <= tol, f"max |diff| = {worst:.3e}"


ALL_CHECKS = (
    check_two_level_oracle,
    check_alpha_limits,
    check_rate_matrix,
    check_discrete_convergence,
    check_self_adjoint,
    check_codegen,
    check_backend_agreement,
)


def run_all():
    return [fn() for fn in ALL_CHECKS]
