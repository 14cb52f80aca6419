"""Self-check suite behind the ``verify`` CLI command.

Each check rebuilds a property of the construction from seeded random
inputs and compares against ground truth computed another way.  The
comparator check reads the coefficient table off the actual compiled
circuit, so a corrupted comparator builder (used as a fault-injection hook
in the tests) is caught there.
"""
from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np

from .circuits import (
    DecompositionError,
    TransformQuery,
    build_comparator,
    build_start_state,
    classical_value,
    decompose_signal,
)
from .grover import amplify, grover_step, plan_grover
from .sim import (
    Mode,
    QubitIs,
    StateVector,
    apply_circuit,
    basis_index,
    compile_state_prep,
    new_state,
    project,
)
from .subset import BitString, SubsetTable, zeta_fast

__all__ = ["run_verify"]


def _random_query(rng: np.random.Generator, mode: Mode, n: int, n0: int | None = None) -> TransformQuery:
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    amps /= np.linalg.norm(amps)
    width = n if mode is Mode.MOBIUS else n0
    x = BitString.from_int(int(rng.integers(1 << width)), width)
    return TransformQuery(mode, n, amps, x, n0)


def _check_comparator(builder: Callable[[TransformQuery], object]) -> tuple[bool, str]:
    """Coefficient table read off the compiled comparator circuit."""
    inv = 1.0 / math.sqrt(2.0)
    worst = ""
    for mode, n, n0 in ((Mode.MOBIUS, 1, None), (Mode.MARGINAL, 2, 1)):
        psi = np.zeros(1 << n, dtype=np.complex128)
        psi[0] = 1.0
        query = TransformQuery(mode, n, psi, BitString.from_int(0, n if n0 is None else n0), n0)
        layout = query.layout
        circuit = builder(query)
        for source in (0, 1):
            start = new_state(layout)
            amps = np.zeros_like(start.amplitudes)
            amps[basis_index(layout, {"alpha_minus": source})] = 1.0
            state = apply_circuit(StateVector(layout, amps), circuit)
            for sample in (0, 1):
                got = state.amplitudes[basis_index(layout, {"alpha_minus": source, "alpha": sample})]
                if mode is Mode.MOBIUS:
                    want = inv if sample >= source else 0.0
                else:
                    want = inv if sample == source else 0.0
                if abs(got - want) > 1e-12:
                    worst = (
                        f"{mode.value} coefficient ({source},{sample}): "
                        f"circuit gives {got:.6f}, closed form {want:.6f}"
                    )
    if worst:
        return False, worst
    return True, "all 8 (mode, source, sample) coefficients match the closed form"


def _check_decomposition(rng: np.random.Generator) -> tuple[bool, str]:
    cases = [(Mode.MOBIUS, 3, None)] * 4 + [(Mode.MARGINAL, 4, 2)] * 3
    z0_seen = None
    for mode, n, n0 in cases:
        query = _random_query(rng, mode, n, n0)
        try:
            dec = decompose_signal(query, build_start_state(query))
        except DecompositionError as exc:
            return False, f"{mode.value} n={n}: {exc}"
        if abs(dec.ratio - classical_value(query)) > 1e-10:
            return False, (
                f"{mode.value} n={n} x={query.x}: ratio {dec.ratio} vs "
                f"classical {classical_value(query)}"
            )
        if mode is Mode.MOBIUS and n == 3:
            z0_seen = dec.z0
    return True, f"sector structure holds on random states; z0 = {z0_seen.real:.4f} at n0=3"


def _check_ratio_preservation(rng: np.random.Generator) -> tuple[bool, str]:
    query = _random_query(rng, Mode.MOBIUS, 3)
    start = build_start_state(query)
    want = classical_value(query)
    state = start
    omega_q = start.layout.omega_qubit
    gamma_q = start.layout.gamma_qubit
    for k in range(9):
        if k:
            state = grover_step(state, start)
        idx = np.arange(state.amplitudes.shape[0])
        probs = np.abs(state.amplitudes) ** 2
        om = (idx >> omega_q) & 1
        ga = (idx >> gamma_q) & 1
        p0 = probs[(om == 0) & (ga == 0)].sum()
        p1 = probs[(om == 0) & (ga == 1)].sum()
        if abs(p1 / p0 - want) > 1e-9:
            return False, f"gamma odds drifted to {p1 / p0} (want {want}) at step {k}"
    return True, "conditional gamma odds unchanged through 8 amplification steps"


def _check_oracle_equivalence(rng: np.random.Generator) -> tuple[bool, str]:
    # mobius sweep against the butterfly transform
    probs = rng.random(8)
    probs /= probs.sum()
    table = SubsetTable(3, probs)
    fast = zeta_fast(table)
    for xv in range(8):
        query = TransformQuery.from_probability_table(Mode.MOBIUS, table, BitString.from_int(xv, 3))
        got = decompose_signal(query, build_start_state(query)).ratio
        if abs(got - fast.values[xv]) > 1e-10:
            return False, f"mobius x={xv}: circuit {got} vs butterfly {fast.values[xv]}"
    # marginal sweep against direct summation
    probs = rng.random(32)
    probs /= probs.sum()
    table = SubsetTable(5, probs)
    for xv in range(8):
        query = TransformQuery.from_probability_table(
            Mode.MARGINAL, table, BitString.from_int(xv, 3), n0=3
        )
        want = probs[(np.arange(32) & 7) == xv].sum()
        got = decompose_signal(query, build_start_state(query)).ratio
        if abs(got - want) > 1e-10:
            return False, f"marginal x={xv}: circuit {got} vs direct sum {want}"
    return True, "circuit values match classical transforms on random sweeps"


def _check_state_prep(rng: np.random.Generator) -> tuple[bool, str]:
    layout = TransformQuery(
        Mode.MOBIUS, 5, np.eye(32)[0], BitString.from_int(0, 5)
    ).layout
    target = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    target /= np.linalg.norm(target)
    circuit = compile_state_prep(layout, target, "alpha_minus")
    state = apply_circuit(new_state(layout), circuit)
    got = state.amplitudes[: 32]
    err = float(np.max(np.abs(got - target)))
    rest = float(np.linalg.norm(state.amplitudes[32:]))
    if err > 1e-10 or rest > 1e-12:
        return False, f"round-trip error {err}, leakage {rest}"
    return True, f"5-qubit complex round trip within {err:.2e}"


def _check_amplification(rng: np.random.Generator) -> tuple[bool, str]:
    psi = np.full(8, 1.0 / math.sqrt(8.0))
    query = TransformQuery(Mode.MOBIUS, 3, psi, BitString.from_str("111"))
    start = build_start_state(query)
    plan = plan_grover(start)
    final = amplify(start, plan)
    _, a = project(final, QubitIs(start.layout.omega_qubit, 0))
    if abs(a**2 - plan.predicted_success) > 1e-9:
        return False, f"measured success {a ** 2} vs predicted {plan.predicted_success}"
    return True, (
        f"k={plan.iterations} steps land omega=0 mass {a ** 2:.6f}, "
        f"matching sin((2k+1) asin a)**2"
    )


def run_verify(
    seed: int = 0,
    comparator_builder: Callable[[TransformQuery], object] | None = None,
) -> tuple[bool, list[str]]:
    """Run every check; returns overall success and one report line each.

    ``comparator_builder`` overrides the circuit builder under test, which
    lets the test suite inject a corrupted comparator and confirm the
    coefficient check catches it.
    """
    builder = build_comparator if comparator_builder is None else comparator_builder
    rng = np.random.default_rng(seed)
    checks: Iterable[tuple[str, Callable[[], tuple[bool, str]]]] = (
        ("comparator-coefficients", lambda: _check_comparator(builder)),
        ("sector-decomposition", lambda: _check_decomposition(rng)),
        ("ratio-preservation", lambda: _check_ratio_preservation(rng)),
        ("oracle-equivalence", lambda: _check_oracle_equivalence(rng)),
        ("state-prep-round-trip", lambda: _check_state_prep(rng)),
        ("amplification-calibration", lambda: _check_amplification(rng)),
    )
    lines = []
    all_ok = True
    for name, check in checks:
        try:
            ok, detail = check()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"crashed: {exc}"
        all_ok &= ok
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok, lines
