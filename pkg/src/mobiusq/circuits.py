"""Builders for the transform-evaluation circuit and its exact readout.

A query carries an amplitude-encoded table psi_minus on alpha_minus and an
evaluation point x.  The start-state construction entangles two branches on
mu0: the mu0=1 branch runs a comparator that Hadamard-samples alpha and
marks subset violations (mobius) or bit mismatches (marginal) on beta; the
mu0=0 branch just Hadamard-spreads alpha.  A final X on omega, controlled
on (alpha == x and beta == 0), moves the two on-target components to
omega=0:

    z1 * |psi1>|beta=0,gamma=1>|omega=0>   with |z1| = sqrt(value) * base
  + z0 * |psi0>|beta=0,gamma=0>|omega=0>   with  z0  = base
  + |chi>|omega=1>

where base = 2**-((n0+1)/2) and value is the subset sum f(x) (mobius) or
the marginal probability P(x) (marginal).  The conditional gamma odds on
omega=0 therefore equal the transform value, and they are preserved by the
amplitude amplification in :mod:`mobiusq.grover`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sim import (
    AllOf,
    Circuit,
    Controlled,
    GateOp,
    Hadamard,
    Mode,
    PauliX,
    Predicate,
    QubitIs,
    QubitsDiffer,
    RegisterLayout,
    StateVector,
    apply_circuit,
    compile_state_prep,
    new_state,
)
from .subset import BitString, SubsetTable

__all__ = [
    "TransformQuery",
    "SignalDecomposition",
    "DecompositionError",
    "classical_value",
    "build_comparator",
    "comparator_coefficient",
    "target_predicate",
    "build_start_circuit",
    "build_start_state",
    "decompose_signal",
    "mobius_value_exact",
    "marginal_value_exact",
]

_CHECK_TOL = 1e-9


class DecompositionError(RuntimeError):
    """Start-state structure violated its predicted shape: a circuit bug."""


@dataclass(eq=False)
class TransformQuery:
    """One transform evaluation: mode, encoded table, and the point x.

    psi_minus holds 2**n complex amplitudes whose squared magnitudes form
    the table being transformed; x has n0 bits (n0 == n in mobius mode).
    """

    mode: Mode
    n: int
    psi_minus: np.ndarray
    x: BitString
    n0: int | None = None

    def __post_init__(self) -> None:
        self.mode = Mode(self.mode)
        layout = RegisterLayout(self.mode, self.n, self.n0)  # validates n/n0
        self.n0 = layout.n0
        arr = np.array(self.psi_minus, dtype=np.complex128)
        if arr.shape != (1 << self.n,):
            raise ValueError(f"psi_minus needs {1 << self.n} amplitudes, got {arr.shape}")
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"psi_minus norm is {norm}, expected 1 within 1e-9")
        self.psi_minus = arr
        if not isinstance(self.x, BitString):
            raise TypeError("x must be a BitString")
        if len(self.x) != self.n0:
            raise ValueError(f"x has {len(self.x)} bits, expected n0 = {self.n0}")

    @property
    def layout(self) -> RegisterLayout:
        return RegisterLayout(self.mode, self.n, self.n0)

    @classmethod
    def from_probability_table(
        cls, mode: Mode, table: SubsetTable, x: BitString, n0: int | None = None
    ) -> TransformQuery:
        """Encode a probability table as real nonnegative amplitudes."""
        table.require_probability()
        return cls(mode, table.n, np.sqrt(table.values), x, n0)

    def to_json_obj(self) -> dict:
        return {
            "mode": self.mode.value,
            "n": self.n,
            "n0": self.n0,
            "psi_minus": [[float(a.real), float(a.imag)] for a in self.psi_minus],
            "x": str(self.x),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> TransformQuery:
        needed = {"mode", "n", "n0", "psi_minus", "x"}
        missing = needed - set(obj)
        if missing:
            raise ValueError(f"query JSON missing keys: {sorted(missing)}")
        amps = np.array([complex(re, im) for re, im in obj["psi_minus"]], dtype=np.complex128)
        return cls(Mode(obj["mode"]), int(obj["n"]), amps, BitString.from_str(obj["x"]), int(obj["n0"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_obj()))

    @classmethod
    def load(cls, path: str | Path) -> TransformQuery:
        return cls.from_json_obj(json.loads(Path(path).read_text()))


def classical_value(query: TransformQuery) -> float:
    """Ground-truth transform value by direct summation over psi_minus."""
    probs = np.abs(query.psi_minus) ** 2
    idx = np.arange(1 << query.n)
    xv = query.x.to_int()
    if query.mode is Mode.MOBIUS:
        mask = (idx & xv) == idx  # all y <= x
    else:
        mask = (idx & ((1 << query.n0) - 1)) == xv  # low n0 bits equal x
    return float(probs[mask].sum())


def build_comparator(query: TransformQuery) -> Circuit:
    """Comparator core: Hadamard-sample alpha, mark mismatches on beta.

    For each j ascending, emits H(alpha_j) and then an X on beta_j
    controlled on (alpha_minus_j = 1 and alpha_j = 0) in mobius mode, or on
    (alpha_minus_j != alpha_j) in marginal mode.  In marginal mode only the
    n0 low qubits of alpha_minus are compared.
    """
    layout = query.layout
    am = layout.register("alpha_minus")
    al = layout.register("alpha")
    be = layout.register("beta")
    ops: list[GateOp] = []
    for j in range(layout.n0):
        ops.append(Hadamard(al[j]))
        if query.mode is Mode.MOBIUS:
            pred: Predicate = AllOf((QubitIs(am[j], 1), QubitIs(al[j], 0)))
        else:
            pred = QubitsDiffer(am[j], al[j])
        ops.append(Controlled(pred, (PauliX(be[j]),)))
    return Circuit(layout, tuple(ops))


def comparator_coefficient(source_bit: int, sample_bit: int, mode: Mode) -> float:
    """Per-bit amplitude for surviving the comparator with beta clear.

    Computed from first principles on the two-qubit (source, sample) space:
    apply H to the sample qubit of |source_bit, 0>, then the beta=0 survivor
    bracket (1 - P1 P0 for mobius, P1 P1 + P0 P0 for marginal), and read the
    (source_bit, sample_bit) matrix element.  The result is asserted against
    the closed forms theta(sample >= source) / sqrt(2) (mobius) and
    theta(sample == source) / sqrt(2) (marginal).
    """
    mode = Mode(mode)
    if source_bit not in (0, 1) or sample_bit not in (0, 1):
        raise ValueError("bits must be 0 or 1")
    e = np.eye(2)
    h_col = np.array([1.0, 1.0]) / np.sqrt(2.0)  # H |0>
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    vec = np.kron(e[source_bit], h_col)
    if mode is Mode.MOBIUS:
        bracket = np.eye(4) - np.kron(p1, p0)
    else:
        bracket = np.kron(p1, p1) + np.kron(p0, p0)
    computed = float((bracket @ vec)[2 * source_bit + sample_bit])
    if mode is Mode.MOBIUS:
        closed = (1.0 if sample_bit >= source_bit else 0.0) / np.sqrt(2.0)
    else:
        closed = (1.0 if sample_bit == source_bit else 0.0) / np.sqrt(2.0)
    assert computed == closed, f"coefficient mismatch: {computed} vs {closed}"
    return computed


def target_predicate(query: TransformQuery) -> Predicate:
    """Holds where alpha equals x and beta is all zero."""
    layout = query.layout
    al = layout.register("alpha")
    be = layout.register("beta")
    terms = tuple(QubitIs(al[j], query.x[j]) for j in range(layout.n0)) + tuple(
        QubitIs(be[j], 0) for j in range(layout.n0)
    )
    return AllOf(terms)


def _controlled_on(pred: Predicate, op: GateOp) -> GateOp:
    if isinstance(op, Controlled):
        return Controlled(AllOf((pred, op.predicate)), op.ops)
    return Controlled(pred, (op,))


def build_start_circuit(query: TransformQuery) -> Circuit:
    """Full start-state circuit; see the module docstring for the shape."""
    layout = query.layout
    al = layout.register("alpha")
    mu0 = layout.mu0_qubit
    ops: list[GateOp] = list(compile_state_prep(layout, query.psi_minus, "alpha_minus").ops)
    ops.append(PauliX(layout.omega_qubit))
    ops.append(Hadamard(mu0))
    ops.append(Controlled(QubitIs(mu0, 1), (PauliX(layout.gamma_qubit),)))
    for op in build_comparator(query).ops:
        ops.append(_controlled_on(QubitIs(mu0, 1), op))
    ops.append(Controlled(QubitIs(mu0, 0), tuple(Hadamard(q) for q in al)))
    ops.append(Controlled(target_predicate(query), (PauliX(layout.omega_qubit),)))
    return Circuit(layout, tuple(ops))


def build_start_state(query: TransformQuery) -> StateVector:
    state = apply_circuit(new_state(query.layout), build_start_circuit(query))
    if abs(state.norm - 1.0) > 1e-12:
        raise DecompositionError(f"start state norm is {state.norm}")
    return state


@dataclass(eq=False)
class SignalDecomposition:
    """Split of the start state by its (beta, gamma, omega) sectors.

    psi1 and psi0 are amplitude vectors over the (alpha_minus, alpha, mu0)
    grouping, indexed alpha_minus lowest and mu0 highest; psi1 is None when
    the transform value is zero.  chi_norm is the norm of the omega=1 rest.
    """

    z1: complex
    z0: complex
    chi_norm: float
    psi1: np.ndarray | None
    psi0: np.ndarray

    @property
    def ratio(self) -> float:
        """Transform value |z1 / z0| ** 2."""
        return float(abs(self.z1) ** 2 / abs(self.z0) ** 2)


def decompose_signal(query: TransformQuery, state: StateVector) -> SignalDecomposition:
    """Read z1, z0 and chi off the start state and verify their predicted shape.

    Raises DecompositionError when any component strays from the predicted
    structure by more than 1e-9: z0 must equal base = 2**-((n0+1)/2), z1
    must equal base * sqrt(value), the two omega=0 sectors must match their
    predicted register contents, and the sector masses must be complete.
    """
    layout = state.layout
    if (layout.mode, layout.n, layout.n0) != (query.mode, query.n, query.n0):
        raise ValueError("state layout does not match the query")
    n, n0 = layout.n, layout.n0
    amps = state.amplitudes
    idx = np.arange(amps.shape[0], dtype=np.int64)
    am = idx & ((1 << n) - 1)
    al = (idx >> n) & ((1 << n0) - 1)
    be = (idx >> (n + n0)) & ((1 << n0) - 1)
    ga = (idx >> (n + 2 * n0)) & 1
    m0 = (idx >> (n + 2 * n0 + 1)) & 1
    om = (idx >> (n + 2 * n0 + 2)) & 1

    mu_size = 1 << (n + n0 + 1)
    mu_index = am | (al << n) | (m0 << (n + n0))

    sel1 = (be == 0) & (ga == 1) & (om == 0)
    v1 = np.zeros(mu_size, dtype=np.complex128)
    v1[mu_index[sel1]] = amps[sel1]
    sel0 = (be == 0) & (ga == 0) & (om == 0)
    v0 = np.zeros(mu_size, dtype=np.complex128)
    v0[mu_index[sel0]] = amps[sel0]
    chi_norm = float(np.linalg.norm(amps[om == 1]))
    stray = float(np.linalg.norm(amps[(om == 0) & ~sel0 & ~sel1]))

    # predicted sector contents
    xv = query.x.to_int()
    am_all = np.arange(1 << n)
    if query.mode is Mode.MOBIUS:
        keep = (am_all & xv) == am_all
    else:
        keep = (am_all & ((1 << n0) - 1)) == xv
    value = float((np.abs(query.psi_minus) ** 2 * keep).sum())
    base = 2.0 ** (-(n0 + 1) / 2.0)

    claim0 = np.zeros(mu_size, dtype=np.complex128)
    claim0[am_all | (xv << n)] = query.psi_minus
    z0 = complex(np.vdot(claim0, v0))
    resid0 = float(np.linalg.norm(v0 - z0 * claim0))

    if value > 0.0:
        claim1 = np.zeros(mu_size, dtype=np.complex128)
        claim1[am_all | (xv << n) | (1 << (n + n0))] = query.psi_minus * keep
        claim1 /= np.sqrt(value)
        z1 = complex(np.vdot(claim1, v1))
        resid1 = float(np.linalg.norm(v1 - z1 * claim1))
    else:
        z1 = 0.0 + 0.0j
        resid1 = float(np.linalg.norm(v1))

    problems = []
    if abs(z0 - base) > _CHECK_TOL:
        problems.append(f"z0 = {z0}, expected {base}")
    if abs(z1 - base * np.sqrt(value)) > _CHECK_TOL:
        problems.append(f"z1 = {z1}, expected {base * np.sqrt(value)}")
    if resid0 > _CHECK_TOL:
        problems.append(f"gamma=0 sector residual {resid0}")
    if resid1 > _CHECK_TOL:
        problems.append(f"gamma=1 sector residual {resid1}")
    if stray > _CHECK_TOL:
        problems.append(f"stray omega=0 weight {stray} outside the beta=0 sectors")
    completeness = abs(z1) ** 2 + abs(z0) ** 2 + chi_norm**2
    if abs(completeness - 1.0) > _CHECK_TOL:
        problems.append(f"sector masses sum to {completeness}")
    if problems:
        raise DecompositionError("; ".join(problems))

    psi1 = v1 / z1 if abs(z1) > 0 else None
    psi0 = v0 / z0
    return SignalDecomposition(z1=z1, z0=z0, chi_norm=chi_norm, psi1=psi1, psi0=psi0)


def mobius_value_exact(query: TransformQuery) -> float:
    """Subset sum f(x) read off the start state's sector amplitudes."""
    if query.mode is not Mode.MOBIUS:
        raise ValueError("query mode must be mobius")
    return decompose_signal(query, build_start_state(query)).ratio


def marginal_value_exact(query: TransformQuery) -> float:
    """Marginal probability P(x) read off the start state's sector amplitudes."""
    if query.mode is not Mode.MARGINAL:
        raise ValueError("query mode must be marginal")
    return decompose_signal(query, build_start_state(query)).ratio
