"""Set functions on the subset lattice and their zeta / Mobius transforms.

Bit convention used by every module in this package: a length-n bit string
stands for a point of the boolean lattice, bit j occupies the 2**j place of
the table index, so dec(x) = sum_j x_j * 2**j.  Display strings are written
most-significant bit first, e.g. "01111" == 15.

The zeta transform of a table fm is f(x) = sum of fm(y) over all y <= x in
the bitwise partial order; mobius_inverse undoes it.  Real and complex
tables are both supported.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "BitString",
    "SubsetTable",
    "bitwise_geq",
    "zeta_matrix_entry",
    "zeta_matrix",
    "zeta_naive",
    "zeta_fast",
    "zeta_fast_inplace",
    "mobius_inverse",
    "mobius_inverse_inplace",
]


@dataclass(frozen=True)
class BitString:
    """Ordered bit assignment; ``bits[j]`` is bit j (the 2**j place)."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) < 1:
            raise ValueError("BitString needs at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bits must be 0 or 1, got {self.bits!r}")

    @classmethod
    def from_int(cls, value: int, n: int) -> BitString:
        if n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= value < (1 << n):
            raise ValueError(f"value {value} out of range for {n} bits")
        return cls(tuple((value >> j) & 1 for j in range(n)))

    @classmethod
    def from_str(cls, text: str) -> BitString:
        """Parse a display string, most-significant bit first ("101" == 5)."""
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(tuple(int(c) for c in reversed(text)))

    def to_int(self) -> int:
        return sum(b << j for j, b in enumerate(self.bits))

    @property
    def n(self) -> int:
        return len(self.bits)

    def popcount(self) -> int:
        return sum(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, j: int) -> int:
        return self.bits[j]

    def __str__(self) -> str:
        return "".join(str(b) for b in reversed(self.bits))


def bitwise_geq(x: BitString, y: BitString) -> bool:
    """True iff x dominates y bitwise, i.e. x_j >= y_j for every j."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    yv = y.to_int()
    return (x.to_int() & yv) == yv


@dataclass(eq=False)
class SubsetTable:
    """Dense table over all 2**n bit strings, indexed by dec(x).

    Values are float64, or complex128 when any input entry is complex.
    """

    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        arr = np.asarray(self.values)
        dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
        arr = np.array(arr, dtype=dtype)
        if arr.shape != (1 << self.n,):
            raise ValueError(
                f"expected {1 << self.n} values for n={self.n}, got shape {arr.shape}"
            )
        self.values = arr

    def copy(self) -> SubsetTable:
        return SubsetTable(self.n, self.values.copy())

    def require_probability(self, tol: float = 1e-9) -> None:
        """Raise unless the table is a probability distribution."""
        if np.iscomplexobj(self.values):
            raise ValueError("probability table must be real")
        if self.values.min() < -tol:
            raise ValueError(f"negative entry {self.values.min()} in probability table")
        total = float(self.values.sum())
        if abs(total - 1.0) > tol:
            raise ValueError(f"probability table sums to {total}, expected 1")

    def to_json_obj(self) -> dict:
        if np.iscomplexobj(self.values):
            vals = [[float(v.real), float(v.imag)] for v in self.values]
        else:
            vals = [float(v) for v in self.values]
        return {"n": self.n, "values": vals}

    @classmethod
    def from_json_obj(cls, obj: dict) -> SubsetTable:
        if not isinstance(obj, dict) or "n" not in obj or "values" not in obj:
            raise ValueError("subset table JSON needs 'n' and 'values' keys")
        raw = obj["values"]
        if not isinstance(raw, list):
            raise ValueError("'values' must be a list")
        vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v) for v in raw]
        arr = np.array(vals, dtype=complex)
        if np.allclose(arr.imag, 0.0):
            arr = arr.real
        return cls(int(obj["n"]), arr)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_obj()))

    @classmethod
    def load(cls, path: str | Path) -> SubsetTable:
        return cls.from_json_obj(json.loads(Path(path).read_text()))


def zeta_matrix_entry(n: int, x: BitString, xm: BitString) -> int:
    """Entry (x, xm) of the 2**n by 2**n zeta transform matrix: theta(x >= xm)."""
    if len(x) != n or len(xm) != n:
        raise ValueError(f"both strings must have length {n}")
    return 1 if bitwise_geq(x, xm) else 0


def zeta_matrix(n: int) -> np.ndarray:
    """Full zeta transform matrix; rows indexed by x, columns by xm."""
    idx = np.arange(1 << n)
    return ((idx[:, None] & idx[None, :]) == idx[None, :]).astype(np.float64)


def zeta_naive(table: SubsetTable) -> SubsetTable:
    """Reference subset sums by explicit enumeration, O(2**n) per output value."""
    size = 1 << table.n
    idx = np.arange(size)
    out = np.empty_like(table.values)
    for x in range(size):
        out[x] = table.values[(idx & x) == idx].sum()
    return SubsetTable(table.n, out)


def zeta_fast_inplace(values) -> None:
    """Subset-sum butterfly over a caller-provided buffer.

    Runs n * 2**n / 2 scalar additions in place; the buffer length must be a
    power of two.  Works for any mutable sequence of numbers.
    """
    size = len(values)
    if size & (size - 1):
        raise ValueError(f"buffer length {size} is not a power of two")
    bit = 1
    while bit < size:
        step = bit << 1
        for base in range(bit, size, step):
            for x in range(base, base + bit):
                values[x] += values[x - bit]
        bit = step


def zeta_fast(table: SubsetTable) -> SubsetTable:
    """Butterfly subset sums; same result as zeta_naive in Theta(n * 2**n)."""
    out = table.values.copy()
    zeta_fast_inplace(out)
    return SubsetTable(table.n, out)


def mobius_inverse_inplace(values) -> None:
    """Signed butterfly undoing zeta_fast_inplace on the same buffer."""
    size = len(values)
    if size & (size - 1):
        raise ValueError(f"buffer length {size} is not a power of two")
    bit = 1
    while bit < size:
        step = bit << 1
        for base in range(bit, size, step):
            for x in range(base, base + bit):
                values[x] -= values[x - bit]
        bit = step


def mobius_inverse(table: SubsetTable) -> SubsetTable:
    """Inverse of the zeta transform (classical Mobius inversion)."""
    out = table.values.copy()
    mobius_inverse_inplace(out)
    return SubsetTable(table.n, out)
