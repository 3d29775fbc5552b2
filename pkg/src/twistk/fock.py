"""Truncated fermionic Fock space for three Majorana fields with zero modes.

Basis states are unit-normalized occupation states: a spinor index in {0,1}
(the two-dimensional Clifford vacuum) together with a strictly ordered set
of excitations (color a in {1,2,3}, mode n >= 1).  The Majorana components
psi^a_n act with amplitude sqrt(2) relative to unit-normalized fermion
creators/annihilators, so that the anticommutator constant is 2; the zero
modes act as Pauli matrices on the spinor index, with a fermion-parity sign
making them anticommute with every nonzero mode.

Operators are assembled exactly: composite expressions (currents, cubic
terms) are applied to basis states with no intermediate truncation, and
only the final image is projected back onto the grade-cut basis.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import OperatorMatrix

SQRT2 = math.sqrt(2.0)

# lam[a][b][c] for 1-based colors; completely antisymmetric, lam_123 = 1/sqrt(2)
_EPS = np.zeros((4, 4, 4))
for _p, _s in (((1, 2, 3), 1), ((2, 3, 1), 1), ((3, 1, 2), 1),
               ((3, 2, 1), -1), ((2, 1, 3), -1), ((1, 3, 2), -1)):
    _EPS[_p] = _s
LAMBDA = _EPS / SQRT2

# Pauli matrices sigma_1, sigma_2, sigma_3 (1-based lookup).
SIGMA = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}

State = tuple[int, tuple[tuple[int, int], ...]]  # (spinor, ((mode, color), ...))


def apply_psi(a: int, n: int, state: State):
    """Apply psi^a_n to a basis state, exactly (no truncation).

    Returns a list of (coefficient, state) pairs; at most two entries (the
    zero mode mixes the two spinor components through a Pauli matrix, the
    nonzero modes give at most one target state).
    """
    spinor, exc = state
    if n > 0:
        key = (n, a)
        if key in exc:
            return []
        pos = sum(1 for e in exc if e < key)
        new = tuple(sorted(exc + (key,)))
        return [(SQRT2 * (-1) ** pos, (spinor, new))]
    if n < 0:
        key = (-n, a)
        if key not in exc:
            return []
        pos = exc.index(key)
        new = exc[:pos] + exc[pos + 1:]
        return [(SQRT2 * (-1) ** pos, (spinor, new))]
    # zero mode: Pauli matrix on the spinor index, times fermion parity
    # (psi^a_0 anticommutes with every psi^b_m, m != 0)
    par = (-1) ** len(exc)
    out = []
    col = SIGMA[a][:, spinor]
    for sp in (0, 1):
        c = col[sp]
        if c != 0:
            out.append((par * c, (sp, exc)))
    return out


def apply_word(ops: list[tuple[int, int]], state: State):
    """Apply a product of psi factors, rightmost factor first.

    ops is a list of (color, mode) pairs in operator order (leftmost first).
    """
    current = [(1.0 + 0j, state)]
    for a, n in reversed(ops):
        nxt = []
        for c, s in current:
            for c2, s2 in apply_psi(a, n, s):
                nxt.append((c * c2, s2))
        if not nxt:
            return []
        current = nxt
    return current


def _enumerate_excitations(grade_cut: int):
    """All strictly ordered excitation sets with total mode sum <= grade_cut."""
    sets_by_grade = {g: [] for g in range(grade_cut + 1)}
    pool = [(n, a) for n in range(1, grade_cut + 1) for a in (1, 2, 3)]

    def rec(start, grade, chosen):
        sets_by_grade[grade].append(tuple(chosen))
        for i in range(start, len(pool)):
            n, a = pool[i]
            if grade + n > grade_cut:
                continue
            chosen.append((n, a))
            rec(i + 1, grade + n, chosen)
            chosen.pop()

    rec(0, 0, [])
    for g in sets_by_grade:
        sets_by_grade[g].sort()
    return sets_by_grade


@dataclass
class FockTruncation:
    """Enumerated fermionic basis with grade <= grade_cut."""

    grade_cut: int
    states: list[State] = field(default_factory=list)
    index: dict = field(default_factory=dict)
    grades: np.ndarray | None = None

    def __post_init__(self):
        if not self.states:
            by_grade = _enumerate_excitations(self.grade_cut)
            for g in range(self.grade_cut + 1):
                for exc in by_grade[g]:
                    for spinor in (0, 1):
                        self.states.append((spinor, exc))
            self.index = {s: i for i, s in enumerate(self.states)}
            self.grades = np.array(
                [sum(n for n, _ in exc) for _, exc in self.states], dtype=int)

    @property
    def dim(self) -> int:
        return len(self.states)

    def dims_by_grade(self) -> dict[int, int]:
        out = {}
        for g in self.grades:
            out[int(g)] = out.get(int(g), 0) + 1
        return out

    def operator_from_terms(self, terms, grade_shift: int) -> OperatorMatrix:
        """Assemble sum_k coeff_k * (psi word_k) as a matrix on this basis.

        Each term is (coeff, ops) with ops a list of (color, mode) pairs in
        operator order.  Words are applied exactly; the final state is
        dropped when it falls outside the truncation.
        """
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for j, s in enumerate(self.states):
            for coeff, ops in terms:
                for c, s2 in apply_word(ops, s):
                    i = self.index.get(s2)
                    if i is not None:
                        m[i, j] += coeff * c
        return OperatorMatrix(m, grade_shift=grade_shift,
                              row_grades=self.grades, col_grades=self.grades)

    def dump_jsonl(self) -> str:
        lines = []
        for i, (sp, exc) in enumerate(self.states):
            lines.append(json.dumps({
                "index": i, "spinor": sp,
                "excitations": [[n, a] for n, a in exc],
                "grade": int(self.grades[i]),
            }))
        return "\n".join(lines)


def build_fock_basis(grade_cut: int) -> FockTruncation:
    if grade_cut < 0:
        raise ValueError("grade_cut must be >= 0")
    return FockTruncation(grade_cut)


def psi(a: int, n: int, t: FockTruncation) -> OperatorMatrix:
    """Matrix of psi^a_n on the truncated basis (grade shift n)."""
    return t.operator_from_terms([(1.0, [(a, n)])], grade_shift=n)


def gamma(t: FockTruncation) -> OperatorMatrix:
    """Volume element of the zero modes, psi^1_0 psi^2_0 psi^3_0."""
    return t.operator_from_terms([(1.0, [(1, 0), (2, 0), (3, 0)])], 0)


def current_terms(a: int, n: int, mode_bound: int, *, skip_zero_modes=False):
    """Terms of the fermion current K^a_n (normal-ordered at n = 0).

    With skip_zero_modes the sum excludes every factor with Fourier index
    zero, which yields the zero-mode-free current K'^a_0 when n = 0.
    """
    terms = []
    bc = [(b, c) for b in (1, 2, 3) for c in (1, 2, 3) if LAMBDA[a][b][c] != 0]
    for m in range(-mode_bound, mode_bound + 1):
        m1 = n - m
        if abs(m1) > mode_bound:
            continue
        if skip_zero_modes and (m == 0 or m1 == 0):
            continue
        for b, c in bc:
            lam = LAMBDA[a][b][c]
            if n == 0 and m1 < 0 and m > 0:
                # :psi^b_{-m} psi^c_m: = -psi^c_m psi^b_{-m}
                terms.append((0.25 * lam, [(c, m), (b, m1)]))
            else:
                terms.append((-0.25 * lam, [(b, m1), (c, m)]))
    return terms


def fermion_current(a: int, n: int, t: FockTruncation) -> OperatorMatrix:
    """Level-2 current K^a_n represented on the fermionic Fock space."""
    return t.operator_from_terms(current_terms(a, n, t.grade_cut), n)


def fermion_current_prime(a: int, t: FockTruncation) -> OperatorMatrix:
    """Zero-mode-free part K'^a_0 of the fermion current."""
    return t.operator_from_terms(
        current_terms(a, 0, t.grade_cut, skip_zero_modes=True), 0)


def h_fermion(t: FockTruncation, k: int) -> OperatorMatrix:
    """Fermionic energy, diagonal with eigenvalue (k+2)/2 * grade."""
    if k < 1:
        raise ValueError("level k must be >= 1")
    diag = (k + 2) / 2.0 * t.grades
    return OperatorMatrix(np.diag(diag.astype(complex)), 0,
                          row_grades=t.grades, col_grades=t.grades)


def h_fermion_bilinear(t: FockTruncation, k: int) -> OperatorMatrix:
    """Oracle for h_fermion: the normal-ordered bilinear (k+2)/8 sum."""
    terms = []
    for n in range(1, t.grade_cut + 1):
        for a in (1, 2, 3):
            terms.append((2 * n * (k + 2) / 8.0, [(a, n), (a, -n)]))
    return t.operator_from_terms(terms, 0)


def interior_mask(t: FockTruncation, margin: int) -> np.ndarray:
    """Boolean mask of states whose grade is at least margin below the cut."""
    return t.grades <= t.grade_cut - margin
