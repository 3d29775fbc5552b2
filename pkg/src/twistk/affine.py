"""Truncated integrable level-k highest-weight module of affine su(2).

The module is realized as a Gram-matrix quotient: free words of raising
generators T^a_n (n >= 1) act on a spin-j0 vacuum multiplet, inner products
are evaluated by recursive normal ordering with the commutation relations

    [T^a_n, T^b_m] = lambda_abc T^c_{n+m} + (k/4) n delta_ab delta_{n,-m},

and per-grade orthonormal bases are obtained by discarding the null
directions of the Gram form.  The mode factor n in the central term is not
printed in the source relations but is forced by consistency of the level
bookkeeping with the fermionic current algebra; see the repository notes.

Words are stored in a single canonical order (sorted by (mode, color));
states are dictionaries word -> coefficient vector over the vacuum
multiplet.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .fock import LAMBDA
from .linalg import OperatorMatrix, eigh

Word = tuple[tuple[int, int], ...]  # ((mode, color), ...) sorted ascending


@dataclass(frozen=True)
class LevelWeight:
    """Level k and vacuum weight 2*j0 of the highest-weight module."""

    k: int
    two_j0: int
    central_scale: float = 1.0  # debug knob; 2.0 corrupts k/4 -> k/2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("level k must be a positive integer")
        if not 0 <= self.two_j0 <= self.k:
            raise ValueError(f"two_j0 must lie in 0..k, got {self.two_j0}")

    @property
    def vacuum_dim(self) -> int:
        return self.two_j0 + 1

    @property
    def central(self) -> float:
        return self.central_scale * self.k / 4.0

    @property
    def casimir(self) -> float:
        j0 = self.two_j0 / 2.0
        return 0.5 * j0 * (j0 + 1.0)


def spin_matrices(two_j: int):
    """Standard hermitian angular momentum matrices (J1, J2, J3)."""
    d = two_j + 1
    j = two_j / 2.0
    m = j - np.arange(d)
    jp = np.zeros((d, d))
    for i in range(1, d):
        jp[i - 1, i] = np.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
    jm = jp.T
    j1 = (jp + jm) / 2.0
    j2 = (jp - jm) / 2.0j
    j3 = np.diag(m)
    return j1.astype(complex), j2.astype(complex), j3.astype(complex)


def vacuum_rep(two_j0: int):
    """Zero modes T^a_0 = (-i/sqrt(2)) J_a on the vacuum multiplet."""
    if two_j0 < 0:
        raise ValueError("two_j0 must be >= 0")
    return tuple((-1j / np.sqrt(2)) * j for j in spin_matrices(two_j0))


def enumerate_words(grade: int) -> list[Word]:
    """Canonically ordered raising words of total mode sum equal to grade."""
    out = []

    def rec(remaining, start, chosen):
        if remaining == 0:
            out.append(tuple(chosen))
            return
        for n in range(1, remaining + 1):
            for a in (1, 2, 3):
                key = (n, a)
                if chosen and key < chosen[-1]:
                    continue
                chosen.append(key)
                rec(remaining - n, len(chosen), chosen)
                chosen.pop()

    rec(grade, 0, [])
    out.sort()
    return out


class WordAlgebra:
    """Action of the currents T^a_n on canonically ordered word states."""

    def __init__(self, lw: LevelWeight):
        self.lw = lw
        self.t0 = vacuum_rep(lw.two_j0)
        self._raise_memo: dict = {}

    # -- pure word combinatorics for raising generators ------------------
    def _raise(self, a: int, n: int, word: Word) -> dict[Word, float]:
        """T^a_n applied on the left of a canonical raising word (n >= 1)."""
        key = (a, n, word)
        hit = self._raise_memo.get(key)
        if hit is not None:
            return hit
        if not word or (n, a) <= word[0]:
            out = {((n, a),) + word: 1.0}
        else:
            (m, b), rest = word[0], word[1:]
            out: dict[Word, float] = {}
            # T^a_n T^b_m = T^b_m T^a_n + lambda_abc T^c_{n+m}
            for w2, c2 in self._raise(a, n, rest).items():
                for w3, c3 in self._raise(b, m, w2).items():
                    out[w3] = out.get(w3, 0.0) + c2 * c3
            for c in (1, 2, 3):
                lam = LAMBDA[a][b][c]
                if lam:
                    for w3, c3 in self._raise(c, n + m, rest).items():
                        out[w3] = out.get(w3, 0.0) + lam * c3
        self._raise_memo[key] = out
        return out

    # -- full action on states ------------------------------------------
    def act(self, a: int, n: int, state: dict[Word, np.ndarray]):
        """Apply T^a_n to a state {word: vacuum-multiplet vector}."""
        out: dict[Word, np.ndarray] = {}

        def add(word, vec):
            if word in out:
                out[word] = out[word] + vec
            else:
                out[word] = np.array(vec, dtype=complex)

        for word, vec in state.items():
            if n >= 1:
                for w2, c2 in self._raise(a, n, word).items():
                    add(w2, c2 * vec)
            else:
                self._lower(a, n, word, vec, add)
        return out

    def _lower(self, a, n, word, vec, add):
        """T^a_n with n <= 0 pushed right through a canonical word."""
        if not word:
            if n == 0:
                add((), self.t0[a - 1] @ vec)
            return  # annihilated for n < 0
        (m, b), rest = word[0], word[1:]
        # commutator term
        for c in (1, 2, 3):
            lam = LAMBDA[a][b][c]
            if lam:
                for w2, v2 in self.act(c, n + m, {rest: vec}).items():
                    add(w2, lam * v2)
        if n == -m and a == b:
            add(rest, self.lw.central * n * vec)
        # pass-through term T^b_m (T^a_n rest)
        inner: dict[Word, np.ndarray] = {}

        def addi(w, v):
            if w in inner:
                inner[w] = inner[w] + v
            else:
                inner[w] = np.array(v, dtype=complex)

        self._lower(a, n, rest, vec, addi)
        for w2, v2 in inner.items():
            for w3, c3 in self._raise(b, m, w2).items():
                add(w3, c3 * v2)

    def inner(self, u: Word, w_state: dict[Word, np.ndarray]) -> np.ndarray:
        """<u x vacuum-multiplet | w_state> as a matrix over vacuum indices.

        Returns the (d,) vector of vacuum components of (u)^dagger w_state,
        using (T^a_n)^dagger = -T^a_{-n}.
        """
        state = w_state
        for (n, a) in u:
            state = self.act(a, -n, state)
            state = {k: -v for k, v in state.items()}
        vac = state.get(())
        if vac is None:
            return np.zeros(self.lw.vacuum_dim, dtype=complex)
        return vac


def gram_matrix(lw: LevelWeight, grade: int,
                algebra: WordAlgebra | None = None) -> np.ndarray:
    """Hermitian Gram matrix over (word, magnetic index) pairs at a grade."""
    if grade < 0:
        raise ValueError("grade must be >= 0")
    alg = algebra or WordAlgebra(lw)
    words = enumerate_words(grade)
    d = lw.vacuum_dim
    nw = len(words)
    g = np.zeros((nw * d, nw * d), dtype=complex)
    eye = np.eye(d, dtype=complex)
    for jw, w in enumerate(words):
        for mp in range(d):
            col_state = {w: eye[:, mp]}
            for iw, u in enumerate(words):
                vac = alg.inner(u, col_state)
                g[iw * d:(iw + 1) * d, jw * d + mp] = vac
    return (g + g.conj().T) / 2.0


@dataclass
class BosonBasis:
    """Per-grade orthonormal bases of the irreducible quotient module."""

    lw: LevelWeight
    grade_cut: int
    null_tol: float
    words: dict[int, list[Word]]
    gram: dict[int, np.ndarray]
    coeff: dict[int, np.ndarray]     # columns: orthonormal vectors over words
    dims: dict[int, int]
    warnings: list[str] = field(default_factory=list)
    algebra: WordAlgebra | None = None

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    def grades_vector(self) -> np.ndarray:
        return np.concatenate([
            np.full(self.dims[g], g, dtype=int)
            for g in range(self.grade_cut + 1)])

    def offsets(self) -> dict[int, int]:
        off, acc = {}, 0
        for g in range(self.grade_cut + 1):
            off[g] = acc
            acc += self.dims[g]
        return off

    def dump_json(self) -> str:
        return json.dumps({
            "k": self.lw.k, "two_j0": self.lw.two_j0,
            "null_tol": self.null_tol,
            "graded_dims": {str(g): self.dims[g] for g in sorted(self.dims)},
            "gram_spectra": {
                str(g): sorted(np.linalg.eigvalsh(self.gram[g]).tolist())
                for g in sorted(self.gram)},
        }, indent=2)


def orthonormal_basis(lw: LevelWeight, grade_cut: int,
                      null_tol: float = 1e-8) -> BosonBasis:
    """Quotient the free raising-word span by the Gram null space, per grade."""
    if not 1e-12 <= null_tol <= 1e-4:
        raise ValueError("null_tol must lie in [1e-12, 1e-4]")
    alg = WordAlgebra(lw)
    words, gram, coeff, dims = {}, {}, {}, {}
    warnings: list[str] = []
    d = lw.vacuum_dim
    for g in range(grade_cut + 1):
        words[g] = enumerate_words(g)
        gm = gram_matrix(lw, g, alg)
        gram[g] = gm
        lam, vec = eigh(gm)
        lmax = float(lam.max()) if lam.size else 0.0
        if lmax <= 0:
            raise ValueError(f"Gram matrix at grade {g} has no positive part")
        thr = null_tol * lmax
        keep = lam > thr
        near = (lam > thr / 10.0) & (lam < thr * 10.0)
        if near.any():
            warnings.append(
                f"grade {g}: eigenvalue within a decade of the null threshold")
        b = vec[:, keep] / np.sqrt(lam[keep])
        # fix phases: leading word coefficient real positive
        for col in range(b.shape[1]):
            v = b[:, col]
            idx = int(np.argmax(np.abs(v) > 1e-10 * np.abs(v).max()))
            ph = v[idx] / abs(v[idx])
            b[:, col] = v / ph
        coeff[g] = b
        dims[g] = b.shape[1]
    return BosonBasis(lw, grade_cut, null_tol, words, gram, coeff, dims,
                      warnings, alg)


def current_matrix(a: int, n: int, basis: BosonBasis) -> OperatorMatrix:
    """Matrix of T^a_n between the orthonormal graded bases."""
    lw, alg = basis.lw, basis.algebra
    d = lw.vacuum_dim
    dim = basis.total_dim
    off = basis.offsets()
    m = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(d, dtype=complex)
    for g in range(basis.grade_cut + 1):
        g2 = g + n
        if not 0 <= g2 <= basis.grade_cut:
            continue
        words_g = basis.words[g]
        words_g2 = basis.words[g2]
        idx2 = {w: i for i, w in enumerate(words_g2)}
        nw2 = len(words_g2)
        # action of T^a_n on each free word basis vector at grade g
        x = np.zeros((nw2 * d, len(words_g) * d), dtype=complex)
        for jw, w in enumerate(words_g):
            for mp in range(d):
                res = alg.act(a, n, {w: eye[:, mp]})
                for w2, vec in res.items():
                    iw = idx2.get(w2)
                    if iw is None:
                        raise RuntimeError("grade bookkeeping error")
                    x[iw * d:(iw + 1) * d, jw * d + mp] += vec
        blk = basis.coeff[g2].conj().T @ basis.gram[g2] @ x @ basis.coeff[g]
        m[off[g2]:off[g2] + basis.dims[g2], off[g]:off[g] + basis.dims[g]] = blk
    grades = basis.grades_vector()
    return OperatorMatrix(m, grade_shift=n, row_grades=grades,
                          col_grades=grades)


def h_boson(basis: BosonBasis) -> OperatorMatrix:
    """Diagonal boson energy (k+2)/2 * grade + j0(j0+1)/2."""
    lw = basis.lw
    grades = basis.grades_vector()
    diag = (lw.k + 2) / 2.0 * grades + lw.casimir
    return OperatorMatrix(np.diag(diag.astype(complex)), 0,
                          row_grades=grades, col_grades=grades)


def h_boson_sum(basis: BosonBasis) -> OperatorMatrix:
    """Oracle for h_boson: truncated normal-ordered sum -sum :T^a_n T^a_-n:.

    Exact on every grade of the truncation because the lowering factor acts
    first, so no intermediate state leaves the grade cut.
    """
    dim = basis.total_dim
    m = np.zeros((dim, dim), dtype=complex)
    for a in (1, 2, 3):
        t0 = current_matrix(a, 0, basis).matrix
        m -= t0 @ t0
        for n in range(1, basis.grade_cut + 1):
            tp = current_matrix(a, n, basis).matrix
            tm = current_matrix(a, -n, basis).matrix
            m -= 2.0 * (tp @ tm)
    grades = basis.grades_vector()
    return OperatorMatrix(m, 0, row_grades=grades, col_grades=grades)
