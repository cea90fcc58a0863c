"""Bracket data of nilpotent structures: frequencies, growth, classification.

Conventions
-----------
* A 2-step corank-1 structure is described by one skew matrix ``L`` with
  ``[X_i, X_j] = L[i, j] Z``.  Its frequencies are the moduli of the
  eigenvalues ``±i b_j`` of ``L``.
* General nilpotent Lie algebras (used for the dim <= 5 classification)
  are described by :class:`StructureConstants` on a basis ``e_1..e_n``
  whose first ``k`` vectors span the horizontal distribution.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import block_diag

from .exceptions import (
    DegenerateStructure,
    EigenvalueNotSimple,
    Inconsistent,
    IndexOutOfRange,
    NotBracketGenerating,
    ParseError,
    UnsupportedDimension,
    ValidationError,
)
from .expr import Expression, parse_expression

__all__ = [
    "SkewMatrix",
    "FrequencySpectrum",
    "GrowthVector",
    "NormalFormLabel",
    "StructureConstants",
    "StructureField",
    "rotation_block",
    "frequencies_of",
    "growth_vector",
    "hausdorff_dimension",
    "classify_normal_form",
    "normal_form_constants",
    "popp_coefficient_45",
    "eigenvalue_curvature",
    "as_spectrum",
    "NORMAL_FORM_GROWTH",
]

ZERO_TOL = 1e-10
KINDS = ("contact", "quasi-contact")


@dataclass(frozen=True)
class SkewMatrix:
    """Real skew-symmetric matrix.

    Only the strict upper triangle of ``entries`` is read; the lower
    triangle is rebuilt from it, so antisymmetry holds exactly.  Use
    :meth:`from_array` to reject inputs that are not skew.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("skew matrix must be square")
        up = np.triu(a, 1)
        skew = up - up.T
        skew.setflags(write=False)
        object.__setattr__(self, "entries", skew)

    @classmethod
    def from_array(cls, a, tol=1e-12) -> "SkewMatrix":
        a = np.asarray(a, dtype=float)
        scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or np.max(np.abs(a + a.T), initial=0) > tol * scale:
            raise ValidationError("matrix is not skew-symmetric")
        return cls(a)

    @classmethod
    def from_frequencies(cls, freqs: Sequence[float], extra_zero: bool = False) -> "SkewMatrix":
        """Block-diagonal normal form ``diag(B(b_1), ..., B(b_l) [, 0])``."""
        blocks = [rotation_block(b) for b in freqs]
        if extra_zero:
            blocks.append(np.zeros((1, 1)))
        return cls(block_diag(*blocks))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def rotation_block(b: float) -> np.ndarray:
    """2x2 block with ``[X, Y] = -b Z`` (the sign of the reference frame)."""
    return np.array([[0.0, -b], [b, 0.0]])


@dataclass(frozen=True)
class FrequencySpectrum:
    """Sorted frequencies ``b_1 >= ... >= b_l >= 0`` of a corank-1 structure.

    ``k`` is the horizontal dimension (``2l`` contact, ``2l+1``
    quasi-contact).  ``zero_mode`` records a kernel of the bracket matrix.
    """

    freqs: tuple
    zero_mode: bool = False
    k: int | None = None

    def __post_init__(self):
        f = tuple(sorted((float(v) for v in np.atleast_1d(self.freqs)), reverse=True))
        if not f:
            raise ValidationError("at least one frequency is required")
        if any(v < 0 or not np.isfinite(v) for v in f):
            raise ValidationError("frequencies must be finite and nonnegative")
        if f[0] <= 0:
            raise DegenerateStructure("largest frequency must be positive")
        k = 2 * len(f) if self.k is None else int(self.k)
        if k // 2 != len(f):
            raise ValidationError(f"k={k} is incompatible with {len(f)} frequencies")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "zero_mode", bool(self.zero_mode or k % 2 == 1 or f[-1] == 0))

    @classmethod
    def of(cls, freqs, kind: str = "contact") -> "FrequencySpectrum":
        if kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}")
        f = np.atleast_1d(np.asarray(freqs, dtype=float))
        return cls(tuple(f), k=2 * len(f) + (kind == "quasi-contact"))

    @property
    def ell(self) -> int:
        return len(self.freqs)

    @property
    def kind(self) -> str:
        return "quasi-contact" if self.k % 2 else "contact"

    @property
    def array(self) -> np.ndarray:
        return np.array(self.freqs)

    @property
    def b1(self) -> float:
        return self.freqs[0]

    @property
    def resonant(self) -> bool:
        return self.ell > 1 and self.freqs[0] == self.freqs[1]

    def normalized(self) -> "FrequencySpectrum":
        """Copy with ``b_1`` rescaled to 1 (volume is *not* scale invariant)."""
        return FrequencySpectrum(tuple(np.array(self.freqs) / self.b1), self.zero_mode, self.k)

    def scaled(self, c: float) -> "FrequencySpectrum":
        return FrequencySpectrum(tuple(np.array(self.freqs) * c), self.zero_mode, self.k)


def as_spectrum(b, kind: str | None = None) -> FrequencySpectrum:
    """Accept a spectrum, a scalar or a sequence of frequencies."""
    if isinstance(b, FrequencySpectrum):
        if kind is not None and kind != b.kind:
            return FrequencySpectrum.of(b.freqs, kind)
        return b
    return FrequencySpectrum.of(b, kind or "contact")


def frequencies_of(L, tol: float = ZERO_TOL) -> FrequencySpectrum:
    """Frequencies of a skew matrix from the spectrum of ``-L^2``."""
    if not isinstance(L, SkewMatrix):
        L = SkewMatrix.from_array(L)
    A = L.entries
    k = A.shape[0]
    if k < 2:
        raise ValidationError("bracket matrix must have dimension >= 2")
    norm = np.linalg.norm(A, 2)
    if norm == 0:
        raise DegenerateStructure("bracket matrix vanishes identically")
    M = -A @ A
    ev = np.linalg.eigvalsh(0.5 * (M + M.T))[::-1]
    ev = np.clip(ev, 0.0, None)
    ell = k // 2
    sq = 0.5 * (ev[0: 2 * ell: 2] + ev[1: 2 * ell: 2])
    b = np.sqrt(sq)
    small = b < tol * norm
    b[small] = 0.0
    if b[0] == 0:
        raise DegenerateStructure("all frequencies vanish")
    return FrequencySpectrum(tuple(b), zero_mode=bool(np.any(small)) or k % 2 == 1, k=k)


# ---------------------------------------------------------------------------
# structure constants


@dataclass(frozen=True)
class GrowthVector:
    dims: tuple

    def __post_init__(self):
        d = tuple(int(v) for v in self.dims)
        if not d or any(b <= a for a, b in zip(d, d[1:])) or d[0] < 1:
            raise ValidationError("growth vector must be strictly increasing and positive")
        object.__setattr__(self, "dims", d)

    @property
    def n(self) -> int:
        return self.dims[-1]

    @property
    def step(self) -> int:
        return len(self.dims)

    def increments(self) -> tuple:
        return tuple(b - a for a, b in zip((0,) + self.dims[:-1], self.dims))


NORMAL_FORM_GROWTH = {
    "Heisenberg": (2, 3),
    "Engel": (2, 3, 4),
    "QuasiHeisenberg": (3, 4),
    "Cartan": (2, 3, 5),
    "GoursatRank2": (2, 3, 4, 5),
    "Corank2_35": (3, 5),
    "GoursatRank3": (3, 4, 5),
    "BiHeisenberg": (4, 5),
}
_GROWTH_TO_TAG = {v: k for k, v in NORMAL_FORM_GROWTH.items()}


@dataclass(frozen=True)
class NormalFormLabel:
    tag: str
    alpha: float | None = None

    def __post_init__(self):
        if self.tag not in NORMAL_FORM_GROWTH:
            raise ValidationError(f"unknown normal form '{self.tag}'")
        if (self.tag == "BiHeisenberg") != (self.alpha is not None):
            raise ValidationError("alpha is carried by BiHeisenberg only")

    @property
    def growth(self) -> GrowthVector:
        return GrowthVector(NORMAL_FORM_GROWTH[self.tag])


@dataclass(frozen=True)
class StructureConstants:
    """Brackets ``[e_i, e_j] = sum_h c[i, j, h] e_h`` of a nilpotent algebra.

    Indices are 0-based internally; the text format is 1-based.  The first
    ``k`` basis vectors span the horizontal distribution.
    """

    n: int
    k: int
    c: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.shape != (self.n, self.n, self.n):
            raise ValidationError("structure tensor must have shape (n, n, n)")
        if not 1 <= self.k <= self.n:
            raise ValidationError("need 1 <= k <= n")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_brackets(cls, n: int, k: int, brackets: Mapping) -> "StructureConstants":
        """``brackets`` maps 0-based ``(i, j)`` to a length-n vector or ``{h: c}``."""
        c = np.zeros((n, n, n))
        seen = {}
        for (i, j), val in brackets.items():
            if isinstance(val, Mapping):
                vec = np.zeros(n)
                for h, coeff in val.items():
                    vec[h] += coeff
            else:
                vec = np.asarray(val, dtype=float)
            if i == j:
                if np.any(vec != 0):
                    raise Inconsistent(f"[e{i+1}, e{i+1}] must vanish")
                continue
            a, b_, sign = (i, j, 1.0) if i < j else (j, i, -1.0)
            if (a, b_) in seen and not np.allclose(seen[(a, b_)], sign * vec, atol=1e-12):
                raise Inconsistent(f"conflicting entries for [e{a+1}, e{b_+1}]")
            seen[(a, b_)] = sign * vec
        for (a, b_), vec in seen.items():
            c[a, b_] = vec
            c[b_, a] = -vec
        return cls(n, k, c)

    @classmethod
    def from_matrices(cls, mats: Sequence) -> "StructureConstants":
        """2-step algebra with ``[X_i, X_j] = sum_h L^h[i, j] Z_h``."""
        mats = [np.asarray(SkewMatrix.from_array(m).entries) for m in mats]
        k = mats[0].shape[0]
        n = k + len(mats)
        c = np.zeros((n, n, n))
        for h, m in enumerate(mats):
            c[:k, :k, k + h] = m
        return cls(n, k, c)

    @classmethod
    def parse(cls, text: str, source: str | None = None) -> "StructureConstants":
        return parse_structure_constants(text, source)

    def bracket(self, u, v) -> np.ndarray:
        return np.einsum("i,j,ijh->h", np.asarray(u, float), np.asarray(v, float), self.c)

    def vertical_matrices(self) -> list:
        """Skew matrices ``L^h`` of horizontal brackets, one per non-horizontal e_h."""
        return [self.c[: self.k, : self.k, h] for h in range(self.k, self.n)]

    def change_basis(self, P) -> "StructureConstants":
        """Constants in the basis ``e'_i = sum_a P[a, i] e_a``."""
        P = np.asarray(P, dtype=float)
        Pinv = np.linalg.inv(P)
        c = np.einsum("ai,bj,abh,gh->ijg", P, P, self.c, Pinv)
        return StructureConstants(self.n, self.k, c)

    def jacobi_defect(self) -> float:
        """max |[[e_i,e_j],e_l] + cyclic| over all triples."""
        c = self.c
        # [[e_i, e_j], e_l]_g = sum_h c[i,j,h] c[h,l,g]
        t = np.einsum("ijh,hlg->ijlg", c, c)
        cyc = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
        return float(np.max(np.abs(cyc), initial=0.0))

    def to_text(self) -> str:
        lines = [f"n = {self.n}", f"k = {self.k}"]
        for i, j in itertools.combinations(range(self.n), 2):
            vec = self.c[i, j]
            if not np.any(vec):
                continue
            terms = [f"{v:+.17g} X{h + 1}" for h, v in enumerate(vec) if v != 0]
            lines.append(f"[{i + 1},{j + 1}] = " + " ".join(terms))
        return "\n".join(lines) + "\n"


_BRACKET_RE = re.compile(r"^\s*\[\s*(\d+)\s*,\s*(\d+)\s*\]\s*=\s*(.*)$")
_HEADER_RE = re.compile(r"^\s*(n|k|dim|rank)\s*=\s*(\d+)\s*$")
_TERM_RE = re.compile(
    r"\s*([+-])?\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)?\s*\*?\s*([XZe])_?(\d+)\s*"
)


def parse_structure_constants(text: str, source: str | None = None) -> StructureConstants:
    """Parse the bracket text format.

    ::

        n = 5          # total dimension
        k = 4          # horizontal rank
        [1,2] = Z1     # Z_h is the h-th non-horizontal vector, e_(k+h)
        [3,4] = 0.5 Z1
        [1,3] = X4     # X_h / e_h address the global basis directly

    Omitted brackets vanish.  If ``n``/``k`` are missing, ``k`` defaults
    to the largest index appearing on a left-hand side and ``n`` to ``k``
    plus the number of distinct ``Z`` indices (2-step input).
    """
    header = {}
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _HEADER_RE.match(line)
        if m:
            key = {"dim": "n", "rank": "k"}.get(m.group(1), m.group(1))
            header[key] = int(m.group(2))
            continue
        m = _BRACKET_RE.match(line)
        if not m:
            raise ParseError("expected '[i,j] = sum c Z_h'", line=lineno,
                             column=len(line) - len(line.lstrip()) + 1, source=source)
        i, j = int(m.group(1)), int(m.group(2))
        rhs = m.group(3)
        rhs_col = m.start(3) + 1
        terms = []
        pos = 0
        stripped = rhs.rstrip()
        while pos < len(stripped):
            t = _TERM_RE.match(stripped, pos)
            if not t or t.end() == pos or (t.group(1) is None and terms):
                raise ParseError("malformed bracket term", line=lineno,
                                 column=rhs_col + pos, source=source)
            sign = -1.0 if t.group(1) == "-" else 1.0
            coeff = float(t.group(2)) if t.group(2) else 1.0
            terms.append((t.group(3), int(t.group(4)), sign * coeff))
            pos = t.end()
        if i < 1 or j < 1:
            raise ParseError("indices are 1-based", line=lineno, column=2, source=source)
        entries.append((lineno, i, j, terms))
    if not entries and "n" not in header:
        raise ParseError("no brackets found", line=1, column=1, source=source)
    k = header.get("k", max([max(i, j) for _, i, j, _ in entries], default=0))
    zs = {h for _, _, _, terms in entries for s, h, _ in terms if s == "Z"}
    n = header.get("n", k + (max(zs) if zs else 0))
    brackets = {}
    for lineno, i, j, terms in entries:
        vec = np.zeros(n)
        for sym, h, coeff in terms:
            g = k + h - 1 if sym == "Z" else h - 1
            if not 0 <= g < n:
                raise ParseError(f"basis index {sym}{h} out of range for n={n}",
                                 line=lineno, column=1, source=source)
            vec[g] += coeff
        if max(i, j) > n:
            raise ParseError(f"bracket index out of range for n={n}", line=lineno,
                             column=1, source=source)
        key = (i - 1, j - 1)
        if key in brackets:
            raise Inconsistent(f"line {lineno}: duplicate bracket [{i},{j}]")
        brackets[key] = vec
    return StructureConstants.from_brackets(n, k, brackets)


def _span_rank(vectors, tol):
    if not vectors:
        return np.zeros((0, 0)), 0
    M = np.array(vectors)
    u, s, vt = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return vt[:r], r


def growth_vector(constants: StructureConstants, tol: float = 1e-10) -> GrowthVector:
    """Dimensions of the flag Δ ⊂ Δ + [Δ, Δ] ⊂ ... at the identity."""
    n, k = constants.n, constants.k
    horiz = list(np.eye(n)[:k])
    basis, r = _span_rank(horiz, tol)
    dims = [r]
    while r < n:
        new = list(basis)
        for u in basis:
            for e in horiz:
                new.append(constants.bracket(u, e))
        basis, r_new = _span_rank(new, tol)
        if r_new == r:
            raise NotBracketGenerating(f"flag stalls at dimension {r} < n = {n}")
        r = r_new
        dims.append(r)
    return GrowthVector(tuple(dims))


def hausdorff_dimension(gv) -> int:
    if not isinstance(gv, GrowthVector):
        gv = GrowthVector(tuple(gv))
    return int(sum((i + 1) * ki for i, ki in enumerate(gv.increments())))


def normal_form_constants(tag: str, alpha: float = 1.0) -> StructureConstants:
    """Reference structure constants realizing each dim <= 5 normal form."""
    table = {
        "Heisenberg": (3, 2, {(0, 1): {2: 1}}),
        "Engel": (4, 2, {(0, 1): {2: 1}, (0, 2): {3: 1}}),
        "QuasiHeisenberg": (4, 3, {(0, 1): {3: 1}}),
        "Cartan": (5, 2, {(0, 1): {2: 1}, (0, 2): {3: 1}, (1, 2): {4: 1}}),
        "GoursatRank2": (5, 2, {(0, 1): {2: 1}, (0, 2): {3: 1}, (0, 3): {4: 1}}),
        "Corank2_35": (5, 3, {(0, 1): {3: 1}, (0, 2): {4: 1}}),
        "GoursatRank3": (5, 3, {(0, 1): {3: 1}, (0, 3): {4: 1}}),
        "BiHeisenberg": (5, 4, {(0, 1): {4: 1}, (2, 3): {4: alpha}}),
    }
    if tag not in table:
        raise ValidationError(f"unknown normal form '{tag}'")
    n, k, br = table[tag]
    return StructureConstants.from_brackets(n, k, br)


def classify_normal_form(constants: StructureConstants, tol: float = 1e-9) -> NormalFormLabel:
    """Label a regular nilpotent structure of dimension <= 5 by its growth."""
    if constants.n > 5:
        raise UnsupportedDimension(f"classification covers n <= 5 (got {constants.n})")
    scale = max(1.0, float(np.max(np.abs(constants.c), initial=0.0)))
    if np.max(np.abs(constants.c + np.transpose(constants.c, (1, 0, 2))), initial=0) > tol * scale:
        raise Inconsistent("structure constants are not skew-symmetric")
    if constants.jacobi_defect() > tol * scale ** 2:
        raise Inconsistent("structure constants violate the Jacobi identity")
    gv = growth_vector(constants)
    tag = _GROWTH_TO_TAG.get(gv.dims)
    if tag is None:
        raise ValidationError(f"growth vector {gv.dims} is not a regular normal form")
    if tag != "BiHeisenberg":
        return NormalFormLabel(tag)
    # project horizontal brackets onto the complement of the distribution
    L = constants.c[:4, :4, 4:].reshape(4, 4, -1)[:, :, 0]
    spec = frequencies_of(SkewMatrix(L))
    return NormalFormLabel(tag, alpha=spec.freqs[1] / spec.freqs[0])


def popp_coefficient_45(b1: float, b2: float) -> float:
    """Density of Popp's volume for the (4,5) frame: 1/sqrt(b1^2 + b2^2)."""
    if b1 <= 0 or b2 < 0:
        raise ValidationError("need b1 > 0 and b2 >= 0")
    return 1.0 / float(np.hypot(b1, b2))


def eigenvalue_curvature(A, B, j: int, gap_tol: float = 1e-8) -> float:
    """Second derivative at t=0 of the j-th eigenvalue of ``A + tB``.

    Eigenvalues are indexed in descending order starting at 1 (``j = 1``
    is the top one).  Real skew inputs are replaced by the Hermitian
    ``iA``, ``iB``.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if np.isrealobj(A) and A.size and np.allclose(A, -A.T) and np.any(A):
        A = 1j * A
        B = 1j * np.asarray(B, dtype=float)
    A = 0.5 * (A + A.conj().T)
    B = 0.5 * (B + B.conj().T)
    lam, X = np.linalg.eigh(A)
    lam, X = lam[::-1], X[:, ::-1]
    if not 1 <= j <= len(lam):
        raise IndexOutOfRange(f"eigenvalue index {j} outside 1..{len(lam)}")
    j -= 1
    gaps = np.abs(np.delete(lam, j) - lam[j])
    if gaps.size and gaps.min() < gap_tol * max(1.0, np.abs(lam).max()):
        raise EigenvalueNotSimple(f"eigenvalue {j + 1} is not simple (gap {gaps.min():.3g})")
    Bx = B @ X[:, j]
    total = 0.0
    for m in range(len(lam)):
        if m != j:
            total += abs(np.vdot(X[:, m], Bx)) ** 2 / (lam[j] - lam[m])
    return float(2.0 * total)


# ---------------------------------------------------------------------------
# fields over a manifold


@dataclass(frozen=True)
class StructureField:
    """Smooth family ``q -> L(q)`` of bracket matrices on a coordinate box."""

    dim_manifold: int
    evaluator: Callable = field(repr=False)
    smoothness_note: str = ""
    lower: tuple | None = None
    upper: tuple | None = None
    matrix_dim: int | None = None

    def __call__(self, q) -> SkewMatrix:
        q = np.atleast_1d(np.asarray(q, dtype=float))
        if q.shape != (self.dim_manifold,):
            raise ValidationError(f"point must have {self.dim_manifold} coordinates")
        if self.lower is not None and (np.any(q < np.asarray(self.lower) - 1e-12)
                                       or np.any(q > np.asarray(self.upper) + 1e-12)):
            raise ValidationError(f"point {q.tolist()} lies outside the field domain")
        L = self.evaluator(q)
        if not isinstance(L, SkewMatrix):
            L = SkewMatrix.from_array(L)
        if self.matrix_dim is not None and L.dim != self.matrix_dim:
            raise ValidationError("matrix dimension changed across the field")
        return L

    def spectrum(self, q) -> FrequencySpectrum:
        return frequencies_of(self(q))

    @classmethod
    def constant(cls, freqs, kind="contact", dim_manifold=1) -> "StructureField":
        L = SkewMatrix.from_frequencies(freqs, kind == "quasi-contact")
        return cls(dim_manifold, lambda q: L, "constant", matrix_dim=L.dim)

    @classmethod
    def from_freq_field(cls, exprs, dim_manifold: int, kind: str = "contact",
                        lower=None, upper=None, source=None) -> "StructureField":
        """Block-diagonal field whose frequencies are closed-form in q1..qn."""
        if kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}")
        allowed = {f"q{i + 1}" for i in range(dim_manifold)}
        items = exprs.items() if isinstance(exprs, Mapping) else enumerate(exprs)
        parsed = []
        for name, e in items:
            if not isinstance(e, Expression):
                e = parse_expression(str(e), allowed=allowed,
                                     source=f"{source or 'freq_field'}.{name}")
            elif not e.variables <= allowed:
                raise ValidationError(f"expression {e.text!r} uses unknown variables")
            parsed.append(e)
        quasi = kind == "quasi-contact"

        def evaluator(q):
            env = {f"q{i + 1}": float(v) for i, v in enumerate(q)}
            vals = [float(e.evaluate(env)) for e in parsed]
            for e, v in zip(parsed, vals):
                if not v >= 0:
                    raise ValidationError(f"frequency {e.text!r} is {v:.6g} at q={list(map(float, q))}; "
                                          "frequencies must be nonnegative")
            return SkewMatrix.from_frequencies(vals, quasi)

        return cls(dim_manifold, evaluator, "closed-form frequencies",
                   None if lower is None else tuple(lower),
                   None if upper is None else tuple(upper),
                   matrix_dim=2 * len(parsed) + quasi)

    @classmethod
    def from_grid(cls, axes: Sequence, matrices) -> "StructureField":
        """Multilinear interpolation of sampled matrices on a tensor grid."""
        axes = [np.asarray(a, dtype=float) for a in axes]
        mats = np.asarray(matrices, dtype=float)
        shape = tuple(len(a) for a in axes)
        if mats.shape[: len(axes)] != shape or mats.ndim != len(axes) + 2:
            raise ValidationError("grid matrices must have shape grid + (k, k)")
        k = mats.shape[-1]
        iu = np.triu_indices(k, 1)
        upper = mats[(Ellipsis,) + iu]
        interp = RegularGridInterpolator(axes, upper, method="linear")

        def evaluator(q):
            vals = interp(q[None, :])[0]
            m = np.zeros((k, k))
            m[iu] = vals
            return SkewMatrix(m)

        return cls(len(axes), evaluator, "multilinear interpolation of samples",
                   tuple(a[0] for a in axes), tuple(a[-1] for a in axes), matrix_dim=k)
