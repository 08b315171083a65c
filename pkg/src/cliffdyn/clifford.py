"""Complexified real Clifford algebra: grade-1 vectors and Gram resolutions.

Only grade-1 elements ever appear: every computation in scope closes on the
scalar ``bullet`` product (half the anticommutator), so a vector is just a
complex coefficient array over an orthogonal generator basis.  Generators are
normalized to ``bullet(g, g) = +2`` (positive class) or ``-2`` (negative
class).

The complexified basis built by :func:`standard_basis` packages generator
pairs into vectors ``E_i`` and ``F_i`` with

    bullet(E_i, conj(E_j)) = -delta_ij,   bullet(F_i, conj(F_j)) = +delta_ij,

and all same-kind products zero.  That table is exactly what
:func:`resolve_hermitian` needs to realize an arbitrary Hermitian matrix as a
Gram matrix of vectors, one eigendirection at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, PreconditionError, VerificationError
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "GeneratorSpace",
    "ClVector",
    "allocate",
    "allocate_blocks",
    "bullet",
    "conj",
    "standard_basis",
    "hermitian_eig",
    "resolve_hermitian",
    "resolve_pair",
    "pair_space",
    "GramResolution",
    "validate_hermitian",
    "hermitian_to_json",
    "hermitian_from_json",
]


class GeneratorSpace:
    """Immutable signature bookkeeping for a set of orthogonal generators.

    ``signs[k]`` is the self bullet product of generator ``k`` (+2 or -2).
    ``blocks`` maps labels to ``(offset, length)`` windows; blocks never
    overlap, so vectors supported on different blocks have vanishing bullet
    products by construction.  Within a block the positive-class generators
    come first.
    """

    __slots__ = ("signs", "blocks", "_block_pos")

    def __init__(self, signs: np.ndarray, blocks: dict[str, tuple[int, int]],
                 block_pos: dict[str, int]):
        signs = np.asarray(signs, dtype=float)
        if signs.ndim != 1 or signs.size == 0:
            raise InputError("generator space needs at least one generator")
        if not np.all(np.abs(signs) == 2.0):
            raise InputError("generator self products must be +2 or -2")
        signs.setflags(write=False)
        self.signs = signs
        self.blocks = dict(blocks)
        self._block_pos = dict(block_pos)

    @property
    def size(self) -> int:
        return self.signs.size

    @property
    def n_pos(self) -> int:
        return int(np.count_nonzero(self.signs > 0))

    @property
    def n_neg(self) -> int:
        return int(np.count_nonzero(self.signs < 0))

    def block_slice(self, label: str) -> slice:
        try:
            offset, length = self.blocks[label]
        except KeyError:
            raise PreconditionError(f"no block labelled {label!r}") from None
        return slice(offset, offset + length)

    def block_signature(self, label: str) -> tuple[int, int]:
        """(n_pos, n_neg) of one block."""
        offset, length = self.blocks[label]
        pos = self._block_pos[label]
        return pos, length - pos

    def zero(self) -> "ClVector":
        return ClVector(self, np.zeros(self.size, dtype=complex))

    def generator(self, k: int) -> "ClVector":
        if not 0 <= k < self.size:
            raise IndexError(f"generator index {k} out of range for size {self.size}")
        coeffs = np.zeros(self.size, dtype=complex)
        coeffs[k] = 1.0
        return ClVector(self, coeffs)

    def vector(self, coeffs) -> "ClVector":
        return ClVector(self, np.asarray(coeffs, dtype=complex))

    def __repr__(self):
        return (f"GeneratorSpace(n_pos={self.n_pos}, n_neg={self.n_neg}, "
                f"blocks={list(self.blocks)})")


class ClVector:
    """Grade-1 element: complex coefficients over the generators of a space."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: GeneratorSpace, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (space.size,):
            raise InputError(
                f"coefficient length {coeffs.shape} does not match space size {space.size}")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        self.space = space
        self.coeffs = coeffs

    def conj(self) -> "ClVector":
        return ClVector(self.space, self.coeffs.conj())

    def support(self) -> np.ndarray:
        return np.nonzero(self.coeffs)[0]

    def __add__(self, other: "ClVector") -> "ClVector":
        _check_space(self, other)
        return ClVector(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other: "ClVector") -> "ClVector":
        _check_space(self, other)
        return ClVector(self.space, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "ClVector":
        return ClVector(self.space, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "ClVector":
        return ClVector(self.space, self.coeffs / complex(scalar))

    def __neg__(self) -> "ClVector":
        return ClVector(self.space, -self.coeffs)

    def __repr__(self):
        nz = self.support()
        return f"ClVector({len(nz)} of {self.space.size} coefficients nonzero)"


def _check_space(a: ClVector, b: ClVector) -> None:
    if a.space is not b.space:
        raise PreconditionError("vectors live on different generator spaces")


def allocate(n_pos: int, n_neg: int, label: str = "main") -> GeneratorSpace:
    """Allocate a fresh space with the given signature as a single block."""
    return allocate_blocks([(label, n_pos, n_neg)])


def allocate_blocks(spec: Sequence[tuple[str, int, int]]) -> GeneratorSpace:
    """Allocate disjoint labelled blocks, each with its own (n_pos, n_neg)."""
    signs: list[float] = []
    blocks: dict[str, tuple[int, int]] = {}
    block_pos: dict[str, int] = {}
    for label, n_pos, n_neg in spec:
        if n_pos < 0 or n_neg < 0 or (n_pos == 0 and n_neg == 0):
            raise InputError(f"block {label!r}: signature ({n_pos},{n_neg}) is empty or negative")
        if label in blocks:
            raise InputError(f"duplicate block label {label!r}")
        offset = len(signs)
        signs.extend([2.0] * n_pos)
        signs.extend([-2.0] * n_neg)
        blocks[label] = (offset, n_pos + n_neg)
        block_pos[label] = n_pos
    return GeneratorSpace(np.array(signs), blocks, block_pos)


def bullet(a: ClVector, b: ClVector) -> complex:
    """Scalar inner product: half the anticommutator of two grade-1 elements.

    Complex-bilinear in both arguments; conjugation is the caller's job.
    Generators satisfy ``bullet(g_k, g_l) = +/-2 delta_kl``.
    """
    _check_space(a, b)
    return complex(np.sum(a.coeffs * b.coeffs * a.space.signs))


def conj(v: ClVector) -> ClVector:
    return v.conj()


def standard_basis(space: GeneratorSpace, block: str | None = None
                   ) -> tuple[list[ClVector], list[ClVector]]:
    """Complexified basis of a block with signature (2n, 2n).

    Returns ``(E, F)`` with n vectors each.  Each ``E_i`` combines two
    negative-class generators, each ``F_i`` two positive-class ones:

        E_i = (-i h_{2i} + h_{2i+1}) / 2,   F_i = (-i g_{2i} + g_{2i+1}) / 2.

    The resulting product table (verified by unit test, not assumed):
    E.conj(E) = -delta, F.conj(F) = +delta, all other combinations zero.
    """
    if block is None:
        if len(space.blocks) != 1:
            raise PreconditionError("space has several blocks; pass one explicitly")
        block = next(iter(space.blocks))
    n_pos, n_neg = space.block_signature(block)
    if n_pos != n_neg or n_pos % 2 != 0:
        raise PreconditionError(
            f"block {block!r} has signature ({n_pos},{n_neg}); need (2n, 2n)")
    offset = space.blocks[block][0]
    n = n_pos // 2
    E, F = [], []
    for i in range(n):
        f = np.zeros(space.size, dtype=complex)
        f[offset + 2 * i] = -0.5j
        f[offset + 2 * i + 1] = 0.5
        F.append(ClVector(space, f))
        e = np.zeros(space.size, dtype=complex)
        e[offset + n_pos + 2 * i] = -0.5j
        e[offset + n_pos + 2 * i + 1] = 0.5
        E.append(ClVector(space, e))
    return E, F


def validate_hermitian(H, atol: float | None = None) -> np.ndarray:
    """Return H as a complex ndarray, raising InputError if not Hermitian."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InputError(f"expected a square matrix, got shape {H.shape}")
    if atol is None:
        atol = DEFAULT.hermitian_input * max(1.0, float(np.abs(H).max(initial=0.0)))
    dev = float(np.abs(H - H.conj().T).max(initial=0.0))
    if dev > atol:
        raise InputError(f"matrix is not Hermitian: max deviation {dev:.3e} > {atol:.3e}")
    return 0.5 * (H + H.conj().T)


def hermitian_eig(H, *, tol: float | None = None, max_sweeps: int = 50
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.

    Returns ``(U, lam)`` with ``U`` unitary, ``lam`` real, ``U diag(lam) U^dagger = H``.
    Eigenvalues are ordered descending, ties broken by original index, so
    resolutions downstream are reproducible.
    """
    A = validate_hermitian(H)
    n = A.shape[0]
    U = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(A))
    if tol is None:
        tol = DEFAULT.eig_offdiag * max(1.0, scale)
    tiny = np.finfo(float).eps * max(1.0, scale)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(A - np.diag(np.diag(A))) ** 2))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                b = abs(apq)
                if b <= tiny:
                    continue
                phi = apq / b
                tau = (A[q, q].real - A[p, p].real) / (2.0 * b)
                if tau >= 0:
                    t = 1.0 / (tau + np.hypot(1.0, tau))
                else:
                    t = -1.0 / (-tau + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # G restricted to (p,q): [[c, s], [-conj(phi) s, conj(phi) c]]
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - (phi.conjugate() * s) * col_q
                A[:, q] = s * col_p + (phi.conjugate() * c) * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - (phi * s) * row_q
                A[q, :] = s * row_p + (phi * c) * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                ucol_p = U[:, p].copy()
                ucol_q = U[:, q].copy()
                U[:, p] = c * ucol_p - (phi.conjugate() * s) * ucol_q
                U[:, q] = s * ucol_p + (phi.conjugate() * c) * ucol_q
    lam = np.diag(A).real.copy()
    order = np.argsort(-lam, kind="stable")
    return U[:, order], lam[order]


@dataclass
class GramResolution:
    """Vectors whose bullet Gram matrix reproduces a target Hermitian matrix."""

    vectors: tuple[ClVector, ...]
    target: np.ndarray
    space: GeneratorSpace
    block: str

    def realized_gram(self) -> np.ndarray:
        n = len(self.vectors)
        G = np.empty((n, n), dtype=complex)
        for i, vi in enumerate(self.vectors):
            for j, vj in enumerate(self.vectors):
                G[i, j] = bullet(vi, vj.conj())
        return G

    def null_gram(self) -> np.ndarray:
        n = len(self.vectors)
        G = np.empty((n, n), dtype=complex)
        for i, vi in enumerate(self.vectors):
            for j, vj in enumerate(self.vectors):
                G[i, j] = bullet(vi, vj)
        return G

    def gram_residual(self) -> float:
        return float(np.abs(self.realized_gram() - self.target).max())

    def null_residual(self) -> float:
        return float(np.abs(self.null_gram()).max())

    def verify(self, tols: Tolerances = DEFAULT) -> None:
        res = self.gram_residual()
        if res > tols.gram_residual:
            raise VerificationError(f"Gram residual {res:.3e} > {tols.gram_residual:.1e}")
        res = self.null_residual()
        if res > tols.gram_null:
            raise VerificationError(f"same-kind residual {res:.3e} > {tols.gram_null:.1e}")


def resolve_hermitian(H, space: GeneratorSpace, block: str | None = None,
                      *, zero_rel: float | None = None) -> GramResolution:
    """Realize a Hermitian matrix H as ``H_ij = bullet(c_i, conj(c_j))``.

    Eigendecompose ``H = U diag(lam) U^dagger`` and assign one basis vector per
    eigendirection: ``F_k`` for positive, ``E_k`` for negative, the null
    combination ``E_k + F_k`` (unit weight) for eigenvalues below the zero
    threshold.  Then ``c_i = sum_k U[i,k] sqrt(|lam_k|) b_k`` with the zero
    branch entering at unit scale.  Same-kind products vanish identically
    because E.E = F.F = E.F = 0.
    """
    H = validate_hermitian(H)
    n = H.shape[0]
    if block is None:
        if len(space.blocks) != 1:
            raise PreconditionError("space has several blocks; pass one explicitly")
        block = next(iter(space.blocks))
    n_pos, n_neg = space.block_signature(block)
    if n_pos < 2 * n or n_neg < 2 * n:
        raise PreconditionError(
            f"block {block!r} signature ({n_pos},{n_neg}) too small for a {n}x{n} matrix; "
            f"need at least ({2 * n},{2 * n})")
    E, F = standard_basis(space, block)
    U, lam = hermitian_eig(H)
    if zero_rel is None:
        zero_rel = DEFAULT.eig_zero_rel
    zero_cut = zero_rel * (np.abs(lam).max(initial=0.0))
    vectors = []
    for i in range(n):
        acc = np.zeros(space.size, dtype=complex)
        for k in range(n):
            if abs(lam[k]) <= zero_cut:
                basis = E[k].coeffs + F[k].coeffs
                weight = 1.0
            elif lam[k] > 0:
                basis = F[k].coeffs
                weight = np.sqrt(lam[k])
            else:
                basis = E[k].coeffs
                weight = np.sqrt(-lam[k])
            acc = acc + U[i, k] * weight * basis
        vectors.append(ClVector(space, acc))
    return GramResolution(tuple(vectors), H.copy(), space, block)


def pair_space() -> GeneratorSpace:
    """Space with the three disjoint blocks used by :func:`resolve_pair`."""
    return allocate_blocks([("c", 4, 4), ("d", 4, 4), ("h", 4, 4)])


def resolve_pair(x, p, M, space: GeneratorSpace | None = None,
                 labels: tuple[str, str, str] = ("c", "d", "h")
                 ) -> tuple[list[ClVector], list[ClVector], GeneratorSpace]:
    """Build spinor doublets c^A, d*_A with prescribed mutual Gram matrices.

    Postconditions (all exact up to eigensolver residual):

        bullet(c[A], conj(c[B]))     = x[A, B]
        bullet(dstar[A], conj(dstar[B])) = p[A, B]
        bullet(c[A], dstar[B])       = M[A, B]
        all same-kind products zero.

    x and p are resolved on disjoint blocks (making every cross product
    vanish); the mixed Gram M is then dialed in by shifting c and d* along
    null directions h_i = E_i + F_i and h_i^* = -conj(E_i - F_i)/2 of a third
    block.  Null shifts leave x and p untouched because both h and h^* have
    zero product with their own conjugates.
    """
    x = validate_hermitian(x)
    p = validate_hermitian(p)
    M = np.asarray(M, dtype=complex)
    if x.shape != (2, 2) or p.shape != (2, 2) or M.shape != (2, 2):
        raise InputError("resolve_pair expects 2x2 matrices")
    c_label, d_label, h_label = labels
    if space is None:
        space = pair_space()
    for label in labels:
        if label not in space.blocks:
            raise PreconditionError(f"space is missing the {label!r} block")
    n_pos, n_neg = space.block_signature(h_label)
    if n_pos < 4 or n_neg < 4:
        raise PreconditionError("h block needs at least two standard pairs (4,4)")
    res_x = resolve_hermitian(x, space, c_label)
    res_p = resolve_hermitian(p, space, d_label)
    Eh, Fh = standard_basis(space, h_label)
    c = list(res_x.vectors)
    dstar = list(res_p.vectors)
    for A in range(2):
        shift = Eh[A] + Fh[A]                      # h_A, null, paired with A = identity
        c[A] = c[A] + shift
    for B in range(2):
        acc = dstar[B]
        for i in range(2):
            hstar = (Eh[i] - Fh[i]).conj() * (-0.5)  # null partner with bullet(h_i, h_j*) = delta
            acc = acc + complex(M[i, B]) * hstar
        dstar[B] = acc
    return c, dstar, space


def hermitian_to_json(H) -> dict:
    """JSON form of a Hermitian matrix: {"n": ..., "re": [[...]], "im": [[...]]}."""
    H = np.asarray(H, dtype=complex)
    return {"n": int(H.shape[0]), "re": H.real.tolist(), "im": H.imag.tolist()}


def hermitian_from_json(obj: dict) -> np.ndarray:
    try:
        n = int(obj["n"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad Hermitian matrix JSON: {exc}") from exc
    if re.shape != (n, n) or im.shape != (n, n):
        raise InputError(f"matrix JSON shapes {re.shape}/{im.shape} do not match n={n}")
    return validate_hermitian(re + 1j * im)
