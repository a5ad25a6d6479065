"""Multiplicative domains as concrete matrix *-algebras and their canonical
block decomposition.

The multiplicative domain of a unital trace-preserving CP map F is the set of
A with F(AX) = F(A)F(X) and F(XA) = F(X)F(A) for all X.  For such maps it
coincides with the fixed-point space of the composition dual(F) o F, which is
what gets computed here: the null space of (M - I) for the transfer matrix M
of that composition.  Because that equality is a cited fact rather than one
this package re-derives, every computed domain is post-verified against the
defining bilinear conditions and the adjoint-product criterion
F(A A*) = F(A) F(A*); a verified failure is reported, never accepted.

A unital *-subalgebra of d x d matrices is unitarily equivalent to a direct
sum of blocks, each a full matrix algebra of size j_k repeated with
multiplicity i_k.  The structure pass recovers the multiset {(i_k, j_k)} from
eigenvalue clustering of a generic central element; it is multiplicity-free
exactly when every i_k = 1, which is when the algebra contains rank-one
projections summing to the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import CPMap
from .errors import (
    NotMultiplicityFree,
    NotUnitalOrNotTP,
    ResampleExhausted,
    StructureInconsistency,
    VerificationFailure,
)
from .numerics import (
    ToleranceConfig,
    _tol,
    as_matrix,
    frob,
    hermitian_eig,
    nullspace,
    numerical_rank,
    orthonormal_matrix_basis,
    phase_fix,
    random_hermitian_in_span,
    unvec,
    vec,
)


@dataclass(frozen=True)
class MatrixAlgebra:
    """Unital *-subalgebra of d x d matrices, held as a Frobenius-orthonormal
    basis of its span."""

    ambient_dim: int
    basis: tuple[np.ndarray, ...]
    contains_identity: bool

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def projector(self) -> np.ndarray:
        b = np.column_stack([vec(m) for m in self.basis])
        return b @ b.conj().T

    def contains(self, x, tol: ToleranceConfig | None = None) -> bool:
        t = _tol(tol)
        v = vec(as_matrix(x))
        scale = max(1.0, float(np.linalg.norm(v)))
        return float(np.linalg.norm(self.projector() @ v - v)) <= t.eps_verify * scale

    @classmethod
    def from_span(cls, mats, tol: ToleranceConfig | None = None,
                  validate: bool = True) -> "MatrixAlgebra":
        t = _tol(tol)
        basis = orthonormal_matrix_basis(mats, t)
        if not basis:
            raise ValueError("span is empty")
        d = basis[0].shape[0]
        if basis[0].shape != (d, d):
            raise ValueError("algebra elements must be square")
        proj = np.column_stack([vec(m) for m in basis])
        proj = proj @ proj.conj().T
        eye_vec = vec(np.eye(d))
        has_identity = float(np.linalg.norm(proj @ eye_vec - eye_vec)) <= t.eps_verify * math.sqrt(d)
        alg = cls(ambient_dim=d, basis=tuple(basis), contains_identity=has_identity)
        if validate:
            alg.check_invariants(t)
        return alg

    def check_invariants(self, tol: ToleranceConfig | None = None) -> None:
        """Assert *-closure, multiplicative closure, and identity membership
        of the span, all at eps_verify."""
        t = _tol(tol)
        proj = self.projector()

        def inside(m: np.ndarray) -> float:
            v = vec(m)
            return float(np.linalg.norm(proj @ v - v))

        for b in self.basis:
            res = inside(b.conj().T)
            if res > t.eps_verify:
                raise VerificationFailure(f"span is not *-closed, residual {res:.3e}")
        for a in self.basis:
            for b in self.basis:
                res = inside(a @ b)
                if res > t.eps_verify:
                    raise VerificationFailure(
                        f"span is not multiplicatively closed, residual {res:.3e}"
                    )
        if not self.contains_identity:
            raise VerificationFailure("identity is not in the span")


def multiplicative_domain(psi: CPMap, tol: ToleranceConfig | None = None,
                          check_count: int = 3) -> MatrixAlgebra:
    """Multiplicative domain of a unital trace-preserving CP map.

    Computed as the fixed-point space of dual(psi) o psi via an SVD null
    space of (M - I), then post-verified; on verification failure the basis
    is filtered by the adjoint-product criterion and re-spanned once before
    giving up.
    """
    t = _tol(tol)
    if psi.input_dim != psi.output_dim:
        raise NotUnitalOrNotTP("map must be an endomorphism to be unital and trace preserving")
    if psi.tp_residual > t.eps_verify or psi.unital_residual() > t.eps_verify:
        raise NotUnitalOrNotTP(
            f"tp residual {psi.tp_residual:.3e}, unital residual {psi.unital_residual():.3e}"
        )
    d = psi.input_dim
    transfer = psi.transfer_matrix()
    composed = transfer.conj().T @ transfer
    fixed = nullspace(composed - np.eye(d * d), t)
    if fixed.shape[1] == 0:
        raise VerificationFailure("fixed-point space is empty; identity must always be fixed")
    mats = [unvec(fixed[:, k], d, d) for k in range(fixed.shape[1])]

    try:
        alg = MatrixAlgebra.from_span(mats, t)
        _verify_domain(psi, alg, t, check_count)
        return alg
    except VerificationFailure:
        survivors = [m for m in mats if _adjoint_product_residual(psi, m) <= t.eps_verify]
        if not survivors:
            raise
        alg = MatrixAlgebra.from_span(survivors, t)
        _verify_domain(psi, alg, t, check_count)
        return alg


def _adjoint_product_residual(psi: CPMap, a: np.ndarray) -> float:
    left = frob(psi.apply(a @ a.conj().T) - psi.apply(a) @ psi.apply(a.conj().T))
    right = frob(psi.apply(a.conj().T @ a) - psi.apply(a.conj().T) @ psi.apply(a))
    return max(left, right)


def _verify_domain(psi: CPMap, alg: MatrixAlgebra, t: ToleranceConfig, check_count: int) -> None:
    d = psi.input_dim
    rng = t.rng(0xA15E)
    probes = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
              for _ in range(check_count)]
    probes = [x / max(frob(x), 1.0) for x in probes]
    for a in alg.basis:
        res = _adjoint_product_residual(psi, a)
        if res > t.eps_verify:
            raise VerificationFailure(
                f"adjoint-product criterion fails on a basis element, residual {res:.3e}"
            )
        for x in list(probes) + [b for b in alg.basis if b is not a]:
            left = frob(psi.apply(a @ x) - psi.apply(a) @ psi.apply(x))
            right = frob(psi.apply(x @ a) - psi.apply(x) @ psi.apply(a))
            if max(left, right) > t.eps_verify * max(1.0, frob(a) * frob(x)):
                raise VerificationFailure(
                    f"bilinear multiplicativity fails, residual {max(left, right):.3e}"
                )


def commutant(alg: MatrixAlgebra, tol: ToleranceConfig | None = None) -> MatrixAlgebra:
    """All matrices commuting with every element of the algebra, via the null
    space of the stacked commutator actions on vec(X)."""
    t = _tol(tol)
    d = alg.ambient_dim
    eye = np.eye(d)
    rows = [np.kron(eye, b) - np.kron(b.T, eye) for b in alg.basis]
    stacked = np.vstack(rows)
    null = nullspace(stacked, t)
    mats = [unvec(null[:, k], d, d) for k in range(null.shape[1])]
    return MatrixAlgebra.from_span(mats, t)


def intersect_spans(first, second, tol: ToleranceConfig | None = None) -> list[np.ndarray]:
    """Orthonormal basis of the intersection of two matrix spans, from the
    eigenvalue-1 space of the symmetrized product of their projectors."""
    t = _tol(tol)
    first = [as_matrix(m) for m in first]
    second = [as_matrix(m) for m in second]
    rows, cols = first[0].shape

    def projector(mats):
        b = np.column_stack([vec(m) for m in mats])
        return b @ b.conj().T

    pa, pb = projector(first), projector(second)
    sym = (pa @ pb + pb @ pa) / 2.0
    kernel = nullspace(sym - np.eye(rows * cols), t)
    return [unvec(kernel[:, k], rows, cols) for k in range(kernel.shape[1])]


def center(alg: MatrixAlgebra, tol: ToleranceConfig | None = None) -> list[np.ndarray]:
    """Orthonormal basis of the center, the intersection with the commutant."""
    t = _tol(tol)
    com = commutant(alg, t)
    basis = intersect_spans(alg.basis, com.basis, t)
    if not basis:
        raise VerificationFailure("center is empty; a unital algebra contains the identity")
    return basis


@dataclass(frozen=True)
class AlgebraBlock:
    multiplicity: int
    size: int
    projection: np.ndarray


@dataclass(frozen=True)
class AlgebraStructure:
    """Canonical block data of a unital *-algebra, ordered by descending
    block size then descending multiplicity."""

    blocks: tuple[AlgebraBlock, ...]
    multiplicity_free: bool

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((b.multiplicity, b.size) for b in self.blocks)


def _cluster_descending(values: np.ndarray, radius: float) -> list[np.ndarray]:
    """Group a descending array into runs whose consecutive gaps stay within
    the radius; returns index arrays."""
    groups: list[list[int]] = [[0]]
    for k in range(1, values.size):
        if values[k - 1] - values[k] <= radius:
            groups[-1].append(k)
        else:
            groups.append([k])
    return [np.array(g) for g in groups]


def structure(alg: MatrixAlgebra, tol: ToleranceConfig | None = None) -> AlgebraStructure:
    """Recover the block structure from a generic central element.

    Eigenvalue clusters of the element give the minimal central projections
    P_k; within each block the size j_k satisfies j_k^2 = dim(P_k A P_k) and
    the multiplicity is rank(P_k) / j_k.  Non-integer block data raises
    StructureInconsistency; ambiguous clusters trigger a resample.
    """
    t = _tol(tol)
    d = alg.ambient_dim
    central = center(alg, t)
    want = len(central)

    chosen = None
    for attempt in range(t.max_resample):
        h = random_hermitian_in_span(central, t.rng(0x57C7, attempt))
        evals, evecs = hermitian_eig(h, t)
        clusters = _cluster_descending(evals, t.eps_eig)
        if len(clusters) != want:
            continue
        reps = np.array([float(np.mean(evals[c])) for c in clusters])
        if want > 1 and np.min(reps[:-1] - reps[1:]) < 10 * t.eps_eig:
            continue
        chosen = (evals, evecs, clusters)
        break
    if chosen is None:
        raise ResampleExhausted(
            f"no central element with {want} separated eigenvalue clusters "
            f"after {t.max_resample} draws"
        )
    _, evecs, clusters = chosen

    blocks = []
    for cluster in clusters:
        cols = evecs[:, cluster]
        proj = cols @ cols.conj().T
        block_rank = int(cluster.size)
        compressed = np.column_stack([vec(proj @ b @ proj) for b in alg.basis])
        block_dim = numerical_rank(compressed, t)
        size = round(math.sqrt(block_dim))
        if size * size != block_dim or size == 0 or block_rank % size != 0:
            raise StructureInconsistency(
                f"block of rank {block_rank} spans dimension {block_dim}, "
                "not a perfect square dividing the rank"
            )
        blocks.append(AlgebraBlock(multiplicity=block_rank // size, size=size, projection=proj))

    if sum(b.multiplicity * b.size for b in blocks) != d:
        raise StructureInconsistency("block ranks do not sum to the ambient dimension")
    if sum(b.size**2 for b in blocks) != alg.dimension:
        raise StructureInconsistency("block dimensions do not sum to the algebra dimension")

    blocks.sort(key=lambda b: (-b.size, -b.multiplicity))
    return AlgebraStructure(
        blocks=tuple(blocks),
        multiplicity_free=all(b.multiplicity == 1 for b in blocks),
    )


def rank_one_resolution(alg: MatrixAlgebra, struct: AlgebraStructure,
                        tol: ToleranceConfig | None = None) -> list[np.ndarray]:
    """Vectors w_1..w_d whose rank-one projections lie in the algebra and
    sum to the identity, from the spectral resolution of a generic Hermitian
    element with simple spectrum.  Requires a multiplicity-free structure.
    Ordered by descending eigenvalue, phases fixed."""
    t = _tol(tol)
    if not struct.multiplicity_free:
        raise NotMultiplicityFree(
            f"structure {list(struct.pairs())} has a repeated tensor factor"
        )
    d = alg.ambient_dim

    chosen = None
    for attempt in range(t.max_resample):
        h = random_hermitian_in_span(alg.basis, t.rng(0x12E5, attempt))
        evals, evecs = hermitian_eig(h, t)
        if d > 1 and np.min(evals[:-1] - evals[1:]) < 10 * t.eps_eig:
            continue
        chosen = (evals, evecs)
        break
    if chosen is None:
        raise ResampleExhausted(
            f"no generic element with simple spectrum after {t.max_resample} draws"
        )
    _, evecs = chosen

    vectors = [phase_fix(evecs[:, k]) for k in range(d)]
    total = sum(np.outer(w, w.conj()) for w in vectors)
    if frob(total - np.eye(d)) > t.eps_verify:
        raise VerificationFailure("spectral projections do not resolve the identity")
    for k, w in enumerate(vectors):
        if not alg.contains(np.outer(w, w.conj()), t):
            raise VerificationFailure(
                f"rank-one projection {k} escapes the algebra span"
            )
    return vectors
