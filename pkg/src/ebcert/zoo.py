"""Generators for the channel families used as fixtures and CLI outputs.

All generators are pure and seed-deterministic.  Entrywise-product (Schur)
channels and their complements come with the Gram data that produced them so
tests can round-trip the pair; the projection-Choi sampler produces generic
instances by alternating projections and can plant entanglement-breaking
ones on request, since a generic projection-Choi channel is not
entanglement breaking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import CPMap, KrausChannel, kraus_from_choi, minimal_kraus, redilate
from .errors import (
    ConstructionFailure,
    DimensionMismatch,
    InvalidCorrelation,
    NotUnitVector,
)
from .numerics import (
    ToleranceConfig,
    _tol,
    as_matrix,
    frob,
    hermitian_eig,
    random_isometry,
    random_unitary,
    unvec,
)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Positive semidefinite matrix with unit diagonal, optionally carrying
    the unit vectors whose Gram matrix it is (as columns)."""

    matrix: np.ndarray
    vectors: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_vectors(cls, vectors, tol: ToleranceConfig | None = None) -> "CorrelationMatrix":
        cols = _vector_columns(vectors)
        for i in range(cols.shape[1]):
            norm = float(np.linalg.norm(cols[:, i]))
            if abs(norm - 1.0) > _tol(tol).eps_verify:
                raise NotUnitVector(i, norm)
        gram = cols.conj().T @ cols
        return cls(matrix=gram, vectors=cols)

    def validate(self, tol: ToleranceConfig | None = None) -> None:
        t = _tol(tol)
        c = as_matrix(self.matrix)
        if c.shape[0] != c.shape[1]:
            raise InvalidCorrelation("correlation matrix must be square")
        evals, _ = hermitian_eig(c, t)
        if evals.size and evals[-1] < -t.eps_verify * max(1.0, evals[0]):
            raise InvalidCorrelation(f"negative eigenvalue {evals[-1]:.3e}")
        diag_err = float(np.max(np.abs(np.diagonal(c) - 1.0)))
        if diag_err > t.eps_verify:
            raise InvalidCorrelation(f"diagonal deviates from one by {diag_err:.3e}")


def _vector_columns(vectors) -> np.ndarray:
    arr = np.asarray(vectors, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if isinstance(vectors, (list, tuple)):
        arr = np.column_stack([np.asarray(v, dtype=complex).reshape(-1) for v in vectors])
    return arr


def random_correlation(n: int, k: int, seed, tol: ToleranceConfig | None = None) -> CorrelationMatrix:
    """Gram matrix of n normalized complex Gaussian vectors in k dimensions;
    its rank is min(n, k) almost surely."""
    rng = np.random.default_rng(seed)
    cols = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
    cols /= np.linalg.norm(cols, axis=0)
    return CorrelationMatrix.from_vectors(cols, tol)


def gram_vectors(corr: CorrelationMatrix | np.ndarray,
                 tol: ToleranceConfig | None = None) -> np.ndarray:
    """Rank-truncated Gram factor: columns g_i with <g_i, g_j> equal to the
    correlation entries, obtained from the Hermitian eigendecomposition."""
    t = _tol(tol)
    c = corr.matrix if isinstance(corr, CorrelationMatrix) else as_matrix(corr)
    evals, evecs = hermitian_eig(c, t)
    keep = evals > t.eps_rank * max(evals[0], t.eps_rank)
    lam = evals[keep]
    u = evecs[:, keep]
    return (np.sqrt(lam)[:, None]) * u.conj().T


def schur_channel(corr: CorrelationMatrix | np.ndarray,
                  tol: ToleranceConfig | None = None) -> KrausChannel:
    """Entrywise-product channel X -> X o C for a correlation matrix C.

    Kraus operators are the diagonal matrices carrying the conjugated rows
    of a Gram factor of C, so their count is the rank of C; the channel is
    unital and trace preserving because the diagonal of C is one."""
    t = _tol(tol)
    cm = corr if isinstance(corr, CorrelationMatrix) else CorrelationMatrix(as_matrix(corr))
    cm.validate(t)
    factor = gram_vectors(cm, t)
    ops = [np.diag(factor[i, :].conj()) for i in range(factor.shape[0])]
    return KrausChannel(ops, t)


def schur_complement_channel(vectors, tol: ToleranceConfig | None = None) -> KrausChannel:
    """Channel with rank-one Kraus operators u_k e_k*: it reads the k-th
    diagonal entry of the input and emits it on the state u_k.  Its Choi
    matrix is the projection sum_k E_kk (x) u_k u_k* of rank n, and it is the
    complement of the entrywise-product channel of the Gram matrix of the
    conjugated vectors."""
    t = _tol(tol)
    cols = _vector_columns(vectors)
    m, n = cols.shape
    ops = []
    for k in range(n):
        norm = float(np.linalg.norm(cols[:, k]))
        if abs(norm - 1.0) > t.eps_verify:
            raise NotUnitVector(k, norm)
        op = np.zeros((m, n), dtype=complex)
        op[:, k] = cols[:, k]
        ops.append(op)
    return KrausChannel(ops, t)


def random_schur_complement_channel(n: int, m: int, seed,
                                    tol: ToleranceConfig | None = None) -> KrausChannel:
    rng = np.random.default_rng(seed)
    cols = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    cols /= np.linalg.norm(cols, axis=0)
    return schur_complement_channel(cols, tol)


def werner_holevo(d: int, tol: ToleranceConfig | None = None) -> KrausChannel:
    """Channel X -> (tr(X) I + X^T) / (d + 1) on d x d matrices.

    Its Choi matrix is (I + SWAP) / (d + 1): twice the projection onto the
    symmetric subspace divided by d + 1, hence a scaled projection with
    scalar 2 / (d + 1) and rank d (d + 1) / 2.  Kraus operators come from
    the Choi eigendecomposition."""
    if d < 2:
        raise DimensionMismatch("transpose-plus-trace channel needs dimension at least 2")
    t = _tol(tol)
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for k in range(d):
            swap[i * d + k, k * d + i] = 1.0
    j = (np.eye(d * d) + swap) / (d + 1)
    return KrausChannel(kraus_from_choi(j, d, d, t), t)


def depolarizing(n: int, tol: ToleranceConfig | None = None) -> KrausChannel:
    """Completely depolarizing channel X -> tr(X) I / n, with the scaled
    matrix units as Kraus operators; its Choi matrix is I / n."""
    if n < 1:
        raise DimensionMismatch("dimension must be at least 1")
    ops = []
    for i in range(n):
        for k in range(n):
            op = np.zeros((n, n), dtype=complex)
            op[i, k] = 1.0 / np.sqrt(n)
            ops.append(op)
    return KrausChannel(ops, tol)


def identity_channel(n: int, tol: ToleranceConfig | None = None) -> KrausChannel:
    return KrausChannel([np.eye(n, dtype=complex)], tol)


def random_channel(n: int, m: int, d: int, seed,
                   tol: ToleranceConfig | None = None) -> KrausChannel:
    """Random channel with d Kraus operators, sliced from a Haar isometry
    into the output space tensored with a d-dimensional environment; trace
    preservation is exact by construction."""
    if m * d < n:
        raise DimensionMismatch(f"no isometry from dimension {n} into {m}x{d}")
    iso = random_isometry(m * d, n, seed)
    ops = [iso[i * m:(i + 1) * m, :] for i in range(d)]
    return KrausChannel(ops, tol)


def random_projection_choi_channel(n: int, m: int, seed,
                                   tol: ToleranceConfig | None = None,
                                   ensure_eb: bool = False,
                                   max_iterations: int = 20000) -> KrausChannel:
    """Random channel whose Choi matrix is a projection (necessarily of rank
    n).

    The generic sampler alternates between the affine marginal constraint
    (partial trace over the output equals the identity) and the nearest
    rank-n projection until both hold to well below eps_verify.  Generic
    samples are almost surely *not* entanglement breaking; with
    ``ensure_eb`` the sampler instead plants a unitarily twirled rank-one
    Kraus channel, which is entanglement breaking by construction, so both
    kinds of instance are available for certifier testing.
    """
    t = _tol(tol)
    if n < 1 or m < 1:
        raise DimensionMismatch("dimensions must be at least 1")
    if ensure_eb:
        base = random_schur_complement_channel(n, m, np.random.SeedSequence([int(seed), 0x9C01, 0]))
        outer = random_unitary(m, np.random.SeedSequence([int(seed), 0x9C01, 1]))
        inner = random_unitary(n, np.random.SeedSequence([int(seed), 0x9C01, 2]))
        return internal_twirl(external_twirl(base, outer, t), inner, t)

    target = min(1e-13, t.eps_verify / 100.0)
    eye_n = np.eye(n)
    for restart in range(t.max_resample):
        start = random_isometry(n * m, n, np.random.SeedSequence([int(seed), 0x9C01, 3 + restart]))
        j = start @ start.conj().T
        top = start
        for _ in range(max_iterations):
            marginal = np.einsum("aibi->ab", j.reshape(n, m, n, m))
            delta = eye_n - marginal
            if frob(delta) <= target:
                break
            j = j + np.kron(delta, np.eye(m)) / m
            evals, evecs = np.linalg.eigh(j)
            top = evecs[:, -n:]
            j = top @ top.conj().T
        else:
            continue
        ops = [unvec(top[:, k], m, n) for k in range(n)]
        return KrausChannel(ops, t)
    raise ConstructionFailure(
        f"alternating projections stalled after {t.max_resample} restarts"
    )


def external_twirl(channel: CPMap, unitary, tol: ToleranceConfig | None = None) -> CPMap:
    """Conjugate the output:  X -> U F(X) U*."""
    u = as_matrix(unitary)
    ops = [u @ op for op in channel.kraus]
    return KrausChannel(ops, tol) if channel.trace_preserving else CPMap(ops, tol)


def internal_twirl(channel: CPMap, unitary, tol: ToleranceConfig | None = None) -> CPMap:
    """Rotate the input:  X -> F(V X V*)."""
    v = as_matrix(unitary)
    ops = [op @ v for op in channel.kraus]
    return KrausChannel(ops, tol) if channel.trace_preserving else CPMap(ops, tol)


def permute_kraus(channel: CPMap, order, tol: ToleranceConfig | None = None) -> CPMap:
    """Reorder the Kraus list; the represented map is unchanged."""
    if sorted(order) != list(range(len(channel))):
        raise ValueError("order must be a permutation of the Kraus indices")
    ops = [channel.kraus[i] for i in order]
    return KrausChannel(ops, tol) if channel.trace_preserving else CPMap(ops, tol)


def redilate_fixture(channel: CPMap, length: int, seed,
                     tol: ToleranceConfig | None = None) -> CPMap:
    """Equivalent presentation of the channel with ``length`` Kraus
    operators: the minimal set pushed through a random isometry.  Exercises
    invariance of downstream results under the choice of Kraus
    presentation."""
    t = _tol(tol)
    minimal = minimal_kraus(channel, t)
    if length < len(minimal):
        raise DimensionMismatch(
            f"cannot present a Choi-rank-{len(minimal)} channel with {length} operators"
        )
    return redilate(minimal, random_isometry(length, len(minimal), seed), t)
