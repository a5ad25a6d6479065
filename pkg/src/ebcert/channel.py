"""Channel representation and calculus: Kraus/Choi conversions, duals,
complements, complement adjoints, and projection classification of Choi
matrices.

The Choi matrix of a map ``F`` from n x n to m x m matrices is the
nm x nm block matrix ``sum_ij kron(E_ij, F(E_ij))`` over matrix units
``E_ij`` of the input space.  With the column-stacking ``vec`` of
:mod:`ebcert.numerics` this equals ``sum_i vec(K_i) vec(K_i)*`` over the
Kraus operators, which is how it is computed here.  The Choi matrix is kept
unnormalized (trace n for a channel); dividing by n gives a density matrix.

A complement is always built from a minimal Kraus set, which this module
fixes deterministically: eigenpairs of the Choi matrix in descending
eigenvalue order, each eigenvector phase-fixed so its largest-modulus
entry is real positive.  Any other minimal choice gives a complement that
differs only by unitary conjugation on the output, so spectra and all
classifications below are unaffected by this convention.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InconsistentClassification,
    NotMinimalKraus,
    NotTracePreserving,
    VerificationFailure,
)
from .numerics import (
    ToleranceConfig,
    _tol,
    as_matrix,
    frob,
    hermitian_eig,
    numerical_rank,
    unvec,
    vec,
)


class CPMap:
    """Completely positive map in Kraus form, not necessarily trace
    preserving.  Immutable once constructed; safe to share across threads."""

    def __init__(self, kraus, tol: ToleranceConfig | None = None):
        t = _tol(tol)
        # copy before freezing so caller-owned arrays stay writable
        ops = [as_matrix(k).copy() for k in kraus]
        if not ops:
            raise ValueError("at least one Kraus operator is required")
        shape = ops[0].shape
        if any(op.shape != shape for op in ops):
            raise DimensionMismatch("all Kraus operators must share one shape")
        for op in ops:
            op.setflags(write=False)
        self._kraus = tuple(ops)
        self.output_dim, self.input_dim = shape
        gram = sum(op.conj().T @ op for op in ops)
        self.tp_residual = frob(gram - np.eye(self.input_dim))
        self.trace_preserving = self.tp_residual <= t.eps_verify

    @property
    def kraus(self) -> tuple[np.ndarray, ...]:
        return self._kraus

    def __len__(self) -> int:
        return len(self._kraus)

    def apply(self, x) -> np.ndarray:
        """Evaluate the operator sum  sum_i K_i X K_i*."""
        x = as_matrix(x)
        if x.shape != (self.input_dim, self.input_dim):
            raise DimensionMismatch(
                f"argument is {x.shape}, map acts on {self.input_dim}x{self.input_dim}"
            )
        out = np.zeros((self.output_dim, self.output_dim), dtype=complex)
        for op in self._kraus:
            out += op @ x @ op.conj().T
        return out

    def __call__(self, x) -> np.ndarray:
        return self.apply(x)

    def unital_residual(self) -> float:
        return frob(self.apply(np.eye(self.input_dim)) - np.eye(self.output_dim))

    def is_unital(self, tol: ToleranceConfig | None = None) -> bool:
        return self.unital_residual() <= _tol(tol).eps_verify

    def transfer_matrix(self) -> np.ndarray:
        """Matrix of the map on column-stacked vectors:
        vec(F(X)) = transfer_matrix() @ vec(X)."""
        out = np.zeros((self.output_dim**2, self.input_dim**2), dtype=complex)
        for op in self._kraus:
            out += np.kron(op.conj(), op)
        return out

    def __repr__(self) -> str:
        kind = "channel" if self.trace_preserving else "cp map"
        return (
            f"<{kind} {self.input_dim}x{self.input_dim} -> "
            f"{self.output_dim}x{self.output_dim}, {len(self)} kraus>"
        )


class KrausChannel(CPMap):
    """Trace-preserving completely positive map.  Construction rejects Kraus
    lists whose trace-preserving residual exceeds tolerance; general CP maps
    go through :class:`CPMap` instead."""

    def __init__(self, kraus, tol: ToleranceConfig | None = None):
        super().__init__(kraus, tol)
        if not self.trace_preserving:
            raise NotTracePreserving(self.tp_residual)


def apply(channel: CPMap, x) -> np.ndarray:
    return channel.apply(x)


class ChoiClass(enum.Enum):
    PROJECTION = "projection"
    SCALED_PROJECTION = "scaled_projection"
    OTHER = "other"


@dataclass(frozen=True)
class ChoiReport:
    """Choi matrix together with its rank and spectral classification.

    classification is PROJECTION when every nonzero eigenvalue sits within
    eps_eig of 1, SCALED_PROJECTION when they sit within eps_eig of their
    common mean alpha, OTHER otherwise.
    """

    choi: np.ndarray
    choi_rank: int
    classification: ChoiClass
    alpha: float | None
    eigenvalues: np.ndarray

    @property
    def is_projection(self) -> bool:
        return self.classification is ChoiClass.PROJECTION


def choi(channel: CPMap, tol: ToleranceConfig | None = None) -> ChoiReport:
    """Build the Choi matrix and classify its spectrum."""
    t = _tol(tol)
    n, m = channel.input_dim, channel.output_dim
    j = np.zeros((n * m, n * m), dtype=complex)
    for op in channel.kraus:
        k = vec(op)
        j += np.outer(k, k.conj())
    evals, _ = hermitian_eig(j, t)

    lead = evals[0] if evals.size else 0.0
    if lead <= t.eps_rank:
        rank = 0
        nonzero = np.zeros(0)
    else:
        nonzero = evals[evals > t.eps_rank * lead]
        rank = int(nonzero.size)

    if evals.size and evals[-1] < -t.eps_verify * max(1.0, lead):
        raise InconsistentClassification(
            f"Choi matrix has a negative eigenvalue {evals[-1]:.3e}"
        )
    if channel.trace_preserving:
        trace = float(np.trace(j).real)
        if abs(trace - n) > t.eps_verify * max(1.0, n):
            raise InconsistentClassification(
                f"Choi trace {trace:.12g} differs from input dimension {n}"
            )

    alpha: float | None
    if rank == 0:
        classification, alpha = ChoiClass.OTHER, None
    elif np.all(np.abs(nonzero - 1.0) <= t.eps_eig):
        classification, alpha = ChoiClass.PROJECTION, 1.0
    else:
        mean = float(np.mean(nonzero))
        if np.all(np.abs(nonzero - mean) <= t.eps_eig):
            classification, alpha = ChoiClass.SCALED_PROJECTION, mean
        else:
            classification, alpha = ChoiClass.OTHER, None

    if classification is ChoiClass.PROJECTION and channel.trace_preserving and rank != n:
        raise InconsistentClassification(
            f"projection Choi matrix must have rank {n}, got {rank}"
        )
    return ChoiReport(choi=j, choi_rank=rank, classification=classification,
                      alpha=alpha, eigenvalues=evals)


def kraus_from_choi(j, n: int, m: int, tol: ToleranceConfig | None = None) -> list[np.ndarray]:
    """Minimal Kraus operators of the map whose Choi matrix is ``j``.

    Eigenpairs above the relative rank cutoff, in descending eigenvalue
    order with phase-fixed eigenvectors, un-vectorized and scaled by the
    square-rooted eigenvalue.  The resulting set is trace-orthogonal.
    """
    t = _tol(tol)
    j = as_matrix(j)
    if j.shape != (n * m, n * m):
        raise DimensionMismatch(f"Choi matrix must be {n * m}x{n * m}, got {j.shape}")
    evals, evecs = hermitian_eig(j, t)
    if evals.size == 0 or evals[0] <= t.eps_rank:
        raise ValueError("Choi matrix is numerically zero; no Kraus form exists")
    keep = evals > t.eps_rank * evals[0]
    return [np.sqrt(evals[k]) * unvec(evecs[:, k], m, n) for k in np.nonzero(keep)[0]]


def minimal_kraus(channel: CPMap, tol: ToleranceConfig | None = None) -> CPMap:
    """Equivalent map with exactly Choi-rank many Kraus operators, derived
    from the Choi eigendecomposition (the package-wide canonical choice)."""
    t = _tol(tol)
    report = choi(channel, t)
    ops = kraus_from_choi(report.choi, channel.input_dim, channel.output_dim, t)
    rebuilt = KrausChannel(ops, t) if channel.trace_preserving else CPMap(ops, t)
    n = channel.input_dim
    residual = frob(choi(rebuilt, t).choi - report.choi)
    if residual > t.eps_verify * max(1.0, n):
        raise VerificationFailure(
            f"minimal Kraus reconstruction residual {residual:.3e} exceeds tolerance"
        )
    return rebuilt


def is_minimal(channel: CPMap, tol: ToleranceConfig | None = None) -> bool:
    """A Kraus set is minimal exactly when its vec'd operators are linearly
    independent."""
    stacked = np.column_stack([vec(op) for op in channel.kraus])
    return numerical_rank(stacked, tol) == len(channel)


def dual(channel: CPMap, tol: ToleranceConfig | None = None, verify: bool = True) -> CPMap:
    """Hilbert-Schmidt dual, with Kraus operators the adjoints of the
    original ones.  When ``verify`` is set, one random trace pairing
    tr(dual(X) Y) = tr(X F(Y)) is checked at eps_verify."""
    t = _tol(tol)
    out = CPMap([op.conj().T for op in channel.kraus], t)
    if verify:
        rng = t.rng(0xD0A1)
        m, n = channel.output_dim, channel.input_dim
        x = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        lhs = np.trace(out.apply(x) @ y)
        rhs = np.trace(x @ channel.apply(y))
        if abs(lhs - rhs) > t.eps_verify * max(1.0, abs(rhs)):
            raise VerificationFailure(
                f"dual trace pairing residual {abs(lhs - rhs):.3e} exceeds tolerance"
            )
    return out


def complement_from_kraus(kraus, tol: ToleranceConfig | None = None) -> CPMap:
    """Complement of the map presented by the *given* Kraus list: the map
    X -> sum_ij tr(K_i* K_j X) E_ji into d x d matrices, d the list length.

    The canonical complement of a channel goes through :func:`complement`,
    which first reduces to the minimal Kraus set; this raw form exists for
    comparing complements across different Kraus presentations.
    """
    t = _tol(tol)
    ops = [as_matrix(k) for k in kraus]
    m, n = ops[0].shape
    d = len(ops)
    # Kraus operators of the complement: rows of the K_i stacked per output row.
    comp_ops = []
    for a in range(m):
        c = np.zeros((d, n), dtype=complex)
        for i, op in enumerate(ops):
            c[i, :] = op[a, :]
        comp_ops.append(c)
    built = CPMap(comp_ops, t)
    return KrausChannel(comp_ops, t) if built.trace_preserving else built


@dataclass(frozen=True)
class ComplementChannel:
    """Complement of a channel, built from its canonical minimal Kraus set.

    source          the original channel
    minimal_source  the minimal-Kraus presentation the complement is built from
    channel         the complement itself, a channel into d x d matrices
    choi_rank       d, the Choi rank of the source
    """

    source: KrausChannel
    minimal_source: KrausChannel
    channel: KrausChannel
    choi_rank: int


def complement(channel: KrausChannel, tol: ToleranceConfig | None = None) -> ComplementChannel:
    """Canonical complement: reduce to the minimal Kraus set, then apply the
    trace-form construction.  Complements from different minimal choices are
    unitarily conjugate, hence share their Choi spectrum."""
    t = _tol(tol)
    if not channel.trace_preserving:
        raise NotTracePreserving(channel.tp_residual, "complement requires a channel")
    minimal = minimal_kraus(channel, t)
    comp = complement_from_kraus(minimal.kraus, t)
    if not isinstance(comp, KrausChannel):
        raise VerificationFailure(
            f"complement of a channel must be trace preserving, residual {comp.tp_residual:.3e}"
        )
    return ComplementChannel(source=channel, minimal_source=minimal,
                             channel=comp, choi_rank=len(minimal))


def complement_adjoint(minimal: CPMap, tol: ToleranceConfig | None = None) -> CPMap:
    """Adjoint of the complement, as a CP map on d x d matrices built from a
    minimal Kraus presentation.  It is unital whenever the source is trace
    preserving, and trace preserving exactly when the source Choi matrix is
    a projection."""
    t = _tol(tol)
    if not is_minimal(minimal, t):
        raise NotMinimalKraus("complement adjoint requires a minimal Kraus set")
    comp = complement_from_kraus(minimal.kraus, t)
    return dual(comp, t, verify=False)


def complement_adjoint_apply(minimal: CPMap, x, tol: ToleranceConfig | None = None) -> np.ndarray:
    """Direct evaluation of the complement adjoint:
    X -> sum_ij X_ij K_i* K_j for a minimal Kraus set {K_i}."""
    t = _tol(tol)
    if not is_minimal(minimal, t):
        raise NotMinimalKraus("complement adjoint requires a minimal Kraus set")
    x = as_matrix(x)
    d = len(minimal)
    if x.shape != (d, d):
        raise DimensionMismatch(f"argument is {x.shape}, expected {d}x{d}")
    n = minimal.input_dim
    out = np.zeros((n, n), dtype=complex)
    for i, ki in enumerate(minimal.kraus):
        for jj, kj in enumerate(minimal.kraus):
            if x[i, jj] != 0:
                out += x[i, jj] * (ki.conj().T @ kj)
    return out


class ComplementAdjointKind(enum.Enum):
    TRACE_PRESERVING = "trace_preserving"
    TRACE_STABILIZING = "trace_stabilizing"
    NEITHER = "neither"


@dataclass(frozen=True)
class ComplementAdjointReport:
    kind: ComplementAdjointKind
    alpha: float | None
    residual: float


def classify_complement_adjoint(
    channel: KrausChannel, tol: ToleranceConfig | None = None
) -> ComplementAdjointReport:
    """Classify the complement adjoint by the image of the identity under the
    complement: the adjoint scales traces by alpha exactly when the
    complement sends I_n to alpha I_d, and preserves them when alpha = 1.

    The verdict is cross-checked against the Choi classification (trace
    preserving <-> projection, trace stabilizing with the same scalar <->
    scaled projection); disagreement raises InconsistentClassification.
    """
    t = _tol(tol)
    comp = complement(channel, t)
    d = comp.choi_rank
    gram = comp.channel.apply(np.eye(channel.input_dim))
    alpha = float(np.trace(gram).real) / d
    res_identity = frob(gram - np.eye(d))
    res_scaled = frob(gram - alpha * np.eye(d))

    if res_identity <= t.eps_verify:
        report = ComplementAdjointReport(ComplementAdjointKind.TRACE_PRESERVING, 1.0, res_identity)
    elif res_scaled <= t.eps_verify * max(1.0, abs(alpha)):
        report = ComplementAdjointReport(ComplementAdjointKind.TRACE_STABILIZING, alpha, res_scaled)
    else:
        report = ComplementAdjointReport(ComplementAdjointKind.NEITHER, None, res_scaled)

    cr = choi(channel, t)
    consistent = {
        ComplementAdjointKind.TRACE_PRESERVING: cr.classification is ChoiClass.PROJECTION,
        ComplementAdjointKind.TRACE_STABILIZING:
            cr.classification is ChoiClass.SCALED_PROJECTION
            and abs(cr.alpha - report.alpha) <= 10 * t.eps_eig * max(1.0, abs(cr.alpha)),
        ComplementAdjointKind.NEITHER: cr.classification is ChoiClass.OTHER,
    }[report.kind]
    if not consistent:
        raise InconsistentClassification(
            f"complement adjoint is {report.kind.value} (alpha={report.alpha}) but the "
            f"Choi matrix is {cr.classification.value} (alpha={cr.alpha})"
        )
    return report


def redilate(channel: CPMap, isometry, tol: ToleranceConfig | None = None) -> CPMap:
    """Re-dilate a Kraus presentation through an isometry W (r x d columns
    with W* W = I): the new operators are L_i = sum_j W_ij K_j.  The channel
    action and Choi matrix are unchanged."""
    t = _tol(tol)
    w = as_matrix(isometry)
    d = len(channel)
    if w.shape[1] != d:
        raise DimensionMismatch(f"isometry has {w.shape[1]} columns, channel has {d} operators")
    if frob(w.conj().T @ w - np.eye(d)) > t.eps_verify:
        raise VerificationFailure("matrix is not an isometry to tolerance")
    ops = [sum(w[i, jj] * channel.kraus[jj] for jj in range(d)) for i in range(w.shape[0])]
    return KrausChannel(ops, t) if channel.trace_preserving else CPMap(ops, t)


# ---------------------------------------------------------------------------
# channel file format: {"n": int, "m": int, "kraus": [matrix]} with matrix a
# row-major flat list of [re, im] pairs
# ---------------------------------------------------------------------------

def _matrix_to_pairs(op: np.ndarray) -> list[list[float]]:
    flat = op.reshape(-1)  # row-major
    return [[float(z.real), float(z.imag)] for z in flat]


def _pairs_to_matrix(pairs, rows: int, cols: int) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs], dtype=complex)
    if flat.size != rows * cols:
        raise DimensionMismatch(f"matrix data has {flat.size} entries, expected {rows * cols}")
    return flat.reshape(rows, cols)


def channel_to_json_dict(channel: CPMap) -> dict:
    return {
        "n": channel.input_dim,
        "m": channel.output_dim,
        "kraus": [_matrix_to_pairs(op) for op in channel.kraus],
    }


def channel_from_json_dict(data: dict, tol: ToleranceConfig | None = None) -> KrausChannel:
    """Rebuild a channel, validating dimensions and the trace-preserving
    condition.  The resulting object carries the measured residual."""
    try:
        n = int(data["n"])
        m = int(data["m"])
        kraus_data = data["kraus"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed channel data: {exc}") from exc
    if n < 1 or m < 1 or not kraus_data:
        raise ValueError("channel data must have positive dimensions and at least one operator")
    ops = [_pairs_to_matrix(pairs, m, n) for pairs in kraus_data]
    return KrausChannel(ops, tol)


def save_channel(channel: CPMap, path, indent: int | None = 2) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_json_dict(channel), fh, indent=indent)
        fh.write("\n")


def load_channel(path, tol: ToleranceConfig | None = None) -> KrausChannel:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return channel_from_json_dict(data, tol)
