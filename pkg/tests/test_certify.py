import numpy as np
import pytest

from ebcert import (
    EBCertificate,
    certify,
    choi,
    eb_rank,
    is_ppt,
    minimal_kraus,
    partial_transpose,
    random_unitary,
    schur_normal_form,
    verify_certificate,
    verify_eb_witness,
)
from ebcert.errors import (
    NotEntanglementBreaking,
    NotMinimalKraus,
    NotOrthonormal,
    OutOfScope,
    RankFailure,
    ResolutionFailure,
    VerificationFailure,
)
from ebcert.zoo import (
    depolarizing,
    external_twirl,
    identity_channel,
    internal_twirl,
    permute_kraus,
    random_projection_choi_channel,
    random_schur_complement_channel,
    redilate_fixture,
    schur_complement_channel,
    werner_holevo,
)

from oracles import random_complex_matrix


def unit_columns(m, n, seed):
    rng = np.random.default_rng(seed)
    cols = random_complex_matrix(m, n, rng)
    return cols / np.linalg.norm(cols, axis=0)


def recover_permutation(expected_cols, recovered):
    """Match recovered orthonormal vectors against an expected basis; the
    pipeline's ordering is an internal convention, so comparisons go through
    this alignment."""
    overlaps = np.abs(expected_cols.conj().T @ np.column_stack(recovered))
    perm = [int(np.argmax(overlaps[:, i])) for i in range(overlaps.shape[1])]
    assert sorted(perm) == list(range(len(perm))), "recovered vectors do not align"
    return perm


class TestVerifyEBWitness:
    def test_rank_one_channel_standard_basis_witness(self, tol):
        cols = unit_columns(4, 3, 1)
        ch = schur_complement_channel(cols, tol)
        v = verify_eb_witness(ch, list(np.eye(3)), tol)
        # adjoint images are the dyads of the generating vectors up to phase
        for k in range(3):
            np.testing.assert_allclose(
                np.outer(v[k], v[k].conj()),
                abs(np.vdot(cols[:, k], cols[:, k])) * np.outer(
                    np.eye(3)[k], np.eye(3)[k]
                ),
                atol=1e-10,
            )

    def test_depolarizing_standard_witness_certifies_length_four(self, tol):
        # witness acceptance works for any channel in minimal form, here one
        # whose Choi matrix is only a scaled projection; the accepted witness
        # bounds the rank-one length by four
        ch = minimal_kraus(depolarizing(2, tol), tol)
        v = verify_eb_witness(ch, list(np.eye(4)), tol)
        assert len(v) == 4
        total = sum(np.outer(x, x.conj()) for x in v)
        np.testing.assert_allclose(total, np.eye(2) / 2 * 2, atol=1e-10)

    def test_scaled_resolution_fails(self, tol):
        ch = minimal_kraus(depolarizing(2, tol), tol)
        with pytest.raises(ResolutionFailure):
            verify_eb_witness(ch, list(np.eye(4) / np.sqrt(2)), tol)

    def test_rank_failure_reports_offending_index(self, tol):
        ch = random_projection_choi_channel(2, 3, 0, tol)  # generically refuted
        minimal = minimal_kraus(ch, tol)
        with pytest.raises(RankFailure) as err:
            verify_eb_witness(minimal, list(np.eye(2)), tol)
        assert err.value.index in (0, 1)
        assert err.value.rank >= 2

    def test_requires_minimal_form(self, tol):
        padded = redilate_fixture(depolarizing(2, tol), 6, 3, tol)
        with pytest.raises(NotMinimalKraus):
            verify_eb_witness(padded, list(np.eye(6)), tol)


class TestCertify:
    def test_rank_one_kraus_channel_certifies_at_choi_rank(self, tol):
        ch = random_schur_complement_channel(5, 4, 2, tol)
        cert = certify(ch, tol)
        assert cert.r == cert.eb_rank == cert.choi_rank == 5
        assert max(cert.residuals.values()) <= tol.eps_verify

    def test_complement_of_entrywise_product_channel_certifies(self, tol):
        # the complement of a full-rank entrywise-product channel on 5x5
        # matrices is a projection-Choi channel of rank 5
        from ebcert import complement
        from ebcert.zoo import random_correlation, schur_channel
        corr = random_correlation(5, 5, 77, tol)
        comp = complement(schur_channel(corr, tol), tol).channel
        cert = certify(comp, tol)
        assert cert.eb_rank == cert.choi_rank == 5

    def test_certificate_rebuilds_channel(self, tol):
        ch = random_schur_complement_channel(3, 5, 3, tol)
        cert = certify(ch, tol)
        rebuilt = cert.channel(tol)
        np.testing.assert_allclose(
            choi(rebuilt, tol).choi, choi(ch, tol).choi, atol=1e-9
        )
        for op in cert.rank_one_kraus:
            s = np.linalg.svd(op, compute_uv=False)
            assert s[1] <= 1e-10 * s[0]

    def test_norm_matching_of_witness_pairs(self, tol):
        cert = certify(random_schur_complement_channel(4, 3, 4, tol), tol)
        for w, v in zip(cert.w, cert.v):
            assert abs(np.linalg.norm(w) - np.linalg.norm(v)) <= tol.eps_verify

    def test_scaled_projection_is_out_of_scope(self, tol):
        with pytest.raises(OutOfScope) as err:
            certify(werner_holevo(3, tol), tol)
        assert err.value.classification == "scaled_projection"
        assert err.value.alpha == pytest.approx(0.5, abs=1e-10)

    def test_identity_channel_is_out_of_scope(self, tol):
        with pytest.raises(OutOfScope) as err:
            certify(identity_channel(3, tol), tol)
        assert err.value.alpha == pytest.approx(3.0, abs=1e-10)

    def test_generic_channel_is_out_of_scope(self, tol):
        from ebcert.zoo import random_channel
        with pytest.raises(OutOfScope) as err:
            certify(random_channel(3, 3, 2, 5, tol), tol)
        assert err.value.classification == "other"

    def test_refutation_carries_structure_and_ppt_confirmation(self, tol):
        ch = random_projection_choi_channel(2, 3, 1, tol)
        with pytest.raises(NotEntanglementBreaking) as err:
            certify(ch, tol)
        assert err.value.blocks == ((2, 1),)
        assert err.value.ppt_violated is True

    def test_planted_instances_certify(self, tol):
        for seed in range(3):
            ch = random_projection_choi_channel(3, 4, seed, tol, ensure_eb=True)
            cert = certify(ch, tol)
            assert cert.eb_rank == 3

    def test_outcome_invariant_under_kraus_permutation(self, tol):
        ch = random_schur_complement_channel(3, 3, 6, tol)
        shuffled = permute_kraus(ch, [2, 0, 1], tol)
        assert certify(shuffled, tol).eb_rank == certify(ch, tol).eb_rank

        refuted = random_projection_choi_channel(2, 4, 2, tol)
        shuffled = permute_kraus(refuted, [1, 0], tol)
        with pytest.raises(NotEntanglementBreaking):
            certify(shuffled, tol)

    def test_outcome_invariant_under_external_conjugation(self, tol):
        u3 = random_unitary(3, 60)
        accepted = random_schur_complement_channel(3, 3, 61, tol)
        assert certify(external_twirl(accepted, u3, tol), tol).eb_rank == \
            certify(accepted, tol).eb_rank

        refuted = random_projection_choi_channel(2, 3, 5, tol)
        with pytest.raises(NotEntanglementBreaking) as before:
            certify(refuted, tol)
        with pytest.raises(NotEntanglementBreaking) as after:
            certify(external_twirl(refuted, random_unitary(3, 62), tol), tol)
        assert before.value.blocks == after.value.blocks

    def test_outcome_invariant_under_redilation(self, tol):
        ch = random_schur_complement_channel(3, 4, 7, tol)
        padded = redilate_fixture(ch, 5, 8, tol)
        assert certify(padded, tol).eb_rank == 3

    def test_refutation_stable_across_seeds(self, tol):
        from ebcert import ToleranceConfig
        ch = random_projection_choi_channel(3, 3, 3, tol)
        outcomes = []
        for seed in (0, 17, 400):
            t = ToleranceConfig(seed=seed)
            with pytest.raises(NotEntanglementBreaking) as err:
                certify(ch, t)
            outcomes.append(err.value.blocks)
        assert len(set(outcomes)) == 1


class TestVerifyCertificate:
    def test_build_and_check_are_separate_paths(self, tol):
        ch = random_schur_complement_channel(4, 4, 8, tol)
        cert = certify(ch, tol)
        residuals = verify_certificate(cert, ch, tol)
        assert set(residuals) == {
            "resolution", "adjoint_rank_one", "input_resolution",
            "unit_norm", "factorization", "norm_match", "choi_match",
        }

    def test_detects_corrupted_witness(self, tol):
        import dataclasses
        ch = random_schur_complement_channel(3, 3, 9, tol)
        cert = certify(ch, tol)
        bad = dataclasses.replace(cert, w=tuple(0.5 * w for w in cert.w))
        with pytest.raises(VerificationFailure):
            verify_certificate(bad, ch, tol)

    def test_detects_wrong_channel(self, tol):
        cert = certify(random_schur_complement_channel(3, 3, 10, tol), tol)
        other = random_schur_complement_channel(3, 3, 11, tol)
        with pytest.raises(VerificationFailure):
            verify_certificate(cert, other, tol)

    def test_json_roundtrip(self, tol):
        cert = certify(random_schur_complement_channel(3, 2, 12, tol), tol)
        data = cert.to_json_dict()
        back = EBCertificate.from_json_dict(data)
        assert back.r == cert.r
        for a, b in zip(cert.w, back.w):
            np.testing.assert_allclose(a, b, atol=1e-15)
        for a, b in zip(cert.rank_one_kraus, back.rank_one_kraus):
            np.testing.assert_allclose(a, b, atol=1e-12)


class TestSchurNormalForm:
    def test_roundtrip_recovers_gram_moduli(self, tol):
        cols = unit_columns(5, 4, 13)
        ch = schur_complement_channel(cols, tol)
        cert = certify(ch, tol)
        form = schur_normal_form(cert, ch, tol)
        perm = recover_permutation(np.eye(4), cert.v)
        expected = np.abs(cols.conj().T @ cols)
        got = np.abs(form.correlation)
        for i in range(4):
            for j in range(4):
                assert got[i, j] == pytest.approx(expected[perm[i], perm[j]], abs=1e-7)

    def test_external_twirl_preserves_gram_moduli(self, tol):
        cols = unit_columns(4, 3, 14)
        ch = schur_complement_channel(cols, tol)
        twirled = external_twirl(ch, random_unitary(4, 15), tol)
        cert = certify(twirled, tol)
        form = schur_normal_form(cert, twirled, tol)
        perm = recover_permutation(np.eye(3), cert.v)
        expected = np.abs(cols.conj().T @ cols)
        got = np.abs(form.correlation)
        for i in range(3):
            for j in range(3):
                assert got[i, j] == pytest.approx(expected[perm[i], perm[j]], abs=1e-7)

    def test_internal_twirl_preserves_gram_moduli(self, tol):
        cols = unit_columns(4, 3, 16)
        v = random_unitary(3, 17)
        twirled = internal_twirl(schur_complement_channel(cols, tol), v, tol)
        cert = certify(twirled, tol)
        form = schur_normal_form(cert, twirled, tol)
        # the input rotation folds into the recovered basis
        perm = recover_permutation(v.conj().T, cert.v)
        expected = np.abs(cols.conj().T @ cols)
        got = np.abs(form.correlation)
        for i in range(3):
            for j in range(3):
                assert got[i, j] == pytest.approx(expected[perm[i], perm[j]], abs=1e-7)

    def test_basis_change_is_unitary_and_correlation_valid(self, tol):
        ch = random_schur_complement_channel(4, 6, 18, tol)
        cert = certify(ch, tol)
        form = schur_normal_form(cert, ch, tol)
        v = form.basis_change
        assert np.linalg.norm(v.conj().T @ v - np.eye(4)) <= tol.eps_verify
        np.testing.assert_allclose(np.diag(form.correlation), np.ones(4), atol=1e-10)
        evals = np.linalg.eigvalsh(form.correlation)
        assert evals[0] >= -tol.eps_verify

    def test_corrupted_certificate_raises_not_orthonormal(self, tol):
        import dataclasses
        ch = random_schur_complement_channel(3, 3, 19, tol)
        cert = certify(ch, tol)
        skewed = list(cert.v)
        skewed[0] = (skewed[0] + skewed[1]) / np.sqrt(2)
        bad = dataclasses.replace(cert, v=tuple(skewed))
        with pytest.raises(NotOrthonormal):
            schur_normal_form(bad, ch, tol)


class TestEBRank:
    def test_certified_value(self, tol):
        report = eb_rank(random_schur_complement_channel(4, 5, 20, tol), tol)
        assert report.value == 4
        assert report.status == "certified"
        assert report.certificate is not None

    def test_depolarizing_is_cited(self, tol):
        report = eb_rank(depolarizing(3, tol), tol)
        assert report.value == 9
        assert report.status == "cited"
        assert report.certificate is None

    def test_transpose_plus_trace_is_cited(self, tol):
        report = eb_rank(werner_holevo(2, tol), tol)
        assert report.value == 4
        assert report.status == "cited"
        assert "unverified" in report.note

    def test_unrecognized_scaled_projection_refused(self, tol):
        with pytest.raises(OutOfScope):
            eb_rank(identity_channel(3, tol), tol)

    def test_refutation_propagates(self, tol):
        with pytest.raises(NotEntanglementBreaking):
            eb_rank(random_projection_choi_channel(2, 3, 4, tol), tol)


class TestPartialTranspose:
    def test_hand_example(self):
        j = np.arange(16, dtype=complex).reshape(4, 4)
        expected = np.array([
            [0, 1, 8, 9],
            [4, 5, 12, 13],
            [2, 3, 10, 11],
            [6, 7, 14, 15],
        ], dtype=complex)
        np.testing.assert_array_equal(partial_transpose(j, 2, 2), expected)

    def test_involution(self):
        rng = np.random.default_rng(21)
        j = random_complex_matrix(12, 12, rng)
        np.testing.assert_array_equal(
            partial_transpose(partial_transpose(j, 3, 4), 3, 4), j
        )

    def test_maximally_entangled_state_fails_ppt(self, tol):
        phi = np.zeros(4, dtype=complex)
        phi[0] = phi[3] = 1 / np.sqrt(2)
        rho = np.outer(phi, phi.conj())
        assert not is_ppt(rho, 2, 2, tol)

    def test_product_state_passes_ppt(self, tol):
        rng = np.random.default_rng(22)
        a = random_complex_matrix(2, 2, rng)
        b = random_complex_matrix(3, 3, rng)
        rho = np.kron(a @ a.conj().T, b @ b.conj().T)
        assert is_ppt(rho / np.trace(rho), 2, 3, tol)
