"""Batch command-line front end: generate, analyze, certify, and report on
channels stored as JSON files.

Exit codes are a stable contract: 0 success, 2 input error, 4 refuted
(not entanglement breaking), 5 out of scope (Choi matrix not a projection),
3 numerical inconsistency.  With several input files, processing runs in
parallel, output follows the input order, and the exit code is the first
nonzero one in that order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .algebra import multiplicative_domain, structure
from .certify import certify, schur_normal_form
from .channel import (
    ChoiClass,
    choi,
    classify_complement_adjoint,
    complement_adjoint,
    load_channel,
    minimal_kraus,
    save_channel,
)
from .errors import (
    EBCertError,
    NotEntanglementBreaking,
    OutOfScope,
)
from .numerics import ToleranceConfig
from .zoo import (
    depolarizing,
    random_channel,
    random_correlation,
    random_projection_choi_channel,
    random_schur_complement_channel,
    schur_channel,
    werner_holevo,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_REFUTED = 4
EXIT_OUT_OF_SCOPE = 5

FAMILIES = (
    "schur",
    "schur-complement",
    "werner-holevo",
    "depolarizing",
    "random",
    "random-projection-choi",
)


def _add_tolerance_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol-rank", type=float, default=None,
                        help="relative singular-value cutoff for rank decisions")
    parser.add_argument("--tol-eig", type=float, default=None,
                        help="eigenvalue clustering radius")
    parser.add_argument("--tol-verify", type=float, default=None,
                        help="residual bound for equality checks")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized steps (default: EBCERT_SEED or 0)")


def _tolerances(args) -> ToleranceConfig:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("EBCERT_SEED", "0"))
    base = ToleranceConfig()
    return ToleranceConfig(
        eps_rank=args.tol_rank if args.tol_rank is not None else base.eps_rank,
        eps_eig=args.tol_eig if args.tol_eig is not None else base.eps_eig,
        eps_verify=args.tol_verify if args.tol_verify is not None else base.eps_verify,
        seed=seed,
    )


def _judged(value: float, tolerance: float) -> dict:
    return {"value": float(value), "tolerance": float(tolerance)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ebcert",
        description="Analyze quantum channels: Choi matrices, complements, "
                    "multiplicative domains, entanglement-breaking certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a channel file from a named family")
    gen.add_argument("family", choices=FAMILIES)
    gen.add_argument("--n", type=int, default=None, help="input dimension")
    gen.add_argument("--m", type=int, default=None, help="output dimension")
    gen.add_argument("--d", type=int, default=None,
                     help="Kraus count (random) or dimension (werner-holevo)")
    gen.add_argument("--k", type=int, default=None,
                     help="Gram-vector dimension for the schur family")
    gen.add_argument("--ensure-eb", action="store_true",
                     help="plant an entanglement-breaking projection-Choi instance")
    gen.add_argument("--out", type=Path, default=None, help="output path")
    _add_tolerance_args(gen)

    analyze = sub.add_parser("analyze", help="full report for channel files")
    analyze.add_argument("files", nargs="+", type=Path)
    analyze.add_argument("--format", choices=("text", "json"), default="text")
    _add_tolerance_args(analyze)

    cert = sub.add_parser("certify", help="entanglement-breaking certification")
    cert.add_argument("files", nargs="+", type=Path)
    cert.add_argument("--format", choices=("text", "json"), default="text")
    cert.add_argument("--out", type=Path, default=None,
                      help="certificate path (single input file only; "
                           "default <input>.cert.json)")
    _add_tolerance_args(cert)

    nf = sub.add_parser("normal-form", help="entrywise-product normal form of a "
                                            "certified channel")
    nf.add_argument("file", type=Path)
    nf.add_argument("--format", choices=("text", "json"), default="text")
    nf.add_argument("--out", type=Path, default=None, help="normal-form dump path")
    _add_tolerance_args(nf)

    return parser


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def _require(args, names: list[str]) -> list[int]:
    values = []
    for name in names:
        value = getattr(args, name)
        if value is None or value < 1:
            raise ValueError(f"family {args.family} needs --{name} >= 1")
        values.append(value)
    return values


def _generate(args, tol: ToleranceConfig):
    family = args.family
    if family == "schur":
        (n,) = _require(args, ["n"])
        k = args.k if args.k is not None else n
        corr = random_correlation(n, k, np.random.SeedSequence([tol.seed, 0x6E0]), tol)
        return schur_channel(corr, tol), f"schur-n{n}-k{k}"
    if family == "schur-complement":
        n, m = _require(args, ["n", "m"])
        ch = random_schur_complement_channel(n, m, np.random.SeedSequence([tol.seed, 0x6E1]), tol)
        return ch, f"schur-complement-n{n}-m{m}"
    if family == "werner-holevo":
        (d,) = _require(args, ["d"])
        return werner_holevo(d, tol), f"werner-holevo-d{d}"
    if family == "depolarizing":
        (n,) = _require(args, ["n"])
        return depolarizing(n, tol), f"depolarizing-n{n}"
    if family == "random":
        n, m, d = _require(args, ["n", "m", "d"])
        return random_channel(n, m, d, np.random.SeedSequence([tol.seed, 0x6E2]), tol), \
            f"random-n{n}-m{m}-d{d}"
    if family == "random-projection-choi":
        n, m = _require(args, ["n", "m"])
        ch = random_projection_choi_channel(n, m, tol.seed, tol, ensure_eb=args.ensure_eb)
        return ch, f"random-projection-choi-n{n}-m{m}"
    raise ValueError(f"unknown family {family}")


def _cmd_gen(args) -> int:
    tol = _tolerances(args)
    try:
        channel, stem = _generate(args, tol)
    except (ValueError, EBCertError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = args.out if args.out is not None else Path(f"{stem}.json")
    save_channel(channel, out)
    print(f"{out}: {args.family} channel, {channel.input_dim}x{channel.input_dim} -> "
          f"{channel.output_dim}x{channel.output_dim}, {len(channel)} Kraus operators, "
          f"tp residual {channel.tp_residual:.3e}, seed {tol.seed}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _analyze_file(path: Path, tol: ToleranceConfig) -> tuple[dict, int]:
    report: dict = {"file": str(path)}
    try:
        channel = load_channel(path, tol)
    except (OSError, ValueError, EBCertError) as exc:
        report["error"] = f"input: {exc}"
        return report, EXIT_INPUT

    try:
        t0 = time.perf_counter()
        report["channel"] = {
            "n": channel.input_dim,
            "m": channel.output_dim,
            "kraus_count": len(channel),
            "tp_residual": _judged(channel.tp_residual, tol.eps_verify),
        }
        cr = choi(channel, tol)
        report["choi"] = {
            "rank": cr.choi_rank,
            "trace": _judged(float(np.trace(cr.choi).real), tol.eps_verify),
            "classification": cr.classification.value,
            "alpha": None if cr.alpha is None else _judged(cr.alpha, tol.eps_eig),
            "eigenvalues": [float(v) for v in cr.eigenvalues],
            "normalized_state_eigenvalues": [
                float(v) / channel.input_dim for v in cr.eigenvalues
            ],
        }
        ca = classify_complement_adjoint(channel, tol)
        report["complement_adjoint"] = {
            "kind": ca.kind.value,
            "alpha": ca.alpha,
            "residual": _judged(ca.residual, tol.eps_verify),
        }
        if cr.classification is ChoiClass.PROJECTION:
            adjoint = complement_adjoint(minimal_kraus(channel, tol), tol)
            dom = multiplicative_domain(adjoint, tol)
            st = structure(dom, tol)
            report["algebra"] = {
                "dimension": dom.dimension,
                "basis": [_complex_matrix_pairs(b) for b in dom.basis],
                "blocks": [list(p) for p in st.pairs()],
                "multiplicity_free": st.multiplicity_free,
            }
        report["timings"] = {"analyze_seconds": time.perf_counter() - t0}
        return report, EXIT_OK
    except EBCertError as exc:
        report["error"] = f"numerical: {exc}"
        return report, EXIT_NUMERICAL


def _print_analysis_text(report: dict) -> None:
    print(f"== {report['file']}")
    if "error" in report:
        print(f"  error: {report['error']}")
        return
    ch = report["channel"]
    print(f"  channel: {ch['n']} -> {ch['m']}, {ch['kraus_count']} Kraus operators; "
          f"tp residual {ch['tp_residual']['value']:.3e} "
          f"(tol {ch['tp_residual']['tolerance']:.1e})")
    cr = report["choi"]
    alpha = "" if cr["alpha"] is None else f", scalar {cr['alpha']['value']:.9g}"
    print(f"  choi: rank {cr['rank']}, {cr['classification']}{alpha}; "
          f"trace {cr['trace']['value']:.9g} (tol {cr['trace']['tolerance']:.1e})")
    levels = [v for v in cr["normalized_state_eigenvalues"] if v > 1e-12]
    shown = ", ".join(f"{v:.6g}" for v in levels[:8]) + (", ..." if len(levels) > 8 else "")
    print(f"  normalized state spectrum (nonzero): {shown}")
    ca = report["complement_adjoint"]
    note = "complement adjoint preserves traces exactly when the Choi matrix is a projection"
    print(f"  complement adjoint: {ca['kind']}"
          + (f", scalar {ca['alpha']:.9g}" if ca["alpha"] is not None else "")
          + f"; residual {ca['residual']['value']:.3e} (tol {ca['residual']['tolerance']:.1e})")
    print(f"    [{note}]")
    if "algebra" in report:
        alg = report["algebra"]
        verdict = ("rank-one Kraus decomposition of minimal length exists"
                   if alg["multiplicity_free"]
                   else "a repeated tensor factor rules out rank-one Kraus decompositions")
        print(f"  multiplicative domain of the complement adjoint: dimension {alg['dimension']}, "
              f"blocks {alg['blocks']}, multiplicity-free: {alg['multiplicity_free']}")
        print(f"    [{verdict}]")
    print(f"  elapsed: {report['timings']['analyze_seconds']:.3f}s")


def _cmd_analyze(args) -> int:
    tol = _tolerances(args)
    with ThreadPoolExecutor(max_workers=min(8, len(args.files))) as pool:
        results = list(pool.map(lambda p: _analyze_file(p, tol), args.files))
    for report, _ in results:
        if args.format == "json":
            print(json.dumps(report, indent=2))
        else:
            _print_analysis_text(report)
    for _, code in results:
        if code != EXIT_OK:
            return code
    return EXIT_OK


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------

def _certify_file(path: Path, tol: ToleranceConfig, out: Path | None) -> tuple[dict, int]:
    report: dict = {"file": str(path)}
    try:
        channel = load_channel(path, tol)
    except (OSError, ValueError, EBCertError) as exc:
        report["error"] = f"input: {exc}"
        return report, EXIT_INPUT
    t0 = time.perf_counter()
    try:
        cert = certify(channel, tol)
    except OutOfScope as refusal:
        report["refusal"] = refusal.payload()
        report["timings"] = {"certify_seconds": time.perf_counter() - t0}
        return report, EXIT_OUT_OF_SCOPE
    except NotEntanglementBreaking as refusal:
        report["refusal"] = refusal.payload()
        report["timings"] = {"certify_seconds": time.perf_counter() - t0}
        return report, EXIT_REFUTED
    except EBCertError as exc:
        report["error"] = f"numerical: {exc}"
        return report, EXIT_NUMERICAL
    cert_path = out if out is not None else path.with_suffix(".cert.json")
    with open(cert_path, "w", encoding="utf-8") as fh:
        json.dump(cert.to_json_dict(), fh, indent=2)
        fh.write("\n")
    report["certificate"] = cert.to_json_dict()
    report["certificate_file"] = str(cert_path)
    report["timings"] = {"certify_seconds": time.perf_counter() - t0}
    return report, EXIT_OK


def _print_certify_text(report: dict, tol: ToleranceConfig) -> None:
    print(f"== {report['file']}")
    if "error" in report:
        print(f"  error: {report['error']}")
        return
    if "refusal" in report:
        ref = report["refusal"]
        print(f"  refused ({ref['reason']}): {ref['message']}")
        if ref["reason"] == "out_of_scope":
            print("    [the equality of entanglement-breaking and Choi ranks is specific "
                  "to projection Choi matrices; scaled projections admit counterexamples]")
        if ref.get("ppt_violated"):
            print("    [cross-check: negative partial transpose independently rules out "
                  "separability of the Choi matrix]")
        return
    cert = report["certificate"]
    print(f"  certified entanglement breaking: eb_rank = choi_rank = {cert['eb_rank']}")
    print("    [rank-one Kraus decomposition at minimal length; no shorter resolution "
          "of the identity exists]")
    worst = max(cert["residuals"].values()) if cert["residuals"] else 0.0
    print(f"  certificate residuals: worst {worst:.3e} (tol {tol.eps_verify:.1e}); "
          f"written to {report['certificate_file']}")
    print(f"  elapsed: {report['timings']['certify_seconds']:.3f}s")


def _cmd_certify(args) -> int:
    tol = _tolerances(args)
    if args.out is not None and len(args.files) != 1:
        print("error: --out requires exactly one input file", file=sys.stderr)
        return EXIT_INPUT
    with ThreadPoolExecutor(max_workers=min(8, len(args.files))) as pool:
        results = list(pool.map(lambda p: _certify_file(p, tol, args.out), args.files))
    for report, _ in results:
        if args.format == "json":
            print(json.dumps(report, indent=2))
        else:
            _print_certify_text(report, tol)
    for _, code in results:
        if code != EXIT_OK:
            return code
    return EXIT_OK


# ---------------------------------------------------------------------------
# normal-form
# ---------------------------------------------------------------------------

def _complex_matrix_pairs(m: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _cmd_normal_form(args) -> int:
    tol = _tolerances(args)
    try:
        channel = load_channel(args.file, tol)
    except (OSError, ValueError, EBCertError) as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        cert = certify(channel, tol)
        form = schur_normal_form(cert, channel, tol)
    except OutOfScope as refusal:
        print(f"refused (out_of_scope): {refusal}", file=sys.stderr)
        return EXIT_OUT_OF_SCOPE
    except NotEntanglementBreaking as refusal:
        print(f"refused (not_entanglement_breaking): {refusal}", file=sys.stderr)
        return EXIT_REFUTED
    except EBCertError as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    dump = {
        "file": str(args.file),
        "basis_change": _complex_matrix_pairs(form.basis_change),
        "correlation": _complex_matrix_pairs(form.correlation),
        "residual": {"value": form.residual, "tolerance": tol.eps_verify},
    }
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(dump, fh, indent=2)
            fh.write("\n")
    if args.format == "json":
        print(json.dumps(dump, indent=2))
    else:
        n = form.correlation.shape[0]
        print(f"== {args.file}")
        print(f"  after the input rotation, the complement multiplies entry (i, j) by the "
              f"conjugated correlation entry; residual {form.residual:.3e} "
              f"(tol {tol.eps_verify:.1e})")
        print("  correlation matrix (modulus):")
        for i in range(n):
            print("    " + "  ".join(f"{abs(form.correlation[i, j]):.6f}" for j in range(n)))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen":
        return _cmd_gen(args)
    if args.command == "analyze":
        return _cmd_analyze(args)
    if args.command == "certify":
        return _cmd_certify(args)
    if args.command == "normal-form":
        return _cmd_normal_form(args)
    parser.error(f"unknown command {args.command}")
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
