"""Command-line surface: verify suites, additivity-gap runs, channel descriptions.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .channels import (
    MultiUserChannel,
    apply_channel,
    check_trace_preserving,
    tensor_power,
)
from .protocols import (
    basis_codebook,
    build_two_use_code,
    capacity_lower_bound,
    certify_alpha_local_one,
    check_local_preparability,
    privacy_check,
    slot_index,
    teleport_qubit,
    teleportation_decode,
    verify_orthogonal_outputs,
)
from .renyi import additivity_gap_at_zero
from .specio import (
    Report,
    channel_from_spec,
    describe_channel,
    make_builtin,
    report_to_json,
)
from .subspaces import (
    certify_completely_entangled,
    exact_symmetry_checks,
    grid_product_overlap,
    symmetry_checks,
)
from .linalg import parity_phase, random_density, trace_distance

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

ALL_SUITES = ("properties", "ce", "two-use", "teleport", "privacy", "renyi")

# grid-oracle resolutions for the product-parameter counts that stay gridable
_GRID_RESOLUTIONS = {4: 40, 6: 14, 8: 8}


def _load_channel(args) -> MultiUserChannel:
    if args.builtin and args.spec:
        raise ValueError("give either --builtin or --spec, not both")
    if args.builtin:
        return make_builtin(args.builtin)
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            return channel_from_spec(json.load(fh))
    raise ValueError("one of --builtin or --spec is required")


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _default_seed() -> int:
    return int(os.environ.get("ZECAP_SEED", "0"))


def _slot_labels(channel: MultiUserChannel) -> list[str]:
    return [chr(ord("A") + i) for i in range(len(channel.sender_dims))]


def _product_param_count(dims) -> int:
    return sum(2 * (d - 1) for d in dims)


def _applicable_suites(channel: MultiUserChannel) -> list[str]:
    if channel.kind == "cq":
        return ["teleport"]
    suites = ["properties", "ce", "two-use"]
    if len(channel.sender_dims) >= 2 and len(set(channel.sender_dims)) == 1 \
            and len(channel.payload.u_slots) == len(channel.sender_dims):
        suites.append("privacy")
    if len(channel.sender_dims) == 2:
        suites.append("renyi")
    return suites


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _suite_properties(channel, report: Report, slots: list[int] | None) -> None:
    pl = channel.payload
    use_slots = slots if slots is not None else list(pl.u_slots)
    for pos, slot in enumerate(use_slots):
        u = parity_phase(channel.sender_dims[slot])
        float_report = symmetry_checks(pl.s0, pl.s1, u, slots=[slot],
                                       include_transpose=(pos == 0),
                                       include_products=True)
        for check in float_report.checks:
            if pos > 0 and check.slot is None:
                continue        # transpose/orthogonality are slot independent
            tag = f"@{check.slot}" if check.slot is not None else ""
            report.add(f"properties/{check.name}{tag}",
                       "projector symmetry residual (float)",
                       check.residual, check.tolerance, check.passed)
    if pl.exact_s0 is not None:
        exact = exact_symmetry_checks(channel.sender_dims, pl.exact_s0, use_slots)
        for name, ok in exact.items():
            report.add(f"properties/exact/{name}",
                       "projector symmetry identity (exact field arithmetic)",
                       ok, None, ok)


def _suite_ce(channel, report: Report, seed: int, restarts: int | None) -> None:
    pl = channel.payload
    for label, sub in (("S0", pl.s0), ("S1", pl.s1)):
        cert = certify_completely_entangled(sub, restarts=restarts, seed=seed,
                                            label=f"{channel.name}/{label}")
        report.add(f"ce/{label}", "no product state found in the subspace",
                   cert.max_overlap_found, 1.0 - cert.gap,
                   cert.verdict == "certified-CE")
        params = _product_param_count(channel.sender_dims)
        if params in _GRID_RESOLUTIONS:
            res = _GRID_RESOLUTIONS[params]
            grid_val = grid_product_overlap(sub, res)
            agree = abs(grid_val - cert.max_overlap_found) <= 0.05
            report.add(f"ce/{label}/grid",
                       f"grid oracle (resolution {res}) agrees with the "
                       "alternating search within 0.05",
                       grid_val, 0.05, agree)
    alpha = certify_alpha_local_one(channel, restarts=restarts, seed=seed)
    report.add("ce/alpha-local-one",
               "single use cannot transmit any bit perfectly",
               alpha.alpha_local_one, None, alpha.alpha_local_one)


def _suite_two_use(channel, report: Report, slots: list[int] | None) -> None:
    power = tensor_power(channel, 2)
    m = len(channel.sender_dims)
    labels = _slot_labels(channel)
    all_slots = list(range(2 * m))
    wanted = slots if slots is not None else [s for s in all_slots
                                              if (s % m) in channel.payload.u_slots]
    for s in wanted:
        label = labels[s % m] + ("'" if s >= m else "")
        code = build_two_use_code(channel, s)
        prep_ok = all(check_local_preparability(psi, code.dims, code.sender_partition)
                      for psi in code.inputs)
        report.add(f"two-use/{label}/local", "codewords are product across senders",
                   prep_ok, None, prep_ok)
        cert = verify_orthogonal_outputs(power, code)
        off = float(np.max(np.abs(cert.overlaps - np.diag(np.diag(cert.overlaps)))))
        report.add(f"two-use/{label}/orthogonal",
                   "two-use outputs for the two messages are orthogonal",
                   off, 1e-9, cert.orthogonal)
    report.add("two-use/rate", "two distinguishable inputs over two uses",
               capacity_lower_bound(2, 2), None,
               capacity_lower_bound(2, 2) == 0.5)


def _suite_teleport(channel, report: Report, seed: int) -> None:
    power = tensor_power(channel, 2)
    rho00 = np.zeros((4, 4), dtype=complex)
    rho00[0, 0] = 1.0
    rho01 = np.zeros((4, 4), dtype=complex)
    rho01[1, 1] = 1.0
    p_first = teleportation_decode(apply_channel(power, rho00))[0]
    p_second = teleportation_decode(apply_channel(power, rho01))[1]
    report.add("teleport/codeword-0", "decoder identifies the first codeword",
               1.0 - p_first, 1e-10, abs(1.0 - p_first) <= 1e-10)
    report.add("teleport/codeword-1", "decoder identifies the second codeword",
               1.0 - p_second, 1e-10, abs(1.0 - p_second) <= 1e-10)
    code = basis_codebook(channel, 2, [(0, 0), (0, 1)])
    cert = verify_orthogonal_outputs(power, code)
    report.add("teleport/locc-decoder",
               "orthogonal outputs carry a constructive local decoder",
               cert.decoder, None, cert.decoder == "teleportation-LOCC")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(25):
        rho = random_density(2, rng)
        worst = max(worst, trace_distance(teleport_qubit(rho), rho))
    report.add("teleport/identity", "teleportation is the identity map",
               worst, 1e-10, worst <= 1e-10)
    report.add("teleport/rate", "one bit over two uses",
               capacity_lower_bound(2, 2), None, True)
    report.add("teleport/assumed-indistinguishable",
               "single-use outputs taken LOCC-indistinguishable (external fact, "
               "not verified here)", True, None, True, informational=True)


def _suite_privacy(channel, report: Report) -> None:
    m = len(channel.sender_dims)
    labels = _slot_labels(channel)
    for i in range(m):
        for j in range(i + 1, m):
            ok, details = privacy_check(channel, (i, j))
            report.add(f"privacy/{labels[i]}{labels[j]}",
                       "the channel output does not reveal which sender signalled",
                       details["output_difference"], 1e-9, ok)


def _suite_renyi(channel, report: Report, seed: int, budget: int,
                 ce_restarts: int | None = None) -> None:
    gap = additivity_gap_at_zero(channel.payload.s0, budget=budget, seed=seed,
                                 ce_restarts=ce_restarts)
    report.extra["renyi_gap"] = gap.verdict
    report.add("renyi/single-use-rank",
               "certified minimum single-use output rank",
               gap.single_use_floor, None, gap.single_use_floor >= 2)
    report.add("renyi/two-use-rank", "best two-use output rank found",
               gap.two_use_rank, None,
               gap.two_use_rank < gap.single_use_floor ** 2)
    report.add("renyi/verdict", "two uses beat twice the single-use bits",
               gap.verdict, None, gap.verdict == "gap-found")
    if gap.verdict == "inconclusive":
        report.verdict = "inconclusive"


def cmd_verify(args) -> int:
    channel = _load_channel(args)
    seed = args.seed if args.seed is not None else _default_seed()
    applicable = _applicable_suites(channel)
    if args.suite == "all":
        suites = applicable
    else:
        suites = [s.strip() for s in args.suite.split(",") if s.strip()]
        unknown = [s for s in suites if s not in ALL_SUITES]
        if unknown:
            return _usage_error(f"unknown suite(s): {', '.join(unknown)}")
        not_applicable = [s for s in suites if s not in applicable]
        if not_applicable:
            return _usage_error(
                f"suite(s) {', '.join(not_applicable)} do not apply to "
                f"{channel.name or 'this channel'}")
    slots = None
    if args.slots:
        slots = [slot_index(channel, s) for s in args.slots.split(",")]
    report = Report(command="verify", channel=channel.name or "custom", seed=seed)
    report.extra["suites"] = ",".join(suites)
    tp = check_trace_preserving(channel)
    report.add("channel/trace-preserving", "completeness of the measurement/outputs",
               tp, 1e-9, tp <= 1e-9)
    for suite in suites:
        if suite == "properties":
            _suite_properties(channel, report, [s % len(channel.sender_dims)
                                                for s in slots] if slots else None)
        elif suite == "ce":
            _suite_ce(channel, report, seed, args.restarts)
        elif suite == "two-use":
            _suite_two_use(channel, report, slots)
        elif suite == "teleport":
            _suite_teleport(channel, report, seed)
        elif suite == "privacy":
            _suite_privacy(channel, report)
        elif suite == "renyi":
            _suite_renyi(channel, report, seed, args.budget, args.restarts)
    report.finalize()
    text = report_to_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if report.verdict == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_PASS if report.verdict == "pass" else EXIT_FAIL


def cmd_renyi_gap(args) -> int:
    channel = _load_channel(args)
    seed = args.seed if args.seed is not None else _default_seed()
    if channel.kind != "binary-projective" or len(channel.sender_dims) != 2:
        return _usage_error("the gap check needs a two-sender projective channel")
    report = Report(command="renyi-gap", channel=channel.name or "custom", seed=seed)
    try:
        gap = additivity_gap_at_zero(channel.payload.s0, budget=args.budget,
                                     seed=seed, ce_restarts=args.restarts)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.extra.update({
        "single_use_rank": gap.single_use_rank,
        "single_use_floor": gap.single_use_floor,
        "two_use_rank": gap.two_use_rank,
        "single_use_bits": gap.single_use_bits,
        "two_use_bits": gap.two_use_bits,
        "notes": gap.notes,
    })
    if gap.two_use_result is not None:
        report.extra["witness"] = [
            [float(f"{z.real:.15g}"), float(f"{z.imag:.15g}")]
            for z in gap.two_use_result.achiever
        ]
    report.add("renyi/complement-ce", "complement contains no product state",
               gap.complement_certificate.verdict if gap.complement_certificate else "n/a",
               None,
               gap.complement_certificate is None
               or gap.complement_certificate.verdict == "certified-CE")
    report.add("renyi/verdict", "two uses beat twice the single-use bits",
               gap.verdict, None, gap.verdict in ("gap-found", "no-gap"))
    report.verdict = {"gap-found": "pass", "no-gap": "pass"}.get(gap.verdict,
                                                                 "inconclusive")
    text = report_to_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if report.verdict == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_PASS if report.verdict == "pass" else EXIT_FAIL


def cmd_describe(args) -> int:
    try:
        channel = make_builtin(args.name)
        doc = describe_channel(channel)
    except ValueError as exc:
        return _usage_error(str(exc))
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zecap",
        description="Zero-error coding certificates for small multi-sender "
                    "quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--builtin", help="builtin channel: e12, e21, em1:<m>, variant34")
    common.add_argument("--spec", help="path to a JSON channel description")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for all randomized searches (default: "
                             "$ZECAP_SEED or 0)")
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    p_verify = sub.add_parser("verify", parents=[common],
                              help="run verification suites and emit a report")
    p_verify.add_argument("--suite", default="all",
                          help="comma list from: " + ",".join(ALL_SUITES) +
                               " (default: all applicable)")
    p_verify.add_argument("--slots", help="restrict slot-dependent checks, "
                                          "e.g. A,B or A,A',B,B'")
    p_verify.add_argument("--restarts", type=int, default=None,
                          help="restart budget for product-state searches")
    p_verify.add_argument("--budget", type=int, default=800,
                          help="optimizer budget for the p=0 gap suite")
    p_verify.set_defaults(func=cmd_verify)

    p_gap = sub.add_parser("renyi-gap", parents=[common],
                           help="p=0 additivity gap for the channel's subspace")
    p_gap.add_argument("--budget", type=int, default=5000,
                       help="optimizer restart budget for the two-use search")
    p_gap.add_argument("--restarts", type=int, default=None,
                       help="restart budget for the complement certification")
    p_gap.set_defaults(func=cmd_renyi_gap)

    p_desc = sub.add_parser("describe", help="print a builtin channel as a spec file")
    p_desc.add_argument("name", help="e12, e21, em1:<m> or variant34")
    p_desc.add_argument("--out", help="write the JSON description here")
    p_desc.set_defaults(func=cmd_describe)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage problems; normalize to the usage code
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
