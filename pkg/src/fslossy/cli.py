"""Command-line entry point: ``fslossy <command> ...``.

Exit codes: 0 success, 2 usage or parameter error, 3 malformed input file,
4 enumeration limit exceeded, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bounds import (LosslessUndecidedError, NotLosslessError, ball_stats, best_bound, chain_report,
                     generalized_kraft_check)
from .core import (DEFAULT_ENUM_LIMIT, Alphabet, Budget, DistortionModel, EnumerationLimitError,
                   FormatError, FslossyError, Sequence, parse_fraction)
from .experiment import ExperimentSpec, check_monotone, gnuplot_script, rows_to_csv, run_experiment
from .fsm import (FsleSpec, FsreSpec, check_distortion_compliance, check_information_lossless,
                  check_length_conservation, fsre_run, parse_machine, verify_witness)
from .gen import generate
from .lz78 import clogc
from .schemes import DEFAULT_MAX_DRAWS, decode, encode, measure_rho
from .seqio import load_sequence, save_sequence
from .universal import build_universal

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_LIMIT, EXIT_VERIFY = 0, 2, 3, 4, 5


class VerificationFailed(FslossyError):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return parse_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _str_list(text: str) -> list[str]:
    return [t for t in text.split(",") if t]


def _load(args) -> Sequence:
    return load_sequence(args.input, args.alphabet)


def _model(args, x: Sequence) -> DistortionModel:
    model = DistortionModel.named(args.dist, x.alphabet.size, getattr(args, "beta", None))
    if model.alpha != x.alphabet.size:
        raise ValueError(f"distortion model has alpha={model.alpha}, source has {x.alphabet.size}")
    return model


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report_dict(rep, budget: Fraction | None) -> dict:
    out = {
        "total_bits": rep.total_bits,
        "rho": rep.rho,
        "header_bits": rep.header_bits,
        "escapes": rep.escapes,
        "block_bits": rep.block_bits,
    }
    if rep.block_distortions is not None:
        out["block_distortions"] = [str(d) for d in rep.block_distortions]
        out["semifaithful"] = rep.semifaithful(budget)
    return out


def _print_report(d: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(d, sort_keys=True))
        return
    for key in ("scheme", "n", "k", "D", "total_bits", "header_bits", "rho", "escapes",
                "semifaithful"):
        if key in d:
            print(f"{key}: {d[key]}")


def cmd_compress(args) -> int:
    x = _load(args)
    model = _model(args, x)
    res = encode(x, args.scheme, args.k, model, args.D, ell=args.ell, seed=args.seed,
                 max_draws=args.max_draws, objective=args.objective, limit=args.limit)
    Path(args.output).write_bytes(res.data)
    rep = measure_rho(res.data, x, include_header=args.include_header)
    d = _report_dict(rep, res.header.budget.block_budget)
    d.update(scheme=res.header.scheme, n=len(x), k=args.k, D=str(args.D))
    _print_report(d, args.json)
    return EXIT_OK if d["semifaithful"] else EXIT_VERIFY


def cmd_decompress(args) -> int:
    data = Path(args.input).read_bytes()
    res = decode(data)
    save_sequence(args.output, res.xhat, raw=args.raw)
    d = {"scheme": res.header.scheme, "n": res.header.n, "k": res.header.k,
         "D": str(res.header.D)}
    source = load_sequence(args.source, args.alphabet) if args.source else None
    rep = measure_rho(data, source, include_header=args.include_header)
    d.update(_report_dict(rep, res.header.budget.block_budget))
    _print_report(d, args.json)
    return EXIT_VERIFY if d.get("semifaithful") is False else EXIT_OK


def cmd_bounds(args) -> int:
    x = _load(args)
    model = _model(args, x)
    units = Budget(args.D, args.k).units(model)
    best = best_bound(x, args.k, args.ell, args.q, model, args.D, args.limit)
    u = None
    try:
        u = build_universal(args.k, model.beta)
    except EnumerationLimitError:
        pass
    rows = []
    for i, blk in enumerate(x.blocks(args.k)):
        st = ball_stats(blk.symbols, model, units, args.ell, args.limit)
        row = {"block_index": i, "min_clogc": clogc(st.min_c),
               "min_entropy_per_ell": st.min_entropy / args.ell, "min_lz": st.min_lz,
               "neg_log_sum": "", "neg_log_u": ""}
        if u is not None:
            ch = chain_report(blk, model, args.D, args.limit)
            row["neg_log_sum"], row["neg_log_u"] = ch.neg_log_sum, ch.neg_log_u
        rows.append(row)
    cols = ["block_index", "min_clogc", "min_entropy_per_ell", "min_lz", "neg_log_sum",
            "neg_log_u", "bound1", "bound2", "best"]
    rows.append({"block_index": "summary", "bound1": best.bound1.value,
                 "bound2": best.bound2.value, "best": best.value})
    if args.json:
        print(json.dumps({"blocks": rows[:-1], "bound1": best.bound1.value,
                          "bound2": best.bound2.value, "best": best.value,
                          "correction1": best.bound1.correction,
                          "correction2": best.bound2.correction}, sort_keys=True))
    else:
        _emit(rows_to_csv(rows, cols), args.output)
    return EXIT_OK


def cmd_chain(args) -> int:
    x = _load(args)
    model = _model(args, x)
    cols = ["block_index", "min_clogc", "k_eps", "min_lz", "neg_log_sum", "neg_log_u",
            "clogc_ge_lz", "lz_ge_sum", "sum_ge_u"]
    rows = []
    bad = 0
    for i, blk in enumerate(x.blocks(args.k)):
        ch = chain_report(blk, model, args.D, args.limit)
        flags = (ch.clogc_vs_lz(), ch.lz_vs_sum(), ch.sum_vs_u())
        bad += not all(flags)
        rows.append({"block_index": i, "min_clogc": ch.min_clogc, "k_eps": ch.k_eps,
                     "min_lz": ch.min_lz, "neg_log_sum": ch.neg_log_sum,
                     "neg_log_u": ch.neg_log_u, "clogc_ge_lz": int(flags[0]),
                     "lz_ge_sum": int(flags[1]), "sum_ge_u": int(flags[2])})
    _emit(rows_to_csv(rows, cols), args.output)
    if args.verify:
        print(f"chain: {len(rows) - bad}/{len(rows)} blocks ordered", file=sys.stderr)
        if bad:
            return EXIT_VERIFY
    return EXIT_OK


def cmd_gen(args) -> int:
    alphabet = Alphabet.from_labels(args.labels) if args.labels else None
    if args.generator == "iid" and not args.p:
        raise ValueError("iid needs --p")
    if args.generator == "markov" and not args.matrix:
        raise ValueError("markov needs --matrix")
    if args.generator == "periodic" and not args.pattern:
        raise ValueError("periodic needs --pattern")
    x = generate(args.generator, args.n, args.seed, p=args.p, matrix=args.matrix,
                 pattern=args.pattern, alphabet=alphabet)
    if args.output:
        save_sequence(args.output, x, raw=args.raw)
    else:
        print(x.to_text())
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.config:
        spec = ExperimentSpec.from_json(Path(args.config).read_text())
    else:
        params = {}
        if args.p:
            params["p"] = args.p
        if args.matrix:
            params["matrix"] = args.matrix
        if args.pattern:
            params["pattern"] = args.pattern
        kw = dict(generator=args.generator, seeds=args.seeds, n=args.n, file=args.file,
                  k=args.k, ell=args.ell, q=args.q, D=args.D, schemes=args.schemes,
                  dist=args.dist, max_draws=args.max_draws, limit=args.limit)
        if params or args.generator != "markov":
            kw["params"] = params
        spec = ExperimentSpec(**kw)
    rows = run_experiment(spec, jobs=args.jobs)
    _emit(rows_to_csv(rows), args.output)
    if args.gnuplot:
        Path(args.gnuplot).write_text(gnuplot_script(args.output or "results.csv"))
    if args.verify:
        problems = check_monotone(rows)
        problems += [f"rho < best: {r}" for r in rows if r["rho_ge_best"] == 0]
        for p in problems:
            print(p, file=sys.stderr)
        if problems:
            return EXIT_VERIFY
    return EXIT_OK


def _fsm_report(args) -> tuple[dict, bool]:
    m, labels = parse_machine(Path(args.machine).read_text())
    rep: dict = {}
    ok = True
    if isinstance(m, FsreSpec):
        rep["kind"] = "FSRE"
        rep.update(k=m.k, states=m.n_states, alpha=m.alpha, beta=m.beta)
        lc = check_length_conservation(m, args.limit)
        rep["length_conservation"] = {"passed": lc.compliant, "checked_blocks": lc.checked_blocks,
                                      "reason": lc.reason}
        ok &= lc.compliant
        if args.D is not None:
            model = DistortionModel.named(args.dist, m.alpha, m.beta)
            dc = check_distortion_compliance(m, model, Budget(args.D, m.k), args.limit)
            rep["distortion_compliance"] = {"passed": dc.compliant, "D": str(args.D),
                                            "checked_blocks": dc.checked_blocks,
                                            "reason": dc.reason}
            ok &= dc.compliant
        if args.trace is not None:
            alph = Alphabet.from_labels(labels) if labels else Alphabet(m.alpha)
            out_alph = Alphabet.from_labels(labels) if labels and m.beta == m.alpha else None
            run = fsre_run(m, Sequence.from_text(args.trace, alph), out_alph)
            rep["trace"] = {"input": args.trace, "xhat": run.xhat.to_text(),
                            "outputs": [Sequence(y, run.xhat.alphabet).to_text() or "-"
                                        for y in run.y],
                            "states": list(run.states)}
    else:
        rep["kind"] = "FSLE"
        rep.update(q=m.q, beta=m.beta)
        il_len = args.il_max_len if args.il_max_len is not None else 2 * m.q * m.q + args.ell
        il = check_information_lossless(m, il_len, budget=args.il_budget)
        rep["information_lossless"] = {"status": il.status, "max_len": il.max_len,
                                       "exhaustive": il.exhaustive, "explored": il.explored}
        if il.witness is not None:
            z0, a, b = il.witness
            rep["information_lossless"]["witness"] = {
                "initial_state": z0, "input1": list(a), "input2": list(b),
                "output": m.output(z0, a)[0], "final_state": m.output(z0, a)[1],
                "verified": verify_witness(m, il.witness)}
        ok &= il.status == "no_violation"
        if il.status == "no_violation":
            kr = generalized_kraft_check(m, args.ell, il_len, args.il_budget, args.limit)
            rep["kraft"] = {"ell": args.ell, "lhs": str(kr.lhs), "lhs_float": float(kr.lhs),
                            "rhs": kr.rhs, "passed": kr.passed}
            ok &= kr.passed
    rep["passed"] = bool(ok)
    return rep, ok


def _print_fsm(rep: dict) -> None:
    print(f"{rep['kind']} machine")
    for key in ("length_conservation", "distortion_compliance", "information_lossless", "kraft"):
        if key in rep:
            body = rep[key]
            status = body.get("status") or ("pass" if body.get("passed") else "FAIL")
            extra = {k: v for k, v in body.items() if k not in ("status", "passed")}
            print(f"  {key}: {status} {json.dumps(extra, sort_keys=True)}")
    if "trace" in rep:
        t = rep["trace"]
        print(f"  trace: {t['input']} -> {t['xhat']} (outputs {' '.join(t['outputs'])})")
    print("all checks passed" if rep["passed"] else "CHECK FAILED")


def cmd_fsm_check(args) -> int:
    try:
        rep, ok = _fsm_report(args)
    except LosslessUndecidedError as e:
        raise VerificationFailed(str(e)) from None
    if args.json:
        print(json.dumps(rep, sort_keys=True))
    else:
        _print_fsm(rep)
    return EXIT_OK if ok else EXIT_VERIFY


def _add_common(p, k=True, D=True):
    p.add_argument("--alphabet", help="symbol labels in index order (default: sorted distinct chars)")
    p.add_argument("--dist", default="hamming", help="hamming, absolute or file=PATH")
    p.add_argument("--limit", type=int, default=DEFAULT_ENUM_LIMIT, help="enumeration ceiling")
    if k:
        p.add_argument("--k", type=int, required=True, help="block length")
    if D:
        p.add_argument("--D", type=_fraction, default=Fraction(0), help="per-letter distortion, num/den")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fslossy", description="Finite-state lossy compression toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="encode a sequence file into a container")
    p.add_argument("input")
    p.add_argument("output")
    _add_common(p)
    p.add_argument("--scheme", type=str.upper, choices=["A", "B", "C"], default="A")
    p.add_argument("--ell", type=int, default=1, help="super-symbol length for scheme b")
    p.add_argument("--seed", type=int, default=0, help="codebook seed for scheme c")
    p.add_argument("--max-draws", type=int, default=DEFAULT_MAX_DRAWS)
    p.add_argument("--objective", choices=["exact_lz", "clogc"], default="exact_lz")
    p.add_argument("--include-header", action="store_true", help="count header bits in rho")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="decode a container into a reproduction file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--raw", action="store_true", help="write the raw byte format")
    p.add_argument("--source", help="original sequence, to report per-block distortion")
    p.add_argument("--alphabet")
    p.add_argument("--include-header", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("bounds", help="per-block statistics and both lower bounds (CSV)")
    p.add_argument("input")
    _add_common(p)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--beta", type=int, help="reproduction alphabet size for named models")
    p.add_argument("-o", "--output")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("chain", help="per-block chain quantities (CSV)")
    p.add_argument("input")
    _add_common(p)
    p.add_argument("--beta", type=int)
    p.add_argument("-o", "--output")
    p.add_argument("--verify", action="store_true", help="exit 5 if any ordering fails")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("gen", help="generate a synthetic source")
    p.add_argument("generator", choices=["iid", "markov", "periodic"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", help="iid probability vector, e.g. '1/2,1/4,1/4'")
    p.add_argument("--matrix", help="markov transition rows separated by ';'")
    p.add_argument("--pattern", help="periodic pattern, e.g. 'ab'")
    p.add_argument("--labels", help="output symbol labels")
    p.add_argument("-o", "--output")
    p.add_argument("--raw", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="run a parameter grid and write CSV")
    p.add_argument("--config", help="JSON experiment description (overrides grid flags)")
    p.add_argument("--generator", default="markov", choices=["iid", "markov", "periodic"])
    p.add_argument("--p")
    p.add_argument("--matrix")
    p.add_argument("--pattern")
    p.add_argument("--file", help="use a sequence file instead of a generator")
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--n", type=int, default=120)
    p.add_argument("--k", type=_int_list, default=[4])
    p.add_argument("--ell", type=_int_list, default=[2])
    p.add_argument("--q", type=_int_list, default=[1])
    p.add_argument("--D", type=_str_list, default=["0"])
    p.add_argument("--schemes", type=_str_list, default=["raw", "A", "B", "C"])
    p.add_argument("--dist", default="hamming")
    p.add_argument("--max-draws", type=int, default=1 << 14)
    p.add_argument("--limit", type=int, default=DEFAULT_ENUM_LIMIT)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--gnuplot", help="also write a gnuplot script to this path")
    p.add_argument("--verify", action="store_true",
                   help="exit 5 on bound monotonicity or flagged rho < best")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("fsm-check", help="verify a machine description file")
    p.add_argument("machine")
    p.add_argument("--ell", type=int, default=1, help="vector length for the Kraft check")
    p.add_argument("--il-max-len", type=int)
    p.add_argument("--il-budget", type=int, default=1 << 20)
    p.add_argument("--D", type=_fraction, help="check distortion compliance at this D")
    p.add_argument("--dist", default="hamming")
    p.add_argument("--trace", help="run an FSRE on this input string")
    p.add_argument("--limit", type=int, default=DEFAULT_ENUM_LIMIT)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fsm_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as e:
        print(f"format error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except EnumerationLimitError as e:
        print(f"limit exceeded: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except (VerificationFailed, NotLosslessError) as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except (ValueError, FslossyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
