"""Command-line front end.

Subcommands: check, decompose, barcode, ph, field-independence.  Results go
to stdout (JSON by default, sorted keys, or a plain-text summary);
diagnostics go to stderr.

Exit codes: 0 success / mathematically positive answer, 1 mathematical
negative (not decomposable, verdicts false), 2 input or usage error,
3 torsion homology (the pointwise-freeness hypothesis fails).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .barcode import Barcode
from .decomp import NotDecomposable, decompose, rank_barcode_oracle, verify_consistent
from .homology import (
    FiltrationFormatError,
    SimplicialFiltration,
    TorsionHomology,
    field_independence_report,
    persistent_homology_module,
)
from .persmod import MAX, MIN, PersistenceModule, check_free_cokernels
from .ring import GF, Z

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_TORSION = 3


class _InputError(Exception):
    pass


def _emit(payload: dict, text_lines: Sequence[str], fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


def _load_module(path: str) -> PersistenceModule:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    try:
        return PersistenceModule.from_json(obj)
    except (ValueError, KeyError, TypeError) as exc:
        raise _InputError(f"{path}: invalid module: {exc}") from exc


def _load_filtration(path: str) -> SimplicialFiltration:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return SimplicialFiltration.from_text(text)
    except FiltrationFormatError as exc:
        if exc.line is not None:
            raise _InputError(f"{path}:{exc.line}: {exc.bare_message}") from exc
        raise _InputError(f"{path}: {exc.bare_message}") from exc


def _bars_text(bars: Barcode) -> list[str]:
    lines = [f"coefficients: {bars.coeff}"]
    if not bars.bars:
        lines.append("(empty barcode)")
    for birth, death, mult in bars.bars:
        end = "inf" if death is None else str(death)
        lines.append(f"bar [{birth}, {end}) x{mult}")
    return lines


def _cmd_check(args) -> int:
    module = _load_module(args.module)
    witness = check_free_cokernels(module)
    if witness is None:
        _emit({"decomposable": True}, ["decomposable: yes"], args.format)
        return EXIT_OK
    _emit({"decomposable": False, "witness": witness.to_json()},
          [f"decomposable: no",
           f"witness: map {witness.source} -> {witness.target} has torsion "
           f"{[Z.to_str(t) for t in witness.torsion]}"], args.format)
    return EXIT_NEGATIVE


def _cmd_decompose(args) -> int:
    module = _load_module(args.module)
    try:
        bases, bars = decompose(module, verify=args.verify)
    except NotDecomposable as exc:
        _emit({"decomposable": False, "witness": exc.witness.to_json()},
              [f"not decomposable: witness {exc.witness.source} -> {exc.witness.target}"],
              args.format)
        return EXIT_NEGATIVE
    if args.bases_out:
        with open(args.bases_out, "w", encoding="utf-8") as fh:
            json.dump(bases.to_json(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    _emit(bars.to_json(), _bars_text(bars), args.format)
    return EXIT_OK


def _cmd_barcode(args) -> int:
    module = _load_module(args.module)
    coeff = args.coeff
    if coeff == "Q":
        bars = rank_barcode_oracle(module)
    elif coeff == "Z":
        try:
            _, bars = decompose(module, verify=args.verify)
        except NotDecomposable as exc:
            _emit({"decomposable": False, "witness": exc.witness.to_json()},
                  [f"not decomposable: witness {exc.witness.source} -> {exc.witness.target}"],
                  args.format)
            return EXIT_NEGATIVE
    else:
        try:
            p = int(coeff)
        except ValueError:
            raise _InputError(f"--coeff must be Z, Q, or a prime, got {coeff!r}")
        try:
            field = GF(p)
        except ValueError as exc:
            raise _InputError(str(exc))
        _, bars = decompose(module.map_to_ring(field), verify=args.verify)
    _emit(bars.to_json(), _bars_text(bars), args.format)
    return EXIT_OK


def _cmd_ph(args) -> int:
    filtration = _load_filtration(args.filtration)
    if args.coeff == "Z":
        ring = Z
    else:
        try:
            ring = GF(int(args.coeff))
        except ValueError as exc:
            raise _InputError(f"--coeff must be Z or a prime: {exc}")
    module = persistent_homology_module(filtration, args.dim, ring)
    try:
        _, bars = decompose(module, verify=args.verify)
    except NotDecomposable as exc:
        _emit({"decomposable": False, "witness": exc.witness.to_json()},
              [f"not decomposable: witness {exc.witness.source} -> {exc.witness.target}"],
              args.format)
        return EXIT_NEGATIVE
    _emit(bars.to_json(), _bars_text(bars), args.format)
    return EXIT_OK


def _cmd_field_independence(args) -> int:
    filtration = _load_filtration(args.filtration)
    try:
        primes = [int(p) for p in args.primes.split(",") if p.strip()]
    except ValueError:
        raise _InputError(f"--primes must be a comma-separated list, got {args.primes!r}")
    if not primes:
        raise _InputError("--primes must name at least one prime")
    try:
        report = field_independence_report(filtration, args.dim, primes)
    except ValueError as exc:
        raise _InputError(str(exc))
    verdict_line = (f"verdicts: decomposable={report.decomposable} "
                    f"cokernels_free={report.cokernels_free} "
                    f"relative_free={report.relative_free} "
                    f"diagrams_equal={report.diagrams_equal}")
    _emit(report.to_json(),
          [f"hypothesis ok: {report.hypothesis_ok}", verdict_line], args.format)
    return EXIT_OK if (report.hypothesis_ok and report.all_true) else EXIT_NEGATIVE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persdec",
        description="Interval decomposition of persistence modules over a PID, "
                    "and field-independence checks for persistent homology.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--verify", action="store_true",
                       help="run the full consistency assertions while decomposing")

    p = sub.add_parser("check", help="decide interval decomposability over Z")
    p.add_argument("module", help="module JSON file")
    common(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("decompose", help="construct a consistent basis and barcode over Z")
    p.add_argument("module", help="module JSON file")
    p.add_argument("--bases-out", metavar="PATH", help="dump the consistent basis JSON")
    common(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("barcode", help="barcode over a chosen coefficient ring")
    p.add_argument("module", help="module JSON file")
    p.add_argument("--coeff", required=True, metavar="Z|Q|P",
                   help="Z, Q, or a prime p for GF(p)")
    common(p)
    p.set_defaults(func=_cmd_barcode)

    p = sub.add_parser("ph", help="persistent homology of a filtration")
    p.add_argument("filtration", help="filtration text file")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--coeff", default="Z", metavar="Z|P")
    common(p)
    p.set_defaults(func=_cmd_ph)

    p = sub.add_parser("field-independence",
                       help="evaluate the four field-independence conditions")
    p.add_argument("filtration", help="filtration text file")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--primes", required=True, help="comma-separated primes, e.g. 2,3,5")
    common(p)
    p.set_defaults(func=_cmd_field_independence)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the input-error code
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TorsionHomology as exc:
        print(f"torsion homology: {exc}", file=sys.stderr)
        return EXIT_TORSION


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
