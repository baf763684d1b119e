"""Command-line entry point: ``dlsscale {harvest,score,analyze,run,synth,report}``.

Exit codes: 0 success, 1 input error, 2 analysis error. Diagnostics go to
stderr (the final one as a JSON object); stdout only carries requested data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .categories import UnknownCategoryError
from .codemap import AliasError, AliasTable, Iso639Table, IsoTableError
from .growth import CurveFitError
from .irt import IRFFitError
from .mokken import TooFewItemsError
from .pipeline import StageError, collect_report, render_text, run_analyze, run_harvest, run_score
from .registry import RegistryError
from .scoring import UnknownCodeError
from .synth import generate

logger = logging.getLogger("dlsscale")

INPUT_ERRORS = (OSError, RegistryError, UnknownCategoryError, IsoTableError, AliasError,
                StageError, UnknownCodeError, json.JSONDecodeError)
ANALYSIS_ERRORS = (CurveFitError, IRFFitError, TooFewItemsError)


class HarvestFailed(Exception):
    pass


def _iso(args) -> Iso639Table:
    return Iso639Table.from_tab(args.iso_table) if args.iso_table else Iso639Table.default()


def _aliases(args, iso):
    return AliasTable.load(args.aliases, iso) if args.aliases else None


def cmd_harvest(args) -> int:
    if not args.registry:
        raise StageError("--registry is required for harvest")
    iso = _iso(args)
    run = run_harvest(args.registry, iso, _aliases(args, iso), args.out)
    for f in run.failures:
        logger.warning("%s: %s", f.tool_id, f.message)
    if run.failures and not args.lenient:
        raise HarvestFailed(f"{len(run.failures)} tool(s) failed to harvest")
    return 0


def cmd_score(args) -> int:
    run_score(args.out, _iso(args), matrix_path=args.matrix)
    return 0


def cmd_analyze(args) -> int:
    run_analyze(args.out)
    return 0


def cmd_synth(args) -> int:
    generate(args.out, seed=args.seed, n_languages=args.languages, n_tools=args.tools,
             guttman=args.guttman)
    return 0


def cmd_report(args) -> int:
    doc = collect_report(args.out)
    if args.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(render_text(doc))
    return 0


def cmd_run(args) -> int:
    cmd_harvest(args)
    cmd_score(args)
    return cmd_analyze(args)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("dls-out"),
                        help="artifact directory (default: %(default)s)")
    common.add_argument("-v", "--verbose", action="store_true")

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--registry", type=Path, help="tool registry (JSON)")
    inputs.add_argument("--iso-table", type=Path,
                        help="ISO 639-3 code table (.tab); defaults to the bundled copy")
    inputs.add_argument("--aliases", type=Path, help="alias table: name<TAB>code")

    parser = argparse.ArgumentParser(prog="dlsscale", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("harvest", parents=[common, inputs], help="scrape tool sources, map names")
    p.add_argument("--lenient", action="store_true", help="per-tool failures are warnings")
    p.set_defaults(func=cmd_harvest)

    p = sub.add_parser("score", parents=[common, inputs], help="support matrix and subscale levels")
    p.add_argument("--matrix", type=Path, help="re-enter from an exported matrix.csv")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("analyze", parents=[common], help="homogeneity, IRT, growth levels")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("run", parents=[common, inputs], help="harvest, score and analyze")
    p.add_argument("--lenient", action="store_true", help="per-tool failures are warnings")
    p.set_defaults(func=cmd_run, matrix=None)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic input set")
    p.add_argument("--seed", type=int, default=42, help="RNG seed (default: 42)")
    p.add_argument("--languages", type=int, default=200, help="number of languages (default: 200)")
    p.add_argument("--tools", type=int, default=20, help="number of tools (default: 20)")
    p.add_argument("--guttman", action="store_true", help="strictly nested supports")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", parents=[common], help="print the summary tables")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="csv prints aligned text tables, json the raw rows")
    p.set_defaults(func=cmd_report)
    return parser


def _fail(code: int, exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                 "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except HarvestFailed as exc:
        return _fail(1, exc)
    except ANALYSIS_ERRORS as exc:
        return _fail(2, exc)
    except INPUT_ERRORS as exc:
        return _fail(1, exc)
    except ValueError as exc:
        return _fail(2, exc)


if __name__ == "__main__":
    sys.exit(main())
