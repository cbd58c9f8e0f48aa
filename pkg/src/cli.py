"""
raywave - Command Line
    raywave <mode> --config <path> [--out <dir>] [--threads N]
    raywave serve [--host HOST] [--port PORT]

Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
1 anything else.
"""

import argparse
import sys
from typing import List, Optional

from src.core.utils.config import get_settings
from src.core.utils.logging import get_logger_with_context
from src.core.waves.errors import ConfigError, RaywaveError
from src.runner.run_config import MODES, load_run
from src.runner.runner import output_directory, run

logger = get_logger_with_context(module="cli")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raywave",
        description="Asymptotic solutions of the 2D wave equation with a localized decaying source",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run the {mode} mode")
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=None, help="Output directory (overrides RAYWAVE_OUTPUT_DIR)")
        p.add_argument("--threads", type=int, default=1, help="Worker threads for data-parallel work")
    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    return parser


def _serve(args: argparse.Namespace) -> int:
    import uvicorn

    settings = get_settings()
    uvicorn.run(
        "src.main:app",
        host=args.host or settings.api.host,
        port=args.port or settings.api.port,
        reload=settings.debug,
    )
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.mode == "serve":
        return _serve(args)

    threads = args.threads
    if threads < 1:
        print("raywave: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        loaded = load_run(args.config, mode=args.mode)
        out = output_directory(args.out, loaded)
        report = run(loaded, out, threads)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except RaywaveError as exc:
        logger.error(str(exc))
        print(str(exc), file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as exc:
        logger.exception(f"Unexpected failure: {exc}")
        return EXIT_UNEXPECTED

    if report is not None and report.headline is not None:
        print(f"banded relative L2 error: {report.headline:.6e}")
    print(f"outputs written to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
