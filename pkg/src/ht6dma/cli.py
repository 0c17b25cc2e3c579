"""Command-line entry point.

Runs experiments in-process by default; with ``--server URL`` it forwards the
same request to a running service instead.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .errors import ConfigError, HT6DMAError

EXIT_CONFIG = 2
EXIT_RUNTIME = 1


def _parse_list(text: str) -> list:
    """Comma-separated values, each parsed as a YAML scalar."""
    return [yaml.safe_load(tok) for tok in text.split(",") if tok.strip()]


def _read_yaml(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text()) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level")
    return data


class _JsonErrorParser(argparse.ArgumentParser):
    """Report usage errors as the same JSON document as runtime errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.exit(_fail("usage_error", message, EXIT_CONFIG))


def build_parser() -> argparse.ArgumentParser:
    common = _JsonErrorParser(add_help=False)
    common.add_argument("--config", help="YAML experiment config (defaults apply if omitted)")
    common.add_argument("--seed", type=int, help="override the config seed (u64)")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--paper-scale", action="store_true",
                        help="use B=16, S=100 and a mean of 24 users")
    common.add_argument("--server", help="send the request to a running service at this URL")

    parser = _JsonErrorParser(prog="ht6dma", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run a single experiment")
    sw = sub.add_parser("sweep", parents=[common], help="vary one config key over a list")
    sw.add_argument("--key", required=True, help="dotted config key, e.g. bs.d_min_m")
    sw.add_argument("--values", required=True, type=_parse_list,
                    help="comma-separated values, e.g. 0.25,0.5,0.75")
    sw.add_argument("--seeds", type=_parse_list, help="comma-separated seeds")
    sw.add_argument("--workers", type=int, default=1, help="worker processes")
    sub.add_parser("beampattern", parents=[common],
                   help="run an experiment and write its angular power map")
    sub.add_parser("validate-config", parents=[common], help="check a config and print it")
    return parser


def _request(args) -> dict:
    overrides = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    req = {"config": _read_yaml(args.config) if args.config else {},
           "paper_scale": args.paper_scale, "overrides": overrides}
    if args.command in ("run", "sweep", "beampattern"):
        req["out_dir"] = args.out
    if args.command == "sweep":
        req.update(key=args.key, values=args.values, seeds=args.seeds, workers=args.workers)
    return req


def _local(args, req: dict) -> dict:
    from .harness import build_config, run_beampattern, run_experiment, sweep

    cfg = build_config(req["config"], req["overrides"], req["paper_scale"])
    out = req.get("out_dir") or cfg.output_dir
    if args.command == "validate-config":
        return {"valid": True, "config_hash": cfg.config_hash(),
                "config": cfg.model_dump(mode="json")}
    if args.command == "run":
        return run_experiment(cfg, out).model_dump(mode="json")
    if args.command == "beampattern":
        return run_beampattern(cfg, out)[0].model_dump(mode="json")
    runs = sweep(cfg, args.key, args.values, args.seeds, out, args.workers)
    return {"key": args.key, "runs": [{"value": v, "seed": s, "result": r.model_dump(mode="json")}
                                      for v, s, r in runs]}


def _remote(args, req: dict) -> dict:
    import httpx

    url = args.server.rstrip("/") + "/" + args.command
    try:
        resp = httpx.post(url, json=req, timeout=None)
    except httpx.HTTPError as exc:
        raise _RemoteError("connection_error", str(exc), EXIT_RUNTIME) from exc
    body = resp.json()
    if resp.status_code >= 400:
        err = body.get("error", {"code": "http_error", "message": resp.text})
        raise _RemoteError(err["code"], err["message"],
                           EXIT_CONFIG if resp.status_code == 422 else EXIT_RUNTIME)
    if args.command == "beampattern":
        body = body["result"]
    return body


class _RemoteError(Exception):
    def __init__(self, code, message, exit_code):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


def _fail(code: str, message: str, exit_code: int) -> int:
    json.dump({"error": {"code": code, "message": message}}, sys.stderr)
    sys.stderr.write("\n")
    return exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        req = _request(args)
        result = _remote(args, req) if args.server else _local(args, req)
    except ConfigError as exc:
        return _fail(exc.code, str(exc), EXIT_CONFIG)
    except HT6DMAError as exc:
        return _fail(exc.code, str(exc), EXIT_RUNTIME)
    except _RemoteError as exc:
        return _fail(exc.code, str(exc), exc.exit_code)
    json.dump(result, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
