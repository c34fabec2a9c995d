"""Command-line interface.

The CLI is a thin client of the HTTP service: every command serializes
its inputs into a request, sends it to the service (in-process by
default, or to a remote ``--server``), and renders the response.  Only
artifact placement on disk happens client-side.

Exit codes: 0 on success, 1 on configuration or input validation
failure, 2 on runtime failure (including refusal to overwrite existing
artifacts without ``--force``).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from .harness.outputs import ArtifactExistsError, write_bundle

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


def _read_file(path: str, what: str) -> str | None:
    p = Path(path)
    if not p.is_file():
        print(f"error: {what} not found: {path}", file=sys.stderr)
        return None
    return p.read_text()


def _print_errors(payload: dict) -> None:
    detail = payload.get("detail", payload)
    errors = detail.get("errors") if isinstance(detail, dict) else None
    for err in errors or [json.dumps(detail)]:
        print(f"error: {err}", file=sys.stderr)


async def _post_async(server: str | None, path: str, body: dict) -> httpx.Response:
    if server:
        async with httpx.AsyncClient(base_url=server, timeout=600.0) as client:
            return await client.post(path, json=body)
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://phlink.internal", timeout=600.0
    ) as client:
        return await client.post(path, json=body)


def _post(server: str | None, path: str, body: dict) -> tuple[int, dict | None]:
    try:
        resp = asyncio.run(_post_async(server, path, body))
    except httpx.HTTPError as exc:
        print(f"error: request failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME, None
    if resp.status_code == 200:
        return EXIT_OK, resp.json()
    try:
        payload = resp.json()
    except ValueError:
        payload = {"detail": {"errors": [resp.text]}}
    _print_errors(payload)
    return (EXIT_INVALID if resp.status_code == 422 else EXIT_RUNTIME), None


def _cmd_validate(args: argparse.Namespace) -> int:
    text = _read_file(args.config, "configuration file")
    if text is None:
        return EXIT_INVALID
    code, payload = _post(args.server, "/validate", {"config_toml": text})
    if code != EXIT_OK or payload is None:
        return code
    if payload["valid"]:
        print("configuration OK")
        return EXIT_OK
    for err in payload["errors"]:
        print(f"error: {err}", file=sys.stderr)
    return EXIT_INVALID


def _cmd_simulate(args: argparse.Namespace) -> int:
    text = _read_file(args.config, "configuration file")
    if text is None:
        return EXIT_INVALID
    body = {"config_toml": text, "threads": args.threads}
    if args.experiment:
        body["experiment"] = args.experiment
    if args.seed is not None:
        body["seed"] = args.seed
    code, payload = _post(args.server, "/simulate", body)
    if code != EXIT_OK or payload is None:
        return code

    out_dir = args.out
    if out_dir is None:
        from .harness.config import DEFAULTS, load_toml

        try:
            raw = load_toml(text)
        except Exception:
            raw = {}
        out_dir = raw.get("experiment", {}).get(
            "out_dir", DEFAULTS["experiment"]["out_dir"]
        )
    bundle = {a["name"]: a["content"] for a in payload["artifacts"]}
    try:
        target = write_bundle(bundle, out_dir, payload["run_id"], force=args.force)
    except ArtifactExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"run {payload['run_id']} ({payload['kind']}, seed {payload['seed']})")
    print(json.dumps(payload["summary"], indent=2))
    print(f"wrote {len(bundle)} artifacts to {target}")
    return EXIT_OK


def _cmd_detect(args: argparse.Namespace) -> int:
    trace_text = _read_file(args.trace, "trace file")
    if trace_text is None:
        return EXIT_INVALID
    config_text = ""
    if args.config:
        config_text = _read_file(args.config, "configuration file")
        if config_text is None:
            return EXIT_INVALID
    body = {"trace_csv": trace_text, "config_toml": config_text}
    code, payload = _post(args.server, "/detect", body)
    if code != EXIT_OK or payload is None:
        return code
    t1, t2, t3 = payload["thresholds_mv"]
    print(f"thresholds: {t1:.2f} / {t2:.2f} / {t3:.2f} mV")
    print("frame  t_start_s  peak_mv  symbol  bits")
    for f in payload["frames"]:
        print(
            f"{f['index']:>5}  {f['t_start_s']:>9.2f}  {f['peak_mv']:>7.2f}"
            f"  {f['symbol']:>6}  {f['bits']}"
        )
    print(f"symbols: {' '.join(str(s) for s in payload['symbols'])}")
    print(f"bits: {payload['bits']}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phlink",
        description="Microfluidic pH-signaling link simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a configured experiment")
    p_sim.add_argument("config", help="TOML configuration file")
    p_sim.add_argument(
        "--experiment",
        choices=(
            "amplitude_sweep", "pulse_width_sweep",
            "pulse_amplitude_char", "comm_run",
        ),
        help="override the configured experiment kind",
    )
    p_sim.add_argument("--seed", type=int, help="override the configured seed")
    p_sim.add_argument("--out", help="artifact directory (default: from config)")
    p_sim.add_argument(
        "--force", action="store_true", help="overwrite existing artifacts"
    )
    p_sim.add_argument(
        "--threads", type=int, default=1,
        help="parallel simulations within the run",
    )
    p_sim.add_argument("--server", help="remote service URL (default: in-process)")
    p_sim.set_defaults(fn=_cmd_simulate)

    p_det = sub.add_parser("detect", help="decode symbols from a stored trace")
    p_det.add_argument("trace", help="trace CSV file (t_s,dv_mv)")
    p_det.add_argument("--config", help="TOML configuration file")
    p_det.add_argument("--server", help="remote service URL (default: in-process)")
    p_det.set_defaults(fn=_cmd_detect)

    p_val = sub.add_parser("validate", help="check a configuration file")
    p_val.add_argument("config", help="TOML configuration file")
    p_val.add_argument("--server", help="remote service URL (default: in-process)")
    p_val.set_defaults(fn=_cmd_validate)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
