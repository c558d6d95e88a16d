"""Command-line client for the ringform service.

Every subcommand talks HTTP.  Without --server the service app is mounted
in-process over an ASGI transport, so no daemon is needed; with --server
the same requests go to a running instance instead.

Exit status: 0 on success, 1 on a failed verification, a collision, or any
request error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx


async def _post_in_process(path: str, payload: dict) -> httpx.Response:
    from .service import app

    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(
        transport=transport, base_url="http://ringform.local", timeout=600.0
    ) as client:
        return await client.post(path, json=payload)


def _post(server: str | None, path: str, payload: dict) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            resp = client.post(path, json=payload)
    else:
        resp = asyncio.run(_post_in_process(path, payload))
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise SystemExit(f"error: {path} -> {resp.status_code}: {detail}")
    return resp.json()


def _write_artifacts(artifacts: dict, out_dir: Path) -> None:
    names = {
        "scenario_json": "scenario.json",
        "trajectory_csv": "trajectory.csv",
        "summary_json": "summary.json",
        "trajectory_svg": "trajectory.svg",
        "errors_svg": "errors.svg",
        "diagnostics_svg": "diagnostics.svg",
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    for key, fname in names.items():
        (out_dir / fname).write_text(artifacts[key])


def _print_summary(summary: dict) -> None:
    settle = summary["settling_time"]
    rate = summary["exp_rate"]
    print(
        f"{summary['scenario_name']}: {summary['terminal_event']} at "
        f"t={summary['terminal_time']:.3f}, "
        f"settling={'-' if settle is None else f'{settle:.3f}'}, "
        f"rate={'-' if rate is None else f'{rate:.3f}'}, "
        f"min_dist={summary['min_pair_dist']:.4f}"
    )
    for w in summary.get("warnings", []):
        print(f"  warning: {w}")


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.scenario).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"error: cannot read scenario {args.scenario}: {exc}")
    body = _post(args.server, "/run", {"scenario": doc})
    _write_artifacts(body["artifacts"], Path(args.out))
    _print_summary(body["summary"])
    print(f"artifacts written to {args.out}")
    return 1 if body["summary"]["terminal_event"] == "Collision" else 0


def _cmd_verify(args: argparse.Namespace) -> int:
    body = _post(args.server, "/verify", {"seed": args.seed})
    width = max(len(c["name"]) for c in body["checks"])
    for c in body["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        print(f"{c['name']:<{width}}  {mark}  [{c['seconds']:6.2f}s]  {c['detail']}")
    n_pass = sum(c["passed"] for c in body["checks"])
    print(f"{n_pass}/{len(body['checks'])} checks passed (seed {body['seed']})")
    return 0 if body["passed"] else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise SystemExit(f"error: bad --values: {exc}")
    if not values:
        raise SystemExit("error: --values is empty")
    payload: dict = {"param": args.param, "values": values}
    if args.scenario:
        try:
            payload["scenario"] = json.loads(Path(args.scenario).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SystemExit(f"error: cannot read scenario {args.scenario}: {exc}")
    body = _post(args.server, "/sweep", payload)
    header = f"{'name':<24} {'a':>5} {'event':<14} {'t_end':>9} {'settling':>9} {'rate':>8} {'min_dist':>9}"
    print(header)
    print("-" * len(header))
    for r in body["rows"]:
        settle = "-" if r["settling_time"] is None else f"{r['settling_time']:.3f}"
        rate = "-" if r["exp_rate"] is None else f"{r['exp_rate']:.3f}"
        print(
            f"{r['name']:<24} {r['a']:>5.2f} {r['terminal_event']:<14} "
            f"{r['terminal_time']:>9.3f} {settle:>9} {rate:>8} {r['min_pair_dist']:>9.4f}"
        )
    return 1 if any(r["terminal_event"] == "Collision" for r in body["rows"]) else 0


def _cmd_reproduce(args: argparse.Namespace) -> int:
    body = _post(args.server, "/reproduce", {"figure": args.figure})
    out = Path(args.out)
    status = 0
    for run in body["runs"]:
        _write_artifacts(run["artifacts"], out / run["name"])
        _print_summary(run["summary"])
        if run["summary"]["terminal_event"] == "Collision":
            status = 1
    print(f"artifacts written under {out}")
    return status


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringform",
        description="Bearing-only ring formation control: runs, sweeps, and self-checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario file and write artifacts")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--server", default=None, help="base URL of a running service")
    p_run.set_defaults(fn=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the lemma/invariant suite")
    p_verify.add_argument(
        "--seed",
        type=int,
        default=None,
        help="master seed (default: RINGFORM_SEED env var, then 0)",
    )
    p_verify.add_argument("--server", default=None)
    p_verify.set_defaults(fn=_cmd_verify)

    p_sweep = sub.add_parser("sweep", help="run a parameter family and tabulate results")
    p_sweep.add_argument("--param", default="a", help="swept parameter (only 'a')")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument(
        "--scenario", default=None, help="base scenario file (default: regular decagon)"
    )
    p_sweep.add_argument("--server", default=None)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="regenerate a reference experiment pair")
    p_rep.add_argument("figure", choices=["fig3", "fig4"])
    p_rep.add_argument("--out", default="out", help="output directory (default: out)")
    p_rep.add_argument("--server", default=None)
    p_rep.set_defaults(fn=_cmd_reproduce)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
