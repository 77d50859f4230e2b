"""Command-line front end: ``vlcmimo {codebook,encode,analyze,simulate}``.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O or runtime failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import PRESETS, preset
from .codebook import (
    CodebookSpec,
    Method,
    code_rate,
    codebook_matrices,
    dimming_weight_table,
    encode,
    format_codebook_json,
    format_codebook_text,
    max_nt_for_flicker,
    max_run_length,
    message_length,
    min_hamming_distance,
)
from .detection import Detector
from .errors import CapacityExceeded, VlcMimoError
from .fixtures import REFERENCE_CODEBOOKS, reference_matrices
from .sim import SweepPlan, merge_results, run_bound_sweep, run_cer_sweep, run_mi_sweep

log = logging.getLogger("vlcmimo")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

ENUM_LIMIT_K = 24

# simulate settings and their defaults; a --config file may set any of them
SIM_DEFAULTS = {
    "nt": 4,
    "nr": 4,
    "gamma": None,
    "method": "fill",
    "detectors": "ml",
    "snr_start": 0.0,
    "snr_stop": 40.0,
    "snr_step": 5.0,
    "trials": 100_000,
    "min_errors": 200,
    "seed": 0,
    "preset": "paper-default",
    "bound": False,
    "mi": False,
    "semi_angle": None,
    "fov_cutoff": "on",
    "channel_hold": 1,
    "raw_gains": False,
    "bound_samples": 1000,
    "mi_samples": 20000,
    "mi_estimator": "paired",
    "block_size": 4096,
    "workers": None,
    "format": None,
    "out": None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")


def _spec_from(nt, gamma, method) -> CodebookSpec:
    if nt is None:
        raise UsageError("--nt is required")
    return CodebookSpec.from_gamma(nt, gamma if gamma is not None else f"1/{nt}", method)


# --- codebook -----------------------------------------------------------------


def verify_reference() -> list[str]:
    """Compare the generated n_t = 4 codebooks with the stored reference; returns mismatch notes."""
    problems = []
    for gamma in REFERENCE_CODEBOOKS:
        expected = reference_matrices(gamma)
        got = codebook_matrices(CodebookSpec.from_gamma(4, gamma))
        for m in range(len(expected)):
            if not np.array_equal(expected[m], got[m]):
                problems.append(f"gamma={gamma} message {m}")
    return problems


def cmd_codebook(args) -> int:
    if args.verify_appendix_b:
        problems = verify_reference()
        total = sum(len(v) for v in REFERENCE_CODEBOOKS.values())
        if problems:
            for p in problems:
                print(f"mismatch: {p}", file=sys.stderr)
            print(f"FAIL {len(problems)}/{total} reference matrices differ")
            return EXIT_RUNTIME
        print(f"OK {total}/{total} reference matrices match")
        return EXIT_OK
    spec = _spec_from(args.nt, args.gamma, args.method)
    if spec.k > ENUM_LIMIT_K:
        raise CapacityExceeded(f"k={spec.k} exceeds the enumeration limit {ENUM_LIMIT_K}")
    mats = codebook_matrices(spec)
    text = format_codebook_json(mats) + "\n" if args.format == "json" else format_codebook_text(spec, mats)
    _write(args.out, text)
    return EXIT_OK


# --- encode -------------------------------------------------------------------


def split_bits(bits: str, k: int) -> list[int]:
    """Cut a bit string into ``k``-bit big-endian messages.

    A short final block is read as a number, i.e. zero-padded on the left.
    """
    bits = bits.strip()
    if not bits or set(bits) - {"0", "1"}:
        raise UsageError("--bits must be a non-empty string of 0 and 1")
    return [int(bits[i : i + k], 2) for i in range(0, len(bits), k)]


def cmd_encode(args) -> int:
    spec = _spec_from(args.nt, args.gamma, args.method)
    if (args.bits is None) == (args.messages is None):
        raise UsageError("give exactly one of --bits or --messages")
    if args.bits is not None:
        msgs = split_bits(args.bits, spec.k)
    else:
        try:
            msgs = [int(v) for v in args.messages.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --messages: {exc}") from None
    mats = [encode(spec, m) for m in msgs]
    text = format_codebook_json(mats) + "\n" if args.format == "json" else format_codebook_text(spec, mats)
    _write(args.out, text)
    return EXIT_OK


# --- analyze ------------------------------------------------------------------


def analyze_report(nt: int | None, gamma=None, method="fill", t_b: float | None = None,
                   mftp: float = 5e-3) -> dict:
    report: dict = {}
    if nt is not None:
        spec = _spec_from(nt, gamma, method)
        rate = code_rate(nt)
        report.update(
            n_t=nt,
            gamma=f"{spec.weight}/{nt}",
            method=spec.method.value,
            k=message_length(nt),
            rate=float(rate),
            rate_fraction=str(rate),
            RL=max_run_length(spec),
            # exhaustive distance is only feasible for enumerable codebooks
            dmin=min_hamming_distance(spec) if spec.k <= ENUM_LIMIT_K else None,
            dimming=dimming_weight_table(nt),
        )
    if t_b is not None:
        report.update(t_b=t_b, mftp=mftp, nt_max=max_nt_for_flicker(t_b, mftp))
    if not report:
        raise UsageError("analyze needs --nt and/or --tb")
    return report


def _format_text(report: dict, indent: str = "") -> str:
    width = max(len(k) for k in report)
    lines = []
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.append(_format_text(value, indent + "  "))
        else:
            lines.append(f"{indent}{key:<{width}}  {value}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    report = analyze_report(args.nt, args.gamma, args.method, args.tb, args.mftp)
    text = json.dumps(report, indent=2) if args.format == "json" else _format_text(report)
    _write(args.out, text + "\n")
    return EXIT_OK


# --- simulate -----------------------------------------------------------------


def resolve_sim_config(args) -> dict:
    """Defaults, overridden by the ``--config`` file, overridden by explicit flags."""
    cfg = dict(SIM_DEFAULTS)
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc.strerror}") from exc
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(SIM_DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in SIM_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["out"] is None:
        raise UsageError("--out is required")
    if cfg["format"] is None:
        cfg["format"] = "json" if str(cfg["out"]).endswith(".json") else "csv"
    if isinstance(cfg["detectors"], str):
        cfg["detectors"] = [d.strip() for d in cfg["detectors"].split(",") if d.strip()]
    if isinstance(cfg["fov_cutoff"], bool):
        cfg["fov_cutoff"] = "on" if cfg["fov_cutoff"] else "off"
    if cfg["fov_cutoff"] not in ("on", "off"):
        raise UsageError("fov_cutoff must be 'on' or 'off'")
    if cfg["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    return cfg


def snr_grid(start: float, stop: float, step: float) -> list[float]:
    if not step > 0:
        raise UsageError("--snr-step must be positive")
    if stop < start:
        raise UsageError("--snr-stop must not be below --snr-start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def build_plan(cfg: dict) -> SweepPlan:
    if cfg["preset"] not in PRESETS:
        raise UsageError(f"unknown preset {cfg['preset']!r}; known: {sorted(PRESETS)}")
    try:
        detectors = [Detector(d) for d in cfg["detectors"]]
    except ValueError:
        raise UsageError(f"detectors must be drawn from ml, zf, mmse; got {cfg['detectors']}") from None
    spec = _spec_from(cfg["nt"], cfg["gamma"], cfg["method"])
    model = preset(cfg["preset"], n_t=cfg["nt"], n_r=cfg["nr"], semi_angle_deg=cfg["semi_angle"],
                   fov_cutoff=cfg["fov_cutoff"] == "on", raw_gains=bool(cfg["raw_gains"]))
    grid = snr_grid(float(cfg["snr_start"]), float(cfg["snr_stop"]), float(cfg["snr_step"]))
    workers = cfg["workers"] if cfg["workers"] is not None else min(os.cpu_count() or 1, len(grid))
    return SweepPlan(
        spec=spec,
        channel=model,
        snr_grid_db=grid,
        detectors=detectors,
        trials_per_point=int(cfg["trials"]),
        min_errors=int(cfg["min_errors"]),
        seed=int(cfg["seed"]),
        block_size=int(cfg["block_size"]),
        channel_hold=int(cfg["channel_hold"]),
        bound_samples=int(cfg["bound_samples"]),
        mi_samples=int(cfg["mi_samples"]),
        mi_estimator=cfg["mi_estimator"],
        workers=int(workers),
    )


def run_simulation(cfg: dict):
    plan = build_plan(cfg)
    need_cer = bool(plan.detectors)
    if not (need_cer or cfg["bound"] or cfg["mi"]):
        raise UsageError("nothing to do: give detectors, --bound or --mi")
    log.info("plan: %s", plan.spec)
    cer = run_cer_sweep(plan) if need_cer else None
    bound = run_bound_sweep(plan) if cfg["bound"] else None
    mi = run_mi_sweep(plan) if cfg["mi"] else None
    return plan, merge_results(cer, bound, mi)


def make_manifest(argv: list[str], cfg: dict, plan: SweepPlan, outputs: list[str]) -> dict:
    return {
        "command": ["vlcmimo", *argv],
        "config": {"cli": cfg, "resolved": plan.describe()},
        "seed": plan.seed,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "outputs": outputs,
    }


def cmd_simulate(args, argv: list[str]) -> int:
    cfg = resolve_sim_config(args)
    out = str(cfg["out"])
    if not Path(out).resolve().parent.is_dir():
        raise OSError(f"output directory for {out} does not exist")
    plan, result = run_simulation(cfg)
    manifest_path = out + ".manifest.json"
    manifest = make_manifest(argv, cfg, plan, [out, manifest_path])
    if cfg["format"] == "json":
        # the timestamp stays in the sidecar so reruns give identical data files
        body = result.to_json(manifest={k: v for k, v in manifest.items() if k != "timestamp"} | {
            "manifest_file": Path(manifest_path).name}) + "\n"
    else:
        body = result.to_csv()
    Path(out).write_text(body, encoding="utf-8", newline="")
    Path(manifest_path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    log.info("wrote %s and %s", out, manifest_path)
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _add_code_args(p, nt_required=False):
    p.add_argument("--nt", type=int, required=nt_required, help="number of LEDs / code size n_t")
    p.add_argument("--gamma", help="dimming factor as f/n_t or decimal (default 1/n_t)")
    p.add_argument("--method", choices=[m.value for m in Method], default="fill")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vlcmimo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("codebook", help="dump a whole codebook")
    _add_code_args(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--verify-appendix-b", action="store_true",
                   help="check the built-in n_t=4 reference codebooks and exit")

    p = sub.add_parser("encode", help="encode a bit string or message list")
    _add_code_args(p, nt_required=True)
    p.add_argument("--bits", help="bit string, cut into k-bit big-endian blocks")
    p.add_argument("--messages", help="comma-separated message integers")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")

    p = sub.add_parser("analyze", help="rate, run length, distance and flicker limits")
    _add_code_args(p)
    p.add_argument("--tb", type=float, help="bit period in seconds")
    p.add_argument("--mftp", type=float, default=5e-3, help="maximum flickering time period in seconds")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--out")

    # simulate flags default to None so that only explicit ones override --config
    p = sub.add_parser("simulate", help="Monte-Carlo CER, union bound and mutual information sweeps")
    p.add_argument("--config", help="JSON file with simulate settings; flags override it")
    p.add_argument("--nt", type=int)
    p.add_argument("--nr", type=int)
    p.add_argument("--gamma")
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--detectors", help="comma-separated subset of ml,zf,mmse ('' for none)")
    p.add_argument("--snr-start", type=float)
    p.add_argument("--snr-stop", type=float)
    p.add_argument("--snr-step", type=float)
    p.add_argument("--trials", type=int, help="trial cap per SNR point")
    p.add_argument("--min-errors", type=int, help="stop a point after this many errors")
    p.add_argument("--seed", type=int)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--bound", action="store_true", default=None, help="add the union bound")
    p.add_argument("--mi", action="store_true", default=None, help="add mutual information")
    p.add_argument("--semi-angle", type=float, help="LED semi-angle in degrees")
    p.add_argument("--fov-cutoff", choices=["on", "off"])
    p.add_argument("--channel-hold", type=int, help="reuse each channel for T trials")
    p.add_argument("--raw-gains", action="store_true", default=None, help="unnormalised channel gains")
    p.add_argument("--bound-samples", type=int)
    p.add_argument("--mi-samples", type=int)
    p.add_argument("--mi-estimator", choices=["paired", "closed-form"])
    p.add_argument("--block-size", type=int)
    p.add_argument("--workers", type=int, help="threads across SNR points (capped by VLCMIMO_THREADS)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "codebook":
            return cmd_codebook(args)
        if args.command == "encode":
            return cmd_encode(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        return cmd_simulate(args, argv)
    except (UsageError, VlcMimoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
