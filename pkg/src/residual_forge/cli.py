"""Command-line front end.

Subcommands:

* optimize     - run one method on one (input, target) pair, write artifacts
* metrics      - patch-averaged PSNR/SSIM between two images
* experiment   - sweep (pairs x methods) from a JSON spec, write a summary
* make-corpus  - generate synthetic (input, target) pairs

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation error,
4 every experiment run failed. stdout carries exactly one JSON object per
run; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .baselines import BaselineKind, heuristic_residual, staypositive_optimize
from .combiner import CombinerParams, combine
from .corpus import CORPUS_KINDS, make_synthetic_corpus
from .errors import ResidualForgeError, UnsupportedFormatError
from .images import load_image, save_image
from .losses import LossBreakdown, LossWeights, total_loss
from .metrics import patch_metrics
from .optimizer import OptimizationTrace, OptimizerConfig, optimize_residual

DEFAULT_PATCH_SIZE = 150  # evaluation default for patch-averaged metrics

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_ALL_FAILED = 4

METHOD_CHOICES = ("ours", "heuristic", "sp2", "spall")
_BASELINE_KINDS = {"sp2": BaselineKind.SP_2PARAM, "spall": BaselineKind.SP_ALLPIXELS}

THREADS_ENV_VAR = "RESIDUAL_FORGE_THREADS"


class UsageError(Exception):
    pass


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we map usage errors to 1
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _validate_alpha(alpha: float) -> float:
    if not (0.0 <= alpha <= 1.0):
        raise ValidationError(f"--alpha must be in [0, 1], got {alpha}")
    return alpha


def _build_config(args, alpha: float) -> OptimizerConfig:
    weights = LossWeights(lambda_const=args.lambda_const,
                          lambda_grad=args.lambda_grad,
                          bound_high=args.bound_high)
    return OptimizerConfig(iterations=args.iterations, step_size=args.lr,
                           weights=weights, combiner=CombinerParams(alpha))


def _config_snapshot(config: OptimizerConfig, method: str, alpha: float) -> dict:
    snap = dataclasses.asdict(config)
    snap["method"] = method
    snap["alpha"] = alpha
    snap["package_version"] = __version__
    return snap


def _write_trace_csv(trace: OptimizationTrace, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "total", "constraint", "gradient"])
        for iteration, bd in trace.samples:
            writer.writerow([iteration, repr(bd.total), repr(bd.constraint_term),
                             repr(bd.gradient_term)])


def _write_json(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_method(method: str, input_img, target, alpha: float,
                config: OptimizerConfig):
    """Returns (raw residual, composite, trace, final LossBreakdown)."""
    params = CombinerParams(alpha)
    if method == "ours":
        residual, output, trace = optimize_residual(input_img, target, config)
        final = trace.samples[-1][1]
    elif method == "heuristic":
        residual = heuristic_residual(input_img, target, params)
        output = combine(input_img, residual, params)
        final = total_loss(input_img, residual, target, params, config.weights)
        trace = OptimizationTrace(samples=[(0, final)], iterations_run=0,
                                  stop_reason="closed_form")
    elif method in _BASELINE_KINDS:
        residual, output, trace = staypositive_optimize(
            input_img, target, params, _BASELINE_KINDS[method], config)
        final = trace.samples[-1][1]
    else:
        raise ValidationError(f"unknown method {method!r}")
    return residual, output, trace, final


def _loss_dict(bd: LossBreakdown) -> dict:
    return {"total": bd.total, "constraint": bd.constraint_term,
            "gradient": bd.gradient_term}


def _optimize_pair(method: str, input_path: str, target_path: str, alpha: float,
                   config: OptimizerConfig, out_dir: str,
                   patch_size: int = DEFAULT_PATCH_SIZE) -> dict:
    input_img = load_image(input_path)
    target = load_image(target_path)
    if input_img.shape != target.shape:
        raise ValidationError(
            f"input {input_img.shape[:2]} and target {target.shape[:2]} differ in size")
    started = time.monotonic()
    residual, output, trace, final = _run_method(method, input_img, target,
                                                 alpha, config)
    duration_ms = (time.monotonic() - started) * 1000.0

    os.makedirs(out_dir, exist_ok=True)
    residual_path = os.path.join(out_dir, "residual.png")
    composite_path = os.path.join(out_dir, "composite.png")
    trace_path = os.path.join(out_dir, "trace.csv")
    save_image(np.clip(residual, 0.0, 1.0), residual_path)
    save_image(output, composite_path)
    _write_trace_csv(trace, trace_path)

    report = patch_metrics(output, target, patch_size, method=method)
    record = {
        "method": method,
        "input": input_path,
        "target": target_path,
        "config": _config_snapshot(config, method, alpha),
        "loss": _loss_dict(final),
        "metrics": report.to_dict(),
        "duration_ms": duration_ms,
        "stop_reason": trace.stop_reason,
        "iterations_run": trace.iterations_run,
        "artifacts": {"residual": residual_path, "composite": composite_path,
                      "trace": trace_path},
    }
    if method == "sp2":
        record["method_note"] = ("two-parameter variant: residual is a global "
                                 "gain/offset applied to the target; the "
                                 "parameterization is this artifact's "
                                 "interpretation")
    return record


def cmd_optimize(args) -> int:
    alpha = _validate_alpha(args.alpha)
    config = _build_config(args, alpha)
    record = _optimize_pair(args.method, args.input, args.target, alpha,
                            config, args.out_dir)
    report_path = os.path.join(args.out_dir, "report.json")
    _write_json(record, report_path)
    if args.report:
        _write_json(record, args.report)
    print(json.dumps(record, sort_keys=True))
    return EXIT_OK


def cmd_metrics(args) -> int:
    a = load_image(args.a)
    b = load_image(args.b)
    if a.shape != b.shape:
        raise ValidationError(
            f"images {a.shape[:2]} and {b.shape[:2]} differ in size")
    report = patch_metrics(a, b, args.patch_size)
    full = report.to_dict()
    if args.report:
        _write_json(full, args.report)
    summary = {"psnr": report.mean_psnr, "ssim": report.mean_ssim,
               "patch_size": report.patch_size,
               "patches": len(report.per_patch)}
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _load_experiment_spec(path: str) -> dict:
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"experiment spec {path} is not valid JSON: {exc}")
    pairs = spec.get("pairs")
    if not isinstance(pairs, list) or not pairs:
        raise UsageError("experiment spec must list at least one [input, target] pair")
    for pair in pairs:
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise UsageError(f"malformed pair entry {pair!r}")
    methods = spec.get("methods", ["ours"])
    for m in methods:
        if m not in METHOD_CHOICES:
            raise UsageError(f"unknown method {m!r}; choose from {METHOD_CHOICES}")
    if not methods:
        raise UsageError("experiment spec lists no methods")
    # Referenced files must exist before any run starts.
    for pair in pairs:
        for p in pair:
            if not os.path.isfile(p):
                raise ValidationError(f"experiment references missing file {p}")
    return spec


_OPTIMIZER_SPEC_KEYS = {"iterations", "step_size", "method", "adam_beta1",
                        "adam_beta2", "adam_eps", "convergence_tol",
                        "step_decay", "trace_every"}


def _experiment_config(spec: dict, alpha: float) -> OptimizerConfig:
    opt = dict(spec.get("optimizer", {}))
    weights = LossWeights(
        lambda_const=opt.pop("lambda_const", 1.0),
        lambda_grad=opt.pop("lambda_grad", 1.0),
        bound_low=opt.pop("bound_low", 0.0),
        bound_high=opt.pop("bound_high", 1.0),
        grad_mode=opt.pop("grad_mode", "mse"),
    )
    unknown = set(opt) - _OPTIMIZER_SPEC_KEYS
    if unknown:
        raise UsageError(f"unknown optimizer keys in experiment spec: "
                         f"{sorted(unknown)}")
    return OptimizerConfig(weights=weights, combiner=CombinerParams(alpha), **opt)


def _thread_budget() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cmd_experiment(args) -> int:
    spec = _load_experiment_spec(args.spec)
    alpha = _validate_alpha(float(spec.get("alpha", 0.5)))
    patch_size = int(spec.get("patch_size", DEFAULT_PATCH_SIZE))
    methods = spec.get("methods", ["ours"])
    config = _experiment_config(spec, alpha)
    os.makedirs(args.out_dir, exist_ok=True)

    jobs = []
    for input_path, target_path in spec["pairs"]:
        stem = os.path.splitext(os.path.basename(input_path))[0]
        for method in methods:
            run_dir = os.path.join(args.out_dir, "runs", f"{stem}__{method}")
            jobs.append((method, input_path, target_path, run_dir))

    def run_one(job):
        method, input_path, target_path, run_dir = job
        try:
            record = _optimize_pair(method, input_path, target_path, alpha,
                                    config, run_dir, patch_size)
            record["status"] = "ok"
        except Exception as exc:  # per-pair failures are recorded, not fatal
            os.makedirs(run_dir, exist_ok=True)
            record = {"status": "failed", "method": method, "input": input_path,
                      "target": target_path, "error": str(exc)}
        _write_json(record, os.path.join(run_dir, "record.json"))
        return record

    workers = _thread_budget()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_one, jobs))
    else:
        records = [run_one(job) for job in jobs]

    succeeded = [r for r in records if r["status"] == "ok"]
    for r in records:
        if r["status"] == "failed":
            print(f"run failed ({r['method']} on {r['input']}): {r['error']}",
                  file=sys.stderr)

    summary_rows = []
    for method in methods:
        ok = [r for r in succeeded if r["method"] == method]
        if not ok:
            continue
        summary_rows.append({
            "method": method,
            "runs": len(ok),
            "mean_psnr": float(np.mean([r["metrics"]["psnr"] for r in ok])),
            "mean_ssim": float(np.mean([r["metrics"]["ssim"] for r in ok])),
        })
    summary_path = os.path.join(args.out_dir, "summary.csv")
    with open(summary_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["method", "runs", "mean_psnr",
                                                "mean_ssim"])
        writer.writeheader()
        writer.writerows(summary_rows)

    print(json.dumps({"summary": summary_rows, "runs": len(records),
                      "failed": len(records) - len(succeeded),
                      "summary_csv": summary_path}, sort_keys=True))
    return EXIT_OK if succeeded else EXIT_ALL_FAILED


def cmd_make_corpus(args) -> int:
    alpha = _validate_alpha(args.alpha)
    pairs = make_synthetic_corpus(args.kind, args.count, args.size, args.seed,
                                  args.out_dir, alpha=alpha)
    print(json.dumps({"kind": args.kind, "pairs": [list(p) for p in pairs]},
                     sort_keys=True))
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="residual-forge",
                     description="Additive-light residual synthesis and evaluation")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_opt = sub.add_parser("optimize", help="optimize one (input, target) pair")
    p_opt.add_argument("--input", required=True)
    p_opt.add_argument("--target", required=True)
    p_opt.add_argument("--alpha", type=float, required=True)
    p_opt.add_argument("--iterations", type=int, default=2000)
    p_opt.add_argument("--lr", type=float, default=0.05)
    p_opt.add_argument("--lambda-const", type=float, default=1.0)
    p_opt.add_argument("--lambda-grad", type=float, default=1.0)
    p_opt.add_argument("--bound-high", type=float, default=1.0)
    p_opt.add_argument("--method", choices=METHOD_CHOICES, default="ours")
    p_opt.add_argument("--out-dir", default=".")
    p_opt.add_argument("--report", default=None)
    p_opt.set_defaults(func=cmd_optimize)

    p_met = sub.add_parser("metrics", help="patch-averaged PSNR/SSIM")
    p_met.add_argument("--a", required=True)
    p_met.add_argument("--b", required=True)
    p_met.add_argument("--patch-size", type=int, default=DEFAULT_PATCH_SIZE)
    p_met.add_argument("--report", default=None)
    p_met.set_defaults(func=cmd_metrics)

    p_exp = sub.add_parser("experiment", help="run a (pairs x methods) sweep")
    p_exp.add_argument("--spec", required=True)
    p_exp.add_argument("--out-dir", required=True)
    p_exp.set_defaults(func=cmd_experiment)

    p_cor = sub.add_parser("make-corpus", help="generate synthetic pairs")
    p_cor.add_argument("--kind", choices=CORPUS_KINDS, required=True)
    p_cor.add_argument("--count", type=int, default=10)
    p_cor.add_argument("--size", type=int, default=128)
    p_cor.add_argument("--seed", type=int, default=0)
    p_cor.add_argument("--alpha", type=float, default=0.5)
    p_cor.add_argument("--out-dir", required=True)
    p_cor.set_defaults(func=cmd_make_corpus)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UnsupportedFormatError, ValidationError, ResidualForgeError,
            ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
