"""Command-line interface: figure reproduction and verification runs.

Every run creates <out-dir>/<command>/<timestamp>/ and writes manifest.json
before any computation, then data.csv (schema-versioned, 12 significant
digits) and plot.svg.  `mvawgn rerun <manifest.json>` repeats a run from its
manifest and reproduces data.csv byte for byte.

Exit codes: 0 success, 2 validation error, 3 partial (some grid points
failed).
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ChannelSpec
from .minphi import error_probability_bound, minimizer_sweep, socr
from .shell_density import log_ratio_shell_vs_gaussian, log_ratio_shell_vs_shell
from .simulate import (
    achievability_error_bound,
    build_mixture,
    empirical_cdf_info_density,
    estimate_error_functional,
)
from .svgplot import line_plot

MANIFEST_SCHEMA = "mvawgn-run-v1"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARTIAL = 3


class ValidationError(ValueError):
    pass


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def _write_csv(path: Path, schema: str, header: list[str], rows: list[list]) -> None:
    lines = [f"# schema: {schema}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_grid(text: str) -> list[float]:
    """Grid syntax: 'a:b:step' (inclusive) or comma-separated values."""
    if ":" in text:
        pieces = text.split(":")
        if len(pieces) != 3:
            raise ValidationError(f"bad grid {text!r}: expected a:b:step")
        a, b, step = (float(p) for p in pieces)
        if step <= 0 or b < a:
            raise ValidationError(f"bad grid {text!r}: need step > 0 and b >= a")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [a + i * step for i in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]


def _parse_int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _out_paths(out_dir: str, command: str):
    stamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    run_dir = Path(out_dir) / command / stamp
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def _write_manifest(run_dir: Path, command: str, params: dict) -> None:
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "version": __version__,
        "command": command,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "params": params,
    }
    (run_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _channel(params: dict, v_override: float | None = None) -> ChannelSpec:
    v = params["v"] if v_override is None else v_override
    try:
        return ChannelSpec(
            noise_variance=params["noise"], gamma=params["gamma"], var_budget=v
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


# ---------------------------------------------------------------- commands


def run_socr_curve(params: dict, run_dir: Path) -> int:
    eps_grid = params["eps_grid"]
    v_values = params["v_list"]
    if any(not 0.0 < e < 1.0 for e in eps_grid):
        raise ValidationError("eps grid values must lie in (0, 1)")
    if any(v < 0 for v in v_values):
        raise ValidationError("v values must be nonnegative")
    if 0.0 not in v_values:
        v_values = [0.0] + list(v_values)  # always include the baseline

    rows, failed = [], 0
    curves: dict[float, tuple[list, list]] = {v: ([], []) for v in v_values}
    for v in v_values:
        spec = _channel(params, v_override=v)
        for eps in eps_grid:
            try:
                value = socr(spec, eps)
                status = "ok"
            except Exception:
                value, status = None, "failed"
                failed += 1
            rows.append([eps, v, value, status])
            if value is not None:
                curves[v][0].append(eps)
                curves[v][1].append(value)

    _write_csv(run_dir / "data.csv", "socr-curve-v1", ["eps", "v", "socr", "status"], rows)
    if params["format"] in ("svg", "both"):
        line_plot(
            [(f"V={_fmt(v)}", xs, ys) for v, (xs, ys) in curves.items()],
            run_dir / "plot.svg",
            title="Second-order coding rate vs error probability",
            xlabel="target error probability",
            ylabel="second-order rate (nats)",
        )
    return EXIT_PARTIAL if failed else EXIT_OK


def run_minimizer_sweep(params: dict, run_dir: Path) -> int:
    v_grid = params["v_list"]
    if any(v <= 0 for v in v_grid) or sorted(v_grid) != list(v_grid):
        raise ValidationError("v grid must be positive and increasing")
    result = minimizer_sweep(params["r"], v_grid)

    rows, failed = [], 0
    for item in result:
        row = [item.v]
        if item.minimizer is None:
            failed += 1
            row += [None] * 6
        else:
            atoms = list(item.minimizer.atoms)
            for point, prob in atoms:
                row += [point, prob]
            row += [None] * (2 * (3 - len(atoms)))
        row.append(item.status)
        rows.append(row)
    _write_csv(
        run_dir / "data.csv",
        "minimizer-sweep-v1",
        ["v", "point1", "prob1", "point2", "prob2", "point3", "prob3", "status"],
        rows,
    )
    if params["format"] in ("svg", "both"):
        ok = [it for it in result if it.minimizer is not None]
        series = []
        for k in range(3):
            xs = [it.v for it in ok if len(it.minimizer.atoms) > k]
            pts = [it.minimizer.atoms[k][0] for it in ok if len(it.minimizer.atoms) > k]
            pr = [it.minimizer.atoms[k][1] for it in ok if len(it.minimizer.atoms) > k]
            if xs:
                series.append((f"point{k + 1}", xs, pts))
                series.append((f"prob{k + 1}", xs, pr))
        line_plot(
            series,
            run_dir / "plot.svg",
            title=f"Minimizer support vs variance budget (r={_fmt(params['r'])})",
            xlabel="variance budget",
            ylabel="support point / probability",
        )
    return EXIT_PARTIAL if failed else EXIT_OK


def run_verify_lemmas(params: dict, run_dir: Path) -> int:
    ns = params["n_list"]
    if sorted(ns) != list(ns) or any(n < 2 for n in ns):
        raise ValidationError("n list must be increasing, entries >= 2")
    if params["trials"] < 1000:
        raise ValidationError("need at least 1000 samples per n")

    gauss = log_ratio_shell_vs_gaussian(
        params["gamma"], params["noise"], ns, params["trials"], params["seed"]
    )
    shell = log_ratio_shell_vs_shell(
        params["gamma"],
        params["eps_cost"],
        params["noise"],
        ns,
        params["trials"],
        params["seed"] + 1,
        eps_scaling=params["eps_scaling"],
    )
    rows = []
    for tag, sweep in (("shell-vs-gaussian", gauss), ("shell-vs-shell", shell)):
        for r in sweep:
            rows.append(
                [
                    tag,
                    r.n,
                    r.delta,
                    r.eps_cost,
                    r.sup_abs_log_ratio,
                    r.sup_over_log_n,
                    int(round(r.in_set_fraction * params["trials"])),
                ]
            )
    _write_csv(
        run_dir / "data.csv",
        "verify-lemmas-v1",
        ["comparison", "n", "delta", "eps", "sup_abs_log_ratio", "sup_over_log_n", "samples_in_set"],
        rows,
    )
    if params["format"] in ("svg", "both"):
        line_plot(
            [
                ("shell-vs-gaussian", [r.n for r in gauss], [r.sup_over_log_n for r in gauss]),
                ("shell-vs-shell", [r.n for r in shell], [r.sup_over_log_n for r in shell]),
            ],
            run_dir / "plot.svg",
            title="sup |log density ratio| / log n over the typical set",
            xlabel="blocklength n",
            ylabel="sup / log n",
        )
    low = any(r.low_coverage for r in gauss + shell)
    return EXIT_PARTIAL if low else EXIT_OK


def run_simulate(params: dict, run_dir: Path) -> int:
    spec = _channel(params)
    ns = params["n_list"]
    if any(n < 2 for n in ns):
        raise ValidationError("blocklengths must be >= 2")
    if params["trials"] < 1000:
        raise ValidationError("need at least 1000 trials")
    r = params["r"]
    eps_target = params["eps"]
    if r is None:
        if eps_target is None:
            raise ValidationError("provide --r or --eps")
        r = socr(spec, eps_target)
    limit = error_probability_bound(spec, r)

    rows, failed = [], 0
    est_series, bound_series = [], []
    for n in ns:
        try:
            code = build_mixture(spec, n, r=r)
            est = estimate_error_functional(code, spec, params["trials"], params["seed"])
            bound = achievability_error_bound(
                code, spec, params["trials"], params["seed"], params["theta_exponent"]
            )
        except Exception:
            failed += 1
            rows.append(["error-functional", n, r, eps_target, None, None, None, params["trials"], params["seed"]])
            continue
        rows.append(
            ["error-functional", n, r, eps_target, est.estimate, est.ci_low, est.ci_high, est.trials, est.seed]
        )
        rows.append(
            ["rc-bound", n, r, eps_target, bound.estimate, bound.ci_low, bound.ci_high, bound.trials, bound.seed]
        )
        est_series.append((n, est.estimate))
        bound_series.append((n, bound.estimate))
    _write_csv(
        run_dir / "data.csv",
        "simulate-v1",
        ["kind", "n", "r", "eps_target", "estimate", "ci_low", "ci_high", "trials", "seed"],
        rows,
    )
    if params["format"] in ("svg", "both") and est_series:
        line_plot(
            [
                ("error-functional", [p[0] for p in est_series], [p[1] for p in est_series]),
                ("rc-bound", [p[0] for p in bound_series], [p[1] for p in bound_series]),
                ("asymptotic limit", [ns[0], ns[-1]], [limit, limit]),
            ],
            run_dir / "plot.svg",
            title=f"Random-coding error terms at r={_fmt(r)}",
            xlabel="blocklength n",
            ylabel="probability",
        )
    return EXIT_PARTIAL if failed else EXIT_OK


def run_clt_check(params: dict, run_dir: Path) -> int:
    spec = _channel(params)
    ns = params["n_list"]
    cost = params["cost"] if params["cost"] is not None else params["gamma"]
    if cost < 0:
        raise ValidationError("cost must be nonnegative")
    if params["trials"] < 10_000:
        raise ValidationError("need at least 10000 draws")

    rows = []
    ks_points = []
    for n in ns:
        table = empirical_cdf_info_density(spec, cost, n, params["trials"], params["seed"])
        rows.append(
            [n, cost, table.trials, table.ks_vs_normal, table.sample_mean, table.sample_variance]
        )
        ks_points.append((n, table.ks_vs_normal))
    _write_csv(
        run_dir / "data.csv",
        "clt-check-v1",
        ["n", "cost", "trials", "ks_stat", "sample_mean", "sample_variance"],
        rows,
    )
    if params["format"] in ("svg", "both"):
        line_plot(
            [("KS distance", [p[0] for p in ks_points], [p[1] for p in ks_points])],
            run_dir / "plot.svg",
            title="Normalized info-density sum: KS distance to the normal CDF",
            xlabel="blocklength n",
            ylabel="KS distance",
        )
    return EXIT_OK


_RUNNERS = {
    "socr-curve": run_socr_curve,
    "minimizer-sweep": run_minimizer_sweep,
    "verify-lemmas": run_verify_lemmas,
    "simulate": run_simulate,
    "clt-check": run_clt_check,
}


# ---------------------------------------------------------------- dispatch


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", default="out")
    p.add_argument("--format", choices=("csv", "svg", "both"), default="both")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvawgn",
        description="AWGN coding rates under mean-and-variance power constraints",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("socr-curve", help="second-order rate curves over an eps grid")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--noise", type=float, required=True)
    p.add_argument("--v-list", required=True, help="comma list or a:b:step of variance budgets")
    p.add_argument("--eps-grid", required=True, help="a:b:step or comma list in (0,1)")
    _add_common(p)

    p = sub.add_parser("minimizer-sweep", help="minimizer atoms/probabilities vs variance")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--v-list", required=True)
    _add_common(p)

    p = sub.add_parser("verify-lemmas", help="log-density-ratio sups over the typical set")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--noise", type=float, required=True)
    p.add_argument("--n-list", required=True)
    p.add_argument("--trials", type=int, default=10_000, help="samples per n")
    p.add_argument("--eps-cost", type=float, default=0.5)
    p.add_argument("--eps-scaling", choices=("inv-sqrt-n", "fixed"), default="inv-sqrt-n")
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo error functional and coding bound")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--noise", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--n-list", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--theta-exponent", type=float, default=0.6)
    _add_common(p)

    p = sub.add_parser("clt-check", help="normal approximation of info-density sums")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--noise", type=float, required=True)
    p.add_argument("--v", type=float, default=0.0)
    p.add_argument("--cost", type=float, default=None)
    p.add_argument("--n-list", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    _add_common(p)

    p = sub.add_parser("rerun", help="repeat a run from its manifest")
    p.add_argument("manifest", help="path to manifest.json")
    p.add_argument("--out-dir", default=None, help="defaults to the manifest's out-dir")
    return parser


def _params_from_args(args: argparse.Namespace) -> dict:
    params = {
        "out_dir": args.out_dir,
        "format": args.format,
        "seed": args.seed,
    }
    cmd = args.command
    if cmd == "socr-curve":
        params.update(
            gamma=args.gamma,
            noise=args.noise,
            v_list=_parse_grid(args.v_list),
            eps_grid=_parse_grid(args.eps_grid),
            v=0.0,
        )
    elif cmd == "minimizer-sweep":
        params.update(r=args.r, v_list=_parse_grid(args.v_list))
    elif cmd == "verify-lemmas":
        params.update(
            gamma=args.gamma,
            noise=args.noise,
            n_list=_parse_int_list(args.n_list),
            trials=args.trials,
            eps_cost=args.eps_cost,
            eps_scaling=args.eps_scaling,
        )
    elif cmd == "simulate":
        params.update(
            gamma=args.gamma,
            noise=args.noise,
            v=args.v,
            r=args.r,
            eps=args.eps,
            n_list=_parse_int_list(args.n_list),
            trials=args.trials,
            theta_exponent=args.theta_exponent,
        )
    elif cmd == "clt-check":
        params.update(
            gamma=args.gamma,
            noise=args.noise,
            v=args.v,
            cost=args.cost,
            n_list=_parse_int_list(args.n_list),
            trials=args.trials,
        )
    return params


def _execute(command: str, params: dict) -> int:
    run_dir = _out_paths(params["out_dir"], command)
    _write_manifest(run_dir, command, params)
    code = _RUNNERS[command](params, run_dir)
    print(run_dir)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rerun":
            manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
            if manifest.get("schema") != MANIFEST_SCHEMA:
                raise ValidationError(f"unrecognized manifest schema {manifest.get('schema')!r}")
            command = manifest["command"]
            if command not in _RUNNERS:
                raise ValidationError(f"unrecognized command {command!r}")
            params = dict(manifest["params"])
            if args.out_dir is not None:
                params["out_dir"] = args.out_dir
            return _execute(command, params)
        params = _params_from_args(args)
        return _execute(args.command, params)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
