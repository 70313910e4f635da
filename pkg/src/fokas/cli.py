"""Command-line entry point: ``fokas <command> --config <path> [--out <dir>] [--seed <u64>]``.

Exit codes: 0 pass, 1 check failure, 2 configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config

COMMANDS = ("contour", "solve", "kernels", "psi", "vdc", "dispersion", "oracle", "verify-all")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

_UMASK = os.umask(0)
os.umask(_UMASK)


# ---------------------------------------------------------------------------
# output emission

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.16e}"
    if isinstance(v, (complex, np.complexfloating)):
        raise TypeError("split complex values into real and imaginary columns")
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(rows: list[dict], columns: list[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def emit_outputs(tables: dict, directory: str | Path, command: str, digest: str,
                 summaries: dict | None = None) -> list[Path]:
    """Write each table as CSV and each summary as JSON; return the paths.

    ``tables`` maps a table name to (columns, rows).  The table named after
    the command goes to ``{command}_{digest}.csv``; any other table to
    ``{command}-{name}_{digest}.csv``.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (columns, rows) in tables.items():
        stem = command if name == command else f"{command}-{name}"
        p = out / f"{stem}_{digest}.csv"
        _atomic_write(p, csv_text(rows, columns))
        paths.append(p)
    for name, obj in (summaries or {}).items():
        stem = command if name == command else f"{command}-{name}"
        p = out / f"{stem}_{digest}.json"
        _atomic_write(p, json_text(obj))
        paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# command pipelines; each returns (tables, summaries, failures)

def _cmd_contour(cfg: RunConfig):
    from .complex_plane import build_contour, contour_table

    c = cfg.commands["contour"]
    rows = contour_table(build_contour(cfg.params), int(c["n_per_path"]), float(c["s_max"]))
    cols = ["path_label", "s", "re_k", "im_k", "re_w", "im_w"]
    return {"contour": (cols, rows)}, {}, []


def _x_grid(cfg: RunConfig):
    from .evaluator import EvaluationGrid

    gx = cfg.raw["grids"]["x"]
    lo, hi, n = float(gx["min"]), float(gx["max"]), int(gx["count"])
    grading = gx.get("grading", "geometric-linear")
    if grading == "linear":
        return np.linspace(lo, hi, n)
    if grading == "geometric":
        return np.geomspace(lo, hi, n)
    if grading == "geometric-linear":
        return EvaluationGrid.graded(lo, hi, n, [cfg.T]).x_nodes
    raise ConfigError([("grids.x.grading", f"unknown grading {grading!r}")])


def _cmd_solve(cfg: RunConfig):
    from .evaluator import EvaluationGrid, solve_field

    comps = bool(cfg.commands["solve"].get("components", False))
    grid = EvaluationGrid(_x_grid(cfg), cfg.t_nodes())
    field = solve_field(grid, cfg.g0, cfg.g1, cfg.params, cfg.tol, cfg.T, components=comps)
    cols = ["x", "t", "re_y", "im_y", "abs_y"]
    labels = sorted(field.components) if field.components else []
    for lab in labels:
        cols += [f"re_{lab}", f"im_{lab}"]
    rows = []
    for j, t in enumerate(grid.t_nodes):
        for i, x in enumerate(grid.x_nodes):
            v = field.values[i, j]
            row = {"x": x, "t": t, "re_y": v.real, "im_y": v.imag, "abs_y": abs(v)}
            for lab in labels:
                c = field.components[lab][i, j]
                row[f"re_{lab}"], row[f"im_{lab}"] = c.real, c.imag
            rows.append(row)
    err = float(field.error.max()) if field.error is not None and field.error.size else 0.0
    summary = {"tol": cfg.tol, "max_error_estimate": err,
               "max_abs_y": float(np.abs(field.values).max(initial=0.0))}
    return {"solve": (cols, rows)}, {"solve": summary}, []


def _cmd_kernels(cfg: RunConfig):
    from .acceptance import kernel_rows

    c = cfg.commands["kernels"]
    ys = np.linspace(float(c["y"]["min"]), float(c["y"]["max"]), int(c["y"]["count"]))
    rows = kernel_rows([int(e) for e in c["ells"]], ys, [float(x) for x in c["x"]],
                       [float(t) for t in c["t"]])
    env = []
    for ell in c["ells"]:
        for x in c["x"]:
            for t in c["t"]:
                sup = max(r["abs_K"] for r in rows if r["ell"] == ell and r["x"] == x and r["t"] == t)
                env.append({"ell": ell, "x": x, "t": t, "sup_abs_K": sup,
                            "scaled_envelope": t ** 0.25 * sup})
    cols = ["ell", "y", "x", "t", "re_K", "im_K", "abs_K"]
    return {"kernels": (cols, rows)}, {"kernels": {"envelopes": env}}, []


def _cmd_psi(cfg: RunConfig):
    from .transforms import build_psi, psi_norm

    c = cfg.commands["psi"]
    window, n_y = float(c["window"]), int(c["n_y"])
    y_out = np.linspace(-window, window, int(c["y_out"]))
    hat_rows, psi_rows, norms = [], [], []
    for i in range(1, 6):
        spec = build_psi(i, cfg.g0, cfg.g1, cfg.T, cfg.params, y_grid=y_out)
        for s, v in zip(spec.s_grid, spec.hat_values):
            hat_rows.append({"i": i, "s": s, "re_hat": v.real, "im_hat": v.imag})
        for y, v in zip(spec.y_grid, spec.psi_samples):
            psi_rows.append({"i": i, "y": y, "re_psi": v.real, "im_psi": v.imag})
        for rp in c["r_prime"]:
            nrm = psi_norm(spec, float(rp), window, n_y)
            norms.append({"i": i, "r_prime": float(rp), "norm": nrm.norm,
                          "windowed_divergent": nrm.tail_divergent})
    return ({"psi": (["i", "s", "re_hat", "im_hat"], hat_rows),
             "samples": (["i", "y", "re_psi", "im_psi"], psi_rows)},
            {"norms": norms}, [])


def _cmd_vdc(cfg: RunConfig):
    from .quadrature import R_HALF, oscillatory_I, vdc_certificate
    from .acceptance import sweep

    c = cfg.commands["vdc"]
    n = int(c["count"])
    S = np.linspace(*map(float, c["s"]), n)
    Y = np.linspace(*map(float, c["shift"]), n)
    Tt = np.geomspace(*map(float, c["t"]), n)
    pts = [(kind, s, y, t) for kind in ("van", "van2") for s in S for y in Y for t in Tt]

    def one(pt):
        kind, s, y, t = pt
        upper = s if kind == "van" else R_HALF + s
        val = abs(oscillatory_I(kind, upper, y, t, 1e-10))
        cert = vdc_certificate(kind, upper, y, t)
        return {"kind": kind, "s": s, "y_or_omega": y, "t": t, "abs_I": val,
                "certificate_bound": cert.total_bound, "case_tag": cert.case_tag,
                "pass": bool(val <= cert.total_bound)}

    rows = sweep(one, pts)
    bad = [{"kind": r["kind"], "s": r["s"], "y_or_omega": r["y_or_omega"], "t": r["t"],
            "detail": "certificate exceeded"} for r in rows if not r["pass"]]
    cols = ["kind", "s", "y_or_omega", "t", "abs_I", "certificate_bound", "case_tag", "pass"]
    return {"vdc": (cols, rows)}, {"vdc": {"points": len(rows), "all_dominated": not bad}}, bad


def _cmd_dispersion(cfg: RunConfig):
    from .acceptance import SLOPE_BOUNDS
    from .dispersion import dispersion_run

    c = cfg.commands["dispersion"]
    rs = tuple(math.inf if str(r) == "inf" else float(r) for r in c["r"])
    t_nodes = np.geomspace(float(c["t_min"]), min(1.0, cfg.T), int(c["count"]))
    run = dispersion_run(cfg.g0, cfg.g1, cfg.params, cfg.T, t_nodes, rs, float(c["x_max"]),
                         int(c["nx"]), cfg.tol)
    summary, bad = [], []
    for r in rs:
        bound = SLOPE_BOUNDS.get(r, -(0.25 - 0.5 / r) + 0.05)
        passed = run.slopes[r] <= bound
        if not passed:
            bad.append({"r": r, "detail": f"fitted slope {run.slopes[r]:.3f} above {bound:.3f}"})
        summary.append({"r": r, "fitted_slope": run.slopes[r], "slope_bound": bound,
                        "pass": passed, "psi_windowed_divergent": run.psi_divergent[r]})
    cols = ["t", "r", "norm", "psi_sum", "ratio"]
    return {"dispersion": (cols, list(run.rows()))}, {"dispersion": summary}, bad


def _cmd_oracle(cfg: RunConfig):
    from .evaluator import EvaluationGrid, solve_field
    from .oracle import FDGrid, compare_fields, fd_solve, global_relation_residual
    from .acceptance import GR_SAMPLES

    c = cfg.commands["oracle"]
    L, Nx, dt = float(c["L"]), int(c["Nx"]), float(c["dt"])
    times = np.asarray(c["t"], dtype=float)
    grid = FDGrid.for_horizon(cfg.T, L, Nx, dt)
    fd = fd_solve(cfg.params, cfg.g0, cfg.g1, grid, save_every=max(1, int(round(0.05 / grid.dt))),
                  check_leakage=False)
    x = EvaluationGrid.graded(1e-3, L, 2000, times).x_nodes
    field = solve_field(EvaluationGrid(x, times), cfg.g0, cfg.g1, cfg.params, cfg.tol, cfg.T)
    rep = compare_fields(field, fd)
    gt = float(c["gr_time"])
    gr = [{"re_k": k.real, "im_k": k.imag, "residual": global_relation_residual(fd, k, gt)}
          for k in GR_SAMPLES]
    bad = [{"t": float(t), "detail": f"relative L2 difference {e:.2e} above 5e-3"}
           for t, e in zip(times, rep.rel_l2) if e > 5e-3]
    bad += [{"k": [g["re_k"], g["im_k"]], "detail": f"global relation residual {g['residual']:.2e}"}
            for g in gr if g["residual"] > 5e-3]
    report = {**rep.as_dict(), "global_relation_time": gt, "global_relation": gr,
              "fd_far_field_leakage": fd.leakage, "pass": not bad}
    rows = [{"x": xx, "t": tt, "re_y": v.real, "im_y": v.imag}
            for tt, row in zip(fd.t_saved, fd.values) for xx, v in zip(grid.x, row)]
    return {"oracle": (["x", "t", "re_y", "im_y"], rows)}, {"oracle": report}, bad


def _determinism_selfcheck(cfg: RunConfig) -> dict:
    """Render two cheap pipelines twice in-process and compare the bytes."""
    from .acceptance import CheckResult

    t0 = time.perf_counter()
    same = True
    for fn in (_cmd_contour, _cmd_vdc_small):
        a, b = fn(cfg)[0], fn(cfg)[0]
        for name in a:
            same &= csv_text(a[name][1], a[name][0]) == csv_text(b[name][1], b[name][0])
    return CheckResult(11, "determinism", same, {"identical": same},
                       "in-process rerun of contour and vdc emitters "
                       + ("byte-identical" if same else "DIFFERS"),
                       time.perf_counter() - t0)


def _cmd_vdc_small(cfg: RunConfig):
    small = dict(cfg.raw)
    small["commands"] = {**cfg.commands, "vdc": {**cfg.commands["vdc"], "count": 3}}
    return _cmd_vdc(RunConfig(small, cfg.params, cfg.T, cfg.g0, cfg.g1, cfg.tol, cfg.seed))


def _cmd_verify_all(cfg: RunConfig, timings: dict):
    from .acceptance import run_checks

    which = cfg.commands.get("verify-all", {}).get("checks")
    results = run_checks(cfg.seed, which, on_result=lambda r: print(r.line(), flush=True))
    results.append(_determinism_selfcheck(cfg))
    print(results[-1].line(), flush=True)
    tables = {}
    for res in results:
        timings[f"check_{res.criterion}"] = res.seconds
        for name, rows in res.tables.items():
            if rows:
                tables[name] = (list(rows[0].keys()), rows)
    summary_rows = [{"criterion": r.criterion, "name": r.name, "pass": r.passed,
                     "detail": r.detail.replace(",", ";")} for r in results]
    tables["verify-all"] = (["criterion", "name", "pass", "detail"], summary_rows)
    checks = [r.summary() for r in results]
    bad = [{"criterion": r.criterion, "name": r.name, "detail": r.detail}
           for r in results if not r.passed]
    return tables, {"verify-all": {"checks": checks, "all_pass": not bad}}, bad


PIPELINES = {"contour": _cmd_contour, "solve": _cmd_solve, "kernels": _cmd_kernels,
             "psi": _cmd_psi, "vdc": _cmd_vdc, "dispersion": _cmd_dispersion,
             "oracle": _cmd_oracle}


def run_command(cmd: str, cfg: RunConfig, out_dir: str | Path | None = None) -> int:
    """Execute one pipeline, write its outputs and the run manifest; return the exit status."""
    if cmd not in COMMANDS:
        raise ConfigError([("command", f"unknown command {cmd!r}")])
    out = Path(out_dir if out_dir is not None else cfg.output)
    digest = cfg.digest()
    timings = {}
    t0 = time.perf_counter()
    if cmd == "verify-all":
        tables, summaries, failures = _cmd_verify_all(cfg, timings)
    else:
        tables, summaries, failures = PIPELINES[cmd](cfg)
    ok = not failures
    timings["compute"] = time.perf_counter() - t0
    t1 = time.perf_counter()
    paths = emit_outputs(tables, out, cmd, digest, summaries)
    timings["emit"] = time.perf_counter() - t1
    manifest = {
        "command": cmd,
        "artifact_version": __version__,
        "config": cfg.raw,
        "config_digest": digest,
        "rng": {"generator": "numpy Philox", "seed": cfg.seed},
        "outputs": {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in paths},
        "wall_clock_seconds": timings,
        "pass": ok,
        "failures": failures,
    }
    _atomic_write(out / f"{cmd}_{digest}.manifest.json", json_text(manifest))
    if not ok:
        print(json.dumps({"status": "check-failure", "command": cmd,
                          "failures": _jsonable(manifest["failures"])}), file=sys.stderr)
    return EXIT_PASS if ok else EXIT_FAIL


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="fokas", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("--seed", type=int, help="seed for randomized sweeps (unsigned 64-bit)")
    args = ap.parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output"] = args.out
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(json.dumps({"status": "config-error",
                          "errors": [{"field": f, "message": m} for f, m in exc.problems]}),
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run_command(args.command, cfg)
    except ConfigError as exc:
        print(json.dumps({"status": "config-error",
                          "errors": [{"field": f, "message": m} for f, m in exc.problems]}),
              file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every other failure is a runtime error
        print(json.dumps({"status": "runtime-error", "type": type(exc).__name__,
                          "message": str(exc)}), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
