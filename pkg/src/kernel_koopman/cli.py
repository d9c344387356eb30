"""Command-line driver: ``kernel-koopman {simulate,fit,eval,compare,export-plots}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .core import continuous_eigenvalues, fit
from .edmd import match_spectra
from .errors import ConfigError, DataFormatError, DegenerateData, DimensionMismatch, KoopmanError
from .fhn import generate_dataset
from .io import (
    complex_columns,
    load_decomposition,
    load_snapshots,
    load_states,
    save_decomposition,
    write_snapshots,
    write_snapshots_csv,
)
from .kernels import parse_kernel

log = logging.getLogger("kernel_koopman")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
MANIFEST = "manifest.json"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _publish(tmp: Path, out: Path) -> None:
    """Move finished files from ``tmp`` into ``out``; nothing appears on failure."""
    out.mkdir(parents=True, exist_ok=True)
    for f in tmp.iterdir():
        shutil.move(str(f), out / f.name)


def _find_layout(data_path: Path) -> dict | None:
    manifest = data_path.parent / MANIFEST
    if manifest.exists():
        try:
            return json.loads(manifest.read_text()).get("layout")
        except ValueError:
            return None
    return None


def cmd_simulate(cfg: RunConfig) -> int:
    fcfg = cfg.fhn_config()
    t0 = time.perf_counter()
    datasets = generate_dataset(fcfg)
    params = dataclasses.asdict(fcfg)
    params["forcing_centers"] = list(params["forcing_centers"])
    canonical = json.dumps(params, sort_keys=True)
    files = []
    with tempfile.TemporaryDirectory() as tmpd:
        tmp = Path(tmpd)
        for i, S in enumerate(datasets):
            if cfg.format == "csv":
                px, py = write_snapshots_csv(tmp / f"trajectory_{i}", S)
                files.append([px.name, py.name])
            else:
                name = f"trajectory_{i}.kdmd"
                write_snapshots(tmp / name, S)
                files.append(name)
        manifest = {
            "generator": "fitzhugh-nagumo",
            "package_version": __version__,
            "numpy_version": np.__version__,
            "seed": fcfg.rng_seed,
            "rng": "numpy PCG64(seed + trajectory index), 3 standard normals per perturbation",
            "config": params,
            "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
            "files": files,
            "shape": [datasets[0].M, datasets[0].N],
            "layout": {"type": "fhn", "n_modes": fcfg.n_modes, "length": fcfg.length},
        }
        (tmp / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")
        _publish(tmp, Path(cfg.out))
    log.info("wrote %d trajectories to %s in %.1fs", len(datasets), cfg.out, time.perf_counter() - t0)
    return EXIT_OK


def cmd_fit(cfg: RunConfig) -> int:
    if cfg.data is None:
        raise ConfigError("fit needs a snapshot file")
    data_path = Path(cfg.data)
    S = load_snapshots(data_path)
    kernel = parse_kernel(cfg.kernel)
    D = fit(S, kernel, cfg.policy(), normalize=cfg.normalize)
    meta = {"source": str(data_path), "layout": _find_layout(data_path)}
    lam = D.lam
    with tempfile.TemporaryDirectory() as tmpd:
        tmp = Path(tmpd)
        save_decomposition(tmp, D, meta)
        rows = []
        for k, mu in enumerate(D.mu):
            lk = lam[k] if lam is not None else complex("nan+nanj")
            rows.append([k, mu.real, mu.imag, lk.real, lk.imag])
        _write_csv(tmp / "eigenvalues.csv", ["index", "mu_re", "mu_im", "lambda_re", "lambda_im"], rows)
        (tmp / "timing.json").write_text(json.dumps({"wall_time": D.diagnostics["wall_time"]}) + "\n")
        _publish(tmp, Path(cfg.out))
    diag = D.diagnostics
    log.info(
        "rank %d, Gram condition %.3e, eigenvector condition %.3e, reconstruction residual %.3e, %.2fs",
        diag["rank"], diag["gram_condition"], diag["eigvec_condition"],
        diag["reconstruction_residual"], diag["wall_time"],
    )
    return EXIT_OK


def cmd_eval(decomp: str, cfg: RunConfig) -> int:
    if cfg.states is None:
        raise ConfigError("eval needs a states file")
    D, _ = load_decomposition(decomp)
    X = load_states(cfg.states)
    if X.shape[0] and X.shape[1] != D.N:
        raise DimensionMismatch(f"states have length {X.shape[1]}, decomposition expects {D.N}")
    if X.shape[0]:
        phi = D.eigenfunction_at(X)
        pred = D.predict(X)
    else:
        phi = np.empty((0, D.r), dtype=complex)
        pred = np.empty((0, D.N))
    phi_rows = np.empty((phi.shape[0], 2 * D.r))
    phi_rows[:, 0::2], phi_rows[:, 1::2] = phi.real, phi.imag
    with tempfile.TemporaryDirectory() as tmpd:
        tmp = Path(tmpd)
        _write_csv(tmp / "eigenfunctions.csv", complex_columns("phi", D.r), phi_rows)
        _write_csv(tmp / "predictions.csv", [f"y{n}" for n in range(D.N)], pred)
        _publish(tmp, Path(cfg.out))
    return EXIT_OK


def cmd_compare(a: str, b: str, cfg: RunConfig) -> int:
    Da, _ = load_decomposition(a)
    Db, _ = load_decomposition(b)
    rep = match_spectra(Da.mu, Db.mu, cfg.tol)
    rows = [[i, j, Da.mu[i].real, Da.mu[i].imag, Db.mu[j].real, Db.mu[j].imag, d] for i, j, d in rep.pairs]
    rows += [[i, "", Da.mu[i].real, Da.mu[i].imag, "", "", ""] for i in rep.unmatched_a]
    rows += [["", j, "", "", Db.mu[j].real, Db.mu[j].imag, ""] for j in rep.unmatched_b]
    header = ["index_a", "index_b", "a_re", "a_im", "b_re", "b_im", "distance"]
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "compare.csv", header, rows)
    summary = {
        "matched": len(rep.pairs),
        "unmatched_a": len(rep.unmatched_a),
        "unmatched_b": len(rep.unmatched_b),
        "max_distance": rep.max_distance,
        "tol": cfg.tol,
    }
    (out / "compare.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(
        f"matched {summary['matched']}, unmatched {summary['unmatched_a']} (A) / "
        f"{summary['unmatched_b']} (B), max distance {rep.max_distance:.3e} at tol {cfg.tol:g}"
    )
    return EXIT_OK


def cmd_export_plots(decomp: str, cfg: RunConfig) -> int:
    D, doc = load_decomposition(decomp)
    lam = continuous_eigenvalues(D.mu, D.dt)
    sel = D.select_tuples(cfg.select, cfg.top)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[k, lam[k].real, lam[k].imag] for k in range(D.r) if np.isfinite(lam[k])]
    _write_csv(out / "eigenvalues_scatter.csv", ["index", "lambda_re", "lambda_im"], rows)
    _write_csv(out / "selected.csv", ["rank", "index", "lambda_re", "lambda_im"],
               [[n, k, lam[k].real, lam[k].imag] for n, k in enumerate(sel)])
    layout = (doc.get("meta") or {}).get("layout")
    header = ["mode", "index", "x", "re", "im"]
    if layout and layout.get("type") == "fhn" and D.N == 2 * layout["n_modes"]:
        n = layout["n_modes"]
        grid = (np.arange(n) + 0.5) * layout["length"] / n
        for part, sl in (("v", slice(0, n)), ("w", slice(n, 2 * n))):
            rows = [[k, j, grid[j], D.Xi[k, sl][j].real, D.Xi[k, sl][j].imag] for k in sel for j in range(n)]
            _write_csv(out / f"modes_{part}.csv", header, rows)
    else:
        rows = [[k, j, j, D.Xi[k, j].real, D.Xi[k, j].imag] for k in sel for j in range(D.N)]
        _write_csv(out / "modes.csv", header, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--kernel", help="polynomial:ALPHA | gaussian[:SIGMA] | linear")
    trunc = fitting.add_mutually_exclusive_group()
    trunc.add_argument("--rank", type=int, help="keep the R largest singular values")
    trunc.add_argument("--threshold", type=float, help="keep singular values >= T * largest")
    fitting.add_argument("--normalize", choices=["on", "off"])

    p = argparse.ArgumentParser(prog="kernel-koopman", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="generate FitzHugh-Nagumo snapshot files")
    s.add_argument("--seed", type=int)
    s.add_argument("--format", choices=["kdmd", "csv"])

    f = sub.add_parser("fit", parents=[common, fitting], help="fit a decomposition to snapshot pairs")
    f.add_argument("data", nargs="?", help="snapshot file (.kdmd or .csv)")

    e = sub.add_parser("eval", parents=[common], help="evaluate eigenfunctions and predictions")
    e.add_argument("decomposition")
    e.add_argument("states", nargs="?", help="states file (.csv, .npy or .kdmd)")

    c = sub.add_parser("compare", parents=[common], help="match the spectra of two decompositions")
    c.add_argument("decomposition_a")
    c.add_argument("decomposition_b")
    c.add_argument("--tol", type=float)

    x = sub.add_parser("export-plots", parents=[common], help="write plot-ready eigenvalue and mode tables")
    x.add_argument("decomposition")
    x.add_argument("--top", type=int)
    x.add_argument("--select", choices=["slowest-decay", "largest-magnitude", "top-n"])
    return p


def _config_from_args(args) -> RunConfig:
    overrides = {"out": args.out}
    for key in ("kernel", "rank", "threshold", "seed", "format", "tol", "top", "select", "data", "states"):
        overrides[key] = getattr(args, key, None)
    if getattr(args, "normalize", None) is not None:
        overrides["normalize"] = args.normalize == "on"
    cfg = load_config(args.config, **overrides)
    if getattr(args, "rank", None) is not None:
        cfg.threshold = None
    if getattr(args, "seed", None) is not None:
        cfg.fhn = {**cfg.fhn, "rng_seed": args.seed}
    return cfg.validate()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _config_from_args(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "fit":
            return cmd_fit(cfg)
        if args.command == "eval":
            return cmd_eval(args.decomposition, cfg)
        if args.command == "compare":
            return cmd_compare(args.decomposition_a, args.decomposition_b, cfg)
        return cmd_export_plots(args.decomposition, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, DimensionMismatch, DegenerateData) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (KoopmanError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
