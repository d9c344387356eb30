"""Snapshot and decomposition files.

Snapshot binary (``.kdmd``), little-endian::

    b"KDMD" | u32 version | u64 M | u64 N | f64 dt (NaN if absent)
    | M*N f64 X, row-major | M*N f64 Y, row-major

Snapshot text: ``<stem>.x.csv`` and ``<stem>.y.csv``, each starting with a
``# M=..,N=..,dt=..`` line followed by one state per row.

A decomposition is a directory holding ``decomposition.json`` (metadata and
eigenvalues) and ``decomposition.npz`` (matrices, complex arrays split into
``_re``/``_im`` parts).
"""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from . import __version__
from .core import KoopmanDecomposition
from .errors import DataFormatError
from .kernels import SnapshotSet, parse_kernel
from .numerics import TruncatedBasis

__all__ = [
    "write_snapshots",
    "read_snapshots",
    "write_snapshots_csv",
    "read_snapshots_csv",
    "load_snapshots",
    "load_states",
    "save_decomposition",
    "load_decomposition",
    "complex_columns",
]

MAGIC = b"KDMD"
VERSION = 1
_HEADER = struct.Struct("<4sIQQd")
DECOMP_JSON = "decomposition.json"
DECOMP_NPZ = "decomposition.npz"


def write_snapshots(path, S: SnapshotSet) -> None:
    dt = math.nan if S.dt is None else S.dt
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, S.M, S.N, dt))
        fh.write(np.ascontiguousarray(S.X, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(S.Y, dtype="<f8").tobytes())


def read_snapshots(path) -> SnapshotSet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise DataFormatError(f"{path}: file too short for a snapshot header")
    magic, version, M, N, dt = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DataFormatError(f"{path}: bad magic bytes {magic!r}")
    if version != VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 2 * M * N * 8
    if len(raw) != expected:
        raise DataFormatError(f"{path}: expected {expected} bytes for M={M}, N={N}, found {len(raw)}")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(float)
    X = body[: M * N].reshape(M, N)
    Y = body[M * N :].reshape(M, N)
    try:
        return SnapshotSet(X, Y, None if math.isnan(dt) else dt)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def _csv_paths(path) -> tuple[Path, Path]:
    p = Path(path)
    name = p.name
    for suffix in (".x.csv", ".y.csv", ".csv"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
            break
    return p.with_name(name + ".x.csv"), p.with_name(name + ".y.csv")


def _header_line(S: SnapshotSet) -> str:
    dt = "nan" if S.dt is None else repr(S.dt)
    return f"M={S.M},N={S.N},dt={dt}"


def write_snapshots_csv(path, S: SnapshotSet) -> tuple[Path, Path]:
    """Write ``<stem>.x.csv`` / ``<stem>.y.csv`` at 17 significant digits."""
    px, py = _csv_paths(path)
    for p, A in ((px, S.X), (py, S.Y)):
        np.savetxt(p, A, fmt="%.17g", delimiter=",", header=_header_line(S), comments="# ")
    return px, py


def _parse_header(line: str, path) -> dict:
    try:
        fields = dict(item.split("=", 1) for item in line.lstrip("#").strip().split(","))
        return {"M": int(fields["M"]), "N": int(fields["N"]), "dt": float(fields["dt"])}
    except (ValueError, KeyError) as exc:
        raise DataFormatError(f"{path}: malformed header {line!r}") from exc


def _read_csv_block(path) -> tuple[dict, np.ndarray]:
    try:
        with open(path) as fh:
            first = fh.readline()
            head = _parse_header(first, path)
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if data.shape != (head["M"], head["N"]):
        raise DataFormatError(f"{path}: header says {head['M']}x{head['N']}, body is {data.shape}")
    return head, data


def read_snapshots_csv(path) -> SnapshotSet:
    px, py = _csv_paths(path)
    hx, X = _read_csv_block(px)
    hy, Y = _read_csv_block(py)
    if hx != hy and not (math.isnan(hx["dt"]) and math.isnan(hy["dt"])):
        raise DataFormatError(f"{px} and {py} headers disagree")
    dt = None if math.isnan(hx["dt"]) else hx["dt"]
    try:
        return SnapshotSet(X, Y, dt)
    except ValueError as exc:
        raise DataFormatError(f"{px}: {exc}") from None


def load_snapshots(path) -> SnapshotSet:
    """Read a ``.kdmd`` file or a CSV pair, chosen by extension."""
    if str(path).endswith(".csv"):
        return read_snapshots_csv(path)
    try:
        return read_snapshots(path)
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def load_states(path) -> np.ndarray:
    """States for evaluation: ``.kdmd`` (its X block), ``.npy``, or CSV rows.

    CSV lines starting with ``#`` are ignored; an empty file gives zero rows.
    """
    path = Path(path)
    try:
        if path.suffix == ".kdmd":
            return read_snapshots(path).X
        if path.suffix == ".npy":
            return np.atleast_2d(np.load(path).astype(float))
        text = [ln for ln in path.read_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if not text:
        return np.empty((0, 0))
    try:
        return np.atleast_2d(np.loadtxt(text, delimiter=",", ndmin=2))
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def _split(z) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(z, dtype=complex)]


def save_decomposition(outdir, D: KoopmanDecomposition, meta: dict | None = None) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lam = D.lam
    doc = {
        "format": "kernel-koopman-decomposition",
        "version": VERSION,
        "package_version": __version__,
        "kernel": D.kernel.spec(),
        "scale": D.scale,
        "dt": D.dt,
        "rank": D.r,
        "state_dim": D.N,
        "n_snapshots": int(D.X_train.shape[0]),
        "mu": _split(D.mu),
        "lambda": None if lam is None else [[None, None] if not np.isfinite(v) else [v.real, v.imag] for v in lam],
        "diagnostics": {k: v for k, v in D.diagnostics.items() if k != "wall_time"},
        "meta": meta or {},
    }
    arrays = {"sigma": D.basis.sigma, "Q": D.basis.Q, "discarded": D.basis.discarded, "X_train": D.X_train}
    for name in ("mu", "Phi_x", "Xi", "efun_coeff"):
        z = np.asarray(getattr(D, name), dtype=complex)
        arrays[name + "_re"], arrays[name + "_im"] = z.real, z.imag
    np.savez(outdir / DECOMP_NPZ, **arrays)
    (outdir / DECOMP_JSON).write_text(json.dumps(doc, indent=2, allow_nan=True) + "\n")
    return outdir


def load_decomposition(path) -> tuple[KoopmanDecomposition, dict]:
    """Inverse of :func:`save_decomposition`; returns the decomposition and its metadata document."""
    p = Path(path)
    d = p if p.is_dir() else p.parent
    try:
        doc = json.loads((d / DECOMP_JSON).read_text())
        with np.load(d / DECOMP_NPZ) as z:
            arrays = {k: z[k] for k in z.files}
    except (OSError, ValueError) as exc:
        raise DataFormatError(f"{d}: cannot read decomposition ({exc})") from exc
    if doc.get("format") != "kernel-koopman-decomposition":
        raise DataFormatError(f"{d}: not a decomposition file")

    def cplx(name):
        return arrays[name + "_re"] + 1j * arrays[name + "_im"]

    D = KoopmanDecomposition(
        mu=cplx("mu"),
        Phi_x=cplx("Phi_x"),
        Xi=cplx("Xi"),
        efun_coeff=cplx("efun_coeff"),
        basis=TruncatedBasis(arrays["Q"], arrays["sigma"], arrays["discarded"]),
        kernel=parse_kernel(doc["kernel"]),
        X_train=arrays["X_train"],
        scale=doc["scale"],
        dt=doc["dt"],
        diagnostics=doc.get("diagnostics", {}),
    )
    return D, doc


def complex_columns(prefix: str, n: int) -> list[str]:
    """Header names for ``n`` complex columns written as (re, im) pairs."""
    return [f"{prefix}{k}_{part}" for k in range(n) for part in ("re", "im")]
