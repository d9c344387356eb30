import hashlib
import inspect
import time
import warnings

import numpy as np
import pytest

from kernel_koopman import PolynomialKernel, SnapshotSet, TruncationPolicy, fit, fhn
from kernel_koopman.fhn import FhnConfig, find_equilibrium, generate_trajectory


@pytest.fixture(scope="session")
def fhn_cfg():
    return FhnConfig()


@pytest.fixture(scope="session")
def fhn_equilibrium(fhn_cfg):
    return find_equilibrium(fhn_cfg)


@pytest.fixture(scope="session")
def _fhn_raw(fhn_cfg, fhn_equilibrium, request):
    """Default trajectories and their generation times, cached on disk keyed by config and generator source."""
    key = hashlib.sha256((repr(fhn_cfg) + inspect.getsource(fhn)).encode()).hexdigest()[:16]
    path = request.config.cache.mkdir("fhn") / f"{key}.npz"
    if path.exists():
        with np.load(path) as z:
            snaps = [z[f"t{i}"] for i in range(fhn_cfg.n_trajectories)]
            times = z["times"]
    else:
        snaps, times = [], []
        for i in range(fhn_cfg.n_trajectories):
            t0 = time.perf_counter()
            snaps.append(generate_trajectory(fhn_cfg, i, start=fhn_equilibrium))
            times.append(time.perf_counter() - t0)
        np.savez(path, times=np.array(times), **{f"t{i}": s for i, s in enumerate(snaps)})
    return snaps, [float(t) for t in times]


@pytest.fixture(scope="session")
def fhn_datasets(_fhn_raw, fhn_cfg):
    return [SnapshotSet(s[:-1], s[1:], dt=fhn_cfg.dt_sample) for s in _fhn_raw[0]]


@pytest.fixture(scope="session")
def fhn_gen_times(_fhn_raw):
    """Seconds spent generating each trajectory (from the run that filled the cache)."""
    return _fhn_raw[1]


@pytest.fixture(scope="session")
def fhn_fits(fhn_datasets):
    """Rank-150, degree-20 polynomial fits of the normalized trajectories."""
    out = []
    for S in fhn_datasets:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out.append(fit(S, PolynomialKernel(20), TruncationPolicy.fixed_rank(150), normalize=True))
    return out


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_report(request):
    """Collects one summary line per acceptance criterion."""
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
