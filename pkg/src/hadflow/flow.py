"""Point-cloud integration of the gradient flow and snapshot export.

Every point carries its own time and step size; the Dormand-Prince 5(4)
pair is evaluated for all still-active points at once, so a hard point never
shrinks the steps of an easy one and the result for a point does not depend
on which other points share the batch.
"""
from __future__ import annotations

import csv
import json
import logging
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .phase_core import PhaseVector, gradient_batch, order_from_size, potential_batch

log = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class StepFloorWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SimConfig:
    n_points: int = 500
    radius: float = 0.3
    seed: int = 0
    times: tuple[float, ...] = (5.0, 20.0, 70.0, 500.0)
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = np.inf
    min_step: float = 1e-10

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be positive")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        times = tuple(float(t) for t in self.times)
        if not times or times[0] < 0 or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"snapshot times must be non-negative and strictly increasing: {times}")
        object.__setattr__(self, "times", times)
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.min_step < self.max_step:
            raise ValueError("need 0 < min_step < max_step")


@dataclass(frozen=True)
class PCAResult:
    coords: np.ndarray
    basis: np.ndarray
    explained_variance: np.ndarray
    explained_ratio: np.ndarray
    mean: np.ndarray
    degenerate: bool


@dataclass(frozen=True, eq=False)
class FlowSnapshot:
    time: float
    d: int
    thetas: np.ndarray
    log10_field_mag: np.ndarray
    potential: np.ndarray
    pca: PCAResult
    underflow: np.ndarray = field(repr=False)

    @property
    def points(self) -> list[PhaseVector]:
        return [PhaseVector(self.d, th) for th in self.thetas]

    @property
    def pca_coords(self) -> np.ndarray:
        return self.pca.coords


def sample_neighborhood(center: PhaseVector, cfg: SimConfig) -> np.ndarray:
    """``cfg.n_points`` points, each coordinate uniform within ``cfg.radius`` of the center."""
    rng = np.random.default_rng(cfg.seed)
    c = np.asarray(center.theta, dtype=float)
    offsets = rng.uniform(-cfg.radius, cfg.radius, size=(cfg.n_points, c.shape[0]))
    return c[None, :] + offsets


def _dp_step(y, h, d, k1):
    ks = [k1]
    for stage in range(1, 7):
        incr = sum(a * k for a, k in zip(_A[stage], ks) if a != 0)
        ks.append(gradient_batch(y + h[:, None] * incr, d))
    y5 = y + h[:, None] * sum(b * k for b, k in zip(_B5, ks) if b != 0)
    err = h[:, None] * sum(e * k for e, k in zip(_E, ks) if e != 0)
    return y5, err, ks[6]


def advance(y: np.ndarray, t0: float, t1: float, cfg: SimConfig, h=None, underflow=None):
    """Integrate every row of ``y`` from ``t0`` to exactly ``t1``.

    Returns ``(y, h, underflow)`` with the per-point step sizes to reuse on
    the next interval and a mask of points that hit the step floor.
    """
    y = np.array(y, dtype=float)
    n, size = y.shape
    d = order_from_size(size)
    t = np.full(n, float(t0))
    h = np.full(n, min(0.01, cfg.max_step)) if h is None else np.array(h, dtype=float)
    underflow = np.zeros(n, dtype=bool) if underflow is None else underflow.copy()
    if t1 <= t0:
        return y, h, underflow
    active = np.arange(n)
    k1 = gradient_batch(y, d)
    while active.size:
        ya, ta = y[active], t[active]
        remaining = t1 - ta
        ha = np.minimum(np.minimum(h[active], cfg.max_step), remaining)
        y5, err, k_last = _dp_step(ya, ha, d, k1[active])
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(ya), np.abs(y5))
        ratio = np.max(np.abs(err) / scale, axis=1)
        at_floor = ha <= cfg.min_step
        accept = (ratio <= 1) | at_floor
        if np.any(at_floor & (ratio > 1)):
            hit = active[at_floor & (ratio > 1)]
            if not underflow[hit].all():
                warnings.warn(f"{np.count_nonzero(~underflow[hit])} point(s) hit the step floor "
                              f"{cfg.min_step:g}; accepting steps above tolerance", StepFloorWarning,
                              stacklevel=2)
            underflow[hit] = True
        with np.errstate(divide="ignore"):
            factor = np.where(ratio == 0, 5.0, np.clip(0.9 * ratio ** -0.2, 0.2, 5.0))
        new_h = np.maximum(ha * factor, cfg.min_step)

        idx = active[accept]
        reached = accept & (ha >= remaining)
        y[idx] = y5[accept]
        t[idx] = np.where(reached[accept], t1, ta[accept] + ha[accept])
        k1[idx] = k_last[accept]
        # a step clipped to hit t1 says nothing about the natural step size
        keep = ~(reached & (ha < h[active]))
        h[active[keep]] = new_h[keep]
        active = active[~reached]
    return y, h, underflow


def integrate(cloud: np.ndarray, times, cfg: SimConfig | None = None,
              with_pca: bool = True) -> list[FlowSnapshot]:
    """Integrate ``d theta / dt = Phi(theta)`` and record snapshots at ``times``.

    Machine precision only.  Raises ``AssertionError`` if the potential of
    any point increases between snapshots beyond roundoff.
    """
    cfg = cfg or SimConfig()
    times = tuple(float(x) for x in times)
    if any(b <= a for a, b in zip(times, times[1:])) or (times and times[0] < 0):
        raise ValueError(f"snapshot times must be non-negative and strictly increasing: {times}")
    y = np.array(cloud, dtype=float)
    if y.ndim == 1:
        y = y[None, :]
    d = order_from_size(y.shape[1])
    snaps = []
    t_prev, h, underflow = 0.0, None, None
    v_prev = potential_batch(y, d)
    for t in times:
        y, h, underflow = advance(y, t_prev, t, cfg, h, underflow)
        v = potential_batch(y, d)
        slack = 1e-12 + 1e-9 * v_prev
        if np.any(v > v_prev + slack):
            bad = int(np.argmax(v - v_prev))
            raise AssertionError(f"potential increased at point {bad} between t={t_prev} and t={t}")
        snaps.append(_snapshot(t, d, y, v, underflow, with_pca))
        t_prev, v_prev = t, v
    return snaps


def _snapshot(t, d, y, v, underflow, with_pca) -> FlowSnapshot:
    mag = np.linalg.norm(gradient_batch(y, d), axis=1)
    with np.errstate(divide="ignore"):
        logmag = np.log10(mag)
    pca = pca_project(y) if with_pca and y.shape[0] >= 4 else None
    return FlowSnapshot(t, d, y.copy(), logmag, v, pca, underflow.copy())


def pca_project(points: np.ndarray, n_components: int = 3) -> PCAResult:
    """Top principal directions of the centered cloud and coordinates along them."""
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] < 4:
        raise ValueError("PCA needs at least 4 points")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (X.shape[0] - 1)
    lam, vecs = np.linalg.eigh(cov)
    lam, vecs = lam[::-1], vecs[:, ::-1]
    lam = np.clip(lam, 0, None)
    total = lam.sum()
    tol = max(total, 1e-300) * 1e-12
    rank = int(np.count_nonzero(lam > tol))
    k = min(n_components, rank) if total > 0 else 0
    basis = vecs[:, :k].T
    # fix the sign of each direction for reproducible output
    for i in range(k):
        j = np.argmax(np.abs(basis[i]))
        if basis[i, j] < 0:
            basis[i] = -basis[i]
    ratio = lam[:k] / total if total > 0 else np.zeros(0)
    return PCAResult(Xc @ basis.T, basis, lam[:k], ratio, mean, k < n_components)


def wrap(x):
    """Angles mapped into ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


def distance_to_lines(points: np.ndarray, base: PhaseVector, directions) -> np.ndarray:
    """Distance from each point to the nearest line ``base + s * v`` (differences wrapped)."""
    delta = wrap(np.asarray(points, dtype=float) - np.asarray(base.theta, dtype=float)[None, :])
    out = np.full(delta.shape[0], np.inf)
    for v in np.atleast_2d(np.asarray(directions, dtype=float)):
        s = delta @ v / (v @ v)
        out = np.minimum(out, np.linalg.norm(delta - s[:, None] * v[None, :], axis=1))
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def write_snapshots(snaps: list[FlowSnapshot], outdir, manifest: dict | None = None) -> list[Path]:
    """One CSV per snapshot plus ``manifest.json``; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    entries = []
    for k, snap in enumerate(snaps):
        size = snap.thetas.shape[1]
        path = outdir / f"snapshot_{k:03d}.csv"
        header = ["t", "point_id", *[f"theta_{i + 1}" for i in range(size)], "log10_mag",
                  "pc1", "pc2", "pc3"]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for pid in range(snap.thetas.shape[0]):
                pcs = [""] * 3
                if snap.pca is not None:
                    for j, v in enumerate(snap.pca.coords[pid]):
                        pcs[j] = _fmt(v)
                writer.writerow([_fmt(snap.time), pid, *map(_fmt, snap.thetas[pid]),
                                 _fmt(snap.log10_field_mag[pid]), *pcs])
        written.append(path)
        entry = {
            "file": path.name,
            "t": snap.time,
            "n_points": int(snap.thetas.shape[0]),
            "underflow_points": [int(i) for i in np.nonzero(snap.underflow)[0]],
        }
        if snap.pca is not None:
            entry["pca_basis"] = snap.pca.basis.tolist()
            entry["explained_variance"] = snap.pca.explained_variance.tolist()
            entry["explained_ratio"] = snap.pca.explained_ratio.tolist()
            entry["pca_degenerate"] = snap.pca.degenerate
        entries.append(entry)
    doc = dict(manifest or {})
    doc["snapshots"] = entries
    mpath = outdir / "manifest.json"
    mpath.write_text(json.dumps(doc, indent=2, default=_json_default) + "\n")
    written.append(mpath)
    return written


def _json_default(obj):
    if isinstance(obj, SimConfig):
        return {k: (None if v == np.inf else v) for k, v in asdict(obj).items()}
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")
