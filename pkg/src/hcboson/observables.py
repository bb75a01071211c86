"""Engine-agnostic observables: expansion radius, melt time, time series, CSV."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrityError

CSV_FORMAT = "hcboson-series/1"
SCALAR_COLUMNS = ("time", "radius", "half_current", "entropy_max", "total_n", "discarded_weight")
RADIUS_TOL = 1e-9


def chain_center(L: int) -> float:
    """Center of mass of the chain, i0 = L/2 + 1/2."""
    return L / 2 + 0.5


def second_moment(density, N: float, i0: float) -> float:
    density = np.asarray(density, dtype=float)
    pos = np.arange(1, len(density) + 1)
    return float(np.dot(density, (pos - i0) ** 2) / N)


def radius(density, N: float, i0: float, r0_sq: float) -> float:
    """sqrt of the growth of the normalized second moment since t = 0."""
    if N <= 0:
        raise ValueError("radius needs N > 0")
    arg = second_moment(density, N, i0) - r0_sq
    if arg < -RADIUS_TOL:
        raise IntegrityError(f"second moment fell below its initial value by {-arg:.3e}")
    return math.sqrt(max(0.0, arg))


@dataclass
class Snapshot:
    """One engine measurement at a single time."""

    density: np.ndarray
    half_current: float
    entropy_max: float = 0.0
    discarded_weight: float = 0.0


@dataclass
class ObservableSeries:
    L: int
    N: int
    meta: dict = field(default_factory=dict)
    times: list = field(default_factory=list)
    density: list = field(default_factory=list)
    radius: list = field(default_factory=list)
    half_current: list = field(default_factory=list)
    entropy_max: list = field(default_factory=list)
    total_n: list = field(default_factory=list)
    discarded_weight: list = field(default_factory=list)
    r0_sq: float | None = None

    @property
    def i0(self) -> float:
        return chain_center(self.L)

    def record(self, time: float, snap: Snapshot) -> "ObservableSeries":
        if self.times and not time > self.times[-1]:
            raise ValueError(f"time {time} does not increase past {self.times[-1]}")
        if not self.times and time != 0:
            raise ValueError("the first recorded time must be 0")
        dens = np.asarray(snap.density, dtype=float)
        if len(dens) != self.L:
            raise ValueError(f"density has length {len(dens)}, expected {self.L}")
        if self.r0_sq is None:
            self.r0_sq = second_moment(dens, self.N, self.i0) if self.N > 0 else 0.0
        self.times.append(float(time))
        self.density.append(dens)
        self.radius.append(radius(dens, self.N, self.i0, self.r0_sq) if self.N > 0 else 0.0)
        self.half_current.append(float(snap.half_current))
        self.entropy_max.append(float(snap.entropy_max))
        self.total_n.append(float(np.sum(dens)))
        self.discarded_weight.append(float(snap.discarded_weight))
        return self

    def __len__(self):
        return len(self.times)

    def table(self) -> np.ndarray:
        """Rows of (time, radius, half_current, entropy_max, total_n,
        discarded_weight, n_1 .. n_L)."""
        scalars = np.column_stack(
            [self.times, self.radius, self.half_current, self.entropy_max, self.total_n, self.discarded_weight]
        )
        return np.hstack([scalars, np.array(self.density)])

    def truncate(self, n: int):
        """Keep the first n rows (used when resuming from a checkpoint)."""
        for name in ("times", "density", "radius", "half_current", "entropy_max", "total_n", "discarded_weight"):
            setattr(self, name, getattr(self, name)[:n])


def melt_time(series: ObservableSeries, threshold: float = 0.5):
    """First recorded time at which the central density drops below threshold.

    The center i0 is a half-integer for even L; the two sites around it are
    averaged. Returns None if the density never drops below threshold.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    i0 = series.i0
    sites = sorted({math.floor(i0), math.ceil(i0)})
    for t, dens in zip(series.times, series.density):
        if np.mean([dens[s - 1] for s in sites]) < threshold:
            return t
    return None


# --- CSV ----------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(series: ObservableSeries, path, header_lines=()) -> None:
    """One row per recorded time; '#' header carries the format tag and config."""
    cols = list(SCALAR_COLUMNS) + [f"n_{i}" for i in range(1, series.L + 1)]
    buf = io.StringIO()
    buf.write(f"# format = {CSV_FORMAT}\n")
    for line in header_lines:
        buf.write(f"# {line}\n")
    buf.write(",".join(cols) + "\n")
    for row in series.table():
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    with open(path, "w", newline="\n") as fh:
        fh.write(buf.getvalue())


def read_csv(path):
    """Returns (header_lines, column_names, data array)."""
    header, rows, cols = [], [], None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                header.append(line[1:].strip())
            elif cols is None:
                cols = line.split(",")
            elif line:
                rows.append([float(x) for x in line.split(",")])
    return header, cols, np.array(rows)


def series_from_csv(path) -> ObservableSeries:
    header, cols, data = read_csv(path)
    L = sum(1 for c in cols if c.startswith("n_"))
    meta = {}
    for line in header:
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    N = int(round(data[0, SCALAR_COLUMNS.index("total_n")])) if len(data) else 0
    s = ObservableSeries(L=L, N=N, meta=meta)
    for k, name in enumerate(SCALAR_COLUMNS[1:], start=1):
        setattr(s, name, data[:, k].tolist())
    s.times = data[:, 0].tolist()
    s.density = [row for row in data[:, len(SCALAR_COLUMNS):]]
    if len(data) and N > 0:
        s.r0_sq = second_moment(s.density[0], N, s.i0)
    return s
