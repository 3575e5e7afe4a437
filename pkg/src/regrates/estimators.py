"""Streaming regression estimators on a fixed grid of evaluation points.

``EstimatorState`` consumes one observation per update and maintains, for
every grid point x:

  * the recursive estimate  r_n(x) = r_{n-1}(x) + w_n (Y_n - r_{n-1}(x))
    with gain w_n = (gamma_n / h_n) K((x - X_n) / h_n),
  * its weighted average  avg_n(x) = sum q_k r_k(x) / sum q_k, kept as an
    incremental mean so a constant stream is a floating-point fixed point,
  * semi-recursive ratio sums  sum (Y_i/h_i) K((x - X_i)/h_i)  and
    sum (1/h_i) K((x - X_i)/h_i).

The gain w_n may exceed one for the first few observations when the
bandwidth constant is small; no clamping is applied, early iterates are
damped by the averaging.

States can carry a trailing lane axis so that many independent replicates
advance in lockstep: pass ``lanes=R`` and feed ``update`` length-R
observation vectors. Lane arithmetic is elementwise, so each lane matches a
scalar state driven by the same stream bit for bit.
"""

from __future__ import annotations

import numpy as np

from .kernels import Kernel
from .schedules import ScheduleConfig

__all__ = ["EstimatorState", "nadaraya_watson"]


class EstimatorState:
    def __init__(self, grid, schedule: ScheduleConfig, kernel: Kernel,
                 r0: float = 0.0, lanes: int | None = None):
        self.grid = np.atleast_1d(np.asarray(grid, dtype=float))
        self.schedule = schedule
        self.kernel = kernel
        self.r0 = float(r0)
        shape = (self.grid.size,) if lanes is None else (self.grid.size, lanes)
        self.lanes = lanes
        self.r_vals = np.full(shape, self.r0)
        self.avg_vals = np.full(shape, self.r0)
        self.sr_num = np.zeros(shape)
        self.sr_den = np.zeros(shape)
        self.n = 0
        self.qsum = 0.0

    def _scaled_offsets(self, x_obs, h: float):
        if self.lanes is None:
            return (self.grid - x_obs) / h
        return (self.grid[:, None] - np.asarray(x_obs, dtype=float)[None, :]) / h

    def update(self, x_obs, y_obs) -> None:
        n = self.n + 1
        h = self.schedule.bandwidth(n)
        k = self.kernel.fn(self._scaled_offsets(x_obs, h))
        w = (self.schedule.stepsize(n) / h) * k
        self.r_vals += w * (y_obs - self.r_vals)

        qn = self.schedule.weight(n)
        self.qsum += qn
        if n == 1:
            self.avg_vals = self.r_vals.copy()
        else:
            self.avg_vals += (qn / self.qsum) * (self.r_vals - self.avg_vals)

        self.sr_num += (y_obs / h) * k
        self.sr_den += k / h
        self.n = n

    def current(self) -> np.ndarray:
        return self.r_vals.copy()

    def averaged(self) -> np.ndarray:
        if self.n < 1:
            raise ValueError("no observations consumed yet")
        return self.avg_vals.copy()

    def semi_recursive(self) -> np.ndarray:
        """Ratio of the running sums; zero where the denominator is zero."""
        if self.n < 1:
            raise ValueError("no observations consumed yet")
        den = self.sr_den
        safe = np.where(den == 0.0, 1.0, den)
        return np.where(den == 0.0, 0.0, self.sr_num / safe)


def nadaraya_watson(x_data, y_data, h: float, grid, kernel: Kernel):
    """Batch kernel-ratio estimate at each grid point; zero where the
    denominator vanishes."""
    x_data = np.asarray(x_data, dtype=float)
    y_data = np.asarray(y_data, dtype=float)
    if x_data.size == 0:
        raise ValueError("need at least one observation")
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    grid_arr = np.atleast_1d(np.asarray(grid, dtype=float))
    num = np.zeros(grid_arr.size)
    den = np.zeros(grid_arr.size)
    step = 16384  # bound the (grid, data) work matrix
    for start in range(0, x_data.size, step):
        xs = x_data[start:start + step]
        ys = y_data[start:start + step]
        k = kernel.fn((grid_arr[:, None] - xs[None, :]) / h)
        num += k @ ys
        den += k.sum(axis=1)
    safe = np.where(den == 0.0, 1.0, den)
    out = np.where(den == 0.0, 0.0, num / safe)
    return out if np.ndim(grid) else float(out[0])
