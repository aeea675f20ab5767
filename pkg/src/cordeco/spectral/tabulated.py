"""User-supplied spectral functions on an ``(omega, dx)`` grid."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HEADER = ("omega", "dx", "c_real", "c_imag")


class TableError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralTable:
    omegas: np.ndarray
    dxs: np.ndarray
    c_real: np.ndarray  # shape (len(omegas), len(dxs))
    c_imag: np.ndarray

    def _locate(self, axis: np.ndarray, x: float, name: str) -> tuple[int, float]:
        if len(axis) == 1:
            if x != axis[0]:
                raise TableError(f"{name}={x} outside the single-point table axis {axis[0]}")
            return 0, 0.0
        if x < axis[0] or x > axis[-1]:
            raise TableError(f"{name}={x} outside table range [{axis[0]}, {axis[-1]}]")
        i = int(np.searchsorted(axis, x, side="right") - 1)
        i = min(max(i, 0), len(axis) - 2)
        t = (x - axis[i]) / (axis[i + 1] - axis[i])
        return i, t

    def _interp(self, grid: np.ndarray, omega: float, dx: float) -> float:
        i, u = self._locate(self.omegas, omega, "omega")
        j, v = self._locate(self.dxs, abs(dx), "dx")
        i1 = min(i + 1, len(self.omegas) - 1)
        j1 = min(j + 1, len(self.dxs) - 1)
        return float((1 - u) * (1 - v) * grid[i, j] + u * (1 - v) * grid[i1, j]
                     + (1 - u) * v * grid[i, j1] + u * v * grid[i1, j1])

    def real(self, omega: float, dx: float) -> float:
        """Bilinear interpolation of the real part; separations enter as ``|dx|``."""
        return self._interp(self.c_real, omega, dx)

    def imag(self, omega: float, dx: float) -> float:
        return self._interp(self.c_imag, omega, dx)


def load_table(path) -> SpectralTable:
    """Strictly parse a CSV with header ``omega,dx,c_real,c_imag``.

    The rows must form a complete rectangular grid with ``dx >= 0``; NaN,
    infinities, duplicates and missing points are rejected.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != HEADER:
            raise TableError(f"{path}: header must be {','.join(HEADER)}, got {','.join(header)}")
        points: dict[tuple[float, float], tuple[float, float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise TableError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise TableError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise TableError(f"{path}:{lineno}: non-finite value")
            om, dx, cr, ci = vals
            if dx < 0:
                raise TableError(f"{path}:{lineno}: dx must be non-negative")
            if (om, dx) in points:
                raise TableError(f"{path}:{lineno}: duplicate grid point ({om}, {dx})")
            points[(om, dx)] = (cr, ci)
    if not points:
        raise TableError(f"{path}: no data rows")
    omegas = np.array(sorted({k[0] for k in points}))
    dxs = np.array(sorted({k[1] for k in points}))
    if len(points) != len(omegas) * len(dxs):
        raise TableError(f"{path}: rows do not form a complete omega x dx grid")
    cr = np.empty((len(omegas), len(dxs)))
    ci = np.empty_like(cr)
    for i, om in enumerate(omegas):
        for j, dx in enumerate(dxs):
            cr[i, j], ci[i, j] = points[(om, dx)]
    return SpectralTable(omegas, dxs, cr, ci)
