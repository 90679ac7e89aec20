"""Scalar fields on uniform square grids, plus their staggered dual fields.

Values live on nodes. Gradients live on cells via forward differences: with
periodic boundary every node owns a cell (differences wrap); with a constant
pad boundary only the (rows-1) x (cols-1) interior cells exist, which makes
the total-variation term blind to the frame (the pad value documents what the
field is meant to equal outside its box).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"CFGF"

PERIODIC = "periodic"


@dataclass
class GridField:
    """Scalar field on a uniform grid of square cells.

    values: (rows, cols) float64 node values. spacing: cell side. boundary:
    'periodic' or ('pad', value). origin: coordinates of node [0, 0].
    """

    values: np.ndarray
    spacing: float
    boundary: object = PERIODIC
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D array")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.boundary != PERIODIC:
            kind, _ = self.boundary
            if kind != "pad":
                raise ValueError(f"unknown boundary mode {self.boundary!r}")

    # --- basic geometry ---

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def periodic(self) -> bool:
        return self.boundary == PERIODIC

    @property
    def width(self) -> int:
        """Cell count along x."""
        return self.cols if self.periodic else self.cols - 1

    @property
    def height(self) -> int:
        """Cell count along y."""
        return self.rows if self.periodic else self.rows - 1

    @property
    def pad_value(self) -> float:
        if self.periodic:
            raise ValueError("periodic field has no pad value")
        return float(self.boundary[1])

    def coords(self):
        """Node coordinate arrays X, Y of shape (rows, cols)."""
        x = self.origin[0] + self.spacing * np.arange(self.cols)
        y = self.origin[1] + self.spacing * np.arange(self.rows)
        return np.meshgrid(x, y)

    def like(self, values) -> "GridField":
        return GridField(np.asarray(values, dtype=float), self.spacing,
                         self.boundary, self.origin)

    @staticmethod
    def from_function(fn, rows: int, cols: int, spacing: float,
                      origin=(0.0, 0.0), boundary=PERIODIC) -> "GridField":
        x = origin[0] + spacing * np.arange(cols)
        y = origin[1] + spacing * np.arange(rows)
        X, Y = np.meshgrid(x, y)
        return GridField(fn(X, Y), spacing, boundary, tuple(origin))

    # --- I/O: plain binary (magic, dims, spacing, row-major float64) and CSV ---

    def save_binary(self, path):
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<IId", self.cols, self.rows, self.spacing))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())

    @staticmethod
    def load_binary(path, boundary=PERIODIC, origin=(0.0, 0.0)) -> "GridField":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != MAGIC:
                raise ValueError(f"bad magic {magic!r}")
            cols, rows, spacing = struct.unpack("<IId", fh.read(16))
            data = np.frombuffer(fh.read(rows * cols * 8), dtype="<f8")
        return GridField(data.reshape(rows, cols).copy(), spacing, boundary, origin)

    def save_csv(self, path):
        np.savetxt(path, self.values, delimiter=",")

    @staticmethod
    def load_csv(path, spacing: float, boundary=PERIODIC,
                 origin=(0.0, 0.0)) -> "GridField":
        vals = np.loadtxt(path, delimiter=",", ndmin=2)
        return GridField(vals, spacing, boundary, origin)


@dataclass
class DualField:
    """One 2-D vector per gradient cell, stored as component arrays."""

    zx: np.ndarray
    zy: np.ndarray

    def copy(self) -> "DualField":
        return DualField(self.zx.copy(), self.zy.copy())

    @staticmethod
    def zeros(cell_shape) -> "DualField":
        return DualField(np.zeros(cell_shape), np.zeros(cell_shape))

    def stacked(self):
        return np.stack([self.zx, self.zy], axis=-1)


def cell_shape(f: GridField):
    return (f.rows, f.cols) if f.periodic else (f.rows - 1, f.cols - 1)


def gradient(f: GridField):
    """Forward-difference gradient per cell: arrays (gx, gy) of cell shape."""
    v = f.values
    h = f.spacing
    if f.periodic:
        gx = (np.roll(v, -1, axis=1) - v) / h
        gy = (np.roll(v, -1, axis=0) - v) / h
    else:
        gx = (v[:-1, 1:] - v[:-1, :-1]) / h
        gy = (v[1:, :-1] - v[:-1, :-1]) / h
    return gx, gy


def gradient_adjoint(z: DualField, f: GridField):
    """Exact adjoint of `gradient`: cells back to nodes, <z, Dv> = <D^T z, v>."""
    h = f.spacing
    if f.periodic:
        return ((np.roll(z.zx, 1, axis=1) - z.zx)
                + (np.roll(z.zy, 1, axis=0) - z.zy)) / h
    q = np.zeros_like(f.values)
    q[:-1, :-1] -= z.zx / h
    q[:-1, 1:] += z.zx / h
    q[:-1, :-1] -= z.zy / h
    q[1:, :-1] += z.zy / h
    return q
