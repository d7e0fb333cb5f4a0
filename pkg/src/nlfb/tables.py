"""Grid discretizations of the sphere-to-sphere kernel, with caching.

KernelTables holds Jtilde(r_i, rho_j) sampled on the uniform grid
r_i = i * dr.  Compactly supported kernels store only the diagonal band
|r - rho| < support_radius (everything else is exactly zero); fat-tail
kernels store dense rows.  Rows are filled lazily under a lock so that
completed rows can be read concurrently, and a finished table can be
persisted to a small binary cache file.
"""

from __future__ import annotations

import io
import os
import struct
import threading

import numpy as np

from . import kernels as kmod
from .kernels import RadialKernel

MAGIC = b"NLFBKT1\x00"
#: Gauss-Legendre order per angular panel when sampling table entries
FILL_ORDER = 48


def cache_dir() -> str:
    return os.environ.get("NLFB_CACHE_DIR", os.path.join(".", ".nlfb_cache"))


class KernelTables:
    """Lazily filled samples of Jtilde on the uniform radial grid.

    Parameters
    ----------
    kernel : RadialKernel
    dr : float
        Grid step; entry (i, j) is Jtilde(i*dr, j*dr).
    """

    def __init__(self, kernel: RadialKernel, dr: float):
        if dr <= 0.0:
            raise ValueError("dr must be positive")
        self.kernel = kernel
        self.dr = float(dr)
        self.banded = kernel.kind == kmod.COMPACT
        if self.banded:
            self.bw = int(np.ceil(kernel.support_radius / dr)) + 1
        else:
            self.bw = 0
        self._lock = threading.RLock()
        self._rows_filled = 0
        self._cap = 0
        self._data = np.zeros((0, 0))
        self._jstar_cache = np.zeros(0)
        self._moment1 = None
        self._row_mass = np.zeros(0)
        self._kink_corr = np.zeros(0)

    # -- storage ------------------------------------------------------------

    def _row_cols(self, i: int) -> tuple[int, int]:
        """Inclusive column range holding the nonzero entries of row i."""
        if self.banded:
            return max(i - self.bw, 0), i + self.bw
        return 0, self._cap - 1

    def _fill_row(self, i: int) -> None:
        lo, hi = self._row_cols(i)
        rho = np.arange(lo, hi + 1) * self.dr
        vals = kmod.j_tilde_row(self.kernel, i * self.dr, rho, FILL_ORDER)
        if self.banded:
            self._data[i, lo - (i - self.bw):lo - (i - self.bw) + vals.size] = vals
        else:
            self._data[i, lo:hi + 1] = vals

    def ensure(self, n_rows: int, n_cols: int | None = None) -> None:
        """Fill rows 0..n_rows-1 (and, for dense tables, columns 0..n_cols-1)."""
        if n_cols is None:
            n_cols = n_rows
        with self._lock:
            if self.banded:
                if n_rows > self._data.shape[0]:
                    grown = np.zeros((max(n_rows, 2 * self._data.shape[0] + 16),
                                      2 * self.bw + 1))
                    if self._rows_filled:
                        grown[:self._rows_filled] = self._data[:self._rows_filled]
                    self._data = grown
                for i in range(self._rows_filled, n_rows):
                    self._fill_row(i)
                self._rows_filled = max(self._rows_filled, n_rows)
                return
            # dense: grow capacity, then fill the new column strip of old rows
            need_cap = max(n_rows, n_cols)
            if need_cap > self._cap:
                new_cap = max(need_cap, int(1.5 * self._cap) + 16)
                grown = np.zeros((new_cap, new_cap))
                grown[:self._rows_filled, :self._cap] = \
                    self._data[:self._rows_filled, :self._cap]
                old_cap = self._cap
                self._data = grown
                self._cap = new_cap
                if self._rows_filled and old_cap:
                    rho = np.arange(old_cap, new_cap) * self.dr
                    for i in range(self._rows_filled):
                        self._data[i, old_cap:new_cap] = kmod.j_tilde_row(
                            self.kernel, i * self.dr, rho, FILL_ORDER)
            for i in range(self._rows_filled, n_rows):
                self._fill_row(i)
            self._rows_filled = max(self._rows_filled, n_rows)

    @property
    def rows_filled(self) -> int:
        return self._rows_filled

    def r_nodes(self, n: int) -> np.ndarray:
        return np.arange(n) * self.dr

    def value(self, i: int, j: int) -> float:
        """Jtilde(i*dr, j*dr) from the table (0 outside the stored band)."""
        self.ensure(i + 1, j + 1)
        if self.banded:
            lo, hi = self._row_cols(i)
            if j < lo or j > hi:
                return 0.0
            return float(self._data[i, j - (i - self.bw)])
        return float(self._data[i, j])

    def row_values(self, i: int, n_cols: int) -> np.ndarray:
        """Row i as a dense vector over columns 0..n_cols-1."""
        self.ensure(i + 1, n_cols)
        out = np.zeros(n_cols)
        if self.banded:
            lo, hi = self._row_cols(i)
            hi = min(hi, n_cols - 1)
            if hi >= lo:
                off = i - self.bw
                out[lo:hi + 1] = self._data[i, lo - off:hi - off + 1]
            return out
        out[:] = self._data[i, :n_cols]
        return out

    # -- integral transforms on rows -----------------------------------------

    def row_mass(self, n: int) -> np.ndarray:
        """Discrete full-line masses dr * trapz of rows i < n.

        The exact value is 1 for every row; the discrete mass deviates
        by the trapezoid error at the kernel kinks.  Solver quadrature
        divides by it so that the discretized operator conserves mass
        exactly (the interior equilibrium stays at u_star and the
        comparison structure is unchanged).  Fat-tail rows are truncated
        by storage, so their exact mass 1 is used directly.
        """
        if not self.banded:
            return np.ones(n)
        self.ensure(n)
        with self._lock:
            if self._row_mass.size < n:
                # band endpoints are zero, so the trapezoid is a plain sum
                self._row_mass = self._data[:self._rows_filled].sum(axis=1) * self.dr
        return self._row_mass[:n]

    def _kink_corrections(self, n: int) -> np.ndarray:
        """Trapezoid defect of dense rows at the diagonal peak of Jtilde.

        rho -> Jtilde(r, rho) loses smoothness at rho = r, so the grid
        trapezoid underresolves the peak by an O(dr^2 log dr) amount
        that does not shrink with the boundary radius.  kink_corr[i] is
        the accurate integral minus the trapezoid over a fixed window
        around the peak; tail masses subtract it so their error decays
        with the true tail instead of stalling at the quadrature bias.
        """
        from .quadrature import gl_rule, graded_edges_around

        with self._lock:
            if self._kink_corr.size >= n:
                return self._kink_corr[:n]
            old = self._kink_corr
            corr = np.empty(n)
            corr[:old.size] = old
            x, gw = gl_rule(32)
            width = max(2.0, 4.0 * self.dr)
            for i in range(old.size, n):
                r = i * self.dr
                a_idx = max(0, i - int(round(width / self.dr)))
                b_idx = i + int(round(width / self.dr))
                a, b = a_idx * self.dr, b_idx * self.dr
                grid = kmod.j_tilde_row(
                    self.kernel, r, np.arange(a_idx, b_idx + 1) * self.dr,
                    FILL_ORDER)
                trap = float(np.trapezoid(grid, dx=self.dr))
                acc = 0.0
                edges = graded_edges_around(r, a, b, first=self.dr / 4.0)
                for lo, hi in zip(edges[:-1], edges[1:]):
                    half = 0.5 * (hi - lo)
                    nodes = lo + half * (x + 1.0)
                    acc += half * float(np.dot(
                        gw, kmod.j_tilde_row(self.kernel, r, nodes, 32)))
                corr[i] = acc - trap
            self._kink_corr = corr
            return self._kink_corr[:n]

    def conv(self, weighted_u: np.ndarray) -> np.ndarray:
        """Row-wise dot products sum_j Jtilde(r_i, rho_j) v_j, i < len(v).

        The caller supplies v = quadrature_weight * u; the result is the
        mass-normalized trapezoid approximation of
        int Jtilde(r_i, rho) u(rho) d rho at every grid node.
        """
        n = weighted_u.size
        self.ensure(n, n)
        if not self.banded:
            return self._data[:n, :n] @ weighted_u
        padded = np.zeros(n + 2 * self.bw)
        padded[self.bw:self.bw + n] = weighted_u
        windows = np.lib.stride_tricks.sliding_window_view(padded, 2 * self.bw + 1)
        return np.einsum("ij,ij->i", self._data[:n], windows) / self.row_mass(n)

    def interior_integral(self, i: int, j: int) -> float:
        """Trapezoid int_0^{j*dr} Jtilde(r_i, rho) d rho over grid columns."""
        row = self.row_values(i, j + 1)
        return float(np.trapezoid(row, dx=self.dr))

    def tail_mass(self, i: int, j: int) -> float:
        """T(r_i, h_j) = int_{h_j}^inf Jtilde(r_i, rho) d rho, h_j = j*dr.

        Compact kernels integrate the stored band beyond column j, which
        is free of cancellation; fat tails use 1 - interior (the row
        integrates to 1 exactly), clamped to [0, 1].
        """
        if self.banded:
            lo, hi = self._row_cols(i)
            if j >= hi:
                return 0.0
            self.ensure(i + 1)
            off = i - self.bw
            row = self._data[i]
            start = max(j, lo)
            tail = row[start - off:].sum() - 0.5 * row[start - off]
            mass = float(self.row_mass(i + 1)[i])
            return min(max(float(self.dr * tail) / mass, 0.0), 1.0)
        corr = float(self._kink_corrections(i + 1)[i]) * self._corr_ramp(i, j)
        return min(max(1.0 - self.interior_integral(i, j) - corr, 0.0), 1.0)

    def _corr_ramp(self, i, j):
        """Fraction of the peak-window defect lying inside [0, j*dr]."""
        half = max(2.0, 4.0 * self.dr) / self.dr
        return np.clip((np.asarray(j, dtype=float) - np.asarray(i)) / half,
                       0.0, 1.0)

    def tail_mass_vector(self, n: int, j: int) -> np.ndarray:
        """tail_mass(i, j) for all rows i < n."""
        if not self.banded:
            self.ensure(n, j + 1)
            w = np.full(j + 1, self.dr)
            w[0] = 0.5 * self.dr
            w[-1] = 0.5 * self.dr
            interior = self._data[:n, :j + 1] @ w
            corr = self._kink_corrections(n) * self._corr_ramp(np.arange(n), j)
            return np.clip(1.0 - interior - corr, 0.0, 1.0)
        return np.array([self.tail_mass(i, j) for i in range(n)])

    # -- the 1-D marginal on the same grid ------------------------------------

    def jstar_vals(self, n: int) -> np.ndarray:
        """Jstar at l = k*dr for k < n (cached)."""
        with self._lock:
            if self._jstar_cache.size < n:
                self._jstar_cache = np.asarray(
                    kmod.j_star(self.kernel, np.arange(n) * self.dr))
            return self._jstar_cache[:n]

    @property
    def moment1_jstar(self) -> float:
        with self._lock:
            if self._moment1 is None:
                self._moment1 = kmod.j_star_first_moment(self.kernel)
            return self._moment1

    # -- persistence ----------------------------------------------------------

    def save(self, path: str) -> None:
        with self._lock, open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<id16sii", self.kernel.dim, self.dr,
                                 self.kernel.hash().encode(), self._rows_filled,
                                 1 if self.banded else 0))
            fh.write(struct.pack("<i", self.bw if self.banded else self._cap))
            for i in range(self._rows_filled):
                lo, hi = self._row_cols(i)
                if self.banded:
                    off = i - self.bw
                    vals = self._data[i, lo - off:hi - off + 1]
                else:
                    vals = self._data[i, lo:hi + 1]
                fh.write(struct.pack("<ii", lo, vals.size))
                fh.write(np.asarray(vals, dtype="<f8").tobytes())

    def load(self, path: str) -> bool:
        """Adopt cached rows if the file matches this kernel and grid.

        Returns True when rows were loaded; a mismatched or corrupt file
        is ignored (the table just refills from scratch).
        """
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError:
            return False
        buf = io.BytesIO(raw)
        if buf.read(8) != MAGIC:
            return False
        try:
            dim, dr, khash, nrows, banded = struct.unpack("<id16sii", buf.read(36))
            (geom,) = struct.unpack("<i", buf.read(4))
        except struct.error:
            return False
        if (dim != self.kernel.dim or abs(dr - self.dr) > 1e-15
                or khash.decode() != self.kernel.hash()
                or bool(banded) != self.banded
                or geom != (self.bw if self.banded else geom)):
            return False
        with self._lock:
            if self.banded:
                self._data = np.zeros((max(nrows, 16), 2 * self.bw + 1))
            else:
                self._cap = geom
                self._data = np.zeros((geom, geom))
                if nrows > geom:
                    return False
            for i in range(nrows):
                try:
                    lo, cnt = struct.unpack("<ii", buf.read(8))
                    vals = np.frombuffer(buf.read(8 * cnt), dtype="<f8")
                except struct.error:
                    return False
                if vals.size != cnt:
                    return False
                if self.banded:
                    off = i - self.bw
                    self._data[i, lo - off:lo - off + cnt] = vals
                else:
                    self._data[i, lo:lo + cnt] = vals
            self._rows_filled = nrows
        return True

    def cache_path(self, directory: str | None = None) -> str:
        d = directory or cache_dir()
        name = f"{self.kernel.hash()}_N{self.kernel.dim}_dr{self.dr:.6g}.nlfbkt"
        return os.path.join(d, name)
