"""Finite windows of Z^2, bond indexing, dual points and bond sampling.

Dual points (bond midpoints) are carried as *doubled* integer coordinates so
that all geometry is exact.  A horizontal bond has an odd doubled x and an
even doubled y; a vertical bond the reverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import _kernels

HORIZONTAL = "h"
VERTICAL = "v"


@dataclass(frozen=True)
class Window:
    """A ``width x height`` block of Z^2 vertices whose (0, 0) sits at ``origin``."""

    width: int
    height: int
    origin: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError(f"window must be at least 2x2, got {self.width}x{self.height}")
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))

    @property
    def n_horizontal(self) -> int:
        return (self.width - 1) * self.height

    @property
    def n_vertical(self) -> int:
        return self.width * (self.height - 1)

    @property
    def n_bonds(self) -> int:
        return self.n_horizontal + self.n_vertical

    @property
    def n_vertices(self) -> int:
        return self.width * self.height

    def contains_vertex(self, v) -> bool:
        x, y = v[0] - self.origin[0], v[1] - self.origin[1]
        return 0 <= x < self.width and 0 <= y < self.height

    def vertex_index(self, v) -> int:
        """Row-major index of global vertex ``v``."""
        if not self.contains_vertex(v):
            raise ValueError(f"vertex {tuple(v)} outside window {self}")
        return (v[1] - self.origin[1]) * self.width + (v[0] - self.origin[0])

    def vertex_at(self, index: int) -> tuple[int, int]:
        return (index % self.width + self.origin[0], index // self.width + self.origin[1])

    def flat(self, b: BondId) -> int:
        """Flat bond number: horizontal bonds first, then vertical ones."""
        if b.orientation == HORIZONTAL:
            if not 0 <= b.index < self.n_horizontal:
                raise ValueError(f"{b} outside window")
            return b.index
        if b.orientation == VERTICAL:
            if not 0 <= b.index < self.n_vertical:
                raise ValueError(f"{b} outside window")
            return self.n_horizontal + b.index
        raise ValueError(f"unknown orientation {b.orientation!r}")

    def bond(self, flat: int) -> BondId:
        if not 0 <= flat < self.n_bonds:
            raise ValueError(f"bond {flat} outside window")
        if flat < self.n_horizontal:
            return BondId(HORIZONTAL, int(flat))
        return BondId(VERTICAL, int(flat - self.n_horizontal))

    def bond_between(self, a, b) -> BondId:
        """The bond joining two nearest-neighbour global vertices."""
        (ax, ay), (bx, by) = sorted([tuple(a), tuple(b)])
        if not (self.contains_vertex((ax, ay)) and self.contains_vertex((bx, by))):
            raise ValueError(f"bond {a}-{b} outside window")
        i, j = ax - self.origin[0], ay - self.origin[1]
        if by == ay and bx == ax + 1:
            return BondId(HORIZONTAL, j * (self.width - 1) + i)
        if bx == ax and by == ay + 1:
            return BondId(VERTICAL, j * self.width + i)
        raise ValueError(f"{a} and {b} are not nearest neighbours")

    def endpoints(self, b: BondId) -> tuple[tuple[int, int], tuple[int, int]]:
        """Global Z^2 endpoints of a bond, lower/left one first."""
        x0, y0, x1, y1 = _kernels.bond_junctions(self.flat(b), self.width, self.height, False)
        ox, oy = self.origin
        return (x0 + ox, y0 + oy), (x1 + ox, y1 + oy)

    def midpoints2(self) -> np.ndarray:
        """Doubled global midpoint coordinates of every flat bond, shape (n_bonds, 2)."""
        W, H = self.width, self.height
        ox, oy = self.origin
        hj, hi = np.divmod(np.arange(self.n_horizontal), W - 1)
        vj, vi = np.divmod(np.arange(self.n_vertical), W)
        x2 = np.concatenate([2 * (hi + ox) + 1, 2 * (vi + ox)])
        y2 = np.concatenate([2 * (hj + oy), 2 * (vj + oy) + 1])
        return np.stack([x2, y2], axis=1)

    def junctions(self, dual: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Local junction coordinates of every bond, two arrays of shape (n_bonds, 2)."""
        W, H = self.width, self.height
        hj, hi = np.divmod(np.arange(self.n_horizontal), W - 1)
        vj, vi = np.divmod(np.arange(self.n_vertical), W)
        if dual:
            a = np.stack([np.concatenate([hi, vi - 1]), np.concatenate([hj - 1, vj])], axis=1)
        else:
            a = np.stack([np.concatenate([hi, vi]), np.concatenate([hj, vj])], axis=1)
        b = np.stack([np.concatenate([hi, vi]), np.concatenate([hj, vj])], axis=1)
        if not dual:
            b = b + np.concatenate(
                [np.tile([1, 0], (self.n_horizontal, 1)), np.tile([0, 1], (self.n_vertical, 1))]
            )
        return a, b


class BondId(NamedTuple):
    orientation: str
    index: int


class DualPoint(NamedTuple):
    """A half-integer point stored as doubled integer coordinates."""

    x2: int
    y2: int

    @property
    def x(self) -> float:
        return self.x2 / 2

    @property
    def y(self) -> float:
        return self.y2 / 2

    @classmethod
    def of(cls, point) -> DualPoint:
        if isinstance(point, DualPoint):
            return point
        x2, y2 = 2 * point[0], 2 * point[1]
        if x2 != int(x2) or y2 != int(y2):
            raise ValueError(f"{point} is not a half-integer point")
        return cls(int(x2), int(y2))

    def l1_2(self, other: DualPoint) -> int:
        """Doubled l1 distance."""
        return abs(self.x2 - other.x2) + abs(self.y2 - other.y2)


def dual_midpoint(window: Window, b: BondId) -> DualPoint:
    (x0, y0), (x1, y1) = window.endpoints(b)
    return DualPoint(x0 + x1, y0 + y1)


def nearest_bond(window: Window, point) -> BondId:
    """The bond whose midpoint is ``point`` (which must be a bond midpoint)."""
    p = DualPoint.of(point)
    ox, oy = window.origin
    x2, y2 = p.x2 - 2 * ox, p.y2 - 2 * oy
    if x2 % 2 == 1 and y2 % 2 == 0:
        i, j = (x2 - 1) // 2, y2 // 2
        if 0 <= i < window.width - 1 and 0 <= j < window.height:
            return BondId(HORIZONTAL, j * (window.width - 1) + i)
    elif x2 % 2 == 0 and y2 % 2 == 1:
        i, j = x2 // 2, (y2 - 1) // 2
        if 0 <= i < window.width and 0 <= j < window.height - 1:
            return BondId(VERTICAL, j * window.width + i)
    else:
        raise ValueError(f"{p.x, p.y} is not a bond midpoint")
    raise ValueError(f"bond at {p.x, p.y} outside window")


@dataclass(frozen=True)
class BondConfig:
    """One realization: strong/weak label of every bond of a window.

    ``bits`` is the packed label bitset (little-endian bit order within a
    byte, flat bond order, 1 = strong).  ``p`` and ``seed`` are ``None`` for
    hand-built configurations.
    """

    window: Window
    p: float | None
    seed: int | None
    bits: bytes

    @classmethod
    def from_strong(cls, window: Window, strong, p=None, seed=None) -> BondConfig:
        strong = np.asarray(strong, dtype=bool)
        if strong.shape != (window.n_bonds,):
            raise ValueError(f"expected {window.n_bonds} labels, got {strong.shape}")
        bits = np.packbits(strong, bitorder="little").tobytes()
        return cls(window, p, seed, bits)

    @cached_property
    def strong(self) -> np.ndarray:
        """Boolean strong mask in flat bond order (read-only)."""
        raw = np.frombuffer(self.bits, dtype=np.uint8)
        out = np.unpackbits(raw, count=self.window.n_bonds, bitorder="little").astype(bool)
        out.setflags(write=False)
        return out

    @cached_property
    def weak(self) -> np.ndarray:
        out = ~self.strong
        out.setflags(write=False)
        return out

    def is_strong(self, b: BondId) -> bool:
        return bool(self.strong[self.window.flat(b)])

    def to_text(self) -> str:
        w = self.window
        p = "nan" if self.p is None else repr(float(self.p))
        seed = "-" if self.seed is None else str(self.seed)
        return f"{w.width} {w.height} {w.origin[0]} {w.origin[1]} {p} {seed}\n{self.bits.hex()}\n"

    @classmethod
    def from_text(cls, text: str) -> BondConfig:
        header, payload = text.strip().split("\n", 1)
        W, H, ox, oy, p, seed = header.split()
        window = Window(int(W), int(H), (int(ox), int(oy)))
        bits = bytes.fromhex(payload.strip())
        if len(bits) != (window.n_bonds + 7) // 8:
            raise ValueError("bitset length does not match the window")
        pv = float(p)
        return cls(window, None if math.isnan(pv) else pv, None if seed == "-" else int(seed), bits)


def check_probability(p) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return p


def uniforms(window: Window, seed: int) -> np.ndarray:
    """Counter-based per-bond uniforms; coupling across ``p`` uses these directly."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return _kernels.bond_uniforms(window.width, window.height, window.origin[0], window.origin[1], np.uint64(seed))


def sample_config(window: Window, p: float, seed: int) -> BondConfig:
    """I.i.d. labels, each bond strong with probability ``p``.

    The label of a bond depends only on ``seed`` and its global position, so
    any window containing the bond sees the same label.
    """
    p = check_probability(p)
    return BondConfig.from_strong(window, uniforms(window, seed) < p, p=p, seed=int(seed))


def adjacent_weak(b1: BondId, b2: BondId, cfg: BondConfig) -> bool:
    """Both bonds weak and sharing a Z^2 endpoint."""
    w = cfg.window
    if not (cfg.weak[w.flat(b1)] and cfg.weak[w.flat(b2)]):
        return False
    if b1 == b2:
        return False
    return bool(set(w.endpoints(b1)) & set(w.endpoints(b2)))


def trial_seed(seed: int, trial: int) -> int:
    return (int(seed) ^ int(trial)) & 0xFFFFFFFFFFFFFFFF
