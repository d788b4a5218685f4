from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle [x0, x1] x [y0, y1] in metres."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("region must have positive extent")

    @property
    def area(self):
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def corners(self):
        return np.array([[self.x0, self.y0], [self.x0, self.y1], [self.x1, self.y0], [self.x1, self.y1]])

    def contains(self, p):
        p = np.asarray(p, dtype=float)
        return (p[..., 0] >= self.x0) & (p[..., 0] <= self.x1) & (p[..., 1] >= self.y0) & (p[..., 1] <= self.y1)

    def uniform(self, rng, size=None):
        shape = (2,) if size is None else (*np.atleast_1d(size), 2)
        u = rng.random(shape)
        return np.stack([self.x0 + u[..., 0] * (self.x1 - self.x0), self.y0 + u[..., 1] * (self.y1 - self.y0)], axis=-1)

    def farthest_distance(self, p):
        return float(np.max(np.hypot(*(self.corners - np.asarray(p, dtype=float)).T)))

    def nodes(self, step):
        """Lattice nodes (including the boundary) at spacing ``step``."""
        nx = int(round((self.x1 - self.x0) / step))
        ny = int(round((self.y1 - self.y0) / step))
        return self.x0 + step * np.arange(nx + 1), self.y0 + step * np.arange(ny + 1)


# Region used for the analytical field studies.
DEFAULT_REGION = Region(-150.0, 200.0, -200.0, 200.0)


def distance(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.hypot(a[..., 0] - b[..., 0], a[..., 1] - b[..., 1])
