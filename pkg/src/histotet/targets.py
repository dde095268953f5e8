"""Benchmark target functions on the unit cube.

All evaluators are vectorized: they take an array of shape (..., 3) and
return an array of shape (...).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TargetFunction:
    """A named scalar function defined and finite on [0,1]^3."""

    id: str
    fn: object

    def __call__(self, points):
        return self.fn(np.asarray(points, dtype=float))


def _xyz(p):
    return p[..., 0], p[..., 1], p[..., 2]


def _f1(p):
    x, y, z = _xyz(p)
    return np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y) * np.sin(2 * np.pi * z)


def _f2(p):
    x, y, z = _xyz(p)
    return np.sin(2 * np.pi * x * y * z)


def _f3(p):
    x, y, z = _xyz(p)
    return 1.0 / (x**2 + y**2 + z**2 + 25.0)


def _f4(p):
    x, y, z = _xyz(p)
    return np.exp(x**2 + y**2 + z**2)


def _f5(p):
    x, y, z = _xyz(p)
    return np.sin(x) * np.cos(y) * np.exp(-(z**2))


def _f6(p):
    x, y, z = _xyz(p)
    return np.abs(x**3) + np.abs(y**3) + np.abs(z**3)


def _radius(p):
    x, y, z = _xyz(p)
    return np.sqrt((x - 0.5) ** 2 + (y - 0.5) ** 2 + (z - 0.5) ** 2)


def _f7(p):
    return _radius(p)


def _f8(p):
    r = _radius(p)
    return np.sin(10.0 * r) * np.exp(-r)


TARGETS = {
    f.id: f
    for f in (
        TargetFunction("f1", _f1),
        TargetFunction("f2", _f2),
        TargetFunction("f3", _f3),
        TargetFunction("f4", _f4),
        TargetFunction("f5", _f5),
        TargetFunction("f6", _f6),
        TargetFunction("f7", _f7),
        TargetFunction("f8", _f8),
    )
}


def get_targets(ids):
    """Resolve function ids to TargetFunctions, rejecting unknown ids."""
    out = []
    for fid in ids:
        if fid not in TARGETS:
            known = ", ".join(sorted(TARGETS))
            raise KeyError(f"unknown function id {fid!r} (known: {known})")
        out.append(TARGETS[fid])
    return out
