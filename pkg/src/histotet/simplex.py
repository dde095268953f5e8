"""Barycentric geometry on tetrahedra and exact Dirichlet-type simplex moments.

Everything downstream (densities, quadrature, element matrices) reduces to
normalized monomial moments of barycentric coordinates, so the moment formula
lives here together with the basic geometric types.
"""

import numpy as np
from scipy.special import gammaln


class GeometryError(ValueError):
    """Raised for degenerate geometric input (e.g. a flat tetrahedron)."""


#: Face j is the face opposite vertex j; it keeps the remaining vertex indices
#: in ascending order, which fixes the face-coordinate labeling mu_1..mu_3.
FACE_VERTEX_INDICES = tuple(tuple(i for i in range(4) if i != j) for j in range(4))

#: Edge index pairs (i < j) in the order used for the quadratic monomial basis.
EDGE_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def simplex_moment(exponents, d=None):
    """Normalized monomial moment of barycentric coordinates on a d-simplex.

    Computes (1/|S_d|) * integral over S_d of prod_i lambda_i^{e_i}, which
    equals d! * prod_i Gamma(e_i + 1) / Gamma(d + 1 + sum_i e_i).  Evaluated
    in log-gamma form so large Dirichlet exponents do not overflow.

    Parameters
    ----------
    exponents : sequence of float
        One exponent per barycentric coordinate (length d + 1), each > -1.
    d : int, optional
        Simplex dimension; defaults to len(exponents) - 1.

    Returns
    -------
    float
    """
    e = np.asarray(exponents, dtype=float)
    if d is None:
        d = e.size - 1
    if d < 1 or e.size != d + 1:
        raise ValueError(f"need d+1 exponents for a {d}-simplex, got {e.size}")
    if np.any(e <= -1.0):
        raise ValueError("all exponents must be > -1")
    log_m = gammaln(d + 1) + np.sum(gammaln(e + 1.0)) - gammaln(d + 1 + e.sum())
    return float(np.exp(log_m))


class Tetrahedron:
    """A nondegenerate tetrahedron with an affine barycentric chart."""

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.shape != (4, 3) or not np.all(np.isfinite(v)):
            raise GeometryError("vertices must be a finite 4x3 array")
        self.vertices = v
        edges = v[1:] - v[0]
        self.volume = abs(np.linalg.det(edges)) / 6.0
        if self.volume <= 1e-300:
            raise GeometryError("degenerate tetrahedron (zero volume)")
        # Affine system: rows are [x; y; z; 1], columns indexed by vertex.
        self._chart = np.vstack([v.T, np.ones(4)])
        self._chart_inv = np.linalg.inv(self._chart)

    @property
    def centroid(self):
        return self.vertices.mean(axis=0)

    def barycentric(self, points):
        """Barycentric coordinates of physical points, shape (..., 3) -> (..., 4)."""
        p = np.asarray(points, dtype=float)
        rhs = np.concatenate([p, np.ones(p.shape[:-1] + (1,))], axis=-1)
        return rhs @ self._chart_inv.T

    def point(self, lam):
        """Physical point of barycentric coordinates, shape (..., 4) -> (..., 3)."""
        lam = np.asarray(lam, dtype=float)
        return lam @ self.vertices

    def __repr__(self):
        return f"Tetrahedron(volume={self.volume:.6g})"


#: Unit reference tetrahedron with vertices 0, e1, e2, e3.
REFERENCE_TET = Tetrahedron(
    [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
)


class FaceFrame:
    """Face of a tetrahedron opposite vertex j, with its fixed mu-labeling.

    The face coordinates mu_1, mu_2, mu_3 are the tetrahedron's barycentric
    coordinates with index != j, taken in ascending index order.
    """

    def __init__(self, tet, j):
        if j not in range(4):
            raise ValueError("face index must be 0..3")
        self.tet = tet
        self.opposite = j
        self.vertex_indices = FACE_VERTEX_INDICES[j]

    def lift(self, mu):
        """Embed face coordinates (..., 3) as tetrahedron barycentrics (..., 4)."""
        mu = np.asarray(mu, dtype=float)
        lam = np.zeros(mu.shape[:-1] + (4,))
        lam[..., list(self.vertex_indices)] = mu
        return lam

    def point(self, mu):
        return self.tet.point(self.lift(mu))

    @property
    def area(self):
        a, b, c = (self.tet.vertices[i] for i in self.vertex_indices)
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a))


class EdgeFrame:
    """Edge from vertex i to vertex j, parametrized x(t) = (1-t) v_i + t v_j."""

    def __init__(self, tet, i, j):
        if not (0 <= i < j <= 3):
            raise ValueError("edge indices must satisfy 0 <= i < j <= 3")
        self.tet = tet
        self.pair = (i, j)

    def lift(self, t):
        """Barycentric coordinates along the edge for parameters t (...,)."""
        t = np.asarray(t, dtype=float)
        lam = np.zeros(t.shape + (4,))
        i, j = self.pair
        lam[..., i] = 1.0 - t
        lam[..., j] = t
        return lam

    def point(self, t):
        return self.tet.point(self.lift(t))

    @property
    def length(self):
        i, j = self.pair
        return float(np.linalg.norm(self.tet.vertices[j] - self.tet.vertices[i]))
