"""Per-element operators for the enrichment strategies.

A strategy defines ten linear functionals on quadratics over a tetrahedron:
four face averages plus six enriched moments (weighted face moments and two
interior moments; six interior moments; or six edge moments).  Because every
functional is a normalized expectation in barycentric coordinates, the
10 x 10 functional matrix is the same on every tetrahedron: it is assembled
once per strategy from closed-form density moments and reused mesh-wide.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .densities import (
    PARAM_FLOOR,
    BaryQuadratic,
    Density,
    VOLUME_BASIS_EXPONENTS,
    _PAIR_POSITION,
    edge_density,
    edge_ortho_quadratic,
    face_density,
    face_ortho_quadratic,
    volume_density,
    volume_ortho_pair,
    volumetric_psi,
)
from .simplex import EDGE_PAIRS, FACE_VERTEX_INDICES

#: Exponent tuples of the ten quadratic basis monomials (Lambda order).
LAMBDA_EXPONENTS = VOLUME_BASIS_EXPONENTS

#: Condition number above which assembly warns about ill-conditioning.
CONDITION_WARN = 1e12

#: LU pivot threshold (relative to the largest entry) for the rank-6 test.
PIVOT_RTOL = 1e-14


class UnisolvenceError(RuntimeError):
    """Raised when a strategy's functional matrix is numerically singular."""


def lambda_basis(lam):
    """Values of the ten quadratic basis monomials at barycentric points.

    Input shape (..., 4), output shape (..., 10) in Lambda order
    [l1, l2, l3, l4, l1*l2, l1*l3, l1*l4, l2*l3, l2*l4, l3*l4].
    """
    lam = np.asarray(lam, dtype=float)
    cols = [lam[..., i] for i in range(4)]
    cols += [lam[..., i] * lam[..., j] for i, j in EDGE_PAIRS]
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class Poly2OnTet:
    """Quadratic polynomial on a tetrahedron, ten coefficients in Lambda order."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float).copy())
        if self.coeffs.shape != (10,):
            raise ValueError("Poly2OnTet needs 10 coefficients")

    def __call__(self, lam):
        return lambda_basis(lam) @ self.coeffs


def evaluate(poly, lam):
    """Evaluate a Poly2OnTet at barycentric coordinates."""
    return poly(lam)


@dataclass(frozen=True)
class StrategyConfig:
    """Which reconstruction scheme to use, with its density parameters.

    Use the classmethod constructors; positional construction is internal.
    The face averages use the dirichlet(alpha) density for the face-volume
    strategy and the uniform density otherwise.
    """

    kind: str
    alpha: float | None = None
    beta: float | None = None
    theta: float | None = None
    gamma: float | None = None
    zeta: float | None = None
    nu: float | None = None
    volume_variant: str | None = None

    @classmethod
    def classical(cls):
        return cls(kind="classical")

    @classmethod
    def face_volume(cls, alpha, beta):
        return cls(kind="face_volume", alpha=float(alpha), beta=float(beta))

    @classmethod
    def volumetric(cls, variant="dirichlet", gamma=None, theta=None):
        return cls(
            kind="volumetric",
            gamma=None if gamma is None else float(gamma),
            theta=None if theta is None else float(theta),
            volume_variant=variant,
        )

    @classmethod
    def volumetric_blend(cls, theta, gamma):
        return cls.volumetric(variant="blend", gamma=gamma, theta=theta)

    @classmethod
    def edge_face(cls, zeta, nu):
        return cls(kind="edge_face", zeta=float(zeta), nu=float(nu))

    def __post_init__(self):
        if self.kind not in ("classical", "face_volume", "volumetric", "edge_face"):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        for name in ("alpha", "beta", "gamma", "zeta", "nu"):
            value = getattr(self, name)
            if value is not None and value < PARAM_FLOOR:
                raise ValueError(
                    f"{name}={value!r} is below the admissible floor {PARAM_FLOOR}"
                )
        if self.theta is not None and not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta!r}")
        if self.kind == "volumetric":
            allowed = ("uniform", "symmetric-quadratic", "dirichlet", "blend")
            if self.volume_variant not in allowed:
                raise ValueError(
                    f"volume_variant must be one of {allowed}, got "
                    f"{self.volume_variant!r}"
                )
            if self.volume_variant in ("dirichlet", "blend") and self.gamma is None:
                raise ValueError(f"{self.volume_variant!r} volume density needs gamma")
            if self.volume_variant == "blend" and self.theta is None:
                raise ValueError("blend volume density needs theta")

    @property
    def method_id(self):
        return {
            "classical": "classical",
            "face_volume": "fv",
            "volumetric": "vol",
            "edge_face": "ef",
        }[self.kind]

    def params_text(self):
        def fmt(x):
            return f"{x:g}"

        if self.kind == "classical":
            return "-"
        if self.kind == "face_volume":
            return f"alpha={fmt(self.alpha)};beta={fmt(self.beta)}"
        if self.kind == "edge_face":
            return f"zeta={fmt(self.zeta)};nu={fmt(self.nu)}"
        if self.volume_variant == "blend":
            return f"theta={fmt(self.theta)};gamma={fmt(self.gamma)}"
        if self.volume_variant == "dirichlet":
            return f"gamma={fmt(self.gamma)}"
        return f"variant={self.volume_variant}"

    def volume_density(self):
        if self.kind != "volumetric":
            raise ValueError("only volumetric strategies carry a volume density")
        return volume_density(
            self.volume_variant, gamma=self.gamma, theta=self.theta
        )


@dataclass(frozen=True)
class Functional:
    """One degree of freedom: an expectation over a face, the volume or an edge.

    weight_poly is None for a plain average and the enrichment quadratic for
    a weighted moment.
    """

    domain: str  # 'face' | 'volume' | 'edge'
    index: object  # face index 0..3, None for volume, or an edge pair (i, j)
    density: Density
    weight_poly: BaryQuadratic | None


def build_functionals(cfg):
    """The ordered functionals of a strategy (4 for classical, 10 otherwise)."""
    if cfg.kind == "face_volume":
        face = face_density("dirichlet", cfg.alpha)
    else:
        face = face_density("uniform")
    funcs = [Functional("face", j, face, None) for j in range(4)]

    if cfg.kind == "classical":
        return tuple(funcs)

    if cfg.kind == "face_volume":
        q = face_ortho_quadratic(face)
        funcs += [Functional("face", j, face, q) for j in range(4)]
        interior = volume_density("dirichlet", gamma=cfg.beta)
        rho1, rho2 = volume_ortho_pair(interior)
        funcs += [
            Functional("volume", None, interior, rho1),
            Functional("volume", None, interior, rho2),
        ]
    elif cfg.kind == "volumetric":
        interior = cfg.volume_density()
        funcs += [
            Functional("volume", None, interior, psi)
            for psi in volumetric_psi(interior)
        ]
    else:  # edge_face
        dens = edge_density(cfg.zeta, cfg.nu)
        q = edge_ortho_quadratic(dens)
        funcs += [Functional("edge", pair, dens, q) for pair in EDGE_PAIRS]
    return tuple(funcs)


def _restrict_to_face(lam_exponents, j):
    """Face-coordinate exponents of a lambda-monomial on face j, or None if it
    vanishes there (any positive power of lambda_j)."""
    if lam_exponents[j] > 0:
        return None
    return tuple(lam_exponents[i] for i in FACE_VERTEX_INDICES[j])


def _restrict_to_edge(lam_exponents, pair):
    """(t, 1-t) exponents of a lambda-monomial on an edge, or None if zero."""
    i, j = pair
    for k in range(4):
        if k not in pair and lam_exponents[k] > 0:
            return None
    return (lam_exponents[j], lam_exponents[i])


def apply_functional_to_monomial(func, lam_exponents):
    """Exact value of a functional on a single lambda-monomial."""
    if func.domain == "volume":
        restricted = tuple(lam_exponents)
    elif func.domain == "face":
        restricted = _restrict_to_face(lam_exponents, func.index)
    else:
        restricted = _restrict_to_edge(lam_exponents, func.index)
    if restricted is None:
        return 0.0
    if func.weight_poly is None:
        return func.density.moment(restricted)
    return sum(
        c * func.density.moment(np.add(exps, restricted))
        for c, exps in func.weight_poly.terms()
    )


def apply_functionals(functionals, poly):
    """Apply a list of functionals to a Poly2OnTet via analytic moments."""
    values = np.zeros(len(functionals))
    for r, func in enumerate(functionals):
        for c, exps in zip(poly.coeffs, LAMBDA_EXPONENTS):
            if c != 0.0:
                values[r] += c * apply_functional_to_monomial(func, exps)
    return values


def _functional_matrix(functionals, columns=LAMBDA_EXPONENTS):
    return np.array(
        [
            [apply_functional_to_monomial(f, exps) for exps in columns]
            for f in functionals
        ]
    )


# ---------------------------------------------------------------------------
# Closed-form matrix entries for the Dirichlet families.


def dfv_entries(alpha, beta):
    """(d, v, u, w): closed-form entries of the face-volume moment matrix."""
    a, b = float(alpha), float(beta)
    d = -2.0 * a / (9.0 * (3.0 * a + 1.0) ** 2 * (3.0 * a + 2.0))
    denom = 8.0 * (1.0 + 2.0 * b) ** 2 * (1.0 + 4.0 * b) ** 2 * (3.0 + 4.0 * b)
    v = b * (5.0 * b**2 + 5.0 * b + 1.0) / denom
    w = b**3 / denom
    u = -(b**2) / (
        16.0 * (1.0 + 2.0 * b) * (1.0 + 4.0 * b) ** 2 * (3.0 + 4.0 * b)
    )
    return d, v, u, w


def dvol_entries(gamma):
    """(s, t, z): closed-form entries of the volumetric moment matrix."""
    g = float(gamma)
    denom = 8.0 * (1.0 + 2.0 * g) ** 2 * (1.0 + 4.0 * g) ** 2 * (3.0 + 4.0 * g)
    s = g * (5.0 * g**2 + 5.0 * g + 1.0) / denom
    z = g**3 / denom
    t = -(g**2) / (16.0 * (1.0 + 2.0 * g) * (1.0 + 4.0 * g) ** 2 * (3.0 + 4.0 * g))
    return s, t, z


def det_dfv_closed(alpha, beta):
    """Closed-form determinant of the face-volume matrix (positive for a,b > 0)."""
    a, b = float(alpha), float(beta)
    return (
        a**4
        * b**2
        / (
            2.0
            * (3.0 * (3.0 * a + 1.0)) ** 8
            * (3.0 * a + 2.0) ** 4
            * (2.0 * b + 1.0) ** 2
            * (4.0 * b + 1.0) ** 2
            * (4.0 * b + 3.0) ** 2
        )
    )


def det_dvol_closed(gamma):
    """Closed-form determinant of the volumetric matrix (positive for gamma > 0)."""
    g = float(gamma)
    return (
        g**6
        * (g + 1.0) ** 4
        / (
            2.0**18
            * (2.0 * g + 1.0) ** 9
            * (4.0 * g + 1.0) ** 7
            * (4.0 * g + 3.0) ** 6
        )
    )


def _dfv_matrix(alpha, beta):
    d, v, u, w = dfv_entries(alpha, beta)
    rows = [[0.0 if j in pair else d for pair in EDGE_PAIRS] for j in range(4)]
    rows.append([v, u, u, u, u, w])
    rows.append([u, v, u, u, w, u])
    return np.array(rows)


_ANTIPODAL = {0: 5, 1: 4, 2: 3, 3: 2, 4: 1, 5: 0}


def _dvol_matrix(gamma):
    s, t, z = dvol_entries(gamma)
    mat = np.full((6, 6), t)
    for m in range(6):
        mat[m, m] = s
        mat[m, _ANTIPODAL[m]] = z
    return mat


@dataclass(frozen=True)
class QuadMomentMatrix:
    """The 6x6 enriched-moment matrix of a strategy in the pair basis."""

    strategy: str
    matrix: np.ndarray


def assemble_D(cfg):
    """Assemble the 6x6 enriched-moment matrix from analytic density moments.

    For the Dirichlet face-volume and volumetric families the known
    closed-form entries are used directly; other densities go through the
    general moment engine.  Both paths agree (tested).
    """
    if cfg.kind == "classical":
        raise ValueError("the classical strategy has no enriched moment matrix")
    if cfg.kind == "face_volume":
        return QuadMomentMatrix(cfg.kind, _dfv_matrix(cfg.alpha, cfg.beta))
    if cfg.kind == "volumetric" and cfg.volume_variant in ("dirichlet", "uniform"):
        gamma = 1.0 if cfg.volume_variant == "uniform" else cfg.gamma
        return QuadMomentMatrix(cfg.kind, _dvol_matrix(gamma))
    funcs = build_functionals(cfg)[4:]
    return QuadMomentMatrix(cfg.kind, _functional_matrix(funcs, LAMBDA_EXPONENTS[4:]))


def edge_diagonal_entry(zeta, nu):
    """Expectation of t(1-t) q(t) under Beta(zeta, nu); the unisolvence pivot."""
    dens = edge_density(zeta, nu)
    q = edge_ortho_quadratic(dens)
    return sum(c * dens.moment(np.add(exps, (1, 1))) for c, exps in q.terms())


@dataclass(frozen=True)
class UnisolvenceReport:
    """Diagnostics of the rank-6 condition for one strategy configuration."""

    strategy: str
    params: str
    det: float
    closed_form_det: float | None
    rel_error: float | None
    rank6: bool
    spd: bool | None
    cond: float

    @property
    def ok(self):
        return self.rank6 and (self.spd is not False)


def unisolvence_check(cfg):
    """Numerical rank-6 diagnostics of the enriched moment matrix.

    Compares the determinant against the closed form where one exists,
    attempts a Cholesky factorization for volumetric strategies, and checks
    that all LU pivots stay above PIVOT_RTOL times the largest entry.
    A failed check is reported, not raised.
    """
    dmat = assemble_D(cfg).matrix
    det = float(np.linalg.det(dmat))

    closed = None
    if cfg.kind == "face_volume":
        closed = det_dfv_closed(cfg.alpha, cfg.beta)
    elif cfg.kind == "volumetric" and cfg.volume_variant in ("dirichlet", "uniform"):
        closed = det_dvol_closed(1.0 if cfg.volume_variant == "uniform" else cfg.gamma)
    rel = None if closed is None else abs(det - closed) / abs(closed)

    spd = None
    if cfg.kind == "volumetric":
        try:
            np.linalg.cholesky(0.5 * (dmat + dmat.T))
            spd = bool(np.allclose(dmat, dmat.T, rtol=0.0, atol=1e-15))
        except np.linalg.LinAlgError:
            spd = False

    _, _, upper = scipy.linalg.lu(dmat)
    pivots = np.abs(np.diag(upper))
    rank6 = bool(
        np.all(pivots > PIVOT_RTOL * np.max(np.abs(dmat))) and abs(det) > 1e-300
    )
    cond = float(np.linalg.cond(dmat))

    return UnisolvenceReport(
        strategy=cfg.method_id,
        params=cfg.params_text(),
        det=det,
        closed_form_det=closed,
        rel_error=rel,
        rank6=rank6,
        spd=spd,
        cond=cond,
    )


@dataclass(frozen=True)
class ElementOperator:
    """The assembled 10x10 functional matrix of a strategy and its inverse.

    The inverse columns are the coefficient vectors of the basis functions
    (chi_1..chi_10 in Lambda coordinates).  Geometry-independent: valid on
    every tetrahedron.
    """

    cfg: StrategyConfig
    functionals: tuple
    h: np.ndarray
    h_inv: np.ndarray
    cond: float
    report: UnisolvenceReport = field(repr=False)

    def basis_function(self, ell):
        """chi_ell, the basis polynomial dual to functional ell."""
        return Poly2OnTet(self.h_inv[:, ell])


def _assemble_operator(cfg, functionals):
    h = _functional_matrix(functionals)
    # Enriched moments annihilate affine monomials by the orthogonality
    # construction; enforce the structural zero block instead of keeping
    # the ~1e-17 round-off of the moment sums.
    h[4:, :4] = 0.0
    report = unisolvence_check(cfg) if cfg.kind != "classical" else None
    if report is not None and not report.rank6:
        raise UnisolvenceError(
            f"strategy {cfg.method_id} ({cfg.params_text()}) is not unisolvent: "
            f"det={report.det:.3e}"
        )
    try:
        h_inv = np.linalg.solve(h, np.eye(len(h)))
    except np.linalg.LinAlgError as err:
        raise UnisolvenceError(
            f"functional matrix of {cfg.method_id} ({cfg.params_text()}) "
            "is singular"
        ) from err
    cond = float(np.linalg.cond(h))
    if cond > CONDITION_WARN:
        warnings.warn(
            f"functional matrix of {cfg.method_id} ({cfg.params_text()}) is "
            f"ill-conditioned: cond={cond:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
    return ElementOperator(
        cfg=cfg, functionals=functionals, h=h, h_inv=h_inv, cond=cond, report=report
    )


def assemble_H(cfg):
    """Assemble the full 10x10 functional matrix and its inverse for a strategy.

    Raises UnisolvenceError when the configuration fails the rank-6 check.
    """
    if cfg.kind == "classical":
        raise ValueError("the classical strategy uses classical_project directly")
    return _assemble_operator(cfg, build_functionals(cfg))


def reconstruct(op, dofs):
    """Quadratic with the prescribed degrees of freedom: sum_l dof_l chi_l."""
    dofs = np.asarray(dofs, dtype=float)
    if dofs.shape != (10,):
        raise ValueError("expected 10 degrees of freedom")
    return Poly2OnTet(op.h_inv @ dofs)


def classical_project(face_averages):
    """Affine reconstruction from the four uniform face averages.

    Returns sum_j avg_j * (1 - 3 lambda_j) as a Poly2OnTet whose quadratic
    part is zero.
    """
    avg = np.asarray(face_averages, dtype=float)
    if avg.shape != (4,):
        raise ValueError("expected 4 face averages")
    coeffs = np.zeros(10)
    coeffs[:4] = avg.sum() - 3.0 * avg
    return Poly2OnTet(coeffs)


def classical_coefficients(face_averages):
    """Vectorized classical reconstruction: (..., 4) averages -> (..., 10)."""
    avg = np.asarray(face_averages, dtype=float)
    coeffs = np.zeros(avg.shape[:-1] + (10,))
    coeffs[..., :4] = avg.sum(axis=-1, keepdims=True) - 3.0 * avg
    return coeffs
