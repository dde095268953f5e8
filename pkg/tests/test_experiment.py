import numpy as np
import pytest

from histotet import (
    TARGETS,
    Poly2OnTet,
    QuadSettings,
    StrategyConfig,
    TargetFunction,
    TuningGrid,
    assemble_H,
    build_mesh,
    compute_dofs,
    compute_dofs_mesh,
    convergence_study,
    grid_search,
    l1_error,
)
from histotet.experiment import first_strict_minimizer
from conftest import make_random_tet

QUADRATIC_CONFIGS = [
    StrategyConfig.face_volume(2.0, 2.0),
    StrategyConfig.volumetric_blend(0.5, 2.0),
    StrategyConfig.edge_face(2.0, 2.0),
]

ONE = TargetFunction("one", lambda p: np.ones(p.shape[:-1]))


def poly_target(tet, coeffs):
    poly = Poly2OnTet(coeffs)
    return TargetFunction("poly", lambda p: poly(tet.barycentric(p)))


def test_dofs_of_constant(rng):
    tet = make_random_tet(rng)
    for cfg in QUADRATIC_CONFIGS:
        dofs = compute_dofs(ONE, tet, cfg)
        np.testing.assert_allclose(dofs[:4], 1.0, atol=1e-13)
        np.testing.assert_allclose(dofs[4:], 0.0, atol=1e-13)
    classical = compute_dofs(ONE, tet, StrategyConfig.classical())
    np.testing.assert_allclose(classical, np.ones(4), atol=1e-13)


def test_affine_functions_have_silent_enrichment(rng):
    tet = make_random_tet(rng)
    f = TargetFunction("affine", lambda p: 0.7 - 1.3 * p[..., 0] + 0.4 * p[..., 2])
    for cfg in QUADRATIC_CONFIGS:
        dofs = compute_dofs(f, tet, cfg)
        assert np.max(np.abs(dofs[4:])) < 1e-12


def test_pair_monomial_dofs_match_operator_column(rng):
    tet = make_random_tet(rng)
    cfg = StrategyConfig.face_volume(1.0, 1.0)
    op = assemble_H(cfg)
    f = poly_target(tet, [0, 0, 0, 0, 1, 0, 0, 0, 0, 0])  # lambda1 lambda2
    dofs = compute_dofs(f, tet, cfg)
    np.testing.assert_allclose(dofs, op.h[:, 4], atol=1e-12)
    # the pair monomial survives only on the two faces that contain its edge
    assert dofs[6] == pytest.approx(-1 / 360, rel=1e-10)
    assert dofs[7] == pytest.approx(-1 / 360, rel=1e-10)


def test_geometry_independence_of_dofs(rng):
    for cfg in QUADRATIC_CONFIGS:
        op = assemble_H(cfg)
        for c in (0, 4, 9):
            column = op.h[:, c]
            for _ in range(10):
                tet = make_random_tet(rng)
                coeffs = np.zeros(10)
                coeffs[c] = 1.0
                dofs = compute_dofs(poly_target(tet, coeffs), tet, cfg)
                np.testing.assert_allclose(dofs, column, atol=1e-12)


def test_quadratics_are_reproduced_in_l1():
    mesh = build_mesh(5)
    f = TargetFunction(
        "quad",
        lambda p: 0.5 + p[..., 0] - 2.0 * p[..., 1] * p[..., 2] + p[..., 0] ** 2,
    )
    for cfg in QUADRATIC_CONFIGS:
        assert l1_error(f, mesh, cfg) < 1e-9


def test_classical_reproduces_affines_in_l1():
    mesh = build_mesh(5)
    f = TargetFunction("affine", lambda p: 1.0 - p[..., 0] + 3.0 * p[..., 1])
    assert l1_error(f, mesh, StrategyConfig.classical()) < 1e-11


def test_refinement_reduces_error():
    cfg = StrategyConfig.face_volume(2.0, 2.0)
    f = TARGETS["f1"]
    coarse = l1_error(f, build_mesh(10), cfg)
    fine = l1_error(f, build_mesh(20), cfg)
    assert fine < coarse


def test_projector_consistency(rng):
    f = TARGETS["f5"]
    for cfg in QUADRATIC_CONFIGS:
        op = assemble_H(cfg)
        for _ in range(3):
            tet = make_random_tet(rng)
            dofs = compute_dofs(f, tet, cfg)
            poly = Poly2OnTet(op.h_inv @ dofs)
            re_dofs = compute_dofs(poly_target(tet, poly.coeffs), tet, cfg)
            np.testing.assert_allclose(re_dofs, dofs, atol=1e-9)


def test_compute_dofs_mesh_matches_single_cells():
    mesh = build_mesh(2)
    cfg = StrategyConfig.edge_face(2.0, 2.0)
    f = TARGETS["f3"]
    table = compute_dofs_mesh(f, mesh, cfg)
    assert table.shape == (6, 10)
    for i in (0, 3, 5):
        single = compute_dofs(f, mesh.cell(i), cfg)
        np.testing.assert_allclose(table[i], single, atol=1e-14)


def test_thread_count_does_not_change_results():
    mesh = build_mesh(6)
    cfg = StrategyConfig.volumetric_blend(0.5, 2.0)
    f = TARGETS["f2"]
    serial = l1_error(f, mesh, cfg, threads=1)
    threaded = l1_error(f, mesh, cfg, threads=4)
    assert serial == threaded  # bitwise: fixed chunking and reduction order


def test_l1_error_is_deterministic():
    mesh = build_mesh(5)
    f = TARGETS["f8"]
    cfg = StrategyConfig.face_volume(2.0, 2.0)
    assert l1_error(f, mesh, cfg) == l1_error(f, mesh, cfg)


def test_convergence_study_shape_and_rows():
    functions = [TARGETS["f1"], TARGETS["f3"]]
    methods = [StrategyConfig.classical(), StrategyConfig.edge_face(2.0, 2.0)]
    rows = convergence_study(functions, (3, 5), methods)
    assert len(rows) == 8
    assert {r.method for r in rows} == {"classical", "ef"}
    assert all(r.l1_error >= 0.0 and r.seconds >= 0.0 for r in rows)
    again = convergence_study(functions, (3, 5), methods)
    assert [r.l1_error for r in rows] == [r.l1_error for r in again]


def test_convergence_study_classical_exact_on_affine_lift():
    f = TargetFunction("affine", lambda p: 2.0 * p[..., 0] - p[..., 1] + 0.25)
    rows = convergence_study([f], (4,), [StrategyConfig.classical()])
    assert rows[0].l1_error < 1e-11


def test_grid_search_single_candidate():
    grid = TuningGrid(
        kind="fv",
        first=(1.0,),
        second=(1.0,),
        functions=(TARGETS["f1"],),
        ns=(3,),
    )
    result = grid_search(grid)
    assert result.best == (1.0, 1.0)
    assert result.surface.shape == (1, 1)
    assert len(result.surface_rows()) == 1


def test_grid_search_surface_and_optimum():
    grid = TuningGrid(
        kind="ef",
        first=(1.0, 2.0),
        second=(1.0, 2.0),
        functions=(TARGETS["f1"],),
        ns=(3, 4),
    )
    result = grid_search(grid)
    assert result.surface.shape == (2, 2)
    ia = result.first.index(result.best[0])
    ib = result.second.index(result.best[1])
    assert result.surface[ia, ib] == result.surface.min()
    # accumulated error over two meshes is larger than either alone
    assert result.best_error > 0.0


def test_strict_minimizer_keeps_earlier_tie():
    surface = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert first_strict_minimizer(surface) == (0, 1)
    tied = np.full((2, 3), 5.0)
    assert first_strict_minimizer(tied) == (0, 0)


def test_grid_search_rejects_empty_grid():
    with pytest.raises(ValueError):
        TuningGrid(kind="fv", first=(), second=(1.0,), functions=(TARGETS["f1"],), ns=(3,))
    with pytest.raises(ValueError):
        TuningGrid(kind="bad", first=(1.0,), second=(1.0,), functions=(TARGETS["f1"],), ns=(3,))


def test_quad_settings_affect_rule_sizes():
    from histotet.experiment import build_dof_table

    small = build_dof_table(StrategyConfig.face_volume(1.0, 1.0), QuadSettings(dof_points=4))
    large = build_dof_table(StrategyConfig.face_volume(1.0, 1.0), QuadSettings(dof_points=8))
    assert len(small.nodes) == 4 * 16 + 64
    assert len(large.nodes) == 4 * 64 + 512
