"""Channel eigensolver against analytic Landau levels and a Morse-type chain."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ritusfw.errors import (ArgumentError, ConfigurationError,
                            DiscretizationError, TruncationError)
from ritusfw.field_profiles import exponential_profile, uniform_profile
from ritusfw.spectral_grid import (Grid, GridConfig, build_grid,
                                   convergence_study, export_eigenfunction_csv,
                                   export_spectrum_csv, solve_channel)


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        Grid(x_min=-1.0, x_max=1.0, n_points=32)
    g = Grid(x_min=-1.0, x_max=1.0, n_points=101)
    assert g.h == pytest.approx(0.02)
    assert g.x[0] == -1.0 and g.x[-1] == 1.0
    assert g.same_as(Grid(-1.0, 1.0, 101))
    assert not g.same_as(Grid(-1.0, 1.0, 102))


def test_build_grid_requires_levels():
    with pytest.raises(ConfigurationError):
        build_grid(uniform_profile(1.0), 0.0, 0)


def test_build_grid_centers_on_py_over_eB():
    grid = build_grid(uniform_profile(1.0), 0.8, 3, GridConfig(n_points=256))
    center = 0.5 * (grid.x_min + grid.x_max)
    assert abs(center - 0.8) < 0.05


def test_build_grid_widens_with_levels():
    g4 = build_grid(uniform_profile(1.0), 0.0, 4, GridConfig(n_points=256))
    g8 = build_grid(uniform_profile(1.0), 0.0, 8, GridConfig(n_points=256))
    assert g8.x_max - g8.x_min > g4.x_max - g4.x_min


@pytest.mark.parametrize("sigma,offset", [(+1, 0), (-1, 2)])
def test_uniform_landau_levels(uni, sigma, offset):
    spec = uni.spec_plus if sigma > 0 else uni.spec_minus
    for n, k in enumerate(spec.eigenvalues):
        assert abs(k - (2 * n + offset)) < 1e-5


def test_zero_mode_clamped_to_exact_zero(uni):
    assert uni.spec_plus.eigenvalues[0] == 0.0
    assert uni.spec_plus.flags == ()


def test_quadrature_norms_and_sturm_counts(uni):
    norms = uni.spec_plus.quadrature_norms()
    assert_allclose(norms, 1.0, atol=1e-10)
    for n in range(5):
        assert uni.spec_plus.sign_changes(n) == n


def test_phase_convention_positive_peak(uni):
    for n in range(uni.spec_plus.eigenfunctions.shape[1]):
        phi = uni.spec_plus.eigenfunctions[:, n]
        assert phi[np.argmax(np.abs(phi))] > 0


def test_eigenvalues_independent_of_py(uni):
    prof = uniform_profile(1.0)
    grid = build_grid(prof, 0.9, 4, GridConfig(n_points=512))
    spec = solve_channel(prof, 0.9, 1.0, +1, grid, n_levels=5)
    assert_allclose(spec.eigenvalues, uni.spec_plus.eigenvalues[:5], atol=1e-5)


def test_morse_chain_for_exponential_profile():
    # closed form for W = B(e^{ax}-1)/a: k_n = 2nB - n^2 a^2, partner
    # channel shifted by one (shape invariance)
    B, a = 1.0, 0.1
    prof = exponential_profile(B, a)
    grid = build_grid(prof, 0.0, 5, GridConfig(n_points=768))
    sp = solve_channel(prof, 0.0, 1.0, +1, grid, n_levels=5)
    sm = solve_channel(prof, 0.0, 1.0, -1, grid, n_levels=5)
    for n, k in enumerate(sp.eigenvalues):
        assert abs(k - (2 * n * B - n * n * a * a)) < 1e-6
    for j, k in enumerate(sm.eigenvalues):
        m = j + 1
        assert abs(k - (2 * m * B - m * m * a * a)) < 1e-6


def test_solver_argument_validation(uni):
    prof, grid = uni.profile, uni.grid
    with pytest.raises(ArgumentError):
        solve_channel(prof, 0.0, 1.0, 0, grid, n_levels=3)
    with pytest.raises(ArgumentError):
        solve_channel(prof, 0.0, 1.0, +1, grid, n_levels=0)
    with pytest.raises(TruncationError):
        solve_channel(prof, 0.0, 1.0, +1, grid, n_levels=grid.n_points // 2)


def test_unresolvable_levels_hit_the_wall():
    prof = uniform_profile(1.0)
    grid = build_grid(prof, 0.0, 1, GridConfig(n_points=128))
    with pytest.raises(TruncationError):
        solve_channel(prof, 0.0, 1.0, +1, grid, n_levels=30)


def test_tiny_tolerance_rejects_coarse_zero_mode():
    # at N=128 the raw zero-mode eigenvalue is slightly negative; an
    # unrealistically tight tol_eig must turn that into a hard error
    prof = uniform_profile(1.0)
    grid = build_grid(prof, 0.0, 2, GridConfig(n_points=128))
    with pytest.raises(DiscretizationError):
        solve_channel(prof, 0.0, 1.0, +1, grid, n_levels=3, tol_eig=1e-14)


def test_convergence_study_uniform_order_four():
    st = convergence_study(uniform_profile(1.0), 0.0, 1.0, +1, 2,
                           [128, 256, 512])
    assert st["reference_source"] == "analytic"
    assert st["reference"] == pytest.approx(4.0, abs=1e-9)
    assert 3.5 < st["order"] < 4.5
    errors = [row["error"] for row in st["rows"]]
    assert errors == sorted(errors, reverse=True)


def test_convergence_study_richardson_for_exponential():
    st = convergence_study(exponential_profile(1.0, 0.1), 0.0, 1.0, +1, 2,
                           [128, 256, 512])
    assert st["reference_source"] == "richardson"
    assert st["reference"] == pytest.approx(2 * 2 * 1.0 - 4 * 0.01, abs=1e-6)
    assert 3.5 < st["order"] < 4.5


def test_convergence_study_validation():
    prof = uniform_profile(1.0)
    with pytest.raises(ArgumentError):
        convergence_study(prof, 0.0, 1.0, +1, 2, [256])
    with pytest.raises(ArgumentError):
        convergence_study(prof, 0.0, 1.0, +1, 2, [512, 256])


def test_spectrum_csv_round_trip(tmp_path, uni):
    path = tmp_path / "spec.csv"
    export_spectrum_csv([uni.spec_plus, uni.spec_minus], path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "sigma,n,k"
    assert len(lines) == 1 + 2 * (uni.spec_plus.eigenvalues.size)
    sigma, n, k = lines[1].split(",")
    assert (sigma, n) == ("1", "0")
    assert float(k) == uni.spec_plus.eigenvalues[0]


def test_eigenfunction_csv(tmp_path, uni):
    path = tmp_path / "phi.csv"
    export_eigenfunction_csv(uni.spec_plus, 1, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,phi"
    assert len(lines) == 1 + uni.grid.n_points
    with pytest.raises(ArgumentError):
        export_eigenfunction_csv(uni.spec_plus, 99, tmp_path / "no.csv")
