import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from peakloc.fields import (GridSpec, ProfileSpec, SeparableField, analytic_coherence_exponential,
                            analytic_coherence_powerlaw, cell_centers, coherence_parameter,
                            discretize, eval_field, field_from_dict, field_to_dict,
                            inverse_square_matrix, numeric_coherence, profile_unit_vector,
                            singular_value_gap_db)

KINDS = ("laplacian", "gaussian", "cauchy", "exponential", "powerlaw")

profiles = st.builds(ProfileSpec, kind=st.sampled_from(KINDS),
                     a=st.floats(0.1, 10), p=st.floats(0.6, 3), r=st.floats(0.5, 3))


def lap(a=1.0):
    return ProfileSpec("laplacian", a=a)


def test_center_is_the_maximum():
    f = SeparableField(lap(), lap())
    top = eval_field(f, (0.0, 0.0))
    assert top == pytest.approx(0.25)
    ys = np.random.default_rng(0).uniform(-3, 3, size=(200, 2))
    assert all(eval_field(f, y) < top for y in ys)


def test_gaussian_decays():
    f = SeparableField(ProfileSpec("gaussian"), ProfileSpec("gaussian"))
    assert eval_field(f, (1.0, 0.0)) > eval_field(f, (2.0, 0.0))


def test_cauchy_at_origin():
    assert ProfileSpec("cauchy")(0.0) == pytest.approx(1 / math.pi, abs=1e-15)
    x = np.linspace(-3, 3, 13)
    assert np.allclose(ProfileSpec("cauchy")(x), 1 / (math.pi + math.pi * x ** 2), rtol=1e-14)


def test_eval_rejects_nonfinite():
    with pytest.raises(ValueError):
        eval_field(SeparableField(lap(), lap()), (math.inf, 0.0))


@given(profiles, st.floats(-5, 5), st.floats(0.01, 5), st.floats(0.0, 5))
def test_profile_positive_and_monotone(prof, c, t1, dt):
    vals = prof(np.array([c, c + t1, c + t1 + dt]) - c)
    # far tails may underflow to zero, never below it
    assert vals[0] > 0 and np.all(vals >= 0) and np.all(np.isfinite(vals))
    assert vals[0] >= vals[1] >= vals[2]


@given(profiles, profiles, st.floats(-2, 2), st.floats(-2, 2), st.floats(0, math.pi * 2),
       st.floats(0.01, 3), st.floats(0.0, 3))
def test_field_decays_along_rays(fr, fc, cx, cy, ang, t1, dt):
    f = SeparableField(fr, fc, 2.0, (cx, cy))
    d = np.array([math.cos(ang), math.sin(ang)])
    near = eval_field(f, tuple(np.array([cx, cy]) + t1 * d))
    far = eval_field(f, tuple(np.array([cx, cy]) + (t1 + dt) * d))
    assert abs(near) >= abs(far) * (1 - 1e-12)


def test_discretize_is_rank_one_outer_product():
    f = SeparableField(ProfileSpec("gaussian", a=3), ProfileSpec("cauchy", a=2), 1.7, (0.1, -0.2))
    g = GridSpec(np.sort(np.random.default_rng(1).uniform(-1, 1, 17)), np.linspace(-1, 1, 23))
    H = discretize(f, g)
    assert H.shape == (17, 23)
    s = np.linalg.svd(H, compute_uv=False)
    assert s[1] <= 1e-10 * s[0]
    direct = np.array([[eval_field(f, (yc, yr)) for yc in g.col_coords] for yr in g.row_coords])
    assert np.max(np.abs(H - direct)) <= 1e-12


def test_discretize_single_cell():
    f = SeparableField(lap(), lap(), 3.0)
    assert discretize(f, GridSpec([0.2], [0.4]))[0, 0] == pytest.approx(eval_field(f, (0.4, 0.2)))


def test_symmetric_grid_gives_rotation_symmetry():
    H = discretize(SeparableField(lap(), lap()), GridSpec.uniform(20, 20, (-2, 2), (-2, 2)))
    assert np.allclose(H, H[::-1, ::-1], rtol=0, atol=1e-15)


def test_translation_preserves_shape():
    g0 = GridSpec.uniform(15, 15, (-1, 1), (-1, 1))
    g1 = GridSpec(g0.row_coords + 0.3, g0.col_coords - 0.7)
    H0 = discretize(SeparableField(lap(2), ProfileSpec("gaussian")), g0)
    H1 = discretize(SeparableField(lap(2), ProfileSpec("gaussian"), center=(-0.7, 0.3)), g1)
    assert np.allclose(H0, H1, rtol=1e-12, atol=0)


def test_product_of_fields_is_separable():
    f1 = SeparableField(lap(), ProfileSpec("gaussian"), 1.5, (0.2, -0.1))
    f2 = SeparableField(ProfileSpec("cauchy", a=2), lap(3), 0.5, (-0.3, 0.4))
    g = GridSpec.uniform(12, 9, (-1, 1), (-1, 1))
    Hp = discretize(f1 * f2, g)
    assert np.allclose(Hp, discretize(f1, g) * discretize(f2, g), rtol=1e-12, atol=0)
    s = np.linalg.svd(Hp, compute_uv=False)
    assert s[1] <= 1e-10 * s[0]


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec([0.0, 0.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        GridSpec([1.0, 0.0], [0.0, 1.0])
    g = GridSpec.uniform(4, 6)
    assert g.shape == (4, 6)
    assert np.allclose(cell_centers(0, 1, 4), [0.125, 0.375, 0.625, 0.875])


@pytest.mark.parametrize("row", [np.arange(-9.5, 10), np.arange(-99.5, 100), np.arange(-19, 20, 2.0)])
def test_inverse_square_is_nearly_separable(row):
    db = singular_value_gap_db(inverse_square_matrix(GridSpec(row, row)))
    tol = 1.0 if row.size == 20 and row[0] == -9.5 else 1.5
    assert abs(db + 9.0) <= tol


def test_inverse_square_values_and_origin():
    H = inverse_square_matrix(GridSpec([0.0], [1.0]), H0=2.0)
    assert H[0, 0] == 2.0
    with pytest.raises(ValueError):
        inverse_square_matrix(GridSpec([-1.0, 0.0], [0.0, 1.0]))


def test_analytic_coherence_hand_values():
    assert analytic_coherence_exponential(1, 1, 100) == pytest.approx(0.1, rel=1e-14)
    assert analytic_coherence_exponential(1, 2, 100) == pytest.approx(math.sqrt(2 / math.pi) / 10, rel=1e-14)
    assert analytic_coherence_exponential(3, 1.5, 400) == pytest.approx(
        analytic_coherence_exponential(3, 1.5, 100) / 2, rel=1e-14)
    assert analytic_coherence_powerlaw(1, 1, 100) == pytest.approx(0.05, rel=1e-14)
    assert analytic_coherence_powerlaw(1, 2, 100) == pytest.approx(1 / (5 * math.pi), rel=1e-14)
    for a in (0.5, 2.0):
        lim = analytic_coherence_powerlaw(a, 1, 100)
        for p in (1 - 1e-4, 1 + 1e-4):
            assert analytic_coherence_powerlaw(a, p, 100) == pytest.approx(lim, rel=1e-3)


def test_analytic_coherence_domain():
    with pytest.raises(ValueError):
        analytic_coherence_powerlaw(1, 0.5, 100)
    with pytest.raises(ValueError):
        analytic_coherence_exponential(-1, 1, 100)
    with pytest.raises(ValueError):
        analytic_coherence_exponential(1, 1, 0)


def test_coherence_parameter_values():
    assert coherence_parameter(0.1, 0.1, 100) == pytest.approx(1.0)
    assert coherence_parameter(1, 1, 4) == 4
    assert coherence_parameter(0.2, 0.7, 50) == coherence_parameter(0.7, 0.2, 50)


def test_numeric_coherence_uniform_and_basis():
    u = np.full(4, 0.5)
    assert numeric_coherence(u, u) == pytest.approx(1.0, abs=1e-15)
    # basis vector against uniform: n = 16 entries, mu = (1, 1/4) -> max(2 * 1.25, 4) = 4
    assert numeric_coherence(np.eye(4)[0], u) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        numeric_coherence(np.ones(3), np.ones(3) / math.sqrt(3))


@given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 2 ** 31 - 1))
def test_numeric_coherence_at_least_one(n1, n2, seed):
    r = np.random.default_rng(seed)
    u = r.standard_normal(n1)
    v = r.standard_normal(n2)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    assert numeric_coherence(u, v) >= 1 - 1e-12


def test_laplacian_unit_window_gap_is_large():
    # Broad profiles on a finite window sit far from the infinite-support formula.
    N = 2000
    u = profile_unit_vector(ProfileSpec("exponential", a=1, p=1), N)
    mu = analytic_coherence_exponential(1, 1, N * N)
    gap = numeric_coherence(u, u) / coherence_parameter(mu, mu, N * N)
    assert gap > 2


def test_field_dict_round_trip():
    f = SeparableField(ProfileSpec("powerlaw", a=0.5, p=2, r=1.5), lap(4), 2.5, (0.1, 0.2))
    g = field_from_dict(field_to_dict(f))
    assert g == f
    flat = field_from_dict({"kind": "gaussian", "a": "2", "center": [0.5, 0]})
    assert flat.row_profile == ProfileSpec("gaussian", a=2.0)


def test_profile_rejects_bad_params():
    with pytest.raises(ValueError):
        ProfileSpec("laplacian", a=0)
    with pytest.raises(ValueError):
        ProfileSpec("triangle")
    with pytest.raises(ValueError):
        ProfileSpec("product", factors=(lap(),))
    with pytest.raises(ValueError):
        SeparableField(lap(), lap(), amplitude=0)
