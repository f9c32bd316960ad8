import numpy as np
import pytest

from src.errors import InvalidArgumentError
from src.errors import KernelCollisionError
from src.models.models import RieszKind
from src.services.functionals import lp_norm
from src.services.riesz import chen_decomposition_check
from src.services.riesz import chen_multiplier
from src.services.riesz import estimate_riesz_norm
from src.services.riesz import multiplicative_inequality_check
from src.services.riesz import riesz_apply
from src.services.riesz import riesz_family
from src.services.riesz import riesz_image
from src.services.riesz import riesz_symbol


def test_symbols_at_zero():
    lam = np.array([0.0, 1.0])

    assert np.isinf(riesz_symbol(lam, RieszKind.FULL)[0])
    assert np.isinf(riesz_symbol(lam, RieszKind.INFINITY)[0])
    assert riesz_symbol(lam, RieszKind.LOCAL)[0] == 1.0
    assert riesz_symbol(lam, RieszKind.INFINITY)[1] == pytest.approx(np.exp(-1.0))
    assert chen_multiplier(np.array([0.0]))[0] == 0.0


def test_decomposition_of_the_inverse_root():
    lam = np.linspace(0.01, 50.0, 200)
    at_infinity = riesz_symbol(lam, RieszKind.INFINITY)
    local = riesz_symbol(lam, RieszKind.LOCAL) * chen_multiplier(lam)

    assert np.allclose(at_infinity + local, riesz_symbol(lam, RieszKind.FULL), rtol=1e-12)


@pytest.mark.parametrize("bundle_name, dec_name", [("grid_bundle", "grid_dec"), ("path_bundle", "path_dec")])
def test_full_transform_is_an_isometry_off_the_kernel(bundle_name, dec_name, request, rng):
    bundle = request.getfixturevalue(bundle_name)
    dec = request.getfixturevalue(dec_name)
    f = rng.standard_normal(bundle.n)

    image = riesz_apply(bundle=bundle, dec=dec, kind=RieszKind.FULL, f=f)

    assert lp_norm(space=bundle, f=image, p=2.0) ** 2 == pytest.approx(
        lp_norm(space=bundle, f=dec.project_kernel(f), p=2.0) ** 2, rel=1e-9
    )


def test_kernel_projection_is_required_on_the_kernel(path_dec, rng):
    f = rng.standard_normal(path_dec.n)

    with pytest.raises(KernelCollisionError):
        riesz_image(dec=path_dec, kind=RieszKind.FULL, f=f, project_kernel=False)
    with pytest.raises(KernelCollisionError):
        riesz_image(dec=path_dec, kind=RieszKind.INFINITY, f=f, project_kernel=False)
    assert np.all(np.isfinite(riesz_image(dec=path_dec, kind=RieszKind.LOCAL, f=f, project_kernel=False)))


def test_exact_norms_at_two(grid_bundle, grid_dec):
    full = riesz_family(bundle=grid_bundle, dec=grid_dec, kind=RieszKind.FULL).exact_norm(1.0)
    local = riesz_family(bundle=grid_bundle, dec=grid_dec, kind=RieszKind.LOCAL).exact_norm(1.0)

    assert full == pytest.approx(1.0, rel=1e-9)
    assert local <= 1.0


def test_estimate_full_norm_at_two(grid_bundle, grid_dec):
    report = estimate_riesz_norm(bundle=grid_bundle, kind=RieszKind.FULL, p=2.0, budget=6, seed=0, dec=grid_dec)

    assert report.exact_p2_norm == pytest.approx(1.0, rel=1e-9)
    assert report.empirical_norm <= 1.0 + 1e-9
    assert report.residuals["quadratic_form_identity"] <= 1e-9
    assert report.residuals["witness_reproduction"] == 0.0
    assert report.kernel_dim == 0


def test_estimate_local_norm_away_from_two(path_bundle, path_dec):
    report = estimate_riesz_norm(bundle=path_bundle, kind=RieszKind.LOCAL, p=4.0, budget=4, seed=1, dec=path_dec)

    assert report.exact_p2_norm is None
    assert report.empirical_norm > 0
    assert report.kernel_dim == 1
    assert "quadratic_form_identity" not in report.residuals


def test_estimate_rejects_exponent_one(grid_bundle, grid_dec):
    with pytest.raises(InvalidArgumentError):
        estimate_riesz_norm(bundle=grid_bundle, kind=RieszKind.FULL, p=1.0, budget=2, seed=0, dec=grid_dec)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_chen_decomposition_respects_triangle_inequality(p, grid_bundle, grid_dec):
    report = chen_decomposition_check(bundle=grid_bundle, p=p, budget=5, seed=0, dec=grid_dec)

    assert report.max_value <= 1e-9
    assert report.measured["identity_residual"] <= 1e-8
    assert report.measured["phi_sup"] > 0
    assert report.probes_evaluated == 5


def test_chen_decomposition_on_graph_with_kernel(path_bundle, path_dec):
    report = chen_decomposition_check(bundle=path_bundle, p=3.0, budget=4, seed=2, dec=path_dec)

    assert report.max_value <= 1e-9
    assert report.measured["identity_residual"] <= 1e-8


@pytest.mark.parametrize("bundle_name, dec_name", [("grid_bundle", "grid_dec"), ("path_bundle", "path_dec")])
def test_multiplicative_inequality_at_two(bundle_name, dec_name, request):
    bundle = request.getfixturevalue(bundle_name)
    dec = request.getfixturevalue(dec_name)

    report = multiplicative_inequality_check(bundle=bundle, p=2.0, budget=6, seed=0, dec=dec)

    assert 0 < report.max_value <= 1.0 + 1e-9
