import numpy as np
import pytest

from geomasksim.dataset import ChoiceDataset
from geomasksim.efficiency import (
    DEFAULT_MOMENT_VARIANT,
    MOMENT_VARIANTS,
    DegenerateInformationError,
    EfficiencyReport,
    InsufficientDataError,
    efficiency_loss,
    efficiency_report,
    empirical_variance_ratio,
    expected_sq_masked_distance,
    information_beta,
    masked_second_moment_mc,
)
from geomasksim.geometry import Point, StudyArea
from geomasksim.logit import LogitParams, observed_information
from geomasksim.masking import MaskSpec, mask_dataset
from geomasksim.population import generate_csr_xy, simulate_choices_xy
from geomasksim.rng import derive_stream, population_stream

AREA = StudyArea.unit_square()


def _point_ds(d_values, y=None):
    d = np.asarray(d_values, dtype=float)
    if y is None:
        y = ([0, 1] * d.size)[: d.size]
    return ChoiceDataset(
        points=np.column_stack((d, np.zeros_like(d))),
        facilities=np.array([[0.0, 0.0]]),
        choices=np.asarray(y),
        area=StudyArea.rectangle(-1e3, 1e3, -1.0, 1.0),
    )


def _csr_ds(n=500, seed=50, params=LogitParams(1.0, -2.0)):
    xy = generate_csr_xy(n, AREA, population_stream(seed))
    return simulate_choices_xy(xy, Point(0.0, 0.0), params, population_stream(seed + 1))


# --- moment formula ---


def test_moment_variants_and_default():
    assert MOMENT_VARIANTS == ("derived", "as-printed")
    assert DEFAULT_MOMENT_VARIANT == "derived"


def test_expected_sq_zero_theta_returns_d_squared():
    for variant in MOMENT_VARIANTS:
        assert expected_sq_masked_distance(0.5, 0.0, variant) == 0.25


def test_expected_sq_derived_value():
    # d^2 + theta*^2 / 3 = 0.25 + 0.03
    assert expected_sq_masked_distance(0.5, 0.3, "derived") == pytest.approx(0.28, abs=1e-15)


def test_expected_sq_as_printed_value():
    # d^2 + theta* / 3 = 0.25 + 0.10
    assert expected_sq_masked_distance(0.5, 0.3, "as-printed") == pytest.approx(0.35, abs=1e-15)


def test_expected_sq_array_input():
    out = expected_sq_masked_distance(np.array([0.0, 0.5, 1.0]), 0.3)
    np.testing.assert_allclose(out, [0.03, 0.28, 1.03], atol=1e-15)


def test_expected_sq_validation():
    with pytest.raises(ValueError):
        expected_sq_masked_distance(0.5, -0.1)
    with pytest.raises(ValueError):
        expected_sq_masked_distance(-0.5, 0.1)
    with pytest.raises(ValueError):
        expected_sq_masked_distance(0.5, 0.3, variant="exact")


def test_moment_mc_oracle_selects_derived():
    # the Monte Carlo second moment sides with d^2 + theta*^2/3, not theta*/3
    got = masked_second_moment_mc(0.5, 0.3, derive_stream(77, 0, 0))
    assert got == pytest.approx(0.28, abs=1e-3)
    assert abs(got - 0.35) > 0.05


def test_moment_mc_matches_masking_machinery():
    # same quantity produced by the public masking path
    from geomasksim.masking import mask_coordinates

    xy = np.tile([[0.5, 0.0]], (200_000, 1))
    out = mask_coordinates(xy, MaskSpec(theta_star=0.3), None, derive_stream(78, 0, 0))
    sq = (out**2).sum(axis=1)
    assert sq.mean() == pytest.approx(masked_second_moment_mc(0.5, 0.3, derive_stream(79, 0, 0)), abs=2e-3)


# --- beta information ---


def test_information_beta_single_observation():
    # L = 0.5, d = 2: w * d^2 = 0.25 * 4 = 1
    ds = _point_ds([2.0], [1])
    assert information_beta(ds, LogitParams(0.0, 0.0)) == pytest.approx(1.0, abs=1e-15)


def test_information_beta_matches_observed_information():
    ds = _csr_ds()
    p = LogitParams(1.0, -2.0)
    full = observed_information(ds, p)
    assert information_beta(ds, p) == pytest.approx(full[1, 1], rel=1e-12)


def test_information_beta_zero_distances():
    ds = _point_ds([0.0, 0.0], [0, 1])
    assert information_beta(ds, LogitParams(0.0, 0.0)) == 0.0


def test_information_beta_weights_stay_at_true_distances():
    ds = mask_dataset(_csr_ds(seed=52), MaskSpec(theta_star=0.4), derive_stream(80, 0, 0))
    p = LogitParams(1.0, -2.0)
    # masked coordinates present, but the default path must use true distances
    unmasked_equiv = ChoiceDataset(
        points=ds.points, facilities=ds.facilities, choices=ds.choices, area=ds.area
    )
    assert information_beta(ds, p, theta_star=0.2) == pytest.approx(
        information_beta(unmasked_equiv, p, theta_star=0.2), rel=1e-15
    )
    # the sensitivity variant differs (weights at masked distances)
    assert information_beta(ds, p, theta_star=0.2, lambda_at_masked=True) != pytest.approx(
        information_beta(ds, p, theta_star=0.2), rel=1e-9
    )
    with pytest.raises(ValueError, match="masked"):
        information_beta(unmasked_equiv, p, theta_star=0.2, lambda_at_masked=True)


def test_information_beta_is_nonstochastic():
    ds = _csr_ds(seed=54)
    p = LogitParams(1.0, -2.0)
    assert information_beta(ds, p, theta_star=0.5) == information_beta(ds, p, theta_star=0.5)


# --- efficiency loss ---


def test_efficiency_loss_one_at_zero_theta():
    ds = _csr_ds(seed=56)
    assert efficiency_loss(ds, LogitParams(1.0, -2.0), 0.0) == 1.0


def test_efficiency_loss_single_point_value():
    # L = 0.5, d = 1, theta* = 1: ratio = d^2 / (d^2 + 1/3) = 0.75 for the
    # derived variant and for the as-printed variant alike (theta* = 1)
    ds = _point_ds([1.0], [1])
    p = LogitParams(0.0, 0.0)
    for variant in MOMENT_VARIANTS:
        assert efficiency_loss(ds, p, 1.0, variant=variant) == pytest.approx(0.75, abs=1e-12)


def test_efficiency_loss_strictly_decreasing_in_theta():
    ds = _csr_ds(seed=58)
    p = LogitParams(1.0, -2.0)
    values = [efficiency_loss(ds, p, t) for t in np.linspace(0.0, 1.0, 11)]
    assert values[0] == 1.0
    assert all(a > b for a, b in zip(values, values[1:]))


def test_efficiency_loss_in_unit_interval():
    ds = _csr_ds(seed=60)
    for t in (0.1, 0.5, 1.0, 2.0):
        el = efficiency_loss(ds, LogitParams(1.0, -2.0), t)
        assert 0.0 < el < 1.0


def test_efficiency_loss_degenerate_information():
    ds = _point_ds([0.0, 0.0], [0, 1])
    with pytest.raises(DegenerateInformationError):
        efficiency_loss(ds, LogitParams(0.0, 0.0), 0.5)


def test_efficiency_report_bundles_values():
    ds = _csr_ds(seed=62)
    p = LogitParams(1.0, -2.0)
    r = efficiency_report(ds, p, 0.4, el_empirical=0.9)
    assert r.theta_star == 0.4
    assert r.el_analytic == pytest.approx(r.info_true / r.info_masked_analytic, rel=1e-15)
    assert r.el_analytic == pytest.approx(efficiency_loss(ds, p, 0.4), rel=1e-15)
    assert r.el_empirical == 0.9
    assert r.moment_formula == "derived"


def test_efficiency_report_validation():
    with pytest.raises(ValueError):
        EfficiencyReport(0.1, 1.0, 2.0, 0.5, None, "guessed")
    with pytest.raises(ValueError):
        EfficiencyReport(0.1, 1.0, 2.0, 1.5, None, "derived")
    with pytest.raises(ValueError):
        EfficiencyReport(0.1, 0.0, 2.0, 0.5, None, "derived")


# --- empirical variance ratio ---


def _fit_stub(beta, converged=True):
    from geomasksim.logit import LogitFit

    return LogitFit(
        params=LogitParams(1.0, beta),
        std_errors=(0.1, 0.1),
        loglik=-1.0,
        information=np.eye(2),
        converged=converged,
        iterations=3,
        gradient_norm=0.0,
        intercept_fitted=True,
    )


def test_empirical_variance_ratio_identity():
    fits = [_fit_stub(b) for b in np.linspace(-2.5, -1.5, 40)]
    assert empirical_variance_ratio(fits, fits) == 1.0


def test_empirical_variance_ratio_quarter_on_doubled_spread():
    center = np.linspace(-2.5, -1.5, 40)
    true_fits = [_fit_stub(b) for b in center]
    masked_fits = [_fit_stub(-2.0 + 2.0 * (b + 2.0)) for b in center]
    assert empirical_variance_ratio(true_fits, masked_fits) == pytest.approx(0.25, rel=1e-12)


def test_empirical_variance_ratio_skips_nonconverged():
    fits = [_fit_stub(b) for b in np.linspace(-2.5, -1.5, 40)]
    polluted = fits + [_fit_stub(500.0, converged=False)] * 10
    assert empirical_variance_ratio(fits, polluted) == 1.0


def test_empirical_variance_ratio_requires_enough_fits():
    fits = [_fit_stub(b) for b in np.linspace(-2.5, -1.5, 29)]
    with pytest.raises(InsufficientDataError):
        empirical_variance_ratio(fits, fits)


def test_empirical_variance_ratio_zero_masked_variance():
    fits = [_fit_stub(b) for b in np.linspace(-2.5, -1.5, 40)]
    flat = [_fit_stub(-2.0)] * 40
    with pytest.raises(InsufficientDataError):
        empirical_variance_ratio(fits, flat)
