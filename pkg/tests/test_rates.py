import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from wiretapkey.channel import ChannelParams
from wiretapkey.gaussian import g_entropy
from wiretapkey.rates import (
    ccq_limit,
    ccq_rate,
    dr_pure_loss,
    dr_pure_loss_limit,
    dr_thermal,
    dr_thermal_limit,
    hashing_dr_numeric,
    hashing_rr_numeric,
    key_rate,
    rr_pure_loss,
    rr_pure_loss_limit,
    rr_thermal,
    rr_thermal_limit,
    unrestricted_thermal_bounds,
)

GRID = [0.1, 0.3, 0.5, 0.7, 0.9]


def close(a, b, rel=1e-9, floor=1e-12):
    return abs(a - b) <= max(rel * abs(b), floor)


def test_dr_pure_loss_examples():
    assert dr_pure_loss(0.6, 1.0, 1.0).bits_per_mode == pytest.approx(0.318726, abs=1e-6)
    direct = g_entropy(0.6) - g_entropy(0.4)
    assert dr_pure_loss(0.6, 1.0, 1.0).bits_per_mode == pytest.approx(direct, abs=1e-14)
    # kappa = eta / (1 - eta) makes Bob's and Eve's arguments equal
    assert dr_pure_loss(0.3, 0.3 / 0.7, 2.0).bits_per_mode == pytest.approx(0, abs=1e-12)
    assert dr_pure_loss(0.3, 0.5, 0.0).bits_per_mode == 0


def test_pure_loss_limits():
    assert dr_pure_loss_limit(0.6, 1.0).bits_per_mode == pytest.approx(math.log2(1.5), abs=1e-12)
    assert dr_pure_loss_limit(0.6, 1.0).bits_per_mode == pytest.approx(0.584963, abs=1e-6)
    assert dr_pure_loss_limit(0.6, 0.1).bits_per_mode == pytest.approx(3.906891, abs=1e-5)
    assert rr_pure_loss_limit(0.6, 0.1).bits_per_mode == pytest.approx(3.385387, abs=1e-5)
    for eta in GRID:
        assert rr_pure_loss_limit(eta, 1.0).bits_per_mode == pytest.approx(-math.log2(1 - eta), abs=1e-9)
    # kappa -> 0 diverges logarithmically
    vals = [rr_pure_loss_limit(0.5, k).bits_per_mode for k in (1e-2, 1e-4, 1e-6)]
    assert vals[2] - vals[1] == pytest.approx(2 * math.log2(10), abs=1e-2)
    assert vals[0] < vals[1] < vals[2]


def test_rr_pure_loss_examples():
    assert rr_pure_loss(0.5, 1.0, 1e6).bits_per_mode == pytest.approx(1.0, abs=1e-3)
    assert rr_pure_loss(0.5, 0.4, 0.0).bits_per_mode == pytest.approx(0, abs=1e-12)
    assert rr_pure_loss(0.6, 0.1, 1e6).bits_per_mode == pytest.approx(3.385387, abs=1e-3)


@pytest.mark.parametrize("eta,kappa,mu", list(itertools.product(GRID, GRID, [0.1, 1, 10, 100])))
def test_pure_loss_closed_form_vs_numeric(eta, kappa, mu):
    p = ChannelParams(eta, kappa, 0.0, mu)
    assert close(hashing_dr_numeric(p).bits_per_mode, dr_pure_loss(eta, kappa, mu).bits_per_mode)
    assert close(hashing_rr_numeric(p).bits_per_mode, rr_pure_loss(eta, kappa, mu).bits_per_mode)


@pytest.mark.parametrize("eta,kappa,mu", list(itertools.product(GRID, GRID, [0.1, 1, 10])))
def test_thermal_reduces_to_pure_loss(eta, kappa, mu):
    p = ChannelParams(eta, kappa, 0.0, mu)
    assert close(dr_thermal(p).bits_per_mode, dr_pure_loss(eta, kappa, mu).bits_per_mode)
    assert close(rr_thermal(p).bits_per_mode, rr_pure_loss(eta, kappa, mu).bits_per_mode)
    assert dr_thermal_limit(eta, kappa, 0).bits_per_mode == pytest.approx(
        dr_pure_loss_limit(eta, kappa).bits_per_mode, abs=1e-9
    )
    assert rr_thermal_limit(eta, kappa, 0).bits_per_mode == pytest.approx(
        rr_pure_loss_limit(eta, kappa).bits_per_mode, abs=1e-9
    )


def test_thermal_zero_power_has_no_key():
    for eta, kappa, n_e in itertools.product([0.2, 0.8], [0.3, 1.0], [0.5, 2.0]):
        p = ChannelParams(eta, kappa, n_e, 0.0)
        assert dr_thermal(p).bits_per_mode <= 1e-12
        assert rr_thermal(p).bits_per_mode <= 1e-12


def test_dr_thermal_limit_unrestricted():
    for eta, n_e in itertools.product([0.6, 0.9], [0.1, 1.0]):
        want = math.log2(eta / (1 - eta)) - g_entropy(n_e)
        assert dr_thermal_limit(eta, 1.0, n_e).bits_per_mode == pytest.approx(want, abs=1e-9)


def test_dr_thermal_limit_convergence_fig6_point():
    lim = dr_thermal_limit(0.8, 0.4, 1.0).bits_per_mode
    assert dr_thermal(ChannelParams(0.8, 0.4, 1.0, 1e6)).bits_per_mode == pytest.approx(lim, abs=1e-3)


def test_rr_thermal_limit_convergence():
    lim = rr_thermal_limit(0.7, 0.6, 1.0).bits_per_mode
    assert rr_thermal(ChannelParams(0.7, 0.6, 1.0, 1e6)).bits_per_mode == pytest.approx(lim, abs=1e-3)
    lim = rr_thermal_limit(0.5, 0.9999, 0.3).bits_per_mode
    assert rr_thermal(ChannelParams(0.5, 0.9999, 0.3, 1e6)).bits_per_mode == pytest.approx(lim, abs=1e-3)
    assert lim == pytest.approx(-math.log2(0.5) - g_entropy(0.3), abs=1e-3)


def test_numeric_plob_reduction():
    assert hashing_rr_numeric(ChannelParams(0.5, 1.0, 0.0, 1e6)).bits_per_mode == pytest.approx(1.0, abs=1e-3)


def test_key_rate_dispatch():
    assert key_rate("DR", ChannelParams(0.6, 0.1, 0, math.inf)).path == "asymptotic"
    assert key_rate("RR", ChannelParams(0.6, 0.1, 0, 1.0)).path == "closed-form"
    assert key_rate("RR", ChannelParams(0.6, 0.1, 0.2, 1.0)).channel == "thermal"
    with pytest.raises(ValueError):
        key_rate("XY", ChannelParams(0.6, 0.1, 0, 1.0))


def test_ccq_basics():
    assert ccq_rate(ChannelParams(0.4, 0.5, 0.0, 0.0)).bits_per_mode == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        ccq_rate(ChannelParams(0.4, 0.5, 0.0, 1.0), beta=0)
    with pytest.raises(ValueError):
        ccq_rate(ChannelParams(0.4, 0.5, 0.0, 1.0), beta=1.2)
    assert ccq_limit(0.4, 0.5, 0.0, beta=0.95).bits_per_mode == -math.inf


@pytest.mark.parametrize("eta,kappa,n_e", list(itertools.product([0.2, 0.6, 0.9], [0.1, 0.6, 1.0], [0.0, 0.5])))
def test_ccq_limit_matches_large_mu(eta, kappa, n_e):
    lim = ccq_limit(eta, kappa, n_e).bits_per_mode
    assert ccq_rate(ChannelParams(eta, kappa, n_e, 1e6)).bits_per_mode == pytest.approx(lim, abs=1e-3)


def test_ccq_interior_peak_with_imperfect_reconciliation():
    mus = np.geomspace(1e-2, 1e4, 61)
    vals = [ccq_rate(ChannelParams(0.6, 0.1, 0.0, m), beta=0.95).bits_per_mode for m in mus]
    k = int(np.argmax(vals))
    assert 0 < k < len(mus) - 1
    assert vals[k] > vals[0] and vals[k] > vals[-1]


def test_unrestricted_thermal_bounds_ordering():
    for eta, n_e in itertools.product([0.3, 0.6, 0.9], [0.0, 0.1, 1.0]):
        lo, hi = unrestricted_thermal_bounds(eta, n_e)
        assert lo <= hi + 1e-12 or lo < 0
    assert unrestricted_thermal_bounds(0.5, 0.0) == pytest.approx((1.0, 1.0))


# ------------------------------------------------------------- properties

etas = st.floats(0.02, 0.98)
kappas = st.floats(0.02, 1.0)
noise = st.floats(0.0, 3.0)
log_mu = st.floats(-2.0, 4.0)
directions = st.sampled_from(["DR", "RR"])


def _rate(direction, eta, kappa, n_e, mu):
    return key_rate(direction, ChannelParams(eta, kappa, n_e, mu)).bits_per_mode


@given(directions, etas, kappas, noise, log_mu, st.floats(1.01, 2.0))
def test_property_monotone_in_kappa(direction, eta, kappa, n_e, lmu, factor):
    mu = 10**lmu
    k2 = min(kappa * factor, 1.0)
    assert _rate(direction, eta, k2, n_e, mu) <= _rate(direction, eta, kappa, n_e, mu) + 1e-9
    assert _rate(direction, eta, k2, n_e, math.inf) <= _rate(direction, eta, kappa, n_e, math.inf) + 1e-9


@given(directions, etas, kappas, noise, log_mu, st.floats(0.01, 1.0))
def test_property_monotone_in_noise(direction, eta, kappa, n_e, lmu, step):
    mu = 10**lmu
    assert _rate(direction, eta, kappa, n_e + step, mu) <= _rate(direction, eta, kappa, n_e, mu) + 1e-9
    assert _rate(direction, eta, kappa, n_e + step, math.inf) <= _rate(direction, eta, kappa, n_e, math.inf) + 1e-9


@given(directions, etas, kappas, noise, log_mu, st.floats(1.01, 3.0))
def test_property_monotone_in_mu(direction, eta, kappa, n_e, lmu, factor):
    # the rate rises with power wherever a key exists at all
    mu = 10**lmu
    lo = _rate(direction, eta, kappa, n_e, mu)
    assume(lo > 0)
    assert _rate(direction, eta, kappa, n_e, mu * factor) >= lo - 1e-9
    assert _rate(direction, eta, kappa, n_e, math.inf) >= lo - 1e-6


@given(etas, kappas)
def test_property_dr_zero_threshold(eta, kappa):
    assume(abs(eta - kappa / (1 + kappa)) > 1e-9)
    positive = dr_pure_loss_limit(eta, kappa).bits_per_mode > 0
    assert positive == (eta > kappa / (1 + kappa))


@given(etas, kappas, noise, log_mu)
def test_property_ccq_below_rr(eta, kappa, n_e, lmu):
    p = ChannelParams(eta, kappa, n_e, 10**lmu)
    assert ccq_rate(p).bits_per_mode <= hashing_rr_numeric(p).bits_per_mode + 1e-9


@given(etas, kappas, noise, log_mu)
def test_property_closed_form_equivalence(eta, kappa, n_e, lmu):
    p = ChannelParams(eta, kappa, n_e, 10**lmu)
    assert close(hashing_dr_numeric(p).bits_per_mode, key_rate("DR", p).bits_per_mode, floor=1e-10)
    assert close(hashing_rr_numeric(p).bits_per_mode, key_rate("RR", p).bits_per_mode, floor=1e-10)


def test_crossover():
    assert dr_pure_loss_limit(0.6, 0.1).bits_per_mode > rr_pure_loss_limit(0.6, 0.1).bits_per_mode
    assert dr_pure_loss_limit(0.6, 0.9).bits_per_mode < rr_pure_loss_limit(0.6, 0.9).bits_per_mode
