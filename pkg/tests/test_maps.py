"""Cusp chain, damping factor, calibration, Taylor blocks."""

import cmath
import math

import numpy as np
import pytest
from mpmath import mp

from cuspdecay import maps
from cuspdecay.errors import (
    CalibrationError,
    ConfigurationError,
    InvalidInputError,
)

# exact chain value at 0: 1 - 1/(1 - (2/pi) log(sqrt(2) - 1))
CHI_AT_ZERO = 0.3594259851465734


def test_chain_golden_values():
    assert maps.cusp(1.0).chi == 1.0 + 0j
    assert abs(maps.cusp(-1.0).chi) == 0.0
    assert abs(maps.cusp(1j).chi - (0.5 + 0.5j)) < 1e-15
    assert abs(maps.cusp(-1j).chi - (0.5 - 0.5j)) < 1e-15
    assert abs(maps.cusp(0.0).chi - CHI_AT_ZERO) < 1e-15


def test_chain_golden_value_matches_mp():
    with mp.workdps(40):
        exact = 1 - 1 / (1 - 2 / mp.pi * mp.log(mp.sqrt(2) - 1))
        assert abs(float(exact) - CHI_AT_ZERO) < 1e-16


def test_first_stage_golden_values():
    assert abs(maps.chi0(1.0)) == 0.0
    assert abs(maps.chi0(-1.0) - 1.0) < 1e-15
    assert abs(maps.chi0(1j) + 1j) < 1e-15
    assert abs(maps.chi0(-1j) - 1j) < 1e-15
    assert abs(maps.chi0(0.0) - (math.sqrt(2.0) - 1.0)) < 1e-15


def test_trace_limit_values_at_one():
    tr = maps.cusp(1.0)
    assert tr.chi1.real == -math.inf
    assert tr.chi2.real == math.inf
    assert tr.chi3 == 0j
    assert tr.chi == 1.0 + 0j


def test_domain_rejection():
    with pytest.raises(InvalidInputError):
        maps.cusp(1.5)
    with pytest.raises(InvalidInputError):
        maps.chi0(2j)
    with pytest.raises(InvalidInputError):
        maps.cusp(complex("nan"))


def test_conjugation_symmetry():
    z = maps.disk_samples(500, seed=3)
    chi = maps.cusp_values(z)
    chi_conj = maps.cusp_values(np.conj(z))
    assert np.max(np.abs(chi_conj - np.conj(chi))) == 0.0


def test_real_axis_stays_real():
    x = np.linspace(-1.0 + 1e-12, 1.0 - 1e-12, 2001)
    chi = maps.cusp_values(x)
    assert np.all(chi.imag == 0.0)
    assert np.all(chi.real >= 0.0)
    assert np.all(chi.real <= 1.0)


def test_vectorized_matches_scalar():
    z = maps.disk_samples(200, seed=4)
    chi = maps.cusp_values(z)
    # cmath vs numpy round differently; agreement to an ulp is the contract
    for i in range(0, 200, 17):
        assert abs(chi[i] - maps.cusp(complex(z[i])).chi) < 1e-15


def test_lens_geometry_on_samples():
    z = maps.disk_samples(5000, seed=5)
    chi = maps.cusp_values(z)
    assert np.max(np.abs(chi - 0.5)) <= 0.5 + 1e-12
    assert np.min(np.abs(chi - (1.0 + 0.5j))) >= 0.5 - 1e-12
    assert np.min(np.abs(chi - (1.0 - 0.5j))) >= 0.5 - 1e-12
    # boundary touch only at 1: |1 - chi| <= 1 and the gap inequality
    assert np.max(np.abs(chi - 1.0)) <= 1.0 + 1e-12
    assert np.all(np.abs(chi.imag) <= 2.0 * (1.0 - chi.real) ** 2 + 1e-12)


def test_cusp_mp_agrees_with_double():
    z = maps.disk_samples(50, seed=6)
    for zz in z[:25]:
        ref = complex(maps.cusp_mp(complex(zz)))
        assert abs(maps.cusp(complex(zz)).chi - ref) < 1e-13


def test_cusp_on_circle_matches_chain():
    t = np.array([3.0, 1.0, 0.3, 1e-2, -0.7])
    chi = maps.cusp_on_circle(t)
    for tt, cc in zip(t, chi):
        assert abs(cc - maps.cusp(cmath.exp(1j * tt)).chi) < 1e-14


def test_cusp_on_circle_range_reduction():
    # adding 2 pi k must not collapse small t to the cusp value
    t = np.array([1e-3, 1e-6])
    a = maps.cusp_on_circle(t)
    b = maps.cusp_on_circle(t + 2.0 * math.pi)
    assert np.max(np.abs(a - b)) < 1e-9
    assert abs(maps.cusp_on_circle(np.array([math.pi]))[0]) < 1e-15


def test_cusp_near_one_matches_mp():
    # z = 1 - exp(l + i p): kernel vs the arbitrary-precision chain;
    # the reference gap must be formed at high dps or it rounds to 0
    for l, p in ((-55.0, 0.0), (-60.0, 1.2), (-80.0, -1.5)):
        got = maps.cusp_near_one(np.array([l]), np.array([p]))[0]
        with mp.workdps(120):
            z = mp.mpf(1) - mp.exp(mp.mpc(l, p))
            ref = complex(maps.cusp_mp(z, dps=120))
        assert abs(got - ref) < 1e-12 * abs(1.0 - ref)


def test_cusp_from_gap_matches_chain():
    # moderate gaps where forming z = 1 - xi is still exact
    xi = np.array([1e-3, 1e-3 * cmath.exp(1.3j), 1e-5 * cmath.exp(-0.8j),
                   0.2, 0.25 * cmath.exp(0.5j)])
    got = maps.cusp_from_gap(xi)
    # the plain chain itself carries ~1e-13 rounding at the smaller gaps
    for x, g in zip(xi, got):
        ref = maps.cusp(1.0 - complex(x)).chi
        assert abs(g - ref) < 1e-12


def test_cusp_from_gap_deep_matches_mp():
    for l, p in ((-8.0, 0.9), (-20.0, -1.1), (-45.0, 0.0)):
        xi = cmath.exp(l + 1j * p)
        got = maps.cusp_from_gap(np.array([xi]))[0]
        with mp.workdps(80):
            ref = complex(maps.cusp_mp(1 - mp.exp(mp.mpc(l, p)), dps=80))
        assert abs((1.0 - got) - (1.0 - ref)) < 2e-15 * abs(1.0 - ref)


def test_cusp_from_gap_joins_near_one_kernel():
    l = np.array([maps.NEAR_ONE_LOG_CUTOFF])
    p = np.array([0.7])
    a = maps.cusp_near_one(l, p)[0]
    b = maps.cusp_from_gap(np.exp(l + 1j * p))[0]
    assert abs(a - b) < 1e-13 * abs(1.0 - a)


def test_phi_theta_bound_and_limit():
    assert maps.phi_theta(1.0, 0.5) == 0j
    delta = math.cos(math.pi * 0.25)
    z = maps.disk_samples(2000, seed=7)
    phi = maps.phi_values(z, 0.5)
    cap = np.exp(-delta * np.abs(1.0 - z) ** -0.5)
    assert np.all(np.abs(phi) <= cap + 1e-15)
    for zz in z[:10]:
        assert abs(maps.phi_theta(complex(zz), 0.5)
                   - maps.phi_values(zz, 0.5)) < 1e-16
    with pytest.raises(ConfigurationError):
        maps.phi_theta(0.3, 1.5)


def test_symbol_params_validation():
    with pytest.raises(ConfigurationError):
        maps.SymbolParams(theta=0.0, c=0.01, k_hat=2.0)
    with pytest.raises(ConfigurationError):
        maps.SymbolParams(theta=0.5, c=1.5, k_hat=2.0)
    with pytest.raises(ConfigurationError):
        maps.SymbolParams(theta=0.5, c=0.01, k_hat=0.5)
    with pytest.raises(ConfigurationError):
        maps.SymbolParams(theta=0.5, c=0.01, k_hat=2.0, sigma=0.99, j0=1)
    with pytest.raises(ConfigurationError):
        maps.SymbolParams(theta=0.5, c=0.01, k_hat=2.0, g_kind="nope")


def test_symbol_params_roundtrip(params):
    assert maps.SymbolParams.from_dict(params.to_dict()) == params
    assert abs(params.delta - math.cos(math.pi / 4.0)) < 1e-15


def test_disk_samples_deterministic_and_clustered():
    a = maps.disk_samples(3000, seed=9)
    b = maps.disk_samples(3000, seed=9)
    assert np.array_equal(a, b)
    assert a.size == 3000
    assert np.max(np.abs(a)) < 1.0
    # boundary clustering: a decent fraction beyond r = 0.99
    assert np.mean(np.abs(a) > 0.99) > 0.2
    with pytest.raises(ConfigurationError):
        maps.disk_samples(0, seed=1)


def test_estimate_k_frozen():
    # sampled sup * 1.05 with the default seed; true sup is 1 + sqrt(2)
    k = maps.estimate_k()
    assert abs(k - 2.5190540230250233) < 1e-12
    assert k > 1.0 + math.sqrt(2.0)
    with pytest.raises(ConfigurationError):
        maps.estimate_k(sample_count=100)


def test_calibrate_c_frozen():
    c = maps.calibrate_c(0.5, 2.5190540230250233, validation_count=50_000)
    assert abs(c - 0.0014566968931649326) < 1e-15


def test_calibrate_c_rejects_bad_inputs():
    with pytest.raises(ConfigurationError):
        maps.calibrate_c(1.2, 2.5)
    with pytest.raises(ConfigurationError):
        maps.calibrate_c(0.5, 0.2)


def test_validate_c_catches_escape():
    # an absurdly large perturbation must trip the witness check
    with pytest.raises(CalibrationError) as exc:
        maps._validate_c(0.5, 0.9, 2.52, 20_000, seed=13)
    assert exc.value.witness is not None


def test_build_params_reproduces_frozen(params):
    got = maps.build_params(validation_count=50_000)
    assert abs(got.c - 1.456697e-3) < 1e-9
    assert abs(got.k_hat - 2.519054) < 1e-6
    assert got.theta == params.theta


def test_perturbation_reach_margin(params):
    z = maps.disk_samples(20_000, seed=10)
    reach = maps.perturbation_reach(z, params)
    assert np.max(reach) < 1.0


def test_symbol_values(params):
    z1 = maps.disk_samples(300, seed=12)
    z2 = maps.disk_samples(300, seed=14)
    w1, w2 = maps.symbol_values(z1, z2, params)
    chi = maps.cusp_values(z1)
    assert np.max(np.abs(w1 - chi)) == 0.0
    assert np.max(np.abs(w2)) < 1.0
    pert = w2 - chi
    expect = params.c * maps.phi_values(chi, params.theta) * z2
    assert np.max(np.abs(pert - expect)) < 1e-15
    s1, s2 = maps.symbol(complex(z1[0]), complex(z2[0]), params)
    assert abs(s1 - w1[0]) == 0.0
    assert abs(s2 - w2[0]) < 1e-15


def test_symbol_constant_g(params):
    p2 = maps.SymbolParams(theta=params.theta, c=params.c,
                           k_hat=params.k_hat, g_kind="constant_one")
    _, w2 = maps.symbol_values(np.array([0.3]), np.array([0.9j]), p2)
    chi = maps.cusp(0.3).chi
    expect = chi + p2.c * maps.phi_theta(chi, p2.theta)
    assert abs(w2[0] - expect) < 1e-15


def test_diagonal_symbol():
    w1, w2 = maps.diagonal_symbol(0.4 + 0.1j)
    tr = maps.cusp(0.4 + 0.1j)
    assert w1 == tr.chi and w2 == tr.chi


def test_cusp_taylor_sums_to_chain():
    co = maps.cusp_taylor(40)
    assert abs(co[0] - CHI_AT_ZERO) < 1e-15
    for z in (0.23, -0.2 + 0.1j):
        val = sum(co[k] * z ** k for k in range(40))
        assert abs(val - maps.cusp(z).chi) < 1e-12


def test_cusp_taylor_matches_mp():
    co = maps.cusp_taylor(30)
    co_mp = maps.cusp_taylor_mp(30, dps=40)
    err = max(abs(complex(a) - complex(b)) for a, b in zip(co, co_mp))
    assert err < 1e-13


def test_damping_taylor_sums_to_composition():
    dt = maps.damping_taylor(0.5, 40)
    z = 0.23
    val = sum(dt[k] * z ** k for k in range(40))
    direct = maps.phi_theta(maps.cusp(z).chi, 0.5)
    assert abs(val - direct) < 1e-13


def test_distortion_ratio_below_k_hat(params):
    z = maps.disk_samples(20_000, seed=15)
    ratio = maps.distortion_ratio(z)
    ratio = ratio[np.isfinite(ratio)]
    assert np.max(ratio) <= params.k_hat
