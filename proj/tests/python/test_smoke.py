import numpy as np
import pytest

import snls_py as snls


SMALL = """
[grid]
dim = 2
n = 16

[time]
t_final = 0.05
dt = 0.001
scheme = deterministic_gp
"""


def test_parse_and_defaults():
    cfg = snls.parse_config("")
    assert (cfg.dim, cfg.n, cfg.dt, cfg.t_final) == (2, 64, 1e-3, 1.0)
    assert cfg.box_length == pytest.approx(2 * np.pi)
    assert snls.parse_config(SMALL).hash != cfg.hash


def test_bad_config_raises():
    with pytest.raises(snls.ConfigError):
        snls.parse_config("[grid]\nn = 12\n")


def test_dpd_identity_vectorized():
    rng = np.random.default_rng(4)
    v = rng.normal(size=200) + 1j * rng.normal(size=200)
    psi = rng.normal(size=200) + 1j * rng.normal(size=200)
    u = v + 1 + psi
    np.testing.assert_allclose(snls.dpd_nonlinearity(v, psi), (abs(u) ** 2 - 1) * u, atol=1e-12)


def test_simulate_shapes_and_energy():
    out = snls.simulate(snls.parse_config(SMALL))
    assert out["v"].shape == (51, 16, 16)
    assert out["v"].dtype == np.complex128
    np.testing.assert_allclose(out["times"][-1], 0.05)
    e = np.asarray(out["energy"])
    assert np.all(np.abs(e - e[0]) <= 1e-6 * e[0])


def test_noise_statistics_quadruple():
    cfg = snls.RunConfig()
    cfg.n = 16
    cfg.t_final = 0.1
    cfg.dt = 0.01
    cfg.ensemble_size = 50
    s = snls.noise_statistics(cfg)
    assert s["doubled_h1_moment"]["mean"] == pytest.approx(4 * s["h1_moment"]["mean"], rel=1e-12)
    assert s["h1_expected"] == pytest.approx(0.1 * s["hs_h1"] ** 2)


def test_convergence_order():
    cfg = snls.parse_config(SMALL)
    cfg.t_final = 0.2
    s = snls.convergence_study(cfg, [0.02, 0.01, 0.005])
    assert 1.7 <= s["observed_order"] <= 2.2
