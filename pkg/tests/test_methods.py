"""Method layer: link budgets, feature front-ends, and baselines.

The statistical performance of the learned methods is exercised by the
acceptance tests; here we pin the plumbing — shapes, noiseless exactness,
seed discipline, and validation — on desk-scale scenarios.
"""

import math

import numpy as np
import pytest

from fdd_extrap.channel import ofdm_from_time
from fdd_extrap.exceptions import ConfigError
from fdd_extrap.methods import (
    LEARNED_METHODS,
    METHODS,
    LinkBudget,
    TrainSettings,
    build_features,
    link_budget_from_obj,
    perfect_gains_predictions,
    prediction_correlations,
    prediction_spectral_efficiencies,
    run_method,
    train_settings_from_obj,
)
from fdd_extrap.scenario import default_config, generate_scenario

NOISELESS = LinkBudget(n0_dbm_per_hz=-math.inf)


@pytest.fixture(scope="module")
def scenario():
    config = default_config(
        k=8, n_bs=4, n_clusters=2, n_subpaths=2, churn_min=0, churn_max=1,
        n_sample_sets=4, snapshots_per_set=2, seed=13,
    )
    return config, generate_scenario(config)


class TestLinkBudget:
    def test_noiseless_budget_has_zero_gain_noise(self):
        assert NOISELESS.gain_noise_variance(100e6, 32) == 0.0

    def test_gain_noise_variance_scales_with_power(self):
        low = LinkBudget(ul_tx_power_dbm=0.0)
        high = LinkBudget(ul_tx_power_dbm=10.0)
        ratio = low.gain_noise_variance(100e6, 32) / high.gain_noise_variance(100e6, 32)
        assert ratio == pytest.approx(10.0, rel=1e-12)

    def test_snr_rho_reference_value(self):
        # P / (K * sigma^2) with P = 1 W, sigma^2 = kTB per subcarrier.
        link = LinkBudget(dl_tx_power_dbm=30.0, n0_dbm_per_hz=-174.0)
        var = 10 ** (-17.4) * 1e-3 * (100e6 / 32)
        assert link.snr_rho(100e6, 32) == pytest.approx(1.0 / (32 * var), rel=1e-9)

    def test_snr_rho_undefined_on_noiseless_link(self):
        with pytest.raises(ConfigError, match="noiseless"):
            NOISELESS.snr_rho(100e6, 32)

    def test_pilot_kinds(self):
        link = LinkBudget()
        assert link.ul_pilots().kind == "unit_diag"
        assert link.dl_pilots().kind == "dft"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"ul_tx_power_dbm": math.inf},
            {"dl_tx_power_dbm": math.nan},
            {"n0_dbm_per_hz": math.inf},
            {"coherence_bandwidth": 0.0},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ConfigError):
            LinkBudget(**kwargs)

    def test_from_obj_defaults_and_overrides(self):
        assert link_budget_from_obj({}) == LinkBudget()
        link = link_budget_from_obj({"ul_tx_power_dbm": -80, "n0_dbm_per_hz": -math.inf})
        assert link == LinkBudget(ul_tx_power_dbm=-80.0, n0_dbm_per_hz=-math.inf)

    def test_from_obj_rejects_unknown_keys(self):
        with pytest.raises(ConfigError, match="unknown key 'n0_dbm'"):
            link_budget_from_obj({"n0_dbm": -174.0})


class TestTrainSettings:
    def test_r_bounded_by_q(self):
        with pytest.raises(ConfigError, match=r"r must be"):
            TrainSettings(q=2, r=3)

    def test_q_positive_integer(self):
        with pytest.raises(ConfigError, match="q must be"):
            TrainSettings(q=0)

    def test_train_config_carries_seed(self):
        settings = TrainSettings(epochs=7, batch_size=4, lr=2e-3, validation_fraction=0.2)
        config = settings.train_config(seed=5)
        assert (config.epochs, config.batch_size, config.lr) == (7, 4, 2e-3)
        assert config.validation_fraction == 0.2
        assert config.seed == 5

    def test_from_obj_defaults_and_overrides(self):
        assert train_settings_from_obj({}) == TrainSettings()
        settings = train_settings_from_obj({"epochs": 7, "q": 3, "r": 1})
        assert settings == TrainSettings(epochs=7, q=3, r=1)

    def test_from_obj_rejects_unknown_keys(self):
        with pytest.raises(ConfigError, match="unknown key 'epoch'"):
            train_settings_from_obj({"epoch": 5})


class TestBuildFeatures:
    def test_ch_features_are_flattened_channels(self, scenario):
        config, sets = scenario
        features = build_features(
            "CH", sets[:2], config, NOISELESS, TrainSettings(), np.random.default_rng(0)
        )
        n = 2 * config.snapshots_per_set
        assert features.inputs.shape == (n, 2 * 4 * 8)
        assert features.targets.shape == (n, 2 * 4 * 8)
        assert features.extractions is None
        # Noiseless uplink estimate is the channel itself, so inputs replayed
        # through the packing must reproduce the uplink matrix exactly.
        from fdd_extrap.nn import real_to_complex

        ul = ofdm_from_time(sets[0].snapshots[0].ul).matrix
        np.testing.assert_allclose(
            real_to_complex(features.inputs[0].reshape(2, 4, 8)), ul, rtol=0, atol=1e-15
        )

    @pytest.mark.parametrize("method", ["tPG", "fPG"])
    def test_pg_features_are_gain_images(self, scenario, method):
        config, sets = scenario
        settings = TrainSettings(q=2, r=2)
        features = build_features(
            method, sets[:2], config, NOISELESS, settings, np.random.default_rng(0)
        )
        n = 2 * config.snapshots_per_set
        assert features.inputs.shape == (n, 2, 2, 2)  # (n, re/im, q, l)
        assert features.targets.shape == (n, 2 * 2 * 2)
        assert len(features.extractions) == n
        for extraction in features.extractions:
            assert len(extraction.clusters) == config.n_clusters
            for cluster in extraction.clusters:
                assert cluster.gains.shape == (settings.q,)

    def test_unknown_method_rejected(self, scenario):
        config, sets = scenario
        with pytest.raises(ConfigError, match="front-end"):
            build_features(
                "DL_training", sets, config, NOISELESS, TrainSettings(), np.random.default_rng(0)
            )

    def test_refs_enumerate_all_snapshots(self, scenario):
        config, sets = scenario
        features = build_features(
            "CH", sets, config, NOISELESS, TrainSettings(), np.random.default_rng(0)
        )
        assert features.refs == [(s.index, j) for s in sets for j in range(2)]


class TestBaselines:
    def test_perfect_gains_with_all_subpaths_is_exact(self, scenario):
        config, sets = scenario
        predictions = perfect_gains_predictions(sets, config, r=config.n_subpaths)
        correlations = prediction_correlations(predictions)
        np.testing.assert_allclose(correlations, 1.0, rtol=0, atol=1e-12)

    def test_perfect_gains_truncation_loses_correlation(self, scenario):
        config, sets = scenario
        full = prediction_correlations(perfect_gains_predictions(sets, config, r=2))
        cut = prediction_correlations(perfect_gains_predictions(sets, config, r=1))
        assert cut.mean() < full.mean()

    def test_dl_training_noiseless_is_exact(self, scenario):
        config, sets = scenario
        run = run_method(
            "DL_training", (), sets, config, NOISELESS, TrainSettings(), seed=3
        )
        assert run.history is None
        correlations = prediction_correlations(run.predictions)
        np.testing.assert_allclose(correlations, 1.0, rtol=0, atol=1e-12)

    def test_dl_training_noise_hurts(self, scenario):
        config, sets = scenario
        noisy_link = LinkBudget(dl_tx_power_dbm=-94.0, n0_dbm_per_hz=-174.0)
        run = run_method("DL_training", (), sets, config, noisy_link, TrainSettings(), seed=3)
        correlations = prediction_correlations(run.predictions)
        assert correlations.mean() < 0.999
        assert np.all((0.0 <= correlations) & (correlations <= 1.0))

    def test_dl_training_is_seed_deterministic(self, scenario):
        config, sets = scenario
        link = LinkBudget(dl_tx_power_dbm=-94.0)
        a = run_method("DL_training", (), sets, config, link, TrainSettings(), seed=3)
        b = run_method("DL_training", (), sets, config, link, TrainSettings(), seed=3)
        for pa, pb in zip(a.predictions, b.predictions):
            np.testing.assert_array_equal(pa.estimate, pb.estimate)

    def test_spectral_efficiencies_positive(self, scenario):
        config, sets = scenario
        predictions = perfect_gains_predictions(sets, config, r=2)
        rho = LinkBudget().snr_rho(config.ul.f_s, config.ul.k)
        spec_effs = prediction_spectral_efficiencies(predictions, rho)
        assert spec_effs.shape == (len(predictions),)
        assert np.all(spec_effs > 0)


class TestRunMethod:
    def test_learned_method_round_trip(self, scenario):
        config, sets = scenario
        settings = TrainSettings(epochs=2, batch_size=4, validation_fraction=0.0, q=2, r=2)
        run = run_method("tPG", sets[:3], sets[3:], config, NOISELESS, settings, seed=5)
        assert run.method == "tPG"
        assert len(run.predictions) == config.snapshots_per_set
        assert len(run.history.train_mse) == 2
        correlations = prediction_correlations(run.predictions)
        assert np.all((0.0 <= correlations) & (correlations <= 1.0))

    def test_run_is_seed_deterministic(self, scenario):
        config, sets = scenario
        settings = TrainSettings(epochs=2, batch_size=4, validation_fraction=0.0)
        a = run_method("tPG", sets[:3], sets[3:], config, NOISELESS, settings, seed=5)
        b = run_method("tPG", sets[:3], sets[3:], config, NOISELESS, settings, seed=5)
        for pa, pb in zip(a.predictions, b.predictions):
            np.testing.assert_array_equal(pa.estimate, pb.estimate)

    def test_unknown_method_rejected(self, scenario):
        config, sets = scenario
        with pytest.raises(ConfigError, match="unknown method"):
            run_method("nope", sets[:3], sets[3:], config, NOISELESS, TrainSettings(), seed=0)

    def test_method_registry(self):
        assert METHODS == ("CH", "tPG", "fPG", "DL_training")
        assert LEARNED_METHODS == ("CH", "tPG", "fPG")
