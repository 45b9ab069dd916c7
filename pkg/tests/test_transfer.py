import dataclasses

import pytest
from hypothesis import given, strategies as st

from turkicadapt import (
    CTEConfig,
    LanguageProfile,
    ScalingParams,
    Script,
    TransferObservation,
    ValidationError,
    cte_distance_aware,
    cte_measured,
    cte_predicted,
)
from turkicadapt.transfer import target_readiness


def obs(delta=0.1, d=100.0, r=16.0):
    return TransferObservation(source="s", target="t", delta_perf=delta,
                               source_data_tokens=d, adapter_capacity=r)


def target(p=0.01, d=1e6):
    return LanguageProfile(id="t", name="T", script=Script.LATIN,
                           pretrain_repr=p, data_tokens=d, ortho_stability=1.0)


class TestMeasured:
    def test_unit_cost_echoes_delta(self):
        assert cte_measured(obs(delta=0.37), CTEConfig()) == 0.37

    def test_hand_example(self):
        cfg = CTEConfig(omega=0.5, chi=0.5)
        assert cte_measured(obs(), cfg) == pytest.approx(0.0025, abs=1e-15)

    def test_zero_delta(self):
        cfg = CTEConfig(omega=1.3, chi=0.7)
        assert cte_measured(obs(delta=0.0), cfg) == 0.0

    def test_sign_preserved(self):
        cfg = CTEConfig(omega=0.5, chi=0.5)
        assert cte_measured(obs(delta=-0.1), cfg) < 0

    @given(st.floats(min_value=1.01, max_value=100.0))
    def test_decreasing_in_source_data(self, factor):
        cfg = CTEConfig(omega=0.5, chi=0.5)
        assert cte_measured(obs(d=100 * factor), cfg) < cte_measured(obs(d=100), cfg)

    @given(st.floats(min_value=1.01, max_value=100.0))
    def test_decreasing_in_adapter_capacity(self, factor):
        cfg = CTEConfig(omega=0.5, chi=0.5)
        assert cte_measured(obs(r=16 * factor), cfg) < cte_measured(obs(r=16), cfg)

    def test_invalid_source_tokens(self):
        with pytest.raises(ValidationError):
            obs(d=0.0)


class TestDistanceAware:
    def test_zero_distance_is_measured(self):
        cfg = CTEConfig(omega=0.5, chi=0.5, tau=1.0)
        assert cte_distance_aware(obs(), 0.0, cfg) == cte_measured(obs(), cfg)

    def test_halved_at_unit_distance(self):
        cfg = CTEConfig(omega=0.5, chi=0.5, tau=1.0)
        assert cte_distance_aware(obs(), 1.0, cfg) == pytest.approx(0.00125, abs=1e-15)

    def test_tau_zero_disables_penalty(self):
        cfg = CTEConfig(omega=0.5, chi=0.5, tau=0.0)
        assert cte_distance_aware(obs(), 7.3, cfg) == cte_measured(obs(), cfg)

    @given(st.floats(min_value=0.01, max_value=5.0),
           st.floats(min_value=0, max_value=3), st.floats(min_value=1e-3, max_value=3))
    def test_strictly_decreasing_in_distance(self, tau, dist, bump):
        cfg = CTEConfig(omega=0.5, chi=0.5, tau=tau)
        assert cte_distance_aware(obs(), dist + bump, cfg) < cte_distance_aware(obs(), dist, cfg)

    @given(st.floats(min_value=0.1, max_value=10.0))
    def test_pair_ordering_invariant_to_delta_rescale(self, scale):
        cfg = CTEConfig(omega=0.5, chi=0.5, tau=1.0)
        pairs = [(obs(delta=0.1), 0.2), (obs(delta=0.3), 1.1), (obs(delta=0.05), 0.05)]

        def ranking(k):
            vals = [cte_distance_aware(dataclasses.replace(o, delta_perf=o.delta_perf * k), d, cfg)
                    for o, d in pairs]
            return sorted(range(len(vals)), key=lambda i: vals[i])

        assert ranking(scale) == ranking(1.0)

    def test_negative_distance_rejected(self):
        with pytest.raises(ValidationError):
            cte_distance_aware(obs(), -0.1, CTEConfig())


class TestPredicted:
    def params(self, kappa=1.0, gamma=1.0, eta=1.0):
        return ScalingParams(alpha=0.0, beta=1.0, gamma=gamma, delta=1.0, eta=eta,
                             rho=1.0, kappa=kappa, pi_exp=1.0, epsilon=0.0)

    def test_zero_similarity_gives_zero(self):
        assert cte_predicted(0.0, target(), 16, self.params()) == 0.0

    def test_hand_example(self):
        # All three target-side cost terms at 1 -> readiness 1/4.
        value = cte_predicted(0.9, target(p=1.0, d=1.0), 1.0, self.params())
        assert value == pytest.approx(0.225, abs=1e-15)

    def test_cost_free_target_saturates(self):
        value = cte_predicted(0.9, target(), 16, self.params(kappa=0, gamma=0, eta=0))
        assert value == pytest.approx(0.9, abs=1e-15)

    def test_readiness_bounded(self):
        for p in (0.0, 1e-6, 0.5, 1.0):
            for d in (0.0, 1.0, 1e9):
                r = target_readiness(target(p=p, d=d), 16, self.params())
                assert 0.0 < r <= 1.0

    @given(st.floats(min_value=-1, max_value=1), st.floats(min_value=1e-3, max_value=1))
    def test_strictly_increasing_in_similarity(self, score, bump):
        p = self.params()
        lo = cte_predicted(score, target(), 16, p)
        hi = cte_predicted(score + bump, target(), 16, p)
        assert hi > lo

    def test_non_decreasing_in_target_resources(self):
        p = self.params()
        base = cte_predicted(0.9, target(p=0.001, d=1e4), 8, p)
        assert cte_predicted(0.9, target(p=0.01, d=1e4), 8, p) >= base
        assert cte_predicted(0.9, target(p=0.001, d=1e6), 8, p) >= base
        assert cte_predicted(0.9, target(p=0.001, d=1e4), 64, p) >= base

    def test_link_constant_scales(self):
        p = self.params()
        one = cte_predicted(0.9, target(), 16, p, cfg=CTEConfig(link_constant=1.0))
        two = cte_predicted(0.9, target(), 16, p, cfg=CTEConfig(link_constant=2.0))
        assert two == pytest.approx(2 * one, rel=1e-15)
