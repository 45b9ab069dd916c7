import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from turkicadapt import (
    ForgettingCoeffs,
    ForgettingInputs,
    LanguageProfile,
    ProfileSet,
    Script,
    ValidationError,
    derive_transfer_support,
    forgetting_risk,
    logistic,
    ttc_matrix,
)

finite = st.floats(min_value=-700, max_value=700, allow_nan=False)


def fi(r=16.0, d=0.0, p=0.5, u=0.0, t=0.0):
    return ForgettingInputs(adapter_capacity=r, data_tokens=d, pretrain_repr=p,
                            novelty=u, transfer_support=t)


class TestLogistic:
    def test_symmetry_point(self):
        assert logistic(0.0) == 0.5

    def test_reference_value(self):
        assert logistic(2.1) == pytest.approx(0.890903, abs=1e-6)

    @given(finite)
    def test_complement_identity(self, x):
        assert logistic(x) + logistic(-x) == pytest.approx(1.0, abs=1e-15)

    @given(finite)
    def test_open_interval(self, x):
        assert 0.0 < logistic(x) < 1.0

    @given(st.floats(min_value=-20, max_value=20), st.floats(min_value=1e-4, max_value=40))
    def test_strictly_increasing(self, x, h):
        # Strictness is float-observable only while the increment exceeds
        # one ulp of the sigmoid, i.e. away from the plateaus near 0 and 1.
        assert logistic(min(x + h, 21.0)) > logistic(x)

    def test_extremes_do_not_overflow(self):
        assert logistic(700.0) == pytest.approx(1.0, abs=1e-15)
        assert logistic(-700.0) == pytest.approx(0.0, abs=1e-15)
        assert 0.0 < logistic(-700.0) and logistic(700.0) < 1.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            logistic(float("nan"))


class TestRisk:
    def test_zero_coefficients_give_half(self):
        assert forgetting_risk(ForgettingCoeffs(), fi()) == 0.5

    def test_hand_logit(self):
        k = ForgettingCoeffs(a=0.1, c=1.0)
        assert forgetting_risk(k, fi(r=16, p=0.5)) == pytest.approx(0.890903, abs=1e-6)

    def test_transfer_support_suppresses(self):
        k = ForgettingCoeffs(a=0.1, c=1.0, e=10.0)
        assert forgetting_risk(k, fi(r=16, p=0.5, t=1.0)) == pytest.approx(0.000371, abs=1e-6)

    def test_data_enters_log_scale(self):
        k = ForgettingCoeffs(b=1.0)
        # log10(1 + 999) = 3 exactly.
        assert forgetting_risk(k, fi(d=999.0)) == pytest.approx(logistic(3.0), abs=1e-15)

    def test_data_transform_configurable(self):
        k = ForgettingCoeffs(b=0.001)
        raw = forgetting_risk(k, fi(d=100.0), data_transform=lambda d: d)
        assert raw == pytest.approx(logistic(0.1), abs=1e-15)

    @settings(max_examples=500)
    @given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3),
           st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3),
           st.floats(min_value=-3, max_value=3),
           st.floats(min_value=1, max_value=1024), st.floats(min_value=0, max_value=1e10),
           st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=1),
           st.floats(min_value=0, max_value=1))
    def test_always_in_open_unit_interval(self, a, b, c, d, e, r, dd, p, u, t):
        k = ForgettingCoeffs(a, b, c, d, e)
        risk = forgetting_risk(k, fi(r=r, d=dd, p=p, u=u, t=t))
        assert 0.0 < risk < 1.0

    def test_sign_correct_monotonicity(self):
        k = ForgettingCoeffs(a=0.01, b=0.1, c=1.0, d=1.0, e=1.0)
        base = forgetting_risk(k, fi(r=16, d=1e6, p=0.5, u=0.5, t=0.5))
        assert forgetting_risk(k, fi(r=32, d=1e6, p=0.5, u=0.5, t=0.5)) > base
        assert forgetting_risk(k, fi(r=16, d=1e8, p=0.5, u=0.5, t=0.5)) > base
        assert forgetting_risk(k, fi(r=16, d=1e6, p=0.9, u=0.5, t=0.5)) < base
        assert forgetting_risk(k, fi(r=16, d=1e6, p=0.5, u=0.9, t=0.5)) > base
        assert forgetting_risk(k, fi(r=16, d=1e6, p=0.5, u=0.5, t=0.9)) < base


class TestTransferSupport:
    def test_reference_matrix_target_gz(self, shipped_pairs, shipped_weights):
        # Sources all gated fully: every source pretrain_repr >= p_ref.
        matrix = ttc_matrix(shipped_pairs, shipped_weights, ("az", "kk", "uz", "tk", "gz"))
        profiles = ProfileSet(tuple(
            LanguageProfile(id=lang, name=lang, script=Script.LATIN,
                            pretrain_repr=0.02, data_tokens=1e6, ortho_stability=1.0)
            for lang in matrix.languages
        ))
        assert derive_transfer_support(matrix, profiles, "gz") == pytest.approx(0.90, abs=1e-9)

    def test_single_language_family(self, shipped_weights):
        matrix = ttc_matrix({}, shipped_weights, ["solo"])
        profiles = ProfileSet((LanguageProfile(id="solo", name="S", script=Script.LATIN,
                                               pretrain_repr=0.5, data_tokens=1e6,
                                               ortho_stability=1.0),))
        assert derive_transfer_support(matrix, profiles, "solo") == 0.0

    def test_unrepresented_relatives_give_zero(self, shipped_pairs, shipped_weights):
        matrix = ttc_matrix(shipped_pairs, shipped_weights, ("az", "kk", "uz", "tk", "gz"))
        profiles = ProfileSet(tuple(
            LanguageProfile(id=lang, name=lang, script=Script.LATIN,
                            pretrain_repr=0.0, data_tokens=0.0, ortho_stability=1.0)
            for lang in matrix.languages
        ))
        assert derive_transfer_support(matrix, profiles, "gz") == 0.0

    def test_gate_scales_with_representation(self, shipped_pairs, shipped_weights,
                                             shipped_profiles):
        matrix = ttc_matrix(shipped_pairs, shipped_weights, shipped_profiles.ids)
        # az has pretrain_repr 0.004 against the default p_ref 0.01.
        value = derive_transfer_support(matrix, shipped_profiles, "gz")
        assert value == pytest.approx(0.90 * 0.004 / 0.01, abs=1e-9)

    def test_monotone_in_source_representation(self, shipped_pairs, shipped_weights):
        matrix = ttc_matrix(shipped_pairs, shipped_weights, ("az", "kk", "uz", "tk", "gz"))

        def support(p_az):
            profiles = ProfileSet(tuple(
                LanguageProfile(id=lang, name=lang, script=Script.LATIN,
                                pretrain_repr=p_az if lang == "az" else 0.001,
                                data_tokens=1e6, ortho_stability=1.0)
                for lang in matrix.languages
            ))
            return derive_transfer_support(matrix, profiles, "gz")

        values = [support(p) for p in (0.0, 0.002, 0.005, 0.01, 0.5)]
        assert values == sorted(values)

    def test_unknown_target(self, shipped_pairs, shipped_weights, shipped_profiles):
        matrix = ttc_matrix(shipped_pairs, shipped_weights, shipped_profiles.ids)
        from turkicadapt import UnknownLanguageError

        with pytest.raises(UnknownLanguageError):
            derive_transfer_support(matrix, shipped_profiles, "zz")

    def test_clamped_to_unit_interval(self, shipped_pairs, shipped_weights):
        matrix = ttc_matrix(shipped_pairs, shipped_weights, ("az", "kk", "uz", "tk", "gz"))
        profiles = ProfileSet(tuple(
            LanguageProfile(id=lang, name=lang, script=Script.LATIN,
                            pretrain_repr=1.0, data_tokens=1e9, ortho_stability=1.0)
            for lang in matrix.languages
        ))
        assert 0.0 <= derive_transfer_support(matrix, profiles, "gz") <= 1.0
