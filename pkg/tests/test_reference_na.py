"""Normal-approximation reference baseline tests."""

import numpy as np
import pytest

from risbound.channel import RisChannelSpec
from risbound.errors import DomainError
from risbound.reference_na import NaQuery, na_error, na_error_mc_with_se

SPEC4 = RisChannelSpec(4, 1.0, 0.5)


class TestConditionalShape:
    def test_rate_far_above_capacity(self):
        # at vanishing snr every plausible amplitude is above capacity
        q = NaQuery(n=128, rate=0.9, snr=1e-8)
        assert na_error(q, SPEC4) == pytest.approx(1.0, abs=1e-6)

    def test_tiny_rate_high_snr(self):
        q = NaQuery(n=128, rate=0.01, snr=50.0)
        assert na_error(q, SPEC4) <= 1e-12

    def test_monotone_decreasing_in_snr(self):
        vals = [na_error(NaQuery(n=128, rate=0.5, snr=float(s)), SPEC4)
                for s in np.geomspace(0.005, 1.0, 8)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_monotone_increasing_in_rate(self):
        vals = [na_error(NaQuery(n=128, rate=r, snr=0.08), SPEC4)
                for r in (0.25, 0.5, 0.75, 1.0)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestAveraging:
    def test_quadrature_matches_monte_carlo(self):
        q = NaQuery(n=128, rate=0.5, snr=0.08, mc_trials=200000, mc_seed=31)
        quad = na_error(q, SPEC4)
        mc, se = na_error_mc_with_se(q, SPEC4)
        assert abs(quad - mc) <= 3.0 * se

    def test_mc_is_deterministic(self):
        q = NaQuery(n=64, rate=0.5, snr=0.1, averaging="conditional_mc",
                    mc_trials=20000, mc_seed=5)
        assert na_error(q, SPEC4) == na_error(q, SPEC4)

    def test_validation(self):
        with pytest.raises(DomainError):
            NaQuery(n=1, rate=0.5, snr=1.0)
        with pytest.raises(DomainError):
            NaQuery(n=64, rate=0.5, snr=1.0, averaging="nope")
