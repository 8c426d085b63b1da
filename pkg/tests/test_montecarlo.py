import math

import numpy as np
import pytest

from scmlab.errors import EmptySample, ReplicationFailure, ValidationError
from scmlab.estimators import ols_fit
from scmlab.montecarlo import replicate, run_experiment, summarize
from scmlab.rng import Stream
from scmlab.scenario import binary, preset
from scmlab.scm import sample


class TestSummarize:
    def test_small(self):
        s = summarize([1.0, 2.0, 3.0])
        assert s.mean == 2.0 and s.sd == 1.0 and s.sd_defined
        assert s.quantiles[50.0] == 2.0 and s.quantiles[2.5] == pytest.approx(1.05)
        assert s.bin_counts.sum() == 3 and len(s.bin_edges) == 51
        assert np.all(np.diff(s.bin_edges) > 0)

    def test_constant(self):
        s = summarize([4.2] * 30)
        assert s.sd == 0.0 and s.mean == 4.2
        assert np.count_nonzero(s.bin_counts) == 1 and s.bin_counts.sum() == 30
        assert np.all(np.diff(s.bin_edges) > 0)

    def test_normal(self):
        x = np.random.default_rng(5).standard_normal(100_000)
        s = summarize(x)
        assert abs(s.mean) <= 0.02
        assert abs(s.quantiles[2.5] + 1.96) <= 0.05
        assert abs(s.quantiles[97.5] - 1.96) <= 0.05

    def test_empty(self):
        with pytest.raises(EmptySample):
            summarize([])


def test_single_replication(cont):
    s = cont.with_overrides(replications=1, n=200)
    mc = run_experiment(s)
    fit = ols_fit(sample(s.model, 200, Stream(s.master_seed, 1)), "Y", ["D"])
    assert mc["coef:D"].mean == fit.coefficients["D"]
    assert mc["intercept"].mean == fit.intercept
    assert mc["coef:D"].sd == 0.0 and not mc["coef:D"].sd_defined
    assert mc.replication_count == 1


def test_scenario_validation(cont):
    with pytest.raises(ValidationError):
        cont.with_overrides(n=9)
    with pytest.raises(ValidationError):
        cont.with_overrides(replications=0)


@pytest.mark.parametrize("name", ["cont", "binary", "iv-invalid", "panel"])
def test_worker_count_does_not_change_results(name):
    s = preset(name).with_overrides(replications=300, n=200)
    a = run_experiment(s, workers=1)
    b = run_experiment(s, workers=8)
    assert a.draws.keys() == b.draws.keys()
    for k in a.draws:
        assert np.array_equal(a.draws[k], b.draws[k], equal_nan=True)
        assert a[k].to_dict() == b[k].to_dict()


def test_replications_are_independent_of_r_order(cont):
    s = cont.with_overrides(n=100)
    assert replicate(s, 7) == replicate(s, 7)
    assert replicate(s, 7) != replicate(s, 8)


class TestFailureAccounting:
    def _count_constant_treatment(self, s):
        injected = 0
        for r in range(1, s.replications + 1):
            d = sample(s.model, s.n, Stream(s.master_seed, r))["D"]
            injected += bool(np.all(d == d[0]))
        return injected

    def test_counts_match_injected(self):
        # ten units split by a fair coin: a constant treatment column (and so a
        # singular design) happens with probability 2/1024 per replication
        s = binary().with_overrides(n=10, replications=4000, master_seed=31)
        injected = self._count_constant_treatment(s)
        assert 0 < injected <= 40
        mc = run_experiment(s, workers=4)
        assert mc.failures == injected
        assert mc.replication_count == s.replications - injected
        assert mc["coef:D"].count == s.replications - injected

    def test_abort_above_one_percent(self):
        # P(X > 1.5) is about 0.067, so half of all ten-unit samples are untreated
        s = binary(cutoff=1.5).with_overrides(n=10, replications=200)
        assert self._count_constant_treatment(s) > 2
        with pytest.raises(ReplicationFailure):
            run_experiment(s)


@pytest.mark.parametrize("name", ["cont", "cont-x", "binary", "iv-invalid", "panel"])
def test_centering(name):
    s = preset(name).with_overrides(replications=2000, n=1000)
    mc = run_experiment(s, workers=4)
    est = mc.analytic_reference
    slope = mc[f"coef:{s.regression.treatment}"]
    R = mc.replication_count
    assert abs(slope.mean - est.slope) <= 5 * slope.sd / math.sqrt(R)
    # the residual is orthogonal to what the method orthogonalises, replication by replication
    probe = s.regression.instrument or s.regression.treatment
    cov = mc[f"cov:resid:{probe}"]
    assert abs(cov.mean) <= 5 * cov.sd / math.sqrt(R)


def test_binary_arm_residuals_centre_on_zero():
    s = preset("binary").with_overrides(replications=500)
    mc = run_experiment(s, workers=4)
    for arm in (0, 1):
        m = mc[f"arm_mean:resid:D={arm}"]
        assert abs(m.mean) <= 1e-6
    # the structural noise is independent of D, so it centres on zero in each arm too
    assert mc["arm_mean:noise:D=1"].mean == pytest.approx(0.0, abs=5 * mc["arm_mean:noise:D=1"].sd / math.sqrt(500))
    assert mc["controlled:coef:D"].mean == pytest.approx(2000, abs=5 * mc["controlled:coef:D"].sd / math.sqrt(500))
