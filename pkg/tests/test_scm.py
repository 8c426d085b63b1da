import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import sample_moment_se
from scmlab.errors import (
    CyclicGraph,
    DuplicateDefinition,
    MissingNoiseDraw,
    NonPsdCovariance,
    UnknownParent,
    UnknownVariable,
)
from scmlab.estimands import implied_moments
from scmlab.rng import Stream
from scmlab.scenario import preset
from scmlab.scm import (
    Degenerate,
    ExogenousBlock,
    Gaussian,
    ScaledChiSquared,
    StructuralEquation as Eq,
    build_model,
    draw_noise,
    evaluate,
    intervene,
    potential_outcome,
    sample,
    topological_order,
)


def checksum(ds):
    h = hashlib.sha256()
    for name in ds.names:
        h.update(name.encode())
        h.update(ds[name].tobytes())
    return h.hexdigest()


class TestBuildModel:
    def test_continuous_design(self):
        m = build_model(
            [Eq("Y", 5000, {"D": 100, "U": 1000}, ScaledChiSquared(1, 1000, -1000))],
            (("D", "U"), (12, 0), [[4, 1], [1, 1]]),
        )
        assert topological_order(m) == ["D", "U", "Y"]

    def test_two_cycle(self):
        with pytest.raises(CyclicGraph):
            build_model([Eq("Y", 0, {"D": 1}, Gaussian()), Eq("D", 0, {"Y": 1}, Gaussian())])

    def test_not_psd(self):
        with pytest.raises(NonPsdCovariance):
            build_model([], (("A", "B"), (0, 0), [[1, 2], [2, 1]]))

    def test_asymmetric(self):
        with pytest.raises(NonPsdCovariance):
            ExogenousBlock(("A", "B"), (0, 0), [[1, 0.5], [0.2, 1]])

    def test_singular_psd_accepted(self):
        b = ExogenousBlock(("A", "B"), (0, 0), [[1, 1], [1, 1]])
        np.testing.assert_allclose(b.factor @ b.factor.T, b.covariance, atol=1e-15)

    def test_duplicate(self):
        with pytest.raises(DuplicateDefinition):
            build_model([Eq("A"), Eq("A")])
        with pytest.raises(DuplicateDefinition):
            build_model([Eq("A")], (("A",), (0,), [[1]]))
        with pytest.raises(DuplicateDefinition):
            Eq("Y", 0, (("A", 1), ("A", 2)))

    def test_unknown_parent(self):
        with pytest.raises(UnknownParent):
            build_model([Eq("Y", 0, {"Q": 1})])


class TestTopologicalOrder:
    def test_fork(self):
        m = build_model([Eq("Y", 0, {"D": 1, "U": 1}), Eq("D", 0, {"U": 1}), Eq("U")])
        assert topological_order(m) == ["U", "D", "Y"]

    def test_iv_chain_keeps_declaration_order(self):
        m = preset("iv-invalid").model
        assert topological_order(m) == ["Z", "D", "U", "Y"]
        m2 = build_model([Eq("Z"), Eq("U", 0, {"Z": 1}), Eq("D", 0, {"Z": 1}), Eq("Y", 0, {"D": 1, "U": 1})])
        assert topological_order(m2) == ["Z", "U", "D", "Y"]

    def test_single(self):
        assert topological_order(build_model([Eq("Y", 3.0, {}, Gaussian())])) == ["Y"]

    @given(st.lists(st.lists(st.booleans(), min_size=6, max_size=6), min_size=6, max_size=6))
    def test_parents_first(self, bits):
        # edges only from lower to higher index; declare in reverse
        eqs = [Eq(f"v{j}", 0, {f"v{i}": 1.0 for i in range(j) if bits[i][j]}) for j in reversed(range(6))]
        order = topological_order(build_model(eqs))
        pos = {v: k for k, v in enumerate(order)}
        for eq in eqs:
            for p in eq.parents:
                assert pos[p] < pos[eq.target]


class TestSample:
    def test_cont_slope(self, cont):
        ds = sample(cont.model, 1_000_000, Stream(7))
        d, y = ds["D"], ds["Y"]
        slope = np.cov(d, y)[0, 1] / d.var(ddof=1)
        assert abs(slope - 350) < 1

    def test_degenerate_everything(self):
        m = build_model([Eq("A", 2.5, {}, Degenerate()), Eq("B", -1.0, {}, Degenerate(0.0))])
        ds = sample(m, 5, Stream(1))
        assert np.all(ds["A"] == 2.5) and np.all(ds["B"] == -1.0)

    def test_deterministic(self, any_preset):
        a = sample(any_preset.model, 500, Stream(3, 9))
        b = sample(any_preset.model, 500, Stream(3, 9))
        assert checksum(a) == checksum(b)
        c = sample(any_preset.model, 500, Stream(3, 10))
        assert checksum(a) != checksum(c)

    def test_threshold_is_binary_and_ties_map_to_zero(self):
        m = build_model([Eq("X", 0.0, {}, Degenerate(0.0)), Eq("D", 0.0, {"X": 1.0}, Degenerate(0.0), threshold=0.0)])
        assert np.all(sample(m, 4, Stream(0))["D"] == 0.0)
        b = preset("binary").model
        assert set(np.unique(sample(b, 1000, Stream(0))["D"])) == {0.0, 1.0}

    def test_chi_squared_moments(self):
        noise = ScaledChiSquared(1, 1000, -1000)
        x = noise.draw(np.random.default_rng(0), 1_000_000)
        assert noise.mean == 0 and noise.var == 2e6
        assert abs(x.mean()) < 5 * x.std() / 1000
        assert abs(x.min() + 1000) < 1e-6 or x.min() > -1000

    def test_moments_match_implied(self, any_preset):
        model = any_preset.model
        ds = sample(model, 1_000_000, Stream(11))
        mom = implied_moments(model)
        names = list(model.variables)
        mean, mean_se, cov, cov_se = sample_moment_se(ds.matrix(names))
        imean = np.array([mom.mean[v] for v in names])
        icov = mom.cov_block(names, names)
        assert np.all(np.abs(mean - imean) <= 5 * mean_se + 1e-12)
        assert np.all(np.abs(cov - icov) <= 5 * cov_se + 1e-12)


class TestIntervene:
    def test_mean_outcome_under_do(self, cont):
        for d in (0.0, 12.0, 20.0):
            y = sample(intervene(cont.model, "D", d), 400_000, Stream(5))["Y"]
            se = y.std() / np.sqrt(y.size)
            assert abs(y.mean() - (5000 + 100 * d)) < 5 * se

    def test_unit_effect_of_one_step(self, cont):
        lo = sample(intervene(cont.model, "D", 3.0), 200_000, Stream(2))["Y"]
        hi = sample(intervene(cont.model, "D", 4.0), 200_000, Stream(2))["Y"]
        # same streams: the difference is exactly tau
        np.testing.assert_allclose(hi - lo, 100.0, rtol=0, atol=1e-9)

    def test_leaf_source_leaves_others_alone(self):
        m = build_model([Eq("A", 0, {}, Gaussian()), Eq("B", 1, {"A": 2}, Gaussian()), Eq("L", 0, {}, Gaussian())])
        a = sample(m, 1000, Stream(4))
        b = sample(intervene(m, "L", 3.0), 1000, Stream(4))
        assert np.array_equal(a["A"], b["A"]) and np.array_equal(a["B"], b["B"])
        assert np.all(b["L"] == 3.0)

    def test_unknown(self, cont):
        with pytest.raises(UnknownVariable):
            intervene(cont.model, "Q", 1.0)

    def test_block_variable_is_marginalised(self, cont):
        m = intervene(cont.model, "U", 0.0)
        assert m.exogenous.names == ("D",) and m.exogenous.covariance[0, 0] == 4.0


class TestPotentialOutcome:
    def test_sutva_every_unit(self, any_preset):
        model = any_preset.model
        spec = any_preset.regression
        draws = draw_noise(model, 2000, Stream(8))
        values = evaluate(model, draws)
        if spec.method == "first_difference":
            pairs = [spec.panel_pairs[spec.outcome], spec.panel_pairs[spec.regressors[0]]]
            targets = [(pairs[1][t], pairs[0][t]) for t in (0, 1)]
        else:
            targets = [(spec.regressors[0], spec.outcome)]
        for d_name, y_name in targets:
            po = potential_outcome(model, draws, d_name, values[d_name], outcome=y_name)
            assert np.array_equal(po, values[y_name])

    def test_constant_effect(self, cont):
        draws = {k: v[0] for k, v in draw_noise(cont.model, 1, Stream(1)).items()}
        for d in (-3.0, 0.0, 12.5):
            diff = potential_outcome(cont.model, draws, "D", d + 1) - potential_outcome(cont.model, draws, "D", d)
            assert diff == pytest.approx(100.0, abs=1e-9)

    def test_no_latent_effect_when_beta_zero(self):
        from scmlab.scenario import continuous

        m = continuous(beta=0.0).model
        base = {"D": 1.0, "U": -2.0, "Y": 0.3}
        a = potential_outcome(m, base, "D", 5.0)
        b = potential_outcome(m, {**base, "U": 40.0}, "D", 5.0)
        assert a == b

    def test_missing_draw(self, cont):
        with pytest.raises(MissingNoiseDraw):
            potential_outcome(cont.model, {"D": 1.0, "U": 0.0}, "D", 2.0)

    @settings(max_examples=50)
    @given(st.floats(-1e3, 1e3), st.floats(-10, 10), st.floats(-5, 5), st.floats(-5000, 5000))
    def test_constant_effect_any_draws(self, d, u, dd, v):
        m = preset("cont").model
        draws = {"D": dd, "U": u, "Y": v}
        diff = potential_outcome(m, draws, "D", d + 1) - potential_outcome(m, draws, "D", d)
        assert diff == pytest.approx(100.0, rel=1e-9, abs=1e-6)
