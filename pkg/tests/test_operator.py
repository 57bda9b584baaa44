"""Tests for the distribution-function operator and model round trips."""

import json

import numpy as np
import pytest

from conftest import make_random_cdf, make_random_family
from ifsdist.errors import ModelFormatError
from ifsdist.baselines import edf
from ifsdist.maps import (
    AffineMap,
    MapFamily,
    MapKind,
    SupportInterval,
    UNIT_SUPPORT,
    build_dyadic_maps,
    build_quantile_maps,
)
from ifsdist.operator import (
    IfsModel,
    PiecewiseCdf,
    apply_T,
    evaluate_cdf,
    fixed_point_cdf,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)


def dyadic_model(p=(0.5, 0.5)):
    return IfsModel(family=build_dyadic_maps(1), p=np.asarray(p), support=UNIT_SUPPORT)


class TestPiecewiseCdf:
    def test_uniform_constructor(self):
        cdf = PiecewiseCdf.uniform(8)
        assert np.allclose(cdf.values, cdf.grid)

    def test_rejects_bad_endpoints(self):
        with pytest.raises(ValueError):
            PiecewiseCdf(np.array([0.1, 1.0]))
        with pytest.raises(ValueError):
            PiecewiseCdf(np.array([0.0, 0.9]))

    def test_rejects_decreasing(self):
        with pytest.raises(ValueError):
            PiecewiseCdf(np.array([0.0, 0.5, 0.4, 1.0]))

    def test_extends_by_zero_and_one(self):
        cdf = PiecewiseCdf.uniform(4)
        assert cdf(-0.5) == 0.0
        assert cdf(1.5) == 1.0


class TestApplyT:
    def test_boundary_values(self, stream):
        # boundary clauses on an arbitrary random model
        fam = make_random_family(stream)
        p = stream.uniforms(len(fam))
        p /= p.sum()
        model = IfsModel(family=fam, p=p, support=UNIT_SUPPORT)
        out = apply_T(model, PiecewiseCdf.uniform(64))
        assert out.values[0] == 0.0
        assert out.values[-1] == 1.0

    def test_dyadic_uniform_is_fixed_point_grid_exact(self):
        cdf = PiecewiseCdf.uniform(512)
        out = apply_T(dyadic_model(), cdf)
        assert np.array_equal(out.values, cdf.values)

    def test_single_halving_map(self):
        # T F(x) = F(2x) extended: with F uniform this is min(2x, 1)
        fam = MapFamily((AffineMap(0.0, 0.5),), kind=MapKind.W1)
        model = IfsModel(family=fam, p=np.array([1.0]), support=UNIT_SUPPORT)
        out = apply_T(model, PiecewiseCdf.uniform(512))
        expected = np.minimum(2.0 * out.grid, 1.0)
        assert np.max(np.abs(out.values - expected)) < 1e-15

    def test_zero_slope_map_contributes_step(self):
        fam = MapFamily((AffineMap(0.3, 0.0),), kind=MapKind.W1)
        model = IfsModel(family=fam, p=np.array([1.0]), support=UNIT_SUPPORT)
        out = apply_T(model, PiecewiseCdf.uniform(10))
        expected = (out.grid >= 0.3).astype(float)
        expected[0], expected[-1] = 0.0, 1.0
        assert np.array_equal(out.values, expected)

    def test_preserves_cdf_invariants(self, stream):
        fam = make_random_family(stream)
        p = stream.uniforms(len(fam))
        p /= p.sum()
        model = IfsModel(family=fam, p=p, support=UNIT_SUPPORT)
        for _ in range(50):
            F = make_random_cdf(stream, 128)
            out = apply_T(model, F)  # constructor revalidates
            assert out.values[0] == 0.0
            assert out.values[-1] == 1.0
            assert np.all(np.diff(out.values) >= 0.0)

    def test_monotone_in_argument(self, stream):
        fam = make_random_family(stream)
        p = stream.uniforms(len(fam))
        p /= p.sum()
        model = IfsModel(family=fam, p=p, support=UNIT_SUPPORT)
        for _ in range(25):
            F = make_random_cdf(stream, 128)
            G_values = np.minimum(F.values + 0.3 * stream.uniforms(129), 1.0)
            G_values[0], G_values[-1] = 0.0, 1.0
            G = PiecewiseCdf(np.maximum.accumulate(G_values))
            TF = apply_T(model, F)
            TG = apply_T(model, G)
            lower, upper = (F, G) if np.all(G.values >= F.values) else (None, None)
            if lower is None:
                continue
            assert np.all(TG.values >= TF.values - 1e-15)

    def test_nonexpansive_in_sup_norm(self, stream):
        fam = make_random_family(stream)
        p = stream.uniforms(len(fam))
        p /= p.sum()
        model = IfsModel(family=fam, p=p, support=UNIT_SUPPORT)
        slack = 2.0 / 128
        for _ in range(25):
            F = make_random_cdf(stream, 128)
            G = make_random_cdf(stream, 128)
            lhs = np.max(np.abs(apply_T(model, F).values - apply_T(model, G).values))
            rhs = np.max(np.abs(F.values - G.values))
            assert lhs <= rhs + slack


class TestFixedPoint:
    def test_dyadic_invariant_for_any_iteration_count(self):
        for iterations in (1, 3, 8):
            cdf = fixed_point_cdf(dyadic_model(), iterations=iterations)
            assert np.max(np.abs(cdf.values - cdf.grid)) == 0.0

    def test_successive_distances_non_increasing(self, stream):
        fam = build_dyadic_maps(2)
        p = 0.5 + stream.uniforms(len(fam))
        p /= p.sum()
        model = IfsModel(family=fam, p=p, support=UNIT_SUPPORT)
        _, deltas = fixed_point_cdf(model, iterations=10, return_deltas=True)
        assert np.all(np.diff(deltas) <= 1e-12)

    def test_quantile_model_tracks_edf(self, stream):
        values = stream.uniforms(100)
        fam = build_quantile_maps(values, 50)
        p = np.asarray(fam.merge_counts, dtype=float)
        p /= p.sum()
        model = IfsModel(family=fam, p=p, support=UNIT_SUPPORT)
        cdf = fixed_point_cdf(model)
        xs = np.linspace(0.0, 1.0, 2001)
        gap = np.max(np.abs(evaluate_cdf(model, cdf, xs) - edf(values, xs)))
        assert gap <= 2.0 / 50

    def test_rejects_zero_iterations(self):
        with pytest.raises(ValueError):
            fixed_point_cdf(dyadic_model(), iterations=0)


class TestEvaluateCdf:
    def test_support_endpoints_and_outside(self):
        model = IfsModel(
            family=build_dyadic_maps(1),
            p=np.array([0.5, 0.5]),
            support=SupportInterval(2.0, 6.0),
        )
        cdf = fixed_point_cdf(model)
        assert evaluate_cdf(model, cdf, 2.0) == 0.0
        assert evaluate_cdf(model, cdf, 6.0) == 1.0
        assert evaluate_cdf(model, cdf, 1.0) == 0.0
        assert evaluate_cdf(model, cdf, 7.0) == 1.0

    def test_interior_uniform_rescaling(self):
        model = IfsModel(
            family=build_dyadic_maps(1),
            p=np.array([0.5, 0.5]),
            support=SupportInterval(2.0, 6.0),
        )
        cdf = fixed_point_cdf(model)
        assert evaluate_cdf(model, cdf, 3.0) == pytest.approx(0.25, abs=1e-12)


class TestModelValidation:
    def test_rejects_probability_mismatch(self):
        with pytest.raises(ValueError):
            IfsModel(family=build_dyadic_maps(1), p=np.array([1.0]), support=UNIT_SUPPORT)

    def test_rejects_off_simplex(self):
        with pytest.raises(ValueError):
            IfsModel(
                family=build_dyadic_maps(1), p=np.array([0.6, 0.6]), support=UNIT_SUPPORT
            )


class TestSerialization:
    def test_round_trip_bitwise(self, stream):
        fam = make_random_family(stream)
        p = stream.uniforms(len(fam))
        p /= p.sum()
        p[-1] = 1.0 - p[:-1].sum()  # exact simplex for strict round trip
        model = IfsModel(family=fam, p=p, support=SupportInterval(-1.5, 2.25))
        payload = json.loads(json.dumps(model_to_dict(model)))
        back = model_from_dict(payload)
        assert np.array_equal(back.p, model.p)
        assert back.support == model.support
        assert back.family.kind is model.family.kind
        assert [(m.a, m.b) for m in back.family] == [(m.a, m.b) for m in model.family]

    def test_file_round_trip_preserves_cdf(self, tmp_path):
        model = dyadic_model()
        path = tmp_path / "model.json"
        save_model(model, path)
        back = load_model(path)
        xs = np.linspace(0.0, 1.0, 257)
        a = evaluate_cdf(model, fixed_point_cdf(model), xs)
        b = evaluate_cdf(back, fixed_point_cdf(back), xs)
        assert np.array_equal(a, b)

    def test_schema_keys(self):
        payload = model_to_dict(dyadic_model())
        assert set(payload) == {"support", "kind", "maps", "p"}

    def test_corrupt_file_raises(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_bad_payload_raises(self):
        with pytest.raises(ModelFormatError):
            model_from_dict({"support": [0, 1], "kind": "w1"})
