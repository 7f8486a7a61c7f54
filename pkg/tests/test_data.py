"""Data model: validation, accessors, quantified columns, JSON round-trip."""

import json

import numpy as np
import pytest

from catreg import (
    Dataset,
    Observation,
    QuantificationMap,
    ValidationError,
    Variable,
    column_as_quantified,
    dataset_from_json,
    dataset_to_json,
    population_standardize,
)

from helpers import mixed_dataset


def small_dataset():
    variables = (
        Variable("q", "ordinal", ("A", "B", "C")),
        Variable("size", "numeric"),
        Variable("y", "numeric", role="dependent"),
    )
    rows = (
        Observation(("A", 1.0, 2.0), row_id="r1"),
        Observation(("B", 2.0, 3.0), row_id="r2"),
        Observation(("C", 3.0, 5.0), row_id="r3"),
        Observation(("B", 4.0, 6.0), row_id="r4"),
    )
    return Dataset(variables, rows)


class TestVariable:
    def test_levels_validated(self):
        with pytest.raises(ValidationError):
            Variable("x", "interval")

    def test_numeric_rejects_categories(self):
        with pytest.raises(ValidationError):
            Variable("x", "numeric", ("A", "B"))

    def test_categorical_needs_two_categories(self):
        with pytest.raises(ValidationError):
            Variable("x", "nominal", ("A",))

    def test_duplicate_categories_rejected(self):
        with pytest.raises(ValidationError):
            Variable("x", "ordinal", ("A", "A"))


class TestDataset:
    def test_exactly_one_dependent(self):
        v = (Variable("a", "numeric"), Variable("b", "numeric"))
        rows = (Observation((1.0, 2.0)), Observation((2.0, 1.0)))
        with pytest.raises(ValidationError):
            Dataset(v, rows)

    def test_unknown_category_cell_rejected(self):
        variables = (
            Variable("q", "ordinal", ("A", "B")),
            Variable("y", "numeric", role="dependent"),
        )
        rows = (Observation(("A", 1.0)), Observation(("Z", 2.0)))
        with pytest.raises(ValidationError, match="not a declared category"):
            Dataset(variables, rows)

    def test_missing_cells_rejected(self):
        variables = (
            Variable("x", "numeric"),
            Variable("y", "numeric", role="dependent"),
        )
        rows = (Observation((1.0, 1.0)), Observation((None, 2.0)))
        with pytest.raises(ValidationError):
            Dataset(variables, rows)

    def test_needs_two_rows(self):
        variables = (
            Variable("x", "numeric"),
            Variable("y", "numeric", role="dependent"),
        )
        with pytest.raises(ValidationError):
            Dataset(variables, (Observation((1.0, 2.0)),))

    def test_accessors(self):
        ds = small_dataset()
        assert ds.n == 4
        assert ds.dependent.name == "y"
        assert [v.name for v in ds.predictors] == ["q", "size"]
        assert ds.labels("q") == ("A", "B", "C", "B")
        np.testing.assert_array_equal(ds.column("size"), [1.0, 2.0, 3.0, 4.0])
        codes, observed = ds.codes("q")
        assert observed == ("A", "B", "C")
        np.testing.assert_array_equal(codes, [0, 1, 2, 1])
        assert ds.row_id(2) == "r3"

    def test_observed_categories_keep_declared_order(self):
        variables = (
            Variable("q", "ordinal", ("A", "B", "C", "D")),
            Variable("y", "numeric", role="dependent"),
        )
        rows = (Observation(("D", 1.0)), Observation(("B", 2.0)), Observation(("D", 3.0)))
        ds = Dataset(variables, rows)
        codes, observed = ds.codes("q")
        assert observed == ("B", "D")  # unobserved A, C dropped, order kept
        np.testing.assert_array_equal(codes, [1, 0, 1])

    def test_subset_keeps_row_ids(self):
        ds = small_dataset()
        sub = ds.subset([0, 3])
        assert sub.n == 2
        assert sub.row_id(1) == "r4"
        assert sub.labels("q") == ("A", "B")


class TestStandardize:
    def test_three_values(self):
        z, mean, scale = population_standardize([1.0, 2.0, 3.0])
        assert mean == pytest.approx(2.0)
        # population convention: scale = sqrt(2/3), so z ends at +-1.2247
        np.testing.assert_allclose(z, [-1.22474487, 0.0, 1.22474487], atol=1e-8)
        assert np.mean(z**2) == pytest.approx(1.0, abs=1e-12)

    def test_sum_of_squares_equals_n(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=37) * 3 + 4
        z, _, _ = population_standardize(x)
        assert float(z @ z) == pytest.approx(37.0, abs=1e-9)

    def test_zero_variance_rejected(self):
        with pytest.raises(ValidationError):
            population_standardize([2.0, 2.0, 2.0])


class TestColumnAsQuantified:
    def test_binary_equal_counts_maps_to_unit_values(self):
        # standardizing a balanced two-level indicator gives -1/+1 exactly
        variables = (
            Variable("g", "nominal", ("A", "B")),
            Variable("y", "numeric", role="dependent"),
        )
        rows = tuple(
            Observation((lbl, float(i))) for i, lbl in enumerate(("A", "B", "A", "B"))
        )
        ds = Dataset(variables, rows)
        qmap = QuantificationMap(categorical={"g": {"A": -1.0, "B": 1.0}})
        np.testing.assert_array_equal(
            column_as_quantified(ds, "g", qmap), [-1.0, 1.0, -1.0, 1.0]
        )

    def test_numeric_standardization_applied(self):
        ds = small_dataset()
        qmap = QuantificationMap(numeric={"size": (2.5, 1.118033988749895)})
        out = column_as_quantified(ds, "size", qmap)
        assert abs(out.mean()) < 1e-12
        assert np.mean(out**2) == pytest.approx(1.0, abs=1e-12)

    def test_pure_function_bit_identical(self):
        ds = mixed_dataset(0)
        qmap = QuantificationMap(
            categorical={"ord1": {"A": -1.2, "B": -0.1, "C": 0.4, "D": 1.5}},
        )
        a = column_as_quantified(ds, "ord1", qmap)
        b = column_as_quantified(ds, "ord1", qmap)
        assert np.array_equal(a, b)

    def test_unknown_variable(self):
        ds = small_dataset()
        with pytest.raises(ValidationError, match="no quantification"):
            column_as_quantified(ds, "q", QuantificationMap())

    def test_category_without_quantification(self):
        ds = small_dataset()
        qmap = QuantificationMap(categorical={"q": {"A": -1.0, "B": 0.0}})
        with pytest.raises(ValidationError, match="has no quantification"):
            column_as_quantified(ds, "q", qmap)


class TestDatasetJson:
    def test_round_trip(self):
        ds = small_dataset()
        doc = dataset_to_json(ds)
        assert doc["schema_version"] == "1"
        back = dataset_from_json(json.loads(json.dumps(doc)))
        assert back == ds

    def test_unknown_fields_rejected(self):
        doc = dataset_to_json(small_dataset())
        doc["extra"] = 1
        with pytest.raises(ValidationError, match="unknown fields"):
            dataset_from_json(doc)

    def test_wrong_schema_version_rejected(self):
        doc = dataset_to_json(small_dataset())
        doc["schema_version"] = "2"
        with pytest.raises(ValidationError, match="schema version"):
            dataset_from_json(doc)
