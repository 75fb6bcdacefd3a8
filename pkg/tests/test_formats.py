# tests/test_formats.py
"""Tests for the dataset CSV and JSON document formats."""

import json

import numpy as np
import pytest

from rawlsian import __version__
from rawlsian.core.models import Guarantee, LinearThresholdModel, ScoreThresholdModel
from rawlsian.core.types import LabeledDataset
from rawlsian.errors import InvalidInput, OutputError, ParseError
from rawlsian.evaluation import evaluate
from rawlsian.formats import (
    format_dataset,
    model_from_dict,
    model_to_dict,
    parse_dataset,
    read_dataset,
    read_distribution,
    read_model,
    read_stats,
    report_to_dict,
    stats_from_dict,
    stats_to_dict,
    write_dataset,
    write_model,
    write_report,
    write_stats,
)
from tests.conftest import score_table

EMBEDDING_CSV = """z,y,f1,f2
1,0,0.5,-1.25
1,1,2,3
2,0,-0.5,0
2,1,1e-3,4
"""


class TestParseDataset:
    def test_embedding(self):
        data = parse_dataset(EMBEDDING_CSV)
        assert data.p == 2 and data.d == 2 and data.n == 4
        np.testing.assert_array_equal(data.features[3], [0.001, 4.0])
        assert data.y.tolist() == [0, 1, 0, 1]
        assert data.z.tolist() == [1, 1, 2, 2]

    def test_score_column(self):
        data = parse_dataset("z,y,score\n1,0,0.25\n1,1,1.75\n")
        assert data.d == 1
        assert data.features[:, 0].tolist() == [0.25, 1.75]

    def test_spaces_after_commas(self):
        assert parse_dataset("z, y, score\n1, 0, 0.25\n").features[0, 0] == 0.25

    def test_declared_p_keeps_empty_groups(self):
        assert parse_dataset("z,y,score\n1,0,0.25\n", p=3).p == 3

    def test_missing_label_column(self):
        with pytest.raises(ParseError, match="line 1: header must start with z,y"):
            parse_dataset("z,f1\n1,0.5\n")

    def test_feature_columns_in_order(self):
        with pytest.raises(ParseError, match="expected column f2"):
            parse_dataset("z,y,f1,f3\n1,0,0,0\n")

    def test_no_feature_columns(self):
        with pytest.raises(ParseError, match="no feature columns"):
            parse_dataset("z,y\n1,0\n")

    def test_non_numeric_value(self):
        with pytest.raises(ParseError, match="line 3: column f2: not a number") as exc:
            parse_dataset("z,y,f1,f2\n1,0,0,0\n1,1,0,abc\n")
        assert exc.value.line == 3

    def test_short_row(self):
        with pytest.raises(ParseError) as exc:
            parse_dataset("z,y,f1\n1,0,0.5\n1,1\n")
        assert exc.value.line == 3

    def test_label_out_of_range(self):
        with pytest.raises(ParseError, match="line 2: y must be 0 or 1"):
            parse_dataset("z,y,score\n1,2,0.5\n")

    def test_fractional_label(self):
        with pytest.raises(ParseError, match="y must be an integer"):
            parse_dataset("z,y,score\n1,0.5,0.5\n")

    def test_group_zero(self):
        with pytest.raises(ParseError, match="line 2: z must be >= 1"):
            parse_dataset("z,y,score\n0,1,0.5\n")

    def test_group_above_declared_p(self):
        with pytest.raises(ParseError, match="line 3: unknown group index 3"):
            parse_dataset("z,y,score\n1,0,0.5\n3,1,0.5\n", p=2)

    def test_empty_file(self):
        with pytest.raises(ParseError, match="empty file"):
            parse_dataset("")

    def test_parse_errors_are_invalid_input(self):
        with pytest.raises(InvalidInput) as exc:
            parse_dataset("y,z,score\n")
        assert exc.value.exit_code == 2


class TestDatasetFiles:
    def test_format_header(self):
        data = LabeledDataset(p=1, features=[[0.5, 1.0]], y=[1], z=[1])
        assert format_dataset(data).splitlines() == ["z,y,f1,f2", "1,1,0.5,1.0"]

    def test_score_header(self):
        data = LabeledDataset(p=1, features=[0.5], y=[0], z=[1])
        assert format_dataset(data, score=True).splitlines()[0] == "z,y,score"

    def test_score_header_needs_one_column(self):
        with pytest.raises(InvalidInput, match="d = 1"):
            format_dataset(LabeledDataset(p=1, features=[[0.5, 1.0]], y=[1], z=[1]), score=True)

    def test_written_file_reads_back(self, tmp_path):
        original = parse_dataset(EMBEDDING_CSV)
        path = tmp_path / "data.csv"
        write_dataset(original, path)
        again = read_dataset(path)
        np.testing.assert_array_equal(again.features, original.features)
        np.testing.assert_array_equal(again.z, original.z)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OutputError, match="cannot read") as exc:
            read_dataset(tmp_path / "absent.csv")
        assert exc.value.exit_code == 3

    def test_unwritable_destination(self, tmp_path):
        data = parse_dataset(EMBEDDING_CSV)
        with pytest.raises(OutputError, match="cannot write"):
            write_dataset(data, tmp_path / "no" / "such" / "dir.csv")


class TestStatsFile:
    def test_document_layout(self):
        doc = stats_to_dict(score_table([(0.0, 1.0, 4.0, 2.0)]))
        assert doc["p"] == 1 and doc["d"] == 1
        assert doc["subpops"][1] == {"y": 1, "z": 1, "count": 0, "mean": [4.0], "cov": [[4.0]]}

    def test_missing_field(self):
        doc = {"p": 1, "d": 1, "subpops": [{"y": 0, "z": 1, "mean": [0.0]}]}
        with pytest.raises(ParseError, match=r"stats.subpops\[0\]: missing field 'cov'"):
            stats_from_dict(doc)

    def test_bad_label(self):
        doc = {"p": 1, "d": 1, "subpops": [{"y": 3, "z": 1, "mean": [0.0], "cov": [[1.0]]}]}
        with pytest.raises(ParseError, match="label"):
            stats_from_dict(doc)

    def test_incomplete_table(self):
        doc = {"p": 1, "d": 1, "subpops": [{"y": 0, "z": 1, "mean": [0.0], "cov": [[1.0]]}]}
        with pytest.raises(InvalidInput, match=r"\(1,1\): missing entry"):
            stats_from_dict(doc)

    def test_file_is_byte_stable(self, tmp_path, table1):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_stats(table1, a)
        write_stats(read_stats(a), b)
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "stats.json"
        path.write_text('{"p": 1,\n "d": }\n')
        with pytest.raises(ParseError, match="line 2") as exc:
            read_stats(path)
        assert exc.value.line == 2

    def test_top_level_must_be_object(self, tmp_path):
        path = tmp_path / "stats.json"
        path.write_text("[1, 2]\n")
        with pytest.raises(ParseError, match="JSON object"):
            read_stats(path)


class TestModelFile:
    def test_threshold_document(self):
        doc = model_to_dict(ScoreThresholdModel(b=2.0, guarantee=Guarantee(0.2, 1), method="fat"))
        assert doc == {"type": "threshold", "b": 2.0, "r_star": 0.2, "j_star": 1, "method": "fat"}

    def test_external_model_has_no_guarantee(self):
        doc = model_to_dict(LinearThresholdModel(w=[1.0, -1.0], b=0.5))
        assert doc["w"] == [1.0, -1.0]
        assert doc["r_star"] is None and doc["method"] == "external"

    def test_linear_file(self, tmp_path):
        path = tmp_path / "model.json"
        write_model(LinearThresholdModel(w=[1.0, 0.0], b=1.0, guarantee=Guarantee(0.15, 2), method="flat1"), path)
        model = read_model(path)
        assert isinstance(model, LinearThresholdModel)
        assert model.guarantee.j_star == 2
        assert model.method == "flat1"

    def test_unknown_type(self):
        with pytest.raises(ParseError, match="type must be"):
            model_from_dict({"type": "tree", "b": 0.0})

    def test_unknown_method(self):
        with pytest.raises(ParseError, match="unknown method 'svm'"):
            model_from_dict({"type": "threshold", "b": 0.0, "method": "svm"})

    def test_linear_needs_weights(self):
        with pytest.raises(ParseError, match="missing field 'w'"):
            model_from_dict({"type": "linear", "b": 0.0})


class TestDistributionFile:
    def test_reads_fixture(self, two_point_json):
        dist = read_distribution(two_point_json)
        assert dist.n == 2 and dist.p == 1
        assert dist.mass.sum() == pytest.approx(1.0)

    def test_missing_prob(self, tmp_path):
        path = tmp_path / "dist.json"
        path.write_text('{"points": ["a"], "p": 1, "mass": [{"x": "a", "y": 1, "z": 1}]}')
        with pytest.raises(ParseError, match=r"distribution.mass\[0\]: missing field 'prob'"):
            read_distribution(path)


class TestReports:
    def test_keys_and_missing_ranges(self):
        data = LabeledDataset(p=1, features=[0.0, 2.0], y=[1, 1], z=[1, 1])
        doc = report_to_dict(evaluate(data, ScoreThresholdModel(b=1.0)))
        assert doc["per_subpop_error"] == {"1,1": 0.5}
        assert doc["fpr_range"] == [None, None]
        assert doc["empty_subpops"] == ["0,1"]
        assert doc["argmax_set"] == ["1,1"]

    def test_version_stamped_first(self, tmp_path):
        path = tmp_path / "report.json"
        write_report({"r_star": 0.2}, path)
        doc = json.loads(path.read_text())
        assert list(doc) == ["tool_version", "r_star"]
        assert doc["tool_version"] == __version__

    def test_nan_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_report({"value": float("nan")}, tmp_path / "report.json")

    def test_subpop_key_format(self):
        data = LabeledDataset(p=2, features=[0.0, 2.0, 0.0, 2.0], y=[0, 1, 0, 1], z=[1, 1, 2, 2])
        doc = report_to_dict(evaluate(data, ScoreThresholdModel(b=1.0)))
        assert list(doc["counts"]) == ["0,1", "0,2", "1,1", "1,2"]
