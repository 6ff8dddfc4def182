import json
import math

import numpy as np
import pytest

from tsspam.exceptions import InputError, ParseError
from tsspam.io import (
    atomic_write,
    export_graph,
    fit_from_dict,
    fit_to_dict,
    format_float,
    load_fits,
    log_return,
    read_csv,
    save_fits,
    write_csv,
)
from tsspam.model import CausalGraph, Edge, FitConfig, fit_target, reconstruct_function
from tsspam.pista import PistaConfig
from tsspam.synth import SynthConfig, generate

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


def write(tmp_path, text, name="in.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestReadCsv:
    def test_two_by_two(self, tmp_path):
        sf = read_csv(write(tmp_path, "a,b\n1,2\n3,4\n"))
        assert sf.labels == ("a", "b")
        np.testing.assert_array_equal(sf.data, [[1, 2], [3, 4]])
        assert (sf.n, sf.p) == (2, 2)

    def test_nan_cell_named(self, tmp_path):
        with pytest.raises(ParseError) as info:
            read_csv(write(tmp_path, "a,b\n1,2\n3,NaN\n"))
        assert (info.value.row, info.value.col) == (3, 2)
        assert "'b'" in str(info.value)

    def test_non_numeric(self, tmp_path):
        with pytest.raises(ParseError) as info:
            read_csv(write(tmp_path, "a,b\nx,2\n"))
        assert (info.value.row, info.value.col) == (2, 1)

    def test_ragged(self, tmp_path):
        with pytest.raises(ParseError) as info:
            read_csv(write(tmp_path, "a,b\n1,2\n3\n"))
        assert info.value.row == 3

    def test_duplicate_labels(self, tmp_path):
        with pytest.raises(InputError):
            read_csv(write(tmp_path, "a,a\n1,2\n"))

    def test_empty(self, tmp_path):
        with pytest.raises(InputError):
            read_csv(write(tmp_path, ""))

    def test_round_trip_is_exact(self, tmp_path):
        X = np.random.default_rng(0).normal(size=(7, 3)) * 1e3
        write_csv(tmp_path / "x.csv", ["u", "v", "w"], X)
        np.testing.assert_array_equal(read_csv(tmp_path / "x.csv").data, X)
        assert float(format_float(0.1)) == 0.1


class TestLogReturn:
    def test_constant(self):
        np.testing.assert_array_equal(log_return([5.0, 5.0, 5.0]), [[0.0], [0.0]])

    def test_hand_values(self):
        out = log_return([[100.0], [200.0], [180.0]])
        assert out[0, 0] == pytest.approx(0.693147, abs=1e-6)
        assert out[1, 0] == pytest.approx(-0.105361, abs=1e-6)

    def test_nonpositive_price(self):
        with pytest.raises(InputError, match="row 2, column 2"):
            log_return([[1.0, 2.0], [1.0, 0.0]])

    def test_two_routes_agree(self):
        P = np.random.default_rng(1).uniform(1, 100, size=(30, 4))
        np.testing.assert_allclose(log_return(P), np.diff(np.log(P), axis=0), atol=1e-13)


class TestGraphExport:
    graph = CausalGraph(3, (Edge(2, 0, 0.5), Edge(1, 0, 0.9), Edge(0, 2, 0.5), Edge(1, 2, 0.5)),
                        ("A", "B", "C"))

    def test_json_order(self):
        payload = json.loads(export_graph(self.graph, "json"))
        assert [(e["from"], e["to"]) for e in payload["edges"]] == [(1, 0), (2, 0), (0, 2), (1, 2)]
        assert payload["edges"][0]["from_label"] == "B"

    def test_dot(self):
        text = export_graph(self.graph, "dot", top_k=1)
        assert text.startswith("digraph causal {")
        assert '"B" -> "A" [weight=0.90000000000000002];' in text
        assert '"A" -> "C"' in text and '"B" -> "C"' not in text

    def test_unknown_format(self):
        with pytest.raises(InputError):
            export_graph(self.graph, "gml")


class TestFitSerialization:
    def test_round_trip(self, tmp_path):
        X, _ = generate(SynthConfig(p=4, n=200, n_active=2, seed=2))
        fit = fit_target(X, 0, FitConfig(q=3, standardize=True, select="fixed", pista=PistaConfig(n_lambda=25)))
        save_fits(tmp_path / "fit.json", [fit], ["a", "b", "c", "d"])
        (back,), labels = load_fits(tmp_path / "fit.json")
        assert labels == ["a", "b", "c", "d"]
        assert back.selected_lambda == fit.selected_lambda
        assert back.support == fit.support
        xs = np.linspace(X[:, 1].min(), X[:, 1].max(), 9)
        for j in range(4):
            np.testing.assert_array_equal(reconstruct_function(back, j, xs), reconstruct_function(fit, j, xs))
        assert fit_from_dict(json.loads(json.dumps(fit_to_dict(fit)))).path.lambdas.tolist() == fit.path.lambdas.tolist()


def test_atomic_write_leaves_no_temp_files(tmp_path):
    atomic_write(tmp_path / "sub" / "f.txt", "hello")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]
    assert (tmp_path / "sub" / "f.txt").read_text() == "hello"
