import numpy as np
import pytest

from streamlogit.model import sigmoid
from streamlogit.simulate import (
    DesignSpec,
    gen_observation,
    gen_observations,
    recode_labels,
    reference_theta,
    replication_rng,
    stream_from_file,
    write_observations_csv,
)


class TestReferenceTheta:
    def test_length(self):
        assert reference_theta().size == 11

    def test_largest_coefficient(self):
        assert reference_theta()[6] == 15.0

    def test_component_sum(self):
        assert reference_theta().sum() == -11.0

    def test_fresh_copy(self):
        a = reference_theta()
        a[0] = 99.0
        assert reference_theta()[0] == -9.0


class TestDesignSpec:
    def test_validation(self):
        with pytest.raises(ValueError, match="d must be"):
            DesignSpec(d=0)
        with pytest.raises(ValueError, match="law"):
            DesignSpec(d=2, law="gaussian")

    def test_sample_shape_and_range(self):
        x = DesignSpec(d=3).sample(replication_rng(0, 0), 100)
        assert x.shape == (100, 3)
        assert np.all((0.0 <= x) & (x < 1.0))


class TestGeneration:
    def test_single_draw_is_valid_observation(self):
        obs = gen_observation(reference_theta(), DesignSpec(d=10), replication_rng(1, 0))
        assert obs.phi[0] == 1.0
        assert obs.y in (0.0, 1.0)

    def test_replay_is_identical(self):
        theta = np.array([0.0, 1.0, -1.0])
        a = gen_observations(theta, DesignSpec(d=2), 500, replication_rng(5, 3))
        b = gen_observations(theta, DesignSpec(d=2), 500, replication_rng(5, 3))
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_batch_equals_one_at_a_time(self):
        # both consume d+1 uniforms per observation in the same order
        theta = np.array([0.2, -0.7, 1.1])
        design = DesignSpec(d=2)
        phi, y = gen_observations(theta, design, 50, replication_rng(6, 0))
        rng = replication_rng(6, 0)
        for i in range(50):
            obs = gen_observation(theta, design, rng)
            np.testing.assert_array_equal(obs.phi, phi[i])
            assert obs.y == y[i]

    def test_balanced_labels_at_zero_parameter(self):
        _, y = gen_observations(np.zeros(3), DesignSpec(d=2), 100_000, replication_rng(7, 0))
        assert abs(y.mean() - 0.5) < 0.01

    def test_saturated_intercept(self):
        theta = np.zeros(3)
        theta[0] = 50.0
        _, y = gen_observations(theta, DesignSpec(d=2), 10_000, replication_rng(8, 0))
        assert np.all(y == 1.0)

    def test_decile_calibration(self):
        # per predicted-probability decile, observed frequency matches the
        # bin-mean probability within 3 binomial standard errors
        theta = np.array([0.0, 1.0, -1.0])
        phi, y = gen_observations(theta, DesignSpec(d=2), 100_000, replication_rng(9, 0))
        p = sigmoid(phi @ theta)
        edges = np.quantile(p, np.linspace(0, 1, 11))
        edges[0] -= 1e-12
        for lo, hi in zip(edges[:-1], edges[1:]):
            mask = (p > lo) & (p <= hi)
            m = int(mask.sum())
            assert m > 1000
            p_bar = p[mask].mean()
            se = np.sqrt(p_bar * (1 - p_bar) / m)
            assert abs(y[mask].mean() - p_bar) <= 3 * se

    def test_replication_streams_differ(self):
        a = replication_rng(0, 0).random(4)
        b = replication_rng(0, 1).random(4)
        assert not np.array_equal(a, b)


class TestRecodeLabels:
    def test_mapping(self):
        pairs = [(np.array([1.0, 2.0]), -1.0), (np.array([1.0, 3.0]), 1.0)]
        out = list(recode_labels(pairs))
        assert [y for _, y in out] == [0.0, 1.0]

    def test_order_preserved(self, rng):
        labels = rng.choice([-1.0, 1.0], size=100)
        pairs = [(np.array([1.0, float(i)]), labels[i]) for i in range(100)]
        out = list(recode_labels(pairs))
        assert len(out) == 100
        np.testing.assert_array_equal([y for _, y in out], (labels + 1) / 2)
        assert all(out[i][0][1] == float(i) for i in range(100))

    def test_bad_label_names_line(self):
        pairs = [(np.array([1.0]), 1.0), (np.array([1.0]), 0.0)]
        with pytest.raises(ValueError, match="line 7"):
            list(recode_labels(pairs, first_line=6))


class TestCsvRoundtrip:
    def test_written_file_roundtrips(self, tmp_path):
        theta = np.array([0.0, 1.0, -1.0])
        phi, y = gen_observations(theta, DesignSpec(d=2), 100, replication_rng(10, 0))
        path = tmp_path / "data.csv"
        write_observations_csv(path, phi, y)
        header = path.read_text().splitlines()[0]
        assert header == "y,x1,x2"
        loaded = list(stream_from_file(path))
        assert len(loaded) == 100
        np.testing.assert_array_equal(np.array([o.phi for o in loaded]), phi)
        np.testing.assert_array_equal(np.array([o.y for o in loaded]), y)

    def test_rademacher_roundtrip(self, tmp_path):
        theta = np.array([0.0, 1.0, -1.0])
        phi, y = gen_observations(theta, DesignSpec(d=2), 50, replication_rng(11, 0))
        path = tmp_path / "pm1.csv"
        write_observations_csv(path, phi, y, labels="rademacher")
        body = path.read_text().splitlines()[1:]
        assert {row.split(",")[0] for row in body} <= {"-1", "1"}
        loaded = list(stream_from_file(path, labels="rademacher"))
        np.testing.assert_array_equal(np.array([o.y for o in loaded]), y)

    def test_rademacher_file_rejected_by_default(self, tmp_path):
        path = tmp_path / "pm1.csv"
        path.write_text("y,x1\n-1,0.5\n")
        with pytest.raises(ValueError, match=r"pm1\.csv:2"):
            list(stream_from_file(path))

    def test_empty_file_is_empty_sequence(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert list(stream_from_file(path)) == []
        path.write_text("y,x1\n")
        assert list(stream_from_file(path)) == []

    def test_arity_error_names_line(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("y,x1,x2\n1,0.5,0.5\n0,0.1,0.2,0.3\n")
        with pytest.raises(ValueError, match=r"ragged\.csv:3: expected 3 fields, got 4"):
            list(stream_from_file(path))

    def test_parse_error_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n1,0.5\n1,oops\n")
        with pytest.raises(ValueError, match=r"bad\.csv:3"):
            list(stream_from_file(path))

    def test_no_header_mode(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("1,0.25\n0,0.75\n")
        loaded = list(stream_from_file(path, has_header=False))
        assert [o.y for o in loaded] == [1.0, 0.0]
        np.testing.assert_array_equal(loaded[0].phi, [1.0, 0.25])

    def test_label_out_of_range_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n1,0.5\n2,0.5\n")
        with pytest.raises(ValueError, match=r"bad\.csv:3: label 2.0"):
            list(stream_from_file(path))
