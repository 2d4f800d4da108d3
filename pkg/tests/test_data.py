import numpy as np
import pytest

from rclstm.data import (LocationCodebook, NormalizationParams, build_codebook,
                         chronological_split, denormalize, load_mobility_csv,
                         load_prepared, load_traffic_csv, log_minmax_normalize,
                         mobility_windows, one_hot_decode, one_hot_encode,
                         prepare_mobility, prepare_traffic, save_prepared,
                         sliding_window)
from rclstm.errors import (DataFormatError, EncodingError, InsufficientDataError)


class TestNormalization:
    def test_decades_map_to_halves(self):
        scaled, params = log_minmax_normalize([10.0, 100.0, 1000.0])
        assert np.max(np.abs(scaled - [0.0, 0.5, 1.0])) < 1e-15
        assert params.min_log == 1.0 and params.max_log == 3.0

    def test_extremes(self):
        rng = np.random.default_rng(1)
        values = rng.uniform(5.0, 5000.0, size=50)
        scaled, _ = log_minmax_normalize(values)
        assert scaled[np.argmin(values)] == 0.0
        assert scaled[np.argmax(values)] == 1.0
        assert np.all((scaled >= 0.0) & (scaled <= 1.0))

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        values = rng.uniform(1.0, 1e6, size=200)
        scaled, params = log_minmax_normalize(values)
        back = denormalize(scaled, params)
        assert np.max(np.abs(back - values) / values) < 1e-9

    def test_monotone(self):
        values = np.array([3.0, 9.0, 27.0, 81.0])
        scaled, _ = log_minmax_normalize(values)
        assert np.all(np.diff(scaled) > 0)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            log_minmax_normalize([1.0, 0.0, 5.0])

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            log_minmax_normalize([7.0, 7.0, 7.0])

    def test_denormalize_endpoints(self):
        p = NormalizationParams(1.0, 3.0)
        assert denormalize(0.0, p) == 10.0
        assert denormalize(1.0, p) == 1000.0
        assert abs(denormalize(0.5, p) - 100.0) < 1e-9


class TestOneHot:
    def test_single_class(self):
        book = build_codebook([42])
        assert np.array_equal(one_hot_encode(42, book), [1.0])

    def test_index_two_of_three(self):
        book = build_codebook([7, 9, 11])
        assert np.array_equal(one_hot_encode(9, book), [0.0, 1.0, 0.0])

    def test_round_trip_random_codebook(self):
        rng = np.random.default_rng(3)
        ids = rng.permutation(100)[:17]
        book = build_codebook(ids)
        for raw in ids:
            assert one_hot_decode(one_hot_encode(int(raw), book), book) == raw

    def test_unknown_id(self):
        book = build_codebook([1, 2])
        with pytest.raises(EncodingError):
            one_hot_encode(5, book)


class TestSlidingWindow:
    def test_enumerated_case(self):
        ds = sliding_window(np.array([10.0, 11.0, 12.0, 13.0, 14.0]), 2)
        assert len(ds) == 3
        assert np.array_equal(ds.inputs[0][:, 0], [10.0, 11.0])
        assert ds.targets[0] == 12.0
        assert np.array_equal(ds.inputs[2][:, 0], [12.0, 13.0])
        assert ds.targets[2] == 14.0

    def test_boundary_single_sample(self):
        ds = sliding_window(np.arange(5.0), 4)
        assert len(ds) == 1

    def test_equal_length_is_error(self):
        with pytest.raises(InsufficientDataError):
            sliding_window(np.arange(4.0), 4)

    def test_count_formula(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            n = int(rng.integers(3, 60))
            window = int(rng.integers(1, n))
            ds = sliding_window(rng.normal(size=n), window)
            assert len(ds) == n - window


class TestChronologicalSplit:
    def test_nine_to_one(self):
        ds = sliding_window(np.arange(12.0), 2)  # 10 samples
        train, test = chronological_split(ds, 0.9)
        assert len(train) == 9 and len(test) == 1

    def test_partition_preserves_order(self):
        ds = sliding_window(np.arange(30.0), 3)
        train, test = chronological_split(ds, 0.7)
        joined = np.concatenate([train.targets, test.targets])
        assert np.array_equal(joined, ds.targets)

    def test_sixty_forty(self):
        ds = sliding_window(np.arange(103.0), 3)  # 100 samples
        train, test = chronological_split(ds, 0.6)
        assert len(train) == 60 and len(test) == 40

    def test_empty_side_rejected(self):
        ds = sliding_window(np.arange(4.0), 2)
        with pytest.raises(InsufficientDataError):
            chronological_split(ds, 0.1)


class TestLoaders:
    def write(self, tmp_path, name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    def test_traffic_two_rows(self, tmp_path):
        path = self.write(tmp_path, "t.csv",
                          "timestamp,kbps\n"
                          "2005-01-01T00:00:00,120.5\n"
                          "2005-01-01T00:15:00,130.25\n")
        series = load_traffic_csv(path)
        assert len(series.values) == 2
        assert series.values[1] == 130.25

    def test_traffic_malformed_row_names_line(self, tmp_path):
        path = self.write(tmp_path, "bad.csv",
                          "timestamp,kbps\n"
                          "2005-01-01T00:00:00,120.5\n"
                          "2005-01-01T00:15:00,\n")
        with pytest.raises(DataFormatError, match=":3"):
            load_traffic_csv(path)

    def test_traffic_bad_header(self, tmp_path):
        path = self.write(tmp_path, "h.csv", "time,value\n2005-01-01T00:00:00,1\n")
        with pytest.raises(DataFormatError):
            load_traffic_csv(path)

    def test_traffic_duplicate_timestamps(self, tmp_path):
        path = self.write(tmp_path, "dup.csv",
                          "timestamp,kbps\n"
                          "2005-01-01T00:00:00,1\n"
                          "2005-01-01T00:00:00,2\n")
        with pytest.raises(DataFormatError, match="duplicate"):
            load_traffic_csv(path)

    def test_traffic_unsorted_sorts_with_warning(self, tmp_path):
        path = self.write(tmp_path, "u.csv",
                          "timestamp,kbps\n"
                          "2005-01-01T00:15:00,2\n"
                          "2005-01-01T00:00:00,1\n")
        with pytest.warns(UserWarning):
            series = load_traffic_csv(path)
        assert series.values.tolist() == [1.0, 2.0]

    def test_traffic_geant_sized_file(self, tmp_path):
        start = np.datetime64("2005-01-01T00:00:00")
        stamps = start + np.arange(10772) * np.timedelta64(15, "m")
        rng = np.random.default_rng(5)
        rows = "\n".join(f"{str(s)},{v:.3f}"
                         for s, v in zip(stamps, rng.uniform(100, 1e5, 10772)))
        path = self.write(tmp_path, "geant.csv", "timestamp,kbps\n" + rows + "\n")
        series = load_traffic_csv(path)
        assert len(series.values) == 10772

    def test_mobility_round_trip(self, tmp_path):
        path = self.write(tmp_path, "m.csv",
                          "datetime,latitude,longitude,location_id\n"
                          "2015-08-06T00:00:00,60.1,24.9,3\n"
                          "2015-08-06T01:00:00,60.2,24.8,7\n"
                          "2015-08-06T02:00:00,60.3,24.7,3\n")
        series = load_mobility_csv(path)
        assert series.values.tolist() == [3, 7, 3]

    def test_mobility_malformed(self, tmp_path):
        path = self.write(tmp_path, "mb.csv",
                          "datetime,latitude,longitude,location_id\n"
                          "2015-08-06T00:00:00,60.1,24.9\n")
        with pytest.raises(DataFormatError, match=":2"):
            load_mobility_csv(path)


class TestPrepared:
    def test_traffic_prepare_full_scope(self):
        from rclstm.synth import sine_series
        series = sine_series(100, seed=0)
        raw = 10.0 ** (series.values * 3.0 + 1.0)
        from rclstm.data import TimeSeries
        ts = TimeSeries(series.timestamps, raw)
        prep = prepare_traffic(ts, normalize_scope="full")
        assert prep.features.min() == 0.0 and prep.features.max() == 1.0

    def test_traffic_prepare_train_scope_uses_prefix(self):
        from rclstm.data import TimeSeries
        stamps = np.datetime64("2005-01-01T00:00:00", "s") + np.arange(10)
        values = np.array([10.0] * 9 + [100000.0])
        ts = TimeSeries(stamps, np.array([10, 20, 40, 80, 20, 10, 30, 50, 60, 100000.0]))
        prep = prepare_traffic(ts, normalize_scope="train", train_fraction=0.9)
        assert prep.features[-1] > 1.0  # max outside the training prefix

    def test_mobility_unseen_test_id_is_error(self):
        from rclstm.data import TimeSeries
        n = 30
        ids = np.array([1, 2, 3] * 9 + [1, 2, 99])
        stamps = np.datetime64("2015-08-06T00:00:00", "s") + np.arange(n)
        with pytest.raises(EncodingError):
            prepare_mobility(TimeSeries(stamps, ids), window=3, train_fraction=0.8)

    def test_mobility_windows_shapes(self):
        ids = np.array([1, 2, 3, 1, 2, 3, 1, 2])
        book = build_codebook(ids)
        ds = mobility_windows(ids, book, window=3)
        assert ds.inputs.shape == (5, 3, 3)
        assert ds.classes == 3
        assert ds.targets.tolist() == [1, 2, 3, 1, 2]

    def test_cache_round_trip(self, tmp_path):
        from rclstm.synth import sine_series
        series = sine_series(60, seed=2)
        prep = prepare_traffic_like(series)
        ds = prep.windows(8)
        path = str(tmp_path / "cache.bin")
        save_prepared(prep, ds, path)
        prep2, ds2 = load_prepared(path)
        assert np.array_equal(prep.features, prep2.features)
        assert np.array_equal(ds.inputs, ds2.inputs)
        assert np.array_equal(ds.targets, ds2.targets)
        assert ds2.window == 8


def prepare_traffic_like(series):
    """Synthetic series are already in (0, 1); wrap without normalization."""
    from rclstm.data import PreparedData
    return PreparedData("regression", np.asarray(series.values, dtype=np.float64))


def test_codebook_first_appearance_order():
    book = build_codebook([9, 4, 9, 2, 4])
    assert book.id_to_index == {9: 1, 4: 2, 2: 3}
    assert book.index_to_id == [9, 4, 2]
