"""Ingestion and preprocessing: normalization, encoding, windowing, splits.

The traffic pipeline takes base-10 logs then min-max scales into [0, 1];
mobility location IDs are mapped through a codebook to 1..m and one-hot
encoded.  Windowing turns a series of n observations into exactly n - T
(window, next value) pairs, and splits are a single chronological cut.
"""

import csv
import warnings
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .checkpoint import read_container, write_container
from .errors import (DataFormatError, EncodingError, InsufficientDataError,
                     ShapeError)

TRAFFIC_HEADER = ["timestamp", "kbps"]
MOBILITY_HEADER = ["datetime", "latitude", "longitude", "location_id"]


@dataclass
class TimeSeries:
    """Ordered observations: float traffic values or integer location IDs."""

    timestamps: np.ndarray  # datetime64[s], strictly increasing
    values: np.ndarray


@dataclass(frozen=True)
class NormalizationParams:
    min_log: float
    max_log: float

    def __post_init__(self):
        if not self.max_log > self.min_log:
            raise ValueError("max_log must exceed min_log")


@dataclass
class LocationCodebook:
    """Bijection between raw location IDs and the contiguous range 1..m."""

    id_to_index: dict
    index_to_id: list

    @property
    def size(self):
        return len(self.index_to_id)


@dataclass
class WindowedDataset:
    """Stacked (window, next value) samples; inputs are (N, T, F)."""

    inputs: np.ndarray
    targets: np.ndarray
    window: int
    classes: int | None = None  # m for classification datasets

    def __len__(self):
        return self.inputs.shape[0]


def log_minmax_normalize(values):
    """log10 then min-max scale to [0, 1]; returns (scaled, params)."""
    values = np.asarray(values, dtype=np.float64)
    if np.any(values <= 0.0):
        raise ValueError("all values must be positive for the log transform")
    logs = np.log10(values)
    lo, hi = float(logs.min()), float(logs.max())
    if hi == lo:
        raise ValueError("degenerate range: series is constant")
    params = NormalizationParams(lo, hi)
    return (logs - lo) / (hi - lo), params


def denormalize(v, params):
    """Invert ``log_minmax_normalize`` back to the raw scale."""
    v = np.asarray(v, dtype=np.float64)
    return 10.0 ** (v * (params.max_log - params.min_log) + params.min_log)


def build_codebook(ids):
    """Codebook over IDs in first-appearance order (training data only)."""
    seen = {}
    for raw in np.asarray(ids).tolist():
        if raw not in seen:
            seen[raw] = len(seen) + 1
    return LocationCodebook(seen, list(seen))


def one_hot_encode(raw_id, book):
    """m-vector with a single 1 at the ID's 1-based codebook index."""
    idx = book.id_to_index.get(raw_id)
    if idx is None:
        raise EncodingError(f"location ID {raw_id!r} not in codebook")
    vec = np.zeros(book.size)
    vec[idx - 1] = 1.0
    return vec


def one_hot_decode(vec, book):
    return book.index_to_id[int(np.argmax(vec))]


def one_hot_series(ids, book):
    """Stack one-hot encodings of a whole ID sequence into (n, m)."""
    return np.stack([one_hot_encode(raw, book) for raw in np.asarray(ids).tolist()])


def sliding_window(series, window):
    """All (T-length history, next element) pairs from a sequence.

    ``series`` is (n,) or (n, F); returns a WindowedDataset with exactly
    n - T samples where sample k covers elements k..k+T-1 and its target is
    element k+T.
    """
    series = np.asarray(series, dtype=np.float64)
    if not window >= 1:
        raise ValueError("window length must be >= 1")
    n = series.shape[0]
    if n <= window:
        raise InsufficientDataError(
            f"need more than {window} observations, got {n}")
    feats = series[:, None] if series.ndim == 1 else series
    n_samples = n - window
    idx = np.arange(window)[None, :] + np.arange(n_samples)[:, None]
    inputs = feats[idx]
    targets = series[window:].copy()
    return WindowedDataset(inputs, targets, window)


def mobility_windows(ids, book, window):
    """Classification dataset: one-hot windows plus 1-based class targets."""
    encoded = one_hot_series(ids, book)
    ds = sliding_window(encoded, window)
    classes = np.argmax(ds.targets, axis=1) + 1
    return WindowedDataset(ds.inputs, classes.astype(np.int64), window, book.size)


def chronological_split(ds, train_fraction):
    """Single cut: first floor(f*N) samples train, the rest test."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(ds)
    cut = int(np.floor(train_fraction * n))
    if cut == 0 or cut == n:
        raise InsufficientDataError(
            f"split at fraction {train_fraction} leaves an empty side (N={n})")
    train = WindowedDataset(ds.inputs[:cut], ds.targets[:cut], ds.window, ds.classes)
    test = WindowedDataset(ds.inputs[cut:], ds.targets[cut:], ds.window, ds.classes)
    return train, test


def _parse_timestamp(text, path, line_no):
    try:
        stamp = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    except ValueError:
        raise DataFormatError(f"{path}:{line_no}: bad timestamp {text!r}") from None
    if stamp.tzinfo is not None:
        stamp = stamp.replace(tzinfo=None)
    return np.datetime64(stamp, "s")


def _finish_series(stamps, values, path, value_dtype):
    stamps = np.array(stamps, dtype="datetime64[s]")
    values = np.array(values, dtype=value_dtype)
    order = np.argsort(stamps, kind="stable")
    if not np.array_equal(order, np.arange(len(stamps))):
        warnings.warn(f"{path}: timestamps out of order, sorting")
        stamps, values = stamps[order], values[order]
    if len(stamps) > 1 and np.any(stamps[1:] == stamps[:-1]):
        raise DataFormatError(f"{path}: duplicate timestamps")
    return TimeSeries(stamps, values)


def load_traffic_csv(path):
    """Read ``timestamp,kbps`` rows into a traffic TimeSeries."""
    stamps, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRAFFIC_HEADER:
            raise DataFormatError(f"{path}:1: expected header {TRAFFIC_HEADER}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 2 or not row[1].strip():
                raise DataFormatError(f"{path}:{line_no}: malformed row {row!r}")
            stamps.append(_parse_timestamp(row[0], path, line_no))
            try:
                values.append(float(row[1]))
            except ValueError:
                raise DataFormatError(
                    f"{path}:{line_no}: bad value {row[1]!r}") from None
    return _finish_series(stamps, values, path, np.float64)


def load_mobility_csv(path):
    """Read ``datetime,latitude,longitude,location_id`` rows; keeps only the
    datetime and location ID columns."""
    stamps, ids = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MOBILITY_HEADER:
            raise DataFormatError(f"{path}:1: expected header {MOBILITY_HEADER}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 4 or not row[3].strip():
                raise DataFormatError(f"{path}:{line_no}: malformed row {row!r}")
            stamps.append(_parse_timestamp(row[0], path, line_no))
            try:
                ids.append(int(row[3]))
            except ValueError:
                raise DataFormatError(
                    f"{path}:{line_no}: bad location ID {row[3]!r}") from None
    return _finish_series(stamps, ids, path, np.int64)


@dataclass
class PreparedData:
    """Preprocessing output cached between commands.

    ``features`` is the normalized value series (regression) or the 1-based
    class-index series (classification); windows are rebuilt from it for
    any requested length.
    """

    task: str  # "regression" | "classification"
    features: np.ndarray
    norm: NormalizationParams | None = None
    codebook: LocationCodebook | None = None

    def windows(self, window):
        if self.task == "regression":
            return sliding_window(self.features, window)
        encoded = np.eye(self.codebook.size)[self.features.astype(int) - 1]
        ds = sliding_window(encoded, window)
        classes = np.argmax(ds.targets, axis=1) + 1
        return WindowedDataset(ds.inputs, classes.astype(np.int64), ds.window,
                               self.codebook.size)


def prepare_traffic(series, normalize_scope="full", train_fraction=0.9):
    """Normalize a traffic series; ``train`` scope fits the min/max on the
    chronological training prefix only (leakage-free mode)."""
    values = np.asarray(series.values, dtype=np.float64)
    if normalize_scope == "train":
        cut = int(np.floor(train_fraction * len(values)))
        _, params = log_minmax_normalize(values[: max(cut, 2)])
        logs = np.log10(values)
        scaled = (logs - params.min_log) / (params.max_log - params.min_log)
    elif normalize_scope == "full":
        scaled, params = log_minmax_normalize(values)
    else:
        raise ValueError(f"unknown normalize_scope: {normalize_scope!r}")
    return PreparedData("regression", scaled, norm=params)


def prepare_mobility(series, window, train_fraction=0.9):
    """Build the codebook on the training prefix, then index the series.

    The prefix covers every observation a training window or target can
    touch; an unseen ID later in the series raises EncodingError.
    """
    ids = np.asarray(series.values)
    n = len(ids)
    if n <= window:
        raise InsufficientDataError(f"need more than {window} observations, got {n}")
    n_train = int(np.floor(train_fraction * (n - window)))
    book = build_codebook(ids[: n_train + window])
    indexed = np.empty(n, dtype=np.int64)
    for j, raw in enumerate(ids.tolist()):
        idx = book.id_to_index.get(raw)
        if idx is None:
            raise EncodingError(
                f"location ID {raw!r} appears only in the test range")
        indexed[j] = idx
    return PreparedData("classification", indexed, codebook=book)


def save_prepared(prepared, ds, path):
    """Cache container: feature series plus the windows built at one T."""
    meta = {
        "task": prepared.task,
        "window": int(ds.window),
        "norm": None if prepared.norm is None else
                {"min_log": prepared.norm.min_log, "max_log": prepared.norm.max_log},
        "codebook": None if prepared.codebook is None else prepared.codebook.index_to_id,
        "classes": ds.classes,
    }
    arrays = {"features": prepared.features, "inputs": ds.inputs,
              "targets": ds.targets}
    data = write_container("dataset", meta, arrays)
    with open(path, "wb") as fh:
        fh.write(data)
    return path


def load_prepared(path):
    """Inverse of ``save_prepared``; returns (PreparedData, WindowedDataset)."""
    with open(path, "rb") as fh:
        meta, arrays = read_container(fh.read(), expect_kind="dataset")
    norm = None
    if meta["norm"] is not None:
        norm = NormalizationParams(meta["norm"]["min_log"], meta["norm"]["max_log"])
    book = None
    if meta["codebook"] is not None:
        book = LocationCodebook({raw: j + 1 for j, raw in enumerate(meta["codebook"])},
                                list(meta["codebook"]))
    features = arrays["features"]
    if meta["task"] == "classification":
        features = features.astype(np.int64)
        targets = arrays["targets"].astype(np.int64)
    else:
        targets = arrays["targets"]
    prepared = PreparedData(meta["task"], features, norm=norm, codebook=book)
    ds = WindowedDataset(arrays["inputs"], targets, meta["window"], meta["classes"])
    return prepared, ds
