"""Polynomial-regression and KNN models over the 9 Stokes features,
with R^2 / MAE metrics, 70:30 splits, k-fold cross-validation, and a
training-size sweep.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import tolerances as tol

# Frozen monomial ordering used by models on disk: total degree ascending,
# then lexicographic in the participating feature indices.
MONOMIAL_ORDER = "graded-lex-cwr-v1"

MODEL_FORMAT = "poly-model-v1"


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) float64
    feature_names: tuple[str, ...]

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class MetricsReport:
    r_squared: float
    mae: float
    n: int


@dataclass(frozen=True)
class PolyModel:
    degree: int
    coefficients: np.ndarray
    n_inputs: int
    feature_map: str = MONOMIAL_ORDER


@dataclass(frozen=True)
class CvReport:
    k: int
    degree: int
    seed: int
    fold_metrics: tuple[MetricsReport, ...]
    fold_indices: tuple[np.ndarray, ...]
    r2_mean: float
    r2_std: float
    mae_mean: float
    mae_std: float


@dataclass(frozen=True)
class SweepEntry:
    train_size: int
    train: MetricsReport
    test: MetricsReport


@dataclass(frozen=True)
class SweepReport:
    degree: int
    test_size: int
    seed: int
    entries: tuple[SweepEntry, ...]


@dataclass(frozen=True)
class KnnModel:
    k_neighbors: int
    features: np.ndarray
    labels: np.ndarray


def make_dataset(features, labels, feature_names=None) -> Dataset:
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError(f"features must be a nonempty 2-d array, got {features.shape}")
    if labels.shape != (features.shape[0],):
        raise ValueError(
            f"labels shape {labels.shape} does not match {features.shape[0]} rows")
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(features.shape[1]))
    if len(feature_names) != features.shape[1]:
        raise ValueError("feature_names length does not match feature count")
    return Dataset(features, labels, tuple(feature_names))


@lru_cache(maxsize=None)
def monomials(n_inputs: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Index multisets of all monomials with total degree <= degree,
    in the frozen ordering (the empty tuple is the intercept)."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree!r}")
    out = []
    for g in range(degree + 1):
        out.extend(itertools.combinations_with_replacement(range(n_inputs), g))
    return tuple(out)


def poly_features(x, degree: int) -> np.ndarray:
    """Monomial feature vector of one input point."""
    x = np.asarray(x, dtype=float)
    return design_matrix(x[None, :], degree)[0]


def design_matrix(x, degree: int) -> np.ndarray:
    """Monomial feature matrix of a batch of input points."""
    x = np.asarray(x, dtype=float)
    combos = monomials(x.shape[1], degree)
    cols = np.empty((x.shape[0], len(combos)))
    for c, combo in enumerate(combos):
        if combo:
            cols[:, c] = np.prod(x[:, combo], axis=1)
        else:
            cols[:, c] = 1.0
    return cols


def fit_least_squares(features, labels, ridge: float = 0.0) -> np.ndarray:
    """Minimum-norm least squares via SVD with a relative singular-value
    cutoff; optional ridge penalty (default none)."""
    a = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"feature matrix must be 2-d and nonempty, got {a.shape}")
    if y.shape != (a.shape[0],):
        raise ValueError(f"labels shape {y.shape} does not match {a.shape[0]} rows")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in the least-squares system")
    if ridge < 0.0:
        raise ValueError(f"ridge must be >= 0, got {ridge!r}")
    if ridge > 0.0:
        a = np.vstack([a, np.sqrt(ridge) * np.eye(a.shape[1])])
        y = np.concatenate([y, np.zeros(a.shape[1])])
    coeffs, _, _, _ = np.linalg.lstsq(a, y, rcond=tol.LSTSQ_RCOND)
    return coeffs


def fit_poly(ds: Dataset, degree: int, ridge: float = 0.0) -> PolyModel:
    coeffs = fit_least_squares(design_matrix(ds.features, degree), ds.labels, ridge)
    return PolyModel(degree=degree, coefficients=coeffs,
                     n_inputs=ds.features.shape[1])


def predict(model: PolyModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_inputs,):
        raise ValueError(f"expected {model.n_inputs} inputs, got shape {x.shape}")
    return float(poly_features(x, model.degree) @ model.coefficients)


def predict_batch(model: PolyModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_inputs:
        raise ValueError(f"expected (n, {model.n_inputs}) inputs, got {x.shape}")
    return design_matrix(x, model.degree) @ model.coefficients


def r_squared(y, y_hat) -> float:
    """Coefficient of determination 1 - SSE/SST."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1 or y.size < 2:
        raise ValueError("need two equal-length vectors with >= 2 entries")
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise ValueError("labels are constant; R^2 is undefined")
    sse = float(np.sum((y - y_hat) ** 2))
    return 1.0 - sse / sst


def mae(y, y_hat) -> float:
    """Mean absolute error."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1 or y.size < 1:
        raise ValueError("need two equal-length nonempty vectors")
    return float(np.mean(np.abs(y - y_hat)))


def _metrics(model: PolyModel, ds: Dataset, idx: np.ndarray) -> MetricsReport:
    pred = predict_batch(model, ds.features[idx])
    return MetricsReport(r_squared(ds.labels[idx], pred),
                         mae(ds.labels[idx], pred), int(idx.size))


def _subset(ds: Dataset, idx: np.ndarray) -> Dataset:
    return Dataset(ds.features[idx], ds.labels[idx], ds.feature_names)


def train_test_split(ds: Dataset, train_fraction: float = 0.7, seed: int = 0,
                     groups=None) -> tuple[Dataset, Dataset]:
    """Seeded uniform shuffle followed by a prefix split.

    With ``groups`` given (one key per row), each group is shuffled and
    split at the same fraction, so the group mix is preserved on both sides.
    """
    n = len(ds)
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction!r}")
    if n < 2:
        raise ValueError("dataset too small to split")
    rng = np.random.default_rng(seed)
    if groups is None:
        perm = rng.permutation(n)
        cut = int(n * train_fraction)
    else:
        groups = np.asarray(groups)
        if groups.shape != (n,):
            raise ValueError(f"groups shape {groups.shape} does not match {n} rows")
        train_parts, test_parts = [], []
        for key in np.unique(groups):
            members = rng.permutation(np.flatnonzero(groups == key))
            g_cut = int(round(len(members) * train_fraction))
            train_parts.append(members[:g_cut])
            test_parts.append(members[g_cut:])
        perm = np.concatenate(train_parts + test_parts)
        cut = sum(len(p) for p in train_parts)
    if cut == 0 or cut == n:
        raise ValueError("split leaves one side empty")
    return _subset(ds, perm[:cut]), _subset(ds, perm[cut:])


def k_fold_cv(ds: Dataset, k: int = 10, degree: int = 2, seed: int = 0,
              ridge: float = 0.0) -> CvReport:
    """Shuffle, cut into k near-equal folds, train on k-1 and test on the
    held-out fold, rotating through all folds."""
    n = len(ds)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k!r}")
    if k > n:
        raise ValueError(f"k={k} exceeds dataset size {n}")
    rng = np.random.default_rng(seed)
    folds = np.array_split(rng.permutation(n), k)

    reports = []
    for held_out in range(k):
        train_idx = np.concatenate([f for i, f in enumerate(folds) if i != held_out])
        model = fit_poly(_subset(ds, train_idx), degree, ridge)
        reports.append(_metrics(model, ds, folds[held_out]))

    r2 = np.array([m.r_squared for m in reports])
    errs = np.array([m.mae for m in reports])
    return CvReport(
        k=k, degree=degree, seed=seed,
        fold_metrics=tuple(reports),
        fold_indices=tuple(folds),
        r2_mean=float(r2.mean()), r2_std=float(r2.std()),
        mae_mean=float(errs.mean()), mae_std=float(errs.std()),
    )


def size_sweep(ds: Dataset, test_size: int = 300,
               train_sizes=tuple(range(70, 701, 70)), degree: int = 2,
               seed: int = 0, ridge: float = 0.0) -> SweepReport:
    """Fix one held-out test set, then train on nested subsets of the
    remaining rows at each requested size."""
    n = len(ds)
    train_sizes = tuple(int(s) for s in train_sizes)
    if not train_sizes or min(train_sizes) < 1:
        raise ValueError("train_sizes must be nonempty positive counts")
    if test_size < 2:
        raise ValueError(f"test_size must be >= 2, got {test_size!r}")
    if max(train_sizes) + test_size > n:
        raise ValueError(
            f"largest train size {max(train_sizes)} plus test size {test_size} "
            f"exceeds the {n} available rows")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    test_idx = perm[:test_size]
    pool = perm[test_size:]

    entries = []
    for size in train_sizes:
        train_idx = pool[:size]
        model = fit_poly(_subset(ds, train_idx), degree, ridge)
        entries.append(SweepEntry(
            train_size=size,
            train=_metrics(model, ds, train_idx),
            test=_metrics(model, ds, test_idx),
        ))
    return SweepReport(degree=degree, test_size=test_size, seed=seed,
                       entries=tuple(entries))


def knn_fit(ds: Dataset, k_neighbors: int = 5) -> KnnModel:
    if len(ds) == 0:
        raise ValueError("empty training set")
    if not 1 <= k_neighbors <= len(ds):
        raise ValueError(
            f"k_neighbors must be in 1..{len(ds)}, got {k_neighbors!r}")
    return KnnModel(k_neighbors, ds.features.copy(), ds.labels.copy())


def knn_predict(model: KnnModel, x) -> float:
    """Unweighted mean label of the k nearest training points (Euclidean
    distance, ties broken by stable row index)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.features.shape[1],):
        raise ValueError(
            f"expected {model.features.shape[1]} inputs, got shape {x.shape}")
    dists = np.sqrt(np.sum((model.features - x) ** 2, axis=1))
    nearest = np.argsort(dists, kind="stable")[: model.k_neighbors]
    return float(model.labels[nearest].mean())


def knn_predict_batch(model: KnnModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.array([knn_predict(model, row) for row in x])


def save_model(path, model: PolyModel):
    """Versioned text serialization: header fields then one coefficient
    per line at 17 significant digits."""
    lines = [
        MODEL_FORMAT,
        f"degree: {model.degree}",
        f"inputs: {model.n_inputs}",
        f"monomial-order: {model.feature_map}",
        f"coefficients: {model.coefficients.size}",
    ]
    lines.extend(format(c, ".17g") for c in model.coefficients)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> PolyModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != MODEL_FORMAT:
        raise ValueError(f"unrecognized model format in {path}")
    header = {}
    for line in lines[1:5]:
        key, _, value = line.partition(":")
        header[key.strip()] = value.strip()
    try:
        degree = int(header["degree"])
        n_inputs = int(header["inputs"])
        order = header["monomial-order"]
        count = int(header["coefficients"])
        coeffs = np.array([float(v) for v in lines[5:5 + count]])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"corrupt model file {path}: {exc}") from None
    if order != MONOMIAL_ORDER:
        raise ValueError(f"unsupported monomial ordering {order!r}")
    if coeffs.size != count or count != len(monomials(n_inputs, degree)):
        raise ValueError("coefficient count does not match the header")
    return PolyModel(degree=degree, coefficients=coeffs, n_inputs=n_inputs,
                     feature_map=order)
