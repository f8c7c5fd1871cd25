"""Synthetic sparse regression data with heavy-tailed noise.

Procedure (defaults reproduce the benchmark profile):

1. pick ``nnz`` of ``dim`` coefficients uniformly without replacement; draw
   their magnitudes and the intercept's uniformly from [0.5, 2] with a random
   sign, all other coefficients are exactly zero;
2. draw inputs uniformly from [-5, 5]^dim;
3. ``y_i = a . x_i + b + eps_i`` with ``eps_i ~ N(0, 1)`` and, with
   probability ``outlier_prob``, ``eps_i ~ N(0, 5^2)`` instead.

On disk a dataset is a CSV (``x_1, ..., x_d, y`` with one header line) plus a
JSON sidecar ``<path>.meta.json`` holding the ground truth and generation
parameters.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rqmopt.errors import ConfigurationError, ParseError
from rqmopt.streams import RNG_ALGORITHM, data_stream

COEFF_RANGE = (0.5, 2.0)
INPUT_BOUND = 5.0


@dataclass(frozen=True, eq=False)
class DataSet:
    inputs: np.ndarray
    targets: np.ndarray
    true_coeffs: np.ndarray | None = None
    true_intercept: float | None = None
    seed: int | None = None
    outlier_prob: float = 0.05
    noise_std_main: float = 1.0
    noise_std_outlier: float = 5.0
    nnz: int | None = None
    rng_algorithm: str | None = RNG_ALGORITHM
    # which samples drew outlier noise; only known right after generation
    outlier_mask: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def ground_truth_known(self) -> bool:
        return self.true_coeffs is not None

    def meta(self) -> dict:
        return {
            "seed": self.seed,
            "rng": self.rng_algorithm,
            "n_samples": self.n_samples,
            "dim": self.dim,
            "nnz": self.nnz,
            "outlier_prob": self.outlier_prob,
            "noise_std_main": self.noise_std_main,
            "noise_std_outlier": self.noise_std_outlier,
            "true_coeffs": None if self.true_coeffs is None else [float(v) for v in self.true_coeffs],
            "true_intercept": None if self.true_intercept is None else float(self.true_intercept),
        }


def _signed_uniform(rng, size, lo, hi):
    return rng.choice([-1.0, 1.0], size=size) * rng.uniform(lo, hi, size=size)


def generate(
    seed: int,
    n_samples: int = 10_000,
    dim: int = 10,
    nnz: int = 4,
    outlier_prob: float = 0.05,
    noise_std_main: float = 1.0,
    noise_std_outlier: float = 5.0,
) -> DataSet:
    if n_samples < 1 or dim < 1 or nnz < 1:
        raise ConfigurationError("n_samples, dim and nnz must be positive")
    if nnz > dim:
        raise ConfigurationError(f"nnz={nnz} exceeds dim={dim}")
    if not 0.0 <= outlier_prob <= 1.0:
        raise ConfigurationError(f"outlier_prob must lie in [0, 1], got {outlier_prob!r}")
    if not (noise_std_main > 0 and noise_std_outlier > 0):
        raise ConfigurationError("noise standard deviations must be positive")

    rng = data_stream(seed)
    support = np.sort(rng.choice(dim, size=nnz, replace=False))
    coeffs = np.zeros(dim)
    coeffs[support] = _signed_uniform(rng, nnz, *COEFF_RANGE)
    intercept = float(_signed_uniform(rng, 1, *COEFF_RANGE)[0])

    X = rng.uniform(-INPUT_BOUND, INPUT_BOUND, size=(n_samples, dim))
    outliers = rng.random(n_samples) < outlier_prob
    noise = rng.standard_normal(n_samples) * np.where(outliers, noise_std_outlier, noise_std_main)
    y = X @ coeffs + intercept + noise
    return DataSet(
        inputs=X,
        targets=y,
        true_coeffs=coeffs,
        true_intercept=intercept,
        seed=int(seed),
        outlier_prob=outlier_prob,
        noise_std_main=noise_std_main,
        noise_std_outlier=noise_std_outlier,
        nnz=nnz,
        outlier_mask=outliers,
    )


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_csv(dataset: DataSet, path) -> None:
    """Write inputs/targets with round-trip precision and the JSON sidecar."""
    path = Path(path)
    d = dataset.dim
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x_{j + 1}" for j in range(d)] + ["y"])
        for row, target in zip(dataset.inputs.tolist(), dataset.targets.tolist()):
            writer.writerow([repr(v) for v in row] + [repr(target)])
    sidecar_path(path).write_text(json.dumps(dataset.meta(), indent=2) + "\n")


def read_csv(path, dim: int | None = None) -> DataSet:
    """Load a dataset written by ``write_csv``.

    The expected column count is ``dim + 1``, with ``dim`` taken from the
    argument, else the sidecar, else the header. Without a sidecar the
    ground truth and seed come back as ``None``.
    """
    path = Path(path)
    meta = None
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid sidecar JSON: {exc}", path=side) from exc
        if dim is None and meta.get("dim") is not None:
            dim = int(meta["dim"])

    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file", line=1, path=path)
        width = len(header) if dim is None else dim + 1
        if width < 2:
            raise ParseError("need at least one input column and the target", line=1, path=path)
        if len(header) != width:
            raise ParseError(f"header has {len(header)} columns, expected {width}", line=1, path=path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ParseError(f"row has {len(row)} columns, expected {width}", line=lineno, path=path)
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(f"non-numeric value: {exc}", line=lineno, path=path) from None
    if not rows:
        raise ParseError("no data rows", path=path)
    table = np.array(rows)
    kwargs = {}
    if meta is not None:
        coeffs = meta.get("true_coeffs")
        kwargs = dict(
            true_coeffs=None if coeffs is None else np.array(coeffs, dtype=float),
            true_intercept=meta.get("true_intercept"),
            seed=meta.get("seed"),
            outlier_prob=meta.get("outlier_prob", 0.05),
            noise_std_main=meta.get("noise_std_main", 1.0),
            noise_std_outlier=meta.get("noise_std_outlier", 5.0),
            nnz=meta.get("nnz"),
            rng_algorithm=meta.get("rng"),
        )
    else:
        kwargs = dict(rng_algorithm=None)
    return DataSet(inputs=table[:, :-1], targets=table[:, -1], **kwargs)
