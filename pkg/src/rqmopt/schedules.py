"""Control-parameter sequences for RQM.

A schedule fixes the averaging weights ``a_k`` (with running totals
``A_k = a_0 + ... + a_k``), the nondecreasing prox weights ``gamma_k`` and,
together with the strong-convexity moduli of the regularizer (``sigma``) and
of the prox-function (``beta``), the subproblem modulus
``mu_k = A_k * sigma + gamma_k * beta``.

Built-in kinds:

=========  ======  ==============  ================
kind       a_k     A_k             gamma_k
=========  ======  ==============  ================
cor1       1       k + 1           sqrt(k + 1)
cor2       1       k + 1           ln(2k + 3)
quadratic  k       k(k + 1) / 2    constant (10)
custom     table   cumulative sum  table
=========  ======  ==============  ================
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from rqmopt.errors import ConfigurationError, DegenerateSubproblemError

DEFAULT_GAMMA_CONST = 10.0


class ScheduleKind(str, Enum):
    COR1 = "cor1"
    COR2 = "cor2"
    QUADRATIC = "quadratic"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, value) -> "ScheduleKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ConfigurationError(f"unknown schedule kind {value!r} (expected one of {names})") from None


def _check_index(k):
    if k < 0:
        raise ConfigurationError(f"schedule index must be >= 0, got {k}")


def schedule_weights(kind, k: int) -> tuple[float, float]:
    """Return ``(a_k, A_k)`` for a closed-form schedule kind."""
    kind = ScheduleKind.parse(kind)
    _check_index(k)
    if kind in (ScheduleKind.COR1, ScheduleKind.COR2):
        return 1.0, float(k + 1)
    if kind is ScheduleKind.QUADRATIC:
        # integer arithmetic keeps A_k exact
        return float(k), float(k * (k + 1) // 2)
    raise ConfigurationError(f"schedule kind {kind.value!r} has no closed-form weights")


def schedule_gamma(kind, k: int, gamma_const: float = DEFAULT_GAMMA_CONST) -> float:
    """Return ``gamma_k`` for a closed-form schedule kind."""
    kind = ScheduleKind.parse(kind)
    _check_index(k)
    if kind is ScheduleKind.COR1:
        return math.sqrt(k + 1)
    if kind is ScheduleKind.COR2:
        return math.log(2 * k + 3)
    if kind is ScheduleKind.QUADRATIC:
        return float(gamma_const)
    raise ConfigurationError(f"schedule kind {kind.value!r} has no closed-form gamma")


def modulus_mu(A_k: float, gamma_k: float, sigma: float, beta: float = 1.0) -> float:
    """Strong-convexity modulus of ``A_k g + gamma_k Psi``."""
    mu = A_k * sigma + gamma_k * beta
    if not mu > 0:
        raise DegenerateSubproblemError(
            f"subproblem is not strongly convex: A*sigma + gamma*beta = {mu!r} "
            f"(A={A_k!r}, gamma={gamma_k!r}, sigma={sigma!r}, beta={beta!r})"
        )
    return mu


def _validate_tables(a, gamma):
    if a is not None:
        if a.ndim != 1 or a.size == 0:
            raise ConfigurationError("custom weight table must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(a)):
            raise ConfigurationError("custom weight table contains non-finite values")
        if a[0] < 0:
            raise ConfigurationError(f"a_0 must be >= 0, got {a[0]!r}")
        bad = np.flatnonzero(a[1:] <= 0)
        if bad.size:
            k = int(bad[0]) + 1
            raise ConfigurationError(f"a_k must be > 0 for k >= 1; a_{k} = {a[k]!r}")
    if gamma.ndim != 1 or gamma.size == 0:
        raise ConfigurationError("custom gamma table must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(gamma)) or np.any(gamma <= 0):
        raise ConfigurationError("custom gamma values must be finite and positive")
    drops = np.flatnonzero(np.diff(gamma) < 0)
    if drops.size:
        k = int(drops[0])
        raise ConfigurationError(
            f"gamma must be nondecreasing: gamma_{k + 1} = {gamma[k + 1]!r} < gamma_{k} = {gamma[k]!r}"
        )


@dataclass(frozen=True)
class Schedule:
    """Weights, prox weights and moduli for one RQM run.

    ``sigma`` is the strong-convexity modulus credited to the regularizer in
    ``mu_k``; it may be smaller than the regularizer's true modulus but never
    larger. ``beta`` is the modulus of the prox-function (1 for the Euclidean
    ``0.5 * ||x||^2``).

    Custom schedules carry explicit tables; ``a`` defaults to all ones.
    Indices past the end of a custom table raise ``ConfigurationError``.
    """

    kind: ScheduleKind = ScheduleKind.COR1
    sigma: float = 0.0
    beta: float = 1.0
    gamma_const: float = DEFAULT_GAMMA_CONST
    custom_a: tuple | None = None
    custom_gamma: tuple | None = None
    _A_table: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind.parse(self.kind))
        if not self.sigma >= 0:
            raise ConfigurationError(f"sigma must be >= 0, got {self.sigma!r}")
        if not self.beta > 0:
            raise ConfigurationError(f"beta must be > 0, got {self.beta!r}")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "gamma_const", float(self.gamma_const))
        if self.kind is ScheduleKind.QUADRATIC and not self.gamma_const > 0:
            raise ConfigurationError(f"gamma_const must be > 0, got {self.gamma_const!r}")
        if self.kind is ScheduleKind.CUSTOM:
            if self.custom_gamma is None:
                raise ConfigurationError("custom schedule needs a gamma table")
            gamma = np.asarray(self.custom_gamma, dtype=float)
            a = None if self.custom_a is None else np.asarray(self.custom_a, dtype=float)
            _validate_tables(a, gamma)
            if a is None:
                a = np.ones_like(gamma)
            object.__setattr__(self, "custom_gamma", tuple(gamma.tolist()))
            object.__setattr__(self, "custom_a", tuple(a.tolist()))
            object.__setattr__(self, "_A_table", np.cumsum(a))
        elif self.custom_a is not None or self.custom_gamma is not None:
            raise ConfigurationError("tables are only accepted for the custom schedule kind")

    @property
    def horizon(self) -> int | None:
        """Largest usable index for custom schedules, ``None`` if unbounded."""
        if self.kind is ScheduleKind.CUSTOM:
            return min(len(self.custom_a), len(self.custom_gamma)) - 1
        return None

    def _table_index(self, k):
        _check_index(k)
        if k > self.horizon:
            raise ConfigurationError(f"custom schedule defined up to k={self.horizon}, requested k={k}")

    def weight(self, k: int) -> float:
        if self.kind is ScheduleKind.CUSTOM:
            self._table_index(k)
            return self.custom_a[k]
        return schedule_weights(self.kind, k)[0]

    def total(self, k: int) -> float:
        if self.kind is ScheduleKind.CUSTOM:
            self._table_index(k)
            return float(self._A_table[k])
        return schedule_weights(self.kind, k)[1]

    def gamma(self, k: int) -> float:
        if self.kind is ScheduleKind.CUSTOM:
            self._table_index(k)
            return self.custom_gamma[k]
        return schedule_gamma(self.kind, k, self.gamma_const)

    def mu(self, k: int) -> float:
        return modulus_mu(self.total(k), self.gamma(k), self.sigma, self.beta)

    def params(self, k: int) -> tuple[float, float, float]:
        """``(a_k, A_k, gamma_k)`` in one call; the solver's hot path."""
        kind = self.kind
        if kind is ScheduleKind.COR1:
            return 1.0, float(k + 1), math.sqrt(k + 1)
        if kind is ScheduleKind.COR2:
            return 1.0, float(k + 1), math.log(2 * k + 3)
        if kind is ScheduleKind.QUADRATIC:
            return float(k), float(k * (k + 1) // 2), self.gamma_const
        return self.weight(k), self.total(k), self.gamma(k)

    @classmethod
    def from_tables(cls, gamma: Sequence[float], a: Sequence[float] | None = None, **kwargs) -> "Schedule":
        return cls(kind=ScheduleKind.CUSTOM, custom_gamma=tuple(gamma), custom_a=None if a is None else tuple(a), **kwargs)

    @classmethod
    def from_file(cls, path, **kwargs) -> "Schedule":
        """Load a custom schedule.

        JSON files hold ``{"gamma": [...], "a": [...]}`` (``a`` optional);
        any other file is read as whitespace-separated gamma values.
        """
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read custom schedule {path}: {exc}") from exc
        if path.suffix.lower() == ".json":
            try:
                payload = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"{path}: invalid JSON: {exc}") from exc
            if "gamma" not in payload:
                raise ConfigurationError(f"{path}: missing 'gamma' table")
            return cls.from_tables(payload["gamma"], payload.get("a"), **kwargs)
        try:
            gamma = [float(tok) for tok in text.split()]
        except ValueError as exc:
            raise ConfigurationError(f"{path}: {exc}") from exc
        return cls.from_tables(gamma, **kwargs)
