"""
Accuracy estimation for pruned models, and rank correlation.

Two estimators share one interface: an analytic sensitivity proxy shaped by
per-dimension exponents, and a table of measured accuracies ingested from
CSV. The optimizer only ever calls `estimate(cfg)`.
"""

import logging
import math
from typing import Dict, List, Literal, Optional, Protocol, Sequence, Tuple

import numpy as np
import pandas as pd

from core.errors import ConfigError, ProxyLookupError, RankCorrelationError
from estimator.models.proxy_models import MissPolicy, ProxySettings, SensitivityProfile
from estimator.models.workload_models import PRUNE_DIMENSIONS, ModelConfig

logger = logging.getLogger(__name__)


def analytic_proxy(cfg: ModelConfig, prof: SensitivityProfile,
                   base: Optional[ModelConfig] = None) -> float:
    """
    acc0 x sum_e w_e x prod_d (dim_d / base_d) ** alpha_d, clamped to [0, 1].

    base defaults to cfg itself, which yields acc0.
    """
    base = base or cfg
    weights = prof.weights_for(cfg.encoder_names)
    score = 0.0
    for enc_name in cfg.encoder_names:
        dims = cfg.encoders[enc_name].dims()
        base_dims = base.encoders[enc_name].dims()
        alphas = prof.exponents_for(enc_name)
        factor = 1.0
        for dim in PRUNE_DIMENSIONS:
            ratio = dims[dim] / base_dims[dim]
            factor *= ratio ** getattr(alphas, dim)
        score += weights[enc_name] * factor
    return min(1.0, max(0.0, prof.acc0 * score))


def _dimension_key(fingerprint: str) -> Tuple[int, ...]:
    values: List[int] = []
    for part in fingerprint.split("|"):
        _, dims = part.split(":")
        values.extend(int(v) for v in dims.split("-"))
    return tuple(values)


class AccuracyTable:
    """Measured accuracies keyed by model fingerprint, loaded from CSV"""

    def __init__(self, df: pd.DataFrame, policy: MissPolicy = "strict"):
        self.policy = policy
        self.encoders = sorted({
            c.rsplit("_", 1)[0] for c in df.columns
            if "_" in c and c.rsplit("_", 1)[1] in PRUNE_DIMENSIONS
        })
        self.columns = [f"{enc}_{dim}" for enc in self.encoders for dim in PRUNE_DIMENSIONS]

        missing = [c for c in self.columns + ["accuracy"] if c not in df.columns]
        if missing:
            raise ConfigError(f"Accuracy table is missing columns: {', '.join(missing)}")
        if ((df["accuracy"] < 0) | (df["accuracy"] > 1)).any():
            raise ConfigError("Accuracy table values must lie in [0, 1]")

        self.df = df[self.columns + ["accuracy"]].copy()
        self.df[self.columns] = self.df[self.columns].astype(int)
        self.df["fingerprint"] = [self._row_fingerprint(row) for _, row in self.df.iterrows()]

        dupes = self.df["fingerprint"][self.df["fingerprint"].duplicated()].tolist()
        if dupes:
            raise ConfigError(f"Duplicate fingerprints in accuracy table: {', '.join(dupes)}")
        self._lookup: Dict[str, float] = dict(zip(self.df["fingerprint"], self.df["accuracy"]))
        logger.info(f"Loaded {len(self.df)} accuracy rows for encoders {self.encoders}")

    @classmethod
    def from_csv(cls, path: str, policy: MissPolicy = "strict") -> "AccuracyTable":
        try:
            df = pd.read_csv(path)
        except (OSError, pd.errors.ParserError) as e:
            raise ConfigError(f"Cannot read accuracy table {path}: {str(e)}") from e
        df.columns = df.columns.str.strip()
        return cls(df, policy)

    def _row_fingerprint(self, row) -> str:
        parts = []
        for enc in self.encoders:
            parts.append(f"{enc}:" + "-".join(str(int(row[f"{enc}_{d}"])) for d in PRUNE_DIMENSIONS))
        return "|".join(parts)

    def __len__(self) -> int:
        return len(self.df)

    def lookup(self, cfg: ModelConfig) -> float:
        fingerprint = cfg.fingerprint
        if fingerprint in self._lookup:
            return float(self._lookup[fingerprint])
        if self.policy == "strict":
            raise ProxyLookupError(fingerprint)
        return self._nearest(cfg)

    def _nearest(self, cfg: ModelConfig) -> float:
        if set(cfg.encoder_names) != set(self.encoders):
            raise ProxyLookupError(cfg.fingerprint)
        target = np.array(
            [cfg.encoders[enc].dims()[dim] for enc in self.encoders for dim in PRUNE_DIMENSIONS],
            dtype=float,
        )
        values = self.df[self.columns].to_numpy(dtype=float)
        scale = np.maximum(values.max(axis=0), target)
        distances = (((values - target) / scale) ** 2).sum(axis=1)

        best = distances.min()
        tied = [i for i in np.flatnonzero(np.isclose(distances, best, rtol=0, atol=1e-12))]
        winner = min(tied, key=lambda i: _dimension_key(self.df["fingerprint"].iat[i]))
        logger.debug(
            f"Accuracy table miss for {cfg.fingerprint}, using nearest {self.df['fingerprint'].iat[winner]}"
        )
        return float(self.df["accuracy"].iat[winner])


def table_proxy(cfg: ModelConfig, table: AccuracyTable) -> float:
    return table.lookup(cfg)


class AccuracyEstimator(Protocol):
    def estimate(self, cfg: ModelConfig) -> float:
        ...


class AnalyticProxy:
    """Analytic proxy relative to a fixed base model"""

    def __init__(self, profile: SensitivityProfile, base: ModelConfig):
        self.profile = profile
        self.base = base

    def estimate(self, cfg: ModelConfig) -> float:
        return analytic_proxy(cfg, self.profile, self.base)


class TableProxy:
    def __init__(self, table: AccuracyTable):
        self.table = table

    def estimate(self, cfg: ModelConfig) -> float:
        return table_proxy(cfg, self.table)


def build_estimator(proxy: ProxySettings, base: ModelConfig) -> AccuracyEstimator:
    if proxy.kind == "table":
        if not proxy.table_path:
            raise ConfigError("proxy.kind 'table' needs proxy.table_path")
        return TableProxy(AccuracyTable.from_csv(proxy.table_path, proxy.policy))
    return AnalyticProxy(proxy.profile, base)


def spearman(xs: Sequence[float], ys: Sequence[float],
             ties: Literal["average", "first"] = "average") -> float:
    """
    Rank correlation of two score lists.

    ties="average" gives tied values their mean rank; ties="first" ranks
    them by position, as a hand ranking without tie handling would.

    Raises:
        RankCorrelationError: lengths differ, fewer than two values, or a constant vector.
    """
    if len(xs) != len(ys):
        raise RankCorrelationError(f"Length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise RankCorrelationError("Need at least two values")

    rx = pd.Series(list(xs), dtype=float).rank(method=ties).to_numpy()
    ry = pd.Series(list(ys), dtype=float).rank(method=ties).to_numpy()
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = math.sqrt(float((dx * dx).sum()) * float((dy * dy).sum()))
    if denom == 0:
        raise RankCorrelationError("Rank correlation is undefined for a constant vector")
    rho = float((dx * dy).sum()) / denom
    return max(-1.0, min(1.0, rho))


__all__ = [
    "analytic_proxy",
    "AccuracyTable",
    "table_proxy",
    "AccuracyEstimator",
    "AnalyticProxy",
    "TableProxy",
    "build_estimator",
    "spearman",
]
