"""Relative impact: how often each input variable is referenced by evolved models.

Reference counts are summed over every population of a run, from the initial
one to the last, and normalized once at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .dataset import FEATURE_SYMBOLS
from .expr import ExpressionTree, var_ref_vector


def _trees(population) -> list[ExpressionTree]:
    return [m if isinstance(m, ExpressionTree) else m.tree for m in population]


def population_freq(population, n_features: int = len(FEATURE_SYMBOLS)) -> np.ndarray:
    """Summed variable reference counts over the models of one population."""
    trees = _trees(population)
    if not trees:
        raise ValueError("population is empty")
    total = np.zeros(n_features, dtype=np.int64)
    for t in trees:
        total += var_ref_vector(t, n_features)
    return total


@dataclass
class ImpactAccumulator:
    n_features: int = len(FEATURE_SYMBOLS)
    # one row of counts per accumulated population
    per_population: list = field(default_factory=list)

    @property
    def freq(self) -> np.ndarray:
        if not self.per_population:
            return np.zeros(self.n_features, dtype=np.int64)
        return np.sum(self.per_population, axis=0)

    @property
    def populations_seen(self) -> int:
        return len(self.per_population)

    def accumulate(self, population) -> "ImpactAccumulator":
        self.per_population.append(population_freq(population, self.n_features))
        return self

    def relative(self) -> np.ndarray:
        return relative(self.freq)

    def relative_by_population(self) -> np.ndarray:
        """Cumulative relative impact after each population (for impact curves)."""
        if not self.per_population:
            return np.zeros((0, self.n_features))
        cum = np.cumsum(self.per_population, axis=0).astype(float)
        totals = cum.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(totals > 0, cum / totals, 0.0)

    def as_dict(self, names=FEATURE_SYMBOLS) -> dict[str, float]:
        return dict(zip(names, self.relative().tolist()))

    def copy(self) -> "ImpactAccumulator":
        return ImpactAccumulator(self.n_features, [row.copy() for row in self.per_population])

    @classmethod
    def merge(cls, accumulators: Iterable["ImpactAccumulator"]) -> "ImpactAccumulator":
        """Sum accumulators population-by-population (runs may differ in length)."""
        accs = list(accumulators)
        if not accs:
            raise ValueError("nothing to merge")
        n_features = accs[0].n_features
        length = max(a.populations_seen for a in accs)
        rows = [np.zeros(n_features, dtype=np.int64) for _ in range(length)]
        for a in accs:
            if a.n_features != n_features:
                raise ValueError("accumulators disagree on the number of variables")
            for g, row in enumerate(a.per_population):
                rows[g] = rows[g] + row
        return cls(n_features, rows)


def accumulate(acc: ImpactAccumulator, population) -> ImpactAccumulator:
    return acc.accumulate(population)


def relative(freq) -> np.ndarray:
    freq = np.asarray(freq, dtype=float)
    total = freq.sum()
    if total <= 0:
        raise ValueError("no variable references observed")
    return freq / total


def impact_rows(acc: ImpactAccumulator, names=FEATURE_SYMBOLS) -> list[tuple[str, int, float]]:
    """``(variable, frequency, relative_impact)`` rows for the impact CSV."""
    freq = acc.freq
    rel = relative(freq)
    return [(n, int(f), float(r)) for n, f, r in zip(names, freq, rel)]
