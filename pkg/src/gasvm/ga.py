"""Real-coded genetic algorithm: rank selection, blend crossover, redraw mutation.

Chromosomes are plain 1-D float arrays.  All randomness flows through one
seeded generator owned by `evolve`, and fitness evaluation never touches
it, so results are bit-identical for a fixed seed even when evaluations
run concurrently (the supplied map function must preserve input order, as
`map` and executor maps do).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GeneBounds:
    """Per-gene closed intervals [low_i, high_i]."""

    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        low = np.asarray(self.low, dtype=float)
        high = np.asarray(self.high, dtype=float)
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)
        if low.shape != high.shape or low.ndim != 1:
            raise ValueError("low/high must be 1-D arrays of equal length")
        if not np.all(low < high):
            raise ValueError("every gene needs low < high")

    @property
    def n_genes(self) -> int:
        return len(self.low)

    def contains(self, genes: np.ndarray) -> bool:
        return bool(np.all(genes >= self.low) and np.all(genes <= self.high))


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    max_generations: int = 100
    elitism_count: int = 10
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    stagnation_limit: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.elitism_count < self.population_size:
            raise ValueError("need 0 < elitism_count < population_size")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.stagnation_limit < 1:
            raise ValueError("stagnation_limit must be at least 1")
        if self.max_generations < 1:
            raise ValueError("max_generations must be at least 1")


@dataclass(frozen=True)
class GaResult:
    best_chromosome: np.ndarray
    best_fitness: float
    generations_run: int
    history: np.ndarray  # shape (generations_run, 2): best and mean per generation


def initialize_population(cfg: GaConfig, bounds: GeneBounds,
                          rng: np.random.Generator | None = None) -> np.ndarray:
    """population_size chromosomes, each gene uniform within its bounds."""
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    return rng.uniform(bounds.low, bounds.high,
                       size=(cfg.population_size, bounds.n_genes))


def select_parents(fitnesses: np.ndarray, n_pairs: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Linear-rank parent sampling with replacement; returns (n_pairs, 2) indices.

    Rank 1 is the worst individual; selection probability is proportional
    to rank.  Rank ties are broken randomly.
    """
    fitnesses = np.asarray(fitnesses, dtype=float)
    n = len(fitnesses)
    if n < 2:
        raise ValueError("need at least 2 individuals to select parents")
    shuffle = rng.permutation(n)
    order = shuffle[np.argsort(fitnesses[shuffle], kind="stable")]
    ranks = np.empty(n)
    ranks[order] = np.arange(1, n + 1)
    probs = ranks / ranks.sum()
    return rng.choice(n, size=(n_pairs, 2), replace=True, p=probs)


def crossover(p1: np.ndarray, p2: np.ndarray, crossover_rate: float,
              rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Whole-arithmetic blend with a fresh weight per pair, gated by the rate."""
    if rng.random() >= crossover_rate:
        return p1.copy(), p2.copy()
    a = rng.random()
    return a * p1 + (1.0 - a) * p2, (1.0 - a) * p1 + a * p2


def mutate(chromosome: np.ndarray, rate: float, bounds: GeneBounds,
           rng: np.random.Generator) -> np.ndarray:
    """Each gene is independently redrawn uniform within its bounds with probability rate."""
    out = chromosome.copy()
    mask = rng.random(len(out)) < rate
    redraw = rng.uniform(bounds.low, bounds.high)
    out[mask] = redraw[mask]
    return out


def evolve(cfg: GaConfig, bounds: GeneBounds, fitness_fn, *, map_fn=map) -> GaResult:
    """Run the generational GA until stagnation or the generation cap.

    fitness_fn maps a chromosome to a finite float; map_fn lets callers
    evaluate a generation's new chromosomes concurrently and must yield
    results in input order.  Elites carry their cached fitness forward, so
    the per-generation best never decreases.
    """
    rng = np.random.default_rng(cfg.seed)
    population = initialize_population(cfg, bounds, rng)
    fitnesses = _evaluate(population, fitness_fn, map_fn)

    history = []
    best_idx = int(np.argmax(fitnesses))
    best_fitness = float(fitnesses[best_idx])
    best_chromosome = population[best_idx].copy()
    history.append((best_fitness, float(fitnesses.mean())))

    generations = 1
    stagnant = 0
    while generations < cfg.max_generations and stagnant < cfg.stagnation_limit:
        elite_order = np.argsort(-fitnesses, kind="stable")[: cfg.elitism_count]
        n_children = cfg.population_size - cfg.elitism_count
        pairs = select_parents(fitnesses, math.ceil(n_children / 2), rng)
        children = []
        for i1, i2 in pairs:
            c1, c2 = crossover(population[i1], population[i2], cfg.crossover_rate, rng)
            children.append(mutate(c1, cfg.mutation_rate, bounds, rng))
            children.append(mutate(c2, cfg.mutation_rate, bounds, rng))
        children = np.array(children[:n_children])
        child_fitnesses = _evaluate(children, fitness_fn, map_fn)

        population = np.vstack([population[elite_order], children])
        fitnesses = np.concatenate([fitnesses[elite_order], child_fitnesses])
        generations += 1

        gen_best = int(np.argmax(fitnesses))
        if fitnesses[gen_best] > best_fitness:
            best_fitness = float(fitnesses[gen_best])
            best_chromosome = population[gen_best].copy()
            stagnant = 0
        else:
            stagnant += 1
        history.append((float(fitnesses[gen_best]), float(fitnesses.mean())))

    return GaResult(
        best_chromosome=best_chromosome,
        best_fitness=best_fitness,
        generations_run=generations,
        history=np.array(history),
    )


def _evaluate(chromosomes: np.ndarray, fitness_fn, map_fn) -> np.ndarray:
    values = np.array(list(map_fn(fitness_fn, chromosomes)), dtype=float)
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise RuntimeError(
            f"fitness function returned a non-finite value for chromosome {bad}"
        )
    return values
