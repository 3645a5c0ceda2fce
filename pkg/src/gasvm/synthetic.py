"""Deterministic, format-compatible surrogate survey data.

The official survey file is not redistributable with this package, so this
module fabricates a stand-in with the same wire format.  Per-drug user
counts match the published distribution table exactly by construction
(each drug's users are the top-scoring respondents under a latent
involvement factor), and the latent factor couples heroin strongly to
crack, methadone, cocaine and benzodiazepines, so that planted-signal
recovery can be tested end to end.  Row contents are otherwise invented;
nothing here reproduces a real respondent.
"""

from __future__ import annotations

import numpy as np

from .dataset import (
    DRUG_FILE_ORDER,
    PSYCHOSOCIAL_FILE_ORDER,
    REPORTED_USER_COUNTS,
    Record,
)

N_RESPONDENTS = 1885

# Loading of each drug's propensity on the shared involvement factor.  The
# heroin pleiad carries the strongest loadings; ubiquitous legal drugs are
# nearly independent of it.
_DRUG_LOADING = {
    "Alcohol": 0.05, "Amphetamines": 0.62, "AmylNitrite": 0.45,
    "Benzodiazepines": 0.70, "Caffeine": 0.02, "Cannabis": 0.50,
    "Chocolate": 0.01, "Cocaine": 0.80, "Crack": 0.88, "Ecstasy": 0.58,
    "Heroin": 0.92, "Ketamine": 0.55, "LegalHighs": 0.57, "LSD": 0.52,
    "Methadone": 0.83, "Mushrooms": 0.54, "Nicotine": 0.35,
    "Semer": 0.10, "VSA": 0.48,
}
_SEMER_USERS = 9  # fictitious-drug over-claimers; not part of the published table

# Psycho-social columns: (loading on the involvement factor, level grid or
# None for a continuous standardized score, level probabilities).
_LEVELS_6 = np.array([-0.95, -0.08, 0.50, 1.09, 1.82, 2.59])
_PSYCHO_SPEC = {
    "Age": (-0.25, _LEVELS_6, [0.35, 0.25, 0.17, 0.12, 0.07, 0.04]),
    "Gender": (-0.20, np.array([-0.48246, 0.48246]), [943 / 1885, 942 / 1885]),
    "Education": (-0.15, _LEVELS_6, [0.10, 0.15, 0.25, 0.25, 0.15, 0.10]),
    "Country": (0.0, np.array([-0.57, -0.28, 0.21, 0.56, 0.96]),
                [0.295, 0.06, 0.05, 0.041, 0.554]),
    "Ethnicity": (0.0, np.array([-1.10, -0.50, -0.22, 0.13, 0.63]),
                  [0.03, 0.025, 0.02, 0.015, 0.91]),
    "Neuroticism": (0.30, None, None),
    "Extraversion": (-0.05, None, None),
    "Openness": (0.25, None, None),
    "Agreeableness": (-0.15, None, None),
    "Conscientiousness": (-0.25, None, None),
    "Impulsivity": (0.40, np.round(np.linspace(-2.55, 2.90, 10), 2), None),
    "SensationSeeking": (0.45, np.round(np.linspace(-2.07, 2.78, 11), 2), None),
}


def _mix(loading: float, latent: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    noise = rng.normal(size=latent.shape)
    return loading * latent + np.sqrt(1.0 - loading * loading) * noise


def _discretize(score: np.ndarray, grid: np.ndarray, probs) -> np.ndarray:
    """Map a continuous score onto grid levels with the given band sizes."""
    n = len(score)
    if probs is None:
        probs = np.full(len(grid), 1.0 / len(grid))
    counts = np.floor(np.cumsum(probs) * n + 0.5).astype(int)
    order = np.argsort(score)
    out = np.empty(n)
    start = 0
    for level, stop in zip(grid, counts):
        out[order[start:stop]] = level
        start = stop
    out[order[start:]] = grid[-1]
    return out


def synthetic_records(seed: int = 1234, n: int = N_RESPONDENTS) -> list[Record]:
    """Generate n surrogate records; identical output for identical seeds."""
    rng = np.random.default_rng(seed)
    latent = rng.normal(size=n)

    psycho = np.empty((n, len(PSYCHOSOCIAL_FILE_ORDER)))
    for col, name in enumerate(PSYCHOSOCIAL_FILE_ORDER):
        loading, grid, probs = _PSYCHO_SPEC[name]
        score = _mix(loading, latent, rng)
        if grid is None:
            psycho[:, col] = np.round(score, 5)
        else:
            psycho[:, col] = _discretize(score, grid, probs)

    levels = np.zeros((n, len(DRUG_FILE_ORDER)), dtype=np.int64)
    scale = n / N_RESPONDENTS
    for col, drug in enumerate(DRUG_FILE_ORDER):
        if drug == "Semer":
            n_users = max(1, round(_SEMER_USERS * scale))
        else:
            n_users = max(1, round(REPORTED_USER_COUNTS[drug][0] * scale))
        score = _mix(_DRUG_LOADING[drug], latent, rng)
        users = np.argsort(score)[-n_users:]
        user_mask = np.zeros(n, dtype=bool)
        user_mask[users] = True
        user_levels = rng.choice([2, 3, 4, 5, 6], size=n, p=[0.25, 0.2, 0.2, 0.2, 0.15])
        non_levels = rng.choice([0, 1], size=n, p=[0.8, 0.2])
        levels[:, col] = np.where(user_mask, user_levels, non_levels)

    return [Record(i + 1, psycho[i].copy(), levels[i].copy()) for i in range(n)]


def write_survey_file(records: list[Record], path) -> None:
    """Write records in the raw comma-separated 32-column file format."""
    with open(path, "w") as fh:
        for r in records:
            cells = [str(r.id)]
            cells += [f"{v:.5f}" for v in r.psychosocial]
            cells += [f"CL{int(v)}" for v in r.drugs]
            fh.write(",".join(cells) + "\n")
