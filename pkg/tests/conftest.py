import os

import numpy as np
import pytest

from gasvm import dataset, synthetic

# The official survey file is not redistributable; tests that reproduce the
# published numbers look for it here (or via GASVM_DATA) and skip otherwise.
REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT_DATA_PATH = os.path.join(REPO_ROOT, "data", "drug_consumption.data")


def official_data_path() -> str | None:
    path = os.environ.get("GASVM_DATA", DEFAULT_DATA_PATH)
    return path if os.path.exists(path) else None


def require_official_data() -> str:
    path = official_data_path()
    if path is None:
        pytest.skip(
            "official UCI drug_consumption.data not available (sandbox has no "
            "network beyond package mirrors); place the file at data/ or set "
            "GASVM_DATA to run this criterion"
        )
    return path


@pytest.fixture(scope="session")
def survey_records():
    """Full-size surrogate survey with the published per-drug user counts."""
    return synthetic.synthetic_records(seed=1234, n=1885)


@pytest.fixture(scope="session")
def heroin_dataset(survey_records):
    return dataset.build_matrix(survey_records, "Heroin")


@pytest.fixture(scope="session")
def small_dataset(survey_records):
    """Stratified 300-row subsample for fast end-to-end runs."""
    ds = dataset.build_matrix(survey_records, "Heroin")
    rng = np.random.default_rng(99)
    pos = np.flatnonzero(ds.y == 1)
    neg = np.flatnonzero(ds.y == 0)
    keep = np.sort(np.concatenate([
        rng.choice(pos, size=60, replace=False),
        rng.choice(neg, size=240, replace=False),
    ]))
    return dataset.Dataset(
        feature_names=ds.feature_names,
        X=ds.X[keep],
        y=ds.y[keep],
        target_name=ds.target_name,
    )
