import pytest

from litscreen.calibrate import run_repeated_experiments
from litscreen.corpus import generate_synthetic_corpus


@pytest.fixture(scope="session")
def small_corpus():
    return generate_synthetic_corpus(400, 0.3, seed=7)


@pytest.fixture(scope="session")
def small_experiment(small_corpus):
    """One cheap end-to-end run shared by everything that needs a bundle."""
    report, bundle = run_repeated_experiments(
        small_corpus, targets=(0.91, 0.99), runs=2, base_seed=7
    )
    return report, bundle


@pytest.fixture(scope="session")
def small_bundle(small_experiment):
    return small_experiment[1]
