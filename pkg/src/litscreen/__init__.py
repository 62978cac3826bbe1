"""Recall-calibrated screening of medical-literature titles and abstracts.

The package stages a screening pipeline (normalize -> envelope checks ->
two scorers -> rule cascade -> sentence explanations), tunes the scorer
thresholds by grid search to minimize false-positive rate at a target
recall, and exposes a human triage service with an append-only audit log
and a generated public factsheet.
"""

__version__ = "0.1.0"
