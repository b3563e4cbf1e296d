"""Shared fixtures plus the acceptance-criteria summary printed after the run."""

import numpy as np
import pytest

from augoverlap.data import EmbeddingSet, LabelSet, ViewSet

_ACCEPTANCE_LINES = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Register one acceptance criterion outcome for the end-of-run summary."""
    _ACCEPTANCE_LINES.append((number, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE_LINES):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"CRITERION {number}: {status} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def small_embeddings():
    values = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    return EmbeddingSet(values, normalized=True)


@pytest.fixture
def small_labels():
    return LabelSet(np.array([0, 0, 1, 1]), k=2)


@pytest.fixture
def small_views():
    # two anchors, two views each, far apart: no confusion
    values = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 0.0], [5.1, 0.0]])
    return ViewSet(values, n=2, c=2)
