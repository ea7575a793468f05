from pathlib import Path

import numpy as np
import pytest

from emofuse.core import LabeledSet, ScoreMatrix, align_bank

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


def one_hot(labels, n=7):
    m = np.zeros((len(labels), n))
    m[np.arange(len(labels)), labels] = 1.0
    return m


def make_bank(matrices, gold_labels, ids=None):
    """Bank from ``{model_id: (M, 7) array}`` plus gold labels."""
    ids = ids or [f"s{i}" for i in range(len(gold_labels))]
    gold = LabeledSet(ids, gold_labels)
    models = [ScoreMatrix(mid, ids, m) for mid, m in matrices.items()]
    return align_bank(models, gold), gold


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
