import math

import numpy as np
import pytest

from emofuse.aggregation import KINDS
from emofuse.errors import EmptyDataset
from emofuse.synth import SequenceSpec, gen_sequences
from emofuse.training import init_params, train_toy

# pinned toy task and budget; the baseline run reaches 0.95 at epoch 2, 1.0 at epoch 5
TOY = SequenceSpec(n_per_class=40, min_len=4, max_len=12, dim=8, delta=4.0, seed=2018)
EPOCHS = 10
LR = 0.01


@pytest.fixture(scope="module")
def toy():
    return gen_sequences(TOY)


def test_init_from_first_descriptors(toy):
    p = init_params(toy.sequences, 4)
    np.testing.assert_array_equal(p.anchors, toy.sequences[0][:4])
    np.testing.assert_allclose(p.assign_weights, 2 * p.anchors)
    np.testing.assert_allclose(p.assign_bias, -(p.anchors**2).sum(axis=1))


def test_zero_lr(toy):
    res = train_toy("netvlad", toy.sequences, toy.labels, epochs=3, lr=0.0)
    losses = [h["loss"] for h in res.history]
    assert losses == [losses[0]] * 4
    np.testing.assert_array_equal(res.params.anchors, init_params(toy.sequences, 4).anchors)


def test_initial_loss(toy):
    res = train_toy("netvlad", toy.sequences, toy.labels, epochs=0)
    assert abs(res.history[0]["loss"] - math.log(7)) <= 0.1


def test_trains(toy):
    res = train_toy("netvlad", toy.sequences, toy.labels, epochs=EPOCHS, lr=LR, seed=0)
    assert res.final_accuracy >= 0.95


@pytest.mark.parametrize("lr", [0.001, 0.005, LR])
def test_loss_non_increasing(toy, lr):
    res = train_toy("netvlad", toy.sequences, toy.labels, epochs=EPOCHS, lr=lr, seed=0)
    losses = [h["loss"] for h in res.history]
    assert all(b <= a for a, b in zip(losses, losses[1:]))


def test_bit_identical(toy):
    a = train_toy("netvlad", toy.sequences, toy.labels, epochs=3, lr=LR, seed=4, batch_size=7)
    b = train_toy("netvlad", toy.sequences, toy.labels, epochs=3, lr=LR, seed=4, batch_size=7)
    assert a.history == b.history
    np.testing.assert_array_equal(a.params.anchors, b.params.anchors)


@pytest.mark.parametrize("kind", KINDS)
def test_all_kinds_learn(toy, kind):
    res = train_toy(kind, toy.sequences, toy.labels, epochs=EPOCHS, lr=LR, seed=0)
    assert res.history[-1]["loss"] < res.history[0]["loss"]


def test_empty():
    with pytest.raises(EmptyDataset):
        train_toy("netvlad", [], [])
