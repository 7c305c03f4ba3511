"""Objective checks: hand values, finite differences, shape of the
tail emphasis, and the mirror identity."""

import numpy as np
import pytest

from seasurrogate.errors import ValidationError
from seasurrogate.losses import (
    LossConfig,
    awmse_loss,
    loss_and_grad,
    mse_loss,
    re_loss,
)


def fd_grad(fn, y_pred, h=1e-6):
    g = np.empty_like(y_pred)
    flat = y_pred.ravel()
    for i in range(flat.size):
        up, dn = y_pred.copy(), y_pred.copy()
        up.ravel()[i] += h
        dn.ravel()[i] -= h
        g.ravel()[i] = (fn(up) - fn(dn)) / (2 * h)
    return g


def test_mse_hand_value():
    # errors 1 and 2 -> mean(1, 4) = 2.5; grad = 2/2 * err = err.
    v, g = mse_loss(np.array([1.0, 2.0]), np.array([2.0, 4.0]))
    assert v == 2.5
    np.testing.assert_array_equal(g, [1.0, 2.0])


def test_mse_gradient_matches_fd():
    rng = np.random.default_rng(0)
    y = rng.normal(size=(20,))
    p = rng.normal(size=(20,))
    _, g = mse_loss(y, p)
    np.testing.assert_allclose(g, fd_grad(lambda q: mse_loss(y, q)[0], p), atol=1e-9)


def test_awmse_beta_zero_is_exactly_mse():
    rng = np.random.default_rng(1)
    y = rng.normal(size=50)
    p = rng.normal(size=50)
    v0, g0 = awmse_loss(y, p, beta=0.0)
    v1, g1 = mse_loss(y, p)
    assert v0 == v1
    np.testing.assert_array_equal(g0, g1)


def test_awmse_hand_value_and_fd():
    # y = 2, scale = 1, beta = 1 -> w = 5; err = -1 -> value 5, grad -10.
    v, g = awmse_loss(np.array([2.0]), np.array([1.0]), beta=1.0)
    assert v == pytest.approx(5.0)
    assert g[0] == pytest.approx(-10.0)
    rng = np.random.default_rng(2)
    y = rng.normal(size=30)
    p = rng.normal(size=30)
    _, g = awmse_loss(y, p, beta=1.7, scale=0.8)
    np.testing.assert_allclose(
        g, fd_grad(lambda q: awmse_loss(y, q, beta=1.7, scale=0.8)[0], p), atol=1e-8
    )


def test_awmse_weights_use_true_values_only():
    # Weighting by predictions would change the value here; weighting by
    # the truth keeps the two cases identical.
    y = np.array([1.0, 1.0])
    pa = np.array([0.5, 0.5])
    va, _ = awmse_loss(y, pa, beta=2.0)
    vb, _ = awmse_loss(y, np.array([1.5, 1.5]), beta=2.0)
    assert va == pytest.approx(vb)  # same |err|, same true weights


def test_re_gradient_matches_fd():
    rng = np.random.default_rng(3)
    y = rng.normal(size=40)
    p = y + 0.3 * rng.normal(size=40)
    _, g = re_loss(y, p, lam=0.1)
    np.testing.assert_allclose(g, fd_grad(lambda q: re_loss(y, q, lam=0.1)[0], p), atol=1e-8)


def test_re_stationary_and_minimal_at_truth():
    rng = np.random.default_rng(4)
    y = rng.normal(size=25)
    v0, g0 = re_loss(y, y.copy(), lam=0.1)
    np.testing.assert_allclose(g0, 0.0, atol=1e-15)
    for delta in (-0.2, -0.01, 0.01, 0.2):
        v, _ = re_loss(y, y + delta, lam=0.1)
        assert v > v0


def test_re_mirror_identity():
    rng = np.random.default_rng(5)
    y = rng.normal(size=30)
    p = rng.normal(size=30)
    lam = 0.37
    v, g = re_loss(y, p, lam=lam)
    v_up, g_up = re_loss(y, p, lam=0.0)
    v_dn, g_dn = re_loss(-y, -p, lam=0.0)
    assert v == pytest.approx(v_up + lam * v_dn, rel=1e-12)
    np.testing.assert_allclose(g, g_up - lam * g_dn, rtol=1e-12)


def test_re_pulls_harder_on_upper_tail():
    # Same absolute error, larger target: the gradient magnitude grows
    # roughly like exp(f), which is the point of the objective.
    _, g_mid = re_loss(np.array([0.0]), np.array([-0.5]), lam=0.1)
    _, g_tail = re_loss(np.array([3.0]), np.array([2.5]), lam=0.1)
    assert abs(g_tail[0]) > 5.0 * abs(g_mid[0])


def test_re_warns_on_extreme_inputs():
    with pytest.warns(RuntimeWarning, match="exponential"):
        re_loss(np.array([12.0]), np.array([11.5]), lam=0.1)


def test_re_scale_divides_arguments():
    rng = np.random.default_rng(7)
    y = 4.0 * rng.normal(size=30)
    p = y + rng.normal(size=30)
    s = 4.0
    v, g = re_loss(y, p, lam=0.2, scale=s)
    v_ref, g_ref = re_loss(y / s, p / s, lam=0.2)
    assert v == pytest.approx(v_ref, rel=1e-12)
    np.testing.assert_allclose(g, g_ref / s, rtol=1e-12)
    # still stationary at the truth, and the softened tilt avoids the warning
    _, g0 = re_loss(y, y.copy(), lam=0.2, scale=s)
    np.testing.assert_allclose(g0, 0.0, atol=1e-15)
    np.testing.assert_allclose(
        g, fd_grad(lambda q: re_loss(y, q, lam=0.2, scale=s)[0], p), atol=1e-8
    )
    with pytest.raises(ValidationError):
        re_loss(y, p, scale=0.0)


def test_channel_combination_weights_and_grads():
    rng = np.random.default_rng(6)
    y = rng.normal(size=(16, 3))
    p = rng.normal(size=(16, 3))
    cfg = LossConfig(kind="mse", channel_weights=(1.0, 0.0, 3.0))
    v, g = loss_and_grad(cfg, y, p)
    v0, g0 = mse_loss(y[:, 0], p[:, 0])
    v2, g2 = mse_loss(y[:, 2], p[:, 2])
    assert v == pytest.approx(0.25 * v0 + 0.75 * v2)
    np.testing.assert_array_equal(g[:, 1], 0.0)
    np.testing.assert_allclose(g[:, 0], 0.25 * g0)
    np.testing.assert_allclose(g[:, 2], 0.75 * g2)


def test_equal_weight_mse_combination_equals_flat_mse():
    rng = np.random.default_rng(7)
    y = rng.normal(size=(10, 3))
    p = rng.normal(size=(10, 3))
    v, g = loss_and_grad(LossConfig(kind="mse"), y, p)
    v_flat, g_flat = mse_loss(y, p)
    assert v == pytest.approx(v_flat, rel=1e-12)
    np.testing.assert_allclose(g, g_flat, rtol=1e-12)


def test_combined_fd_for_each_kind():
    rng = np.random.default_rng(8)
    y = rng.normal(size=(12, 3))
    p = rng.normal(size=(12, 3))
    for cfg in (
        LossConfig(kind="mse"),
        LossConfig(kind="awmse", beta=1.0),
        LossConfig(kind="re", lam=0.1),
        LossConfig(kind="re", lam=0.0),
        LossConfig(kind="awmse", beta=1.0, channel_weights=(2.0, 1.0, 1.0)),
    ):
        _, g = loss_and_grad(cfg, y, p)
        num = fd_grad(lambda q: loss_and_grad(cfg, y, q)[0], p)
        np.testing.assert_allclose(g, num, atol=1e-8, err_msg=cfg.describe())


def test_config_validation():
    with pytest.raises(ValidationError):
        LossConfig(kind="huber")
    with pytest.raises(ValidationError):
        LossConfig(kind="re", lam=-0.1)
    with pytest.raises(ValidationError):
        LossConfig(channel_weights=(0.0, 0.0, 0.0))
    with pytest.raises(ValidationError):
        loss_and_grad(LossConfig(), np.zeros((4, 2)), np.zeros((4, 2)))  # weight count
    with pytest.raises(ValidationError):
        mse_loss(np.zeros(3), np.zeros(4))
