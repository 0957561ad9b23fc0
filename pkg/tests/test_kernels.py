"""Backend equivalence and finite-difference checks for the loss kernels."""

import numpy as np
import pytest

from emorl.policy import kernels
from emorl.policy.toy import NUM_ACTIONS, NUM_STATES, ToyPolicy


def make_case(seed=0, m=64, kl_coef=0.05, perturb=0.15):
    """A frozen batch with ratios away from 1 and from the clip boundaries."""
    rng = np.random.default_rng(seed)
    theta0 = rng.normal(scale=0.5, size=(NUM_STATES, NUM_ACTIONS))
    policy0 = ToyPolicy(theta0)
    states = rng.integers(0, NUM_STATES, size=m).astype(np.int64)
    actions = rng.integers(0, NUM_ACTIONS, size=m).astype(np.int64)
    old_logp = np.array([policy0.log_probs(s)[a] for s, a in zip(states, actions)])
    old_all = np.vstack([policy0.log_probs(s) for s in states])
    adv = rng.normal(scale=0.4, size=m)
    adv[np.abs(adv) < 0.05] = 0.2  # keep advantages off zero
    w = np.maximum(rng.normal(scale=0.2, size=m), 0.0)
    theta = theta0 + rng.normal(scale=perturb, size=theta0.shape)
    coefs = dict(clip_eps=0.2, entropy_coef=0.02, imitation_coef=0.1, kl_coef=kl_coef)
    args = (theta, states, actions, old_logp, adv, w, old_all)
    return args, coefs


def ratios_clear_of_kinks(args, coefs, margin=1e-3):
    theta, states, actions, old_logp = args[0], args[1], args[2], args[3]
    policy = ToyPolicy(theta)
    logp = np.array([policy.log_probs(s)[a] for s, a in zip(states, actions)])
    ratio = np.exp(logp - old_logp)
    eps = coefs["clip_eps"]
    return np.all(np.abs(ratio - (1 + eps)) > margin) and np.all(
        np.abs(ratio - (1 - eps)) > margin
    )


@pytest.mark.skipif(kernels.loss_and_grad_numba is None, reason="numba unavailable")
def test_backends_agree():
    for seed in range(5):
        args, coefs = make_case(seed=seed)
        ln, gn, sn = kernels.loss_and_grad(*args, **coefs, backend="numpy")
        lb, gb, sb = kernels.loss_and_grad(*args, **coefs, backend="numba")
        assert ln == pytest.approx(lb, rel=1e-12, abs=1e-12)
        np.testing.assert_allclose(gn, gb, atol=1e-12)
        for key in sn:
            assert sn[key] == pytest.approx(sb[key], rel=1e-10, abs=1e-12)


def test_gradient_matches_central_finite_differences():
    args, coefs = make_case(seed=1, m=48)
    assert ratios_clear_of_kinks(args, coefs)
    theta = args[0]
    _, grad, _ = kernels.loss_and_grad(*args, **coefs)
    h = 1e-5
    rng = np.random.default_rng(0)
    flat_indices = rng.choice(theta.size, size=200, replace=False)
    for flat in flat_indices:
        i, j = np.unravel_index(flat, theta.shape)
        up = theta.copy()
        up[i, j] += h
        down = theta.copy()
        down[i, j] -= h
        lp = kernels.total_loss(up, *args[1:], **coefs)
        lm = kernels.total_loss(down, *args[1:], **coefs)
        fd = (lp - lm) / (2 * h)
        denom = max(abs(fd), abs(grad[i, j]), 1e-8)
        assert abs(fd - grad[i, j]) / denom < 1e-4, (i, j, fd, grad[i, j])


def test_env_flag_selects_backend(monkeypatch):
    import importlib
    import emorl.policy.kernels as mod

    monkeypatch.setenv("EMORL_NUMBA", "0")
    reloaded = importlib.reload(mod)
    try:
        assert reloaded.active_backend() == "numpy"
    finally:
        monkeypatch.delenv("EMORL_NUMBA")
        importlib.reload(mod)


def test_stats_fields_present():
    args, coefs = make_case(seed=2, m=16)
    _, _, stats = kernels.loss_and_grad(*args, **coefs)
    assert set(stats) == {
        "pg_loss", "entropy", "imitation_loss", "kl", "mean_ratio", "clip_fraction"
    }
    assert 0.0 <= stats["clip_fraction"] <= 1.0
    assert stats["kl"] >= 0.0
