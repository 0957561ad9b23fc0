"""Hot numeric kernels: total loss and analytic gradient over a step batch.

Two equivalent implementations live here: a numba ``@njit`` version used by
default and a pure-numpy fallback. Set ``EMORL_NUMBA=0`` to force the numpy
path (or when numba is unavailable it is selected automatically). Both are
exercised against each other in the tests, and ``benchmarks/bench_kernels.py``
compares their throughput.

The objective, over M flattened steps with per-state softmax policies:

    loss = -mean_j min(r_j A_j, clip(r_j, 1-eps, 1+eps) A_j)
           - entropy_coef * mean_j H(pi(.|s_j))
           + imitation_coef * (-mean_j w_j log pi(a_j|s_j))
           + kl_coef * mean_j KL(pi_old(.|s_j) || pi(.|s_j))

with r_j the probability ratio against the sampling snapshot, A_j the
per-step advantage and w_j the (non-negative) imitation weight.
"""

from __future__ import annotations

import os

import numpy as np

_STATS_FIELDS = (
    "pg_loss",
    "entropy",
    "imitation_loss",
    "kl",
    "mean_ratio",
    "clip_fraction",
)


def _loss_and_grad_numpy(
    theta,
    state_idx,
    action_idx,
    old_logp,
    adv,
    imit_w,
    old_logp_all,
    clip_eps,
    entropy_coef,
    imitation_coef,
    kl_coef,
):
    m = state_idx.shape[0]
    rows = theta[state_idx]  # (M, A)
    rows_max = rows.max(axis=1, keepdims=True)
    logz = rows_max[:, 0] + np.log(np.exp(rows - rows_max).sum(axis=1))
    logp_all = rows - logz[:, None]
    p_all = np.exp(logp_all)
    logp = logp_all[np.arange(m), action_idx]

    ratio = np.exp(logp - old_logp)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv
    surrogate = np.minimum(unclipped, clipped)
    pg_loss = -surrogate.mean()
    clip_active = ((adv > 0) & (ratio > 1.0 + clip_eps)) | (
        (adv < 0) & (ratio < 1.0 - clip_eps)
    )

    entropy_per = -(p_all * logp_all).sum(axis=1)
    entropy = entropy_per.mean()

    imit_loss = -(imit_w * logp).mean()

    if kl_coef != 0.0:
        p_old = np.exp(old_logp_all)
        kl_per = (p_old * (old_logp_all - logp_all)).sum(axis=1)
        kl = kl_per.mean()
    else:
        p_old = None
        kl = 0.0

    loss = (
        pg_loss
        - entropy_coef * entropy
        + imitation_coef * imit_loss
        + kl_coef * kl
    )

    # Per-step gradient w.r.t. the logits of the visited state, then
    # scatter-added into the parameter matrix.
    onehot_minus_p = -p_all.copy()
    onehot_minus_p[np.arange(m), action_idx] += 1.0

    contrib = np.zeros_like(p_all)
    pg_coeff = np.where(clip_active, 0.0, -adv * ratio) / m
    contrib += pg_coeff[:, None] * onehot_minus_p
    # d(-entropy)/dz = p * (logp + H)
    contrib += (entropy_coef / m) * p_all * (logp_all + entropy_per[:, None])
    contrib += (-imitation_coef / m) * imit_w[:, None] * onehot_minus_p
    if kl_coef != 0.0:
        contrib += (kl_coef / m) * (p_all - p_old)

    grad = np.zeros_like(theta)
    np.add.at(grad, state_idx, contrib)

    stats = np.array(
        [pg_loss, entropy, imit_loss, kl, ratio.mean(), clip_active.mean()]
    )
    return loss, grad, stats


def _build_numba_impl():
    from numba import njit

    @njit(cache=True)
    def _loss_and_grad_numba(
        theta,
        state_idx,
        action_idx,
        old_logp,
        adv,
        imit_w,
        old_logp_all,
        clip_eps,
        entropy_coef,
        imitation_coef,
        kl_coef,
    ):
        m = state_idx.shape[0]
        n_actions = theta.shape[1]
        grad = np.zeros_like(theta)

        pg_loss = 0.0
        entropy_sum = 0.0
        imit_sum = 0.0
        kl_sum = 0.0
        ratio_sum = 0.0
        clipped_count = 0.0

        p = np.empty(n_actions)
        logp_row = np.empty(n_actions)

        for j in range(m):
            s = state_idx[j]
            a = action_idx[j]

            row_max = theta[s, 0]
            for b in range(1, n_actions):
                if theta[s, b] > row_max:
                    row_max = theta[s, b]
            z = 0.0
            for b in range(n_actions):
                z += np.exp(theta[s, b] - row_max)
            logz = row_max + np.log(z)

            ent = 0.0
            for b in range(n_actions):
                logp_row[b] = theta[s, b] - logz
                p[b] = np.exp(logp_row[b])
                ent -= p[b] * logp_row[b]
            entropy_sum += ent

            logp = logp_row[a]
            ratio = np.exp(logp - old_logp[j])
            ratio_sum += ratio

            a_j = adv[j]
            unclipped = ratio * a_j
            r_clip = ratio
            if r_clip > 1.0 + clip_eps:
                r_clip = 1.0 + clip_eps
            elif r_clip < 1.0 - clip_eps:
                r_clip = 1.0 - clip_eps
            clipped = r_clip * a_j
            surrogate = unclipped if unclipped < clipped else clipped
            pg_loss -= surrogate / m

            clip_active = (a_j > 0 and ratio > 1.0 + clip_eps) or (
                a_j < 0 and ratio < 1.0 - clip_eps
            )
            if clip_active:
                clipped_count += 1.0

            imit_sum -= imit_w[j] * logp

            pg_coeff = 0.0 if clip_active else -a_j * ratio / m
            iw = -imitation_coef * imit_w[j] / m
            for b in range(n_actions):
                indicator = 1.0 if b == a else 0.0
                omp = indicator - p[b]
                g = pg_coeff * omp
                g += (entropy_coef / m) * p[b] * (logp_row[b] + ent)
                g += iw * omp
                if kl_coef != 0.0:
                    g += (kl_coef / m) * (p[b] - np.exp(old_logp_all[j, b]))
                grad[s, b] += g

            if kl_coef != 0.0:
                kl_j = 0.0
                for b in range(n_actions):
                    kl_j += np.exp(old_logp_all[j, b]) * (
                        old_logp_all[j, b] - logp_row[b]
                    )
                kl_sum += kl_j

        entropy = entropy_sum / m
        imit_loss = imit_sum / m
        kl = kl_sum / m
        loss = (
            pg_loss
            - entropy_coef * entropy
            + imitation_coef * imit_loss
            + kl_coef * kl
        )
        stats = np.array(
            [pg_loss, entropy, imit_loss, kl, ratio_sum / m, clipped_count / m]
        )
        return loss, grad, stats

    return _loss_and_grad_numba


def _select_backend():
    if os.environ.get("EMORL_NUMBA", "1").lower() in ("0", "false", "off"):
        return _loss_and_grad_numpy, "numpy"
    try:
        return _build_numba_impl(), "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return _loss_and_grad_numpy, "numpy"


_IMPL, _BACKEND = _select_backend()

loss_and_grad_numpy = _loss_and_grad_numpy
try:
    loss_and_grad_numba = _IMPL if _BACKEND == "numba" else _build_numba_impl()
except ImportError:  # pragma: no cover
    loss_and_grad_numba = None


def active_backend() -> str:
    return _BACKEND


def _as_arrays(theta, state_idx, action_idx, old_logp, adv, imit_w, old_logp_all):
    return (
        np.ascontiguousarray(theta, dtype=np.float64),
        np.ascontiguousarray(state_idx, dtype=np.int64),
        np.ascontiguousarray(action_idx, dtype=np.int64),
        np.ascontiguousarray(old_logp, dtype=np.float64),
        np.ascontiguousarray(adv, dtype=np.float64),
        np.ascontiguousarray(imit_w, dtype=np.float64),
        np.ascontiguousarray(old_logp_all, dtype=np.float64),
    )


def loss_and_grad(
    theta,
    state_idx,
    action_idx,
    old_logp,
    adv,
    imit_w,
    old_logp_all,
    clip_eps: float,
    entropy_coef: float,
    imitation_coef: float,
    kl_coef: float,
    backend: str | None = None,
):
    """Total loss, analytic gradient, and a stats dict for one step batch."""
    arrays = _as_arrays(theta, state_idx, action_idx, old_logp, adv, imit_w, old_logp_all)
    if backend is None:
        impl = _IMPL
    elif backend == "numpy":
        impl = _loss_and_grad_numpy
    elif backend == "numba":
        if loss_and_grad_numba is None:  # pragma: no cover
            raise RuntimeError("numba backend requested but numba is unavailable")
        impl = loss_and_grad_numba
    else:
        raise ValueError(f"unknown kernel backend {backend!r}")
    loss, grad, stats = impl(
        *arrays,
        float(clip_eps),
        float(entropy_coef),
        float(imitation_coef),
        float(kl_coef),
    )
    return float(loss), grad, dict(zip(_STATS_FIELDS, (float(v) for v in stats)))


def total_loss(*args, **kwargs) -> float:
    """Loss only; used by the finite-difference checks."""
    loss, _, _ = loss_and_grad(*args, **kwargs)
    return loss
