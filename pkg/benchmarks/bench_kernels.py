"""Throughput comparison of the numba and numpy loss/gradient kernels.

Run: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from emorl.policy import kernels
from emorl.policy.toy import NUM_ACTIONS, NUM_STATES, ToyPolicy


def make_batch(m, seed=0):
    rng = np.random.default_rng(seed)
    theta0 = rng.normal(scale=0.5, size=(NUM_STATES, NUM_ACTIONS))
    sampler = ToyPolicy(theta0)
    states = rng.integers(0, NUM_STATES, size=m).astype(np.int64)
    actions = rng.integers(0, NUM_ACTIONS, size=m).astype(np.int64)
    old_logp = np.array([sampler.log_probs(s)[a] for s, a in zip(states, actions)])
    old_all = np.vstack([sampler.log_probs(s) for s in states])
    adv = rng.normal(scale=0.4, size=m)
    weights = np.maximum(rng.normal(scale=0.2, size=m), 0.0)
    theta = theta0 + rng.normal(scale=0.15, size=theta0.shape)
    return (theta, states, actions, old_logp, adv, weights, old_all)


def bench(backend, args, coefs, repeats):
    kernels.loss_and_grad(*args, **coefs, backend=backend)  # warm-up / JIT
    start = time.perf_counter()
    for _ in range(repeats):
        kernels.loss_and_grad(*args, **coefs, backend=backend)
    return (time.perf_counter() - start) / repeats


def main():
    coefs = dict(clip_eps=0.2, entropy_coef=0.02, imitation_coef=0.1, kl_coef=0.05)
    print(f"default backend: {kernels.active_backend()}")
    print(f"{'batch steps':>12} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for m, repeats in ((256, 400), (2_048, 200), (16_384, 50), (131_072, 10)):
        args = make_batch(m)
        t_np = bench("numpy", args, coefs, repeats)
        if kernels.loss_and_grad_numba is None:
            print(f"{m:>12} {t_np * 1e3:>10.3f}ms {'n/a':>12} {'n/a':>9}")
            continue
        t_nb = bench("numba", args, coefs, repeats)
        print(
            f"{m:>12} {t_np * 1e3:>10.3f}ms {t_nb * 1e3:>10.3f}ms "
            f"{t_np / t_nb:>8.1f}x"
        )


if __name__ == "__main__":
    main()
