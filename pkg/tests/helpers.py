"""Shared oracles for the environment and PPO tests."""
import numpy as np

from auvaet.env import jain_index
from auvaet.ppo import Minibatch, forward, head_dims_of, log_prob


def check_transition(env, prev, tr, tol=1e-9):
    """Assert every per-step invariant; ``prev`` is a copy of the pre-step state."""
    cfg = env.config
    s, info, r = tr.state, tr.info, tr.reward
    k_nodes = cfg.k_nodes

    # bounds
    assert cfg.grid.contains(s.auv_pos)
    assert s.t == prev.t + 1 <= s.horizon_steps
    assert np.all((tr.obs >= 0.0) & (tr.obs <= 1.0))
    assert np.all((s.energy >= 0.0) & (s.energy <= cfg.e_cap))
    assert np.all((s.aoi >= 1) & (s.aoi <= cfg.a_max))

    # at most one uplink, and it is the reported one
    gained = s.counts - prev.counts
    assert set(np.unique(gained)) <= {0, 1}
    assert gained.sum() == (0 if info.uplink_node is None else 1)
    if info.uplink_node is not None:
        assert gained[info.uplink_node] == 1
    assert np.all(s.counts <= s.t)

    # AoI dichotomy
    for i in range(k_nodes):
        if info.uplink_node == i:
            assert s.aoi[i] == 1
        else:
            assert s.aoi[i] == min(prev.aoi[i] + 1, cfg.a_max)

    # energy ledger
    expected = prev.energy.copy()
    if info.charged_node is not None:
        expected[info.charged_node] += info.e_r
    if info.uplink_node is not None:
        expected[info.uplink_node] -= info.e_c
    assert np.allclose(s.energy, expected, rtol=0, atol=tol * max(1.0, cfg.e_cap))
    assert info.e_r >= 0.0 and info.e_c >= 0.0

    # reward decomposition
    for p in (r.rho_location, r.rho_information, r.rho_occurrence):
        assert p >= 0.0
    assert r.total == r.base - (r.rho_location + r.rho_information + r.rho_occurrence)
    base = -(1.0 - jain_index(s.counts)) / k_nodes * float(np.dot(s.weights, s.aoi))
    assert abs(r.base - base) <= 1e-9 * max(1.0, abs(base))
    assert (r.rho_location > 0) == info.out_of_bounds
    assert tr.done == (s.t == s.horizon_steps)


def random_rollout(env, rng, steps, check=True):
    """Uniform random actions for ``steps`` transitions, resetting as needed."""
    dims = env.config.action_dims
    env.reset()
    n = 0
    while n < steps:
        prev = env.state.copy()
        a = [int(rng.integers(d)) for d in dims]
        tr = env.step(a)
        if check:
            check_transition(env, prev, tr)
        n += 1
        if tr.done:
            env.reset()
    return n


def brute_force_advantages(rewards, values, dones, gamma, terminal_value):
    """Per-step discounted sum written out term by term, cut at terminal flags."""
    n = len(rewards)
    out = []
    for t in range(n):
        end = next((j for j in range(t, n) if dones[j]), None)
        stop = n - 1 if end is None else end
        ret = sum(gamma ** (j - t) * rewards[j] for j in range(t, stop + 1))
        if end is None:
            ret += gamma ** (n - t) * terminal_value
        out.append(ret - values[t])
    return np.array(out)


def finite_difference_error(loss_fn, params, grads, h=1e-5):
    """Worst element-wise relative gap between ``grads`` and central differences."""
    worst = 0.0
    for key, w in params.items():
        fd = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            old = w[idx]
            w[idx] = old + h
            up = loss_fn(params)
            w[idx] = old - h
            down = loss_fn(params)
            w[idx] = old
            fd[idx] = (up - down) / (2 * h)
        denom = np.maximum(np.maximum(np.abs(fd), np.abs(grads[key])), 1e-6)
        worst = max(worst, float(np.max(np.abs(fd - grads[key]) / denom)))
    return worst


def toy_batch(rng, params, n=4, spread=0.1):
    """Random minibatch whose old log-probs sit within ``spread`` of the current ones."""
    obs = rng.random((n, params["w1"].shape[0]))
    actions = np.stack([rng.integers(h, size=n) for h in head_dims_of(params)], axis=1)
    probs, _ = forward(params, obs)
    logp = log_prob(probs, actions)
    return Minibatch(
        obs=obs,
        actions=actions,
        old_log_prob=logp + rng.uniform(-spread, spread, n),
        advantages=rng.normal(size=n),
        value_targets=rng.normal(size=n),
    )
