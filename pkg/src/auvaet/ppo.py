"""Actor-critic PPO in plain numpy.

A shared two-layer tanh trunk feeds one softmax head per action dimension
and a scalar value head. Gradients are derived by hand; ``ppo_loss``
returns the loss together with the gradient of every parameter array.
"""
import json
import logging
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .env import Action, jain_index

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "auvaet-ppo"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class PpoHyperparams:
    gamma: float = 0.93
    alpha: float = 3e-4
    c1: float = 0.5
    c2: float = 0.01
    epsilon: float = 0.2
    n_steps: int = 100
    batch_size: int = 100
    epochs_per_update: int = 10
    max_episodes: int = 2000
    hidden: int = 64
    shared_trunk: bool = False
    n_envs: int = 1
    adam_betas: tuple = (0.9, 0.999)
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.batch_size < 1 or self.batch_size > self.n_steps * self.n_envs:
            raise ValueError("batch_size must be in [1, n_steps * n_envs]")
        object.__setattr__(self, "adam_betas", tuple(self.adam_betas))

    @classmethod
    def tdd(cls, **kw):
        return cls(**{"gamma": 0.93, "alpha": 3e-4, **kw})

    @classmethod
    def fdd(cls, **kw):
        return cls(**{"gamma": 0.92, "alpha": 5e-4, **kw})


class TrainingError(RuntimeError):
    """Raised when the loss stops being finite. ``params`` holds the last good weights."""

    def __init__(self, message, params=None, diagnostics=None):
        super().__init__(message)
        self.params = params
        self.diagnostics = diagnostics or {}


# ---------------------------------------------------------------------------
# network


def head_names(n_heads):
    return [(f"wh{i}", f"bh{i}") for i in range(n_heads)]


def init_params(obs_dim, head_dims, rng, hidden=64, shared_trunk=False):
    """Uniform(+-1/sqrt(fan_in)) weights, zero biases, policy heads scaled by 0.01.

    Without ``shared_trunk`` the value head gets its own two tanh layers
    (``vw1``/``vb1``/``vw2``/``vb2``).
    """

    def uniform(fan_in, fan_out, scale=1.0):
        bound = 1.0 / np.sqrt(fan_in)
        return scale * rng.uniform(-bound, bound, size=(fan_in, fan_out))

    params = {
        "w1": uniform(obs_dim, hidden),
        "b1": np.zeros(hidden),
        "w2": uniform(hidden, hidden),
        "b2": np.zeros(hidden),
        "wv": uniform(hidden, 1),
        "bv": np.zeros(1),
    }
    for (wn, bn), n in zip(head_names(len(head_dims)), head_dims):
        params[wn] = uniform(hidden, n, scale=0.01)
        params[bn] = np.zeros(n)
    if not shared_trunk:
        params["vw1"] = uniform(obs_dim, hidden)
        params["vb1"] = np.zeros(hidden)
        params["vw2"] = uniform(hidden, hidden)
        params["vb2"] = np.zeros(hidden)
    return params


def zero_params(obs_dim, head_dims, hidden=64, shared_trunk=False):
    rng = np.random.default_rng(0)
    return {k: np.zeros_like(v) for k, v in init_params(obs_dim, head_dims, rng, hidden, shared_trunk).items()}


def is_shared(params):
    return "vw1" not in params


def n_heads(params):
    return sum(1 for k in params if k.startswith("wh"))


def head_dims_of(params):
    return tuple(params[f"bh{i}"].size for i in range(n_heads(params)))


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _trunk(params, obs, prefix=""):
    h1 = np.tanh(obs @ params[prefix + "w1"] + params[prefix + "b1"])
    h2 = np.tanh(h1 @ params[prefix + "w2"] + params[prefix + "b2"])
    return h1, h2


def _value_features(params, obs, h1, h2):
    if is_shared(params):
        return h1, h2
    return _trunk(params, obs, "v")


def forward(params, obs):
    """Per-head probability vectors and the value estimate.

    ``obs`` may be a single observation or a batch (one per row).
    """
    obs = np.asarray(obs, dtype=float)
    if obs.shape[-1] != params["w1"].shape[0]:
        raise ValueError(f"observation length {obs.shape[-1]} != network input {params['w1'].shape[0]}")
    h1, h2 = _trunk(params, obs)
    probs = [_softmax(h2 @ params[wn] + params[bn]) for wn, bn in head_names(n_heads(params))]
    _, g2 = _value_features(params, obs, h1, h2)
    value = (g2 @ params["wv"] + params["bv"])[..., 0]
    return probs, value


def log_prob(probs, actions):
    """Joint log-probability: sum over heads of log p(a_i)."""
    actions = np.asarray(actions)
    if actions.ndim == 1 and probs[0].ndim == 1:
        return float(sum(np.log(p[a]) for p, a in zip(probs, actions)))
    rows = np.arange(actions.shape[0])
    return sum(np.log(p[rows, actions[:, i]]) for i, p in enumerate(probs))


def entropy(p):
    return -np.sum(p * np.log(p), axis=-1)


def act(params, obs, rng, greedy=False):
    """Sample (or take the mode of) every head; returns (actions, log_prob, value)."""
    probs, value = forward(params, obs)
    if greedy:
        a = np.array([int(np.argmax(p)) for p in probs])
    else:
        a = np.array([min(int(np.searchsorted(np.cumsum(p), rng.random(), side="right")), p.size - 1) for p in probs])
    return a, log_prob(probs, a), float(value)


# ---------------------------------------------------------------------------
# advantages and loss


def compute_advantages(rewards, values, dones, gamma, terminal_value=0.0):
    """Finite-horizon discounted return minus the value baseline.

    Accumulation restarts after every ``done``; the final entry bootstraps
    from ``terminal_value`` unless it is itself terminal.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    n = rewards.size
    ret = np.empty(n)
    running = 0.0 if dones[-1] else float(terminal_value)
    for t in range(n - 1, -1, -1):
        if dones[t]:
            running = 0.0
        running = rewards[t] + gamma * running
        ret[t] = running
    return ret - values


class Minibatch(NamedTuple):
    obs: np.ndarray
    actions: np.ndarray
    old_log_prob: np.ndarray
    advantages: np.ndarray
    value_targets: np.ndarray


class LossStats(NamedTuple):
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float
    ratio: np.ndarray
    surrogate: np.ndarray
    clip_fraction: float


def ppo_loss(params, batch, hp):
    """Minimised objective -L_clip + c1 * L_vf - c2 * S and its gradients.

    Returns ``(loss, grads, stats)`` with ``grads`` keyed like ``params``.
    """
    obs, actions = batch.obs, np.asarray(batch.actions)
    n = obs.shape[0]
    if n == 0:
        raise ValueError("empty minibatch")
    h1, h2 = _trunk(params, obs)
    rows = np.arange(n)
    names = head_names(n_heads(params))
    probs = [_softmax(h2 @ params[wn] + params[bn]) for wn, bn in names]
    g1, g2 = _value_features(params, obs, h1, h2)
    value = (g2 @ params["wv"] + params["bv"])[:, 0]

    logp = sum(np.log(p[rows, actions[:, i]]) for i, p in enumerate(probs))
    ratio = np.exp(logp - batch.old_log_prob)
    adv = batch.advantages
    eps = hp.epsilon
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv
    surrogate = np.minimum(unclipped, clipped)
    ents = [entropy(p) for p in probs]
    ent = sum(ents)
    v_err = value - batch.value_targets

    policy_loss = -float(np.mean(surrogate))
    value_loss = float(np.mean(v_err**2))
    mean_ent = float(np.mean(ent))
    loss = policy_loss + hp.c1 * value_loss - hp.c2 * mean_ent

    # d loss / d logp: only the unclipped branch carries gradient
    d_logp = -np.where(unclipped <= clipped, unclipped, 0.0) / n

    grads = {}
    d_h2 = np.zeros_like(h2)
    for i, ((wn, bn), p) in enumerate(zip(names, probs)):
        onehot = np.zeros_like(p)
        onehot[rows, actions[:, i]] = 1.0
        d_z = d_logp[:, None] * (onehot - p)
        log_p = np.log(p)
        d_z += (hp.c2 / n) * p * (log_p + ents[i][:, None])
        grads[wn] = h2.T @ d_z
        grads[bn] = d_z.sum(axis=0)
        d_h2 += d_z @ params[wn].T

    d_v = (2.0 * hp.c1 / n) * v_err[:, None]
    grads["wv"] = g2.T @ d_v
    grads["bv"] = d_v.sum(axis=0)
    if is_shared(params):
        d_h2 += d_v @ params["wv"].T
    else:
        _trunk_backward(params, obs, g1, g2, d_v @ params["wv"].T, grads, "v")
    _trunk_backward(params, obs, h1, h2, d_h2, grads, "")

    stats = LossStats(
        loss=loss,
        policy_loss=policy_loss,
        value_loss=value_loss,
        entropy=mean_ent,
        ratio=ratio,
        surrogate=surrogate,
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > eps)),
    )
    return loss, grads, stats


def _trunk_backward(params, obs, h1, h2, d_h2, grads, prefix):
    d_a2 = d_h2 * (1.0 - h2**2)
    grads[prefix + "w2"] = h1.T @ d_a2
    grads[prefix + "b2"] = d_a2.sum(axis=0)
    d_a1 = (d_a2 @ params[prefix + "w2"].T) * (1.0 - h1**2)
    grads[prefix + "w1"] = obs.T @ d_a1
    grads[prefix + "b1"] = d_a1.sum(axis=0)


class Adam:
    def __init__(self, params, lr, betas=(0.9, 0.999), eps=1e-8):
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for k, g in grads.items():
            m = self.m[k]
            v = self.v[k]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            params[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


# ---------------------------------------------------------------------------
# rollout storage


class RolloutBuffer:
    """Fixed-capacity store of one segment of experience."""

    def __init__(self, capacity, obs_dim, n_heads):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros((capacity, n_heads), dtype=np.int64)
        self.log_probs = np.zeros(capacity)
        self.rewards = np.zeros(capacity)
        self.values = np.zeros(capacity)
        self.dones = np.zeros(capacity, dtype=bool)
        self.ptr = 0

    @property
    def full(self):
        return self.ptr == self.capacity

    def add(self, obs, action, log_prob, reward, value, done):
        if self.full:
            raise RuntimeError("rollout buffer is full")
        i = self.ptr
        self.obs[i] = obs
        self.actions[i] = action
        self.log_probs[i] = log_prob
        self.rewards[i] = reward
        self.values[i] = value
        self.dones[i] = done
        self.ptr += 1

    def clear(self):
        self.ptr = 0


def build_batch(buffers, last_values, gamma):
    """Merge per-environment buffers (in order) into one training set."""
    parts = []
    for buf, last in zip(buffers, last_values):
        n = buf.ptr
        adv = compute_advantages(buf.rewards[:n], buf.values[:n], buf.dones[:n], gamma, last)
        parts.append((buf.obs[:n], buf.actions[:n], buf.log_probs[:n], adv, adv + buf.values[:n]))
    return Minibatch(*(np.concatenate(x) for x in zip(*parts)))


def normalize(adv):
    return (adv - adv.mean()) / (adv.std() + 1e-8)


def ppo_update(params, optimizer, data, hp, rng):
    """Run ``epochs_per_update`` passes of shuffled minibatches; returns the last stats."""
    n = data.obs.shape[0]
    adv_all = normalize(data.advantages)
    stats = None
    for _ in range(hp.epochs_per_update):
        order = rng.permutation(n)
        for start in range(0, n, hp.batch_size):
            idx = order[start : start + hp.batch_size]
            mb = Minibatch(data.obs[idx], data.actions[idx], data.old_log_prob[idx], adv_all[idx], data.value_targets[idx])
            loss, grads, stats = ppo_loss(params, mb, hp)
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise TrainingError(
                    "non-finite PPO loss",
                    diagnostics={"loss": loss, "policy_loss": stats.policy_loss, "value_loss": stats.value_loss,
                                 "entropy": stats.entropy, "max_ratio": float(np.max(stats.ratio))},
                )
            optimizer.step(params, grads)
    return stats


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainResult:
    params: dict
    log: list
    hyperparams: PpoHyperparams


def episode_row(episode, cum_reward, aoi_trace, harvested, counts):
    return {
        "episode": episode,
        "cumulative_reward": float(cum_reward),
        "mean_aoi": float(np.mean(aoi_trace)),
        "harvested_energy": float(harvested),
        "jain": jain_index(counts),
    }


def train(env_factory, hp, seed, checkpoint_path=None, log_every=0):
    """Train a PPO agent; deterministic for a given ``seed``.

    ``env_factory(i)`` builds the i-th environment instance. Returns a
    :class:`TrainResult` whose ``log`` has one row per episode.
    """
    rng = np.random.default_rng(seed)
    envs = [env_factory(i) for i in range(hp.n_envs)]
    cfg = envs[0].config
    params = init_params(cfg.obs_dim, cfg.action_dims, rng, hp.hidden, hp.shared_trunk)
    optimizer = Adam(params, hp.alpha, hp.adam_betas, hp.adam_eps)
    buffers = [RolloutBuffer(hp.n_steps, cfg.obs_dim, len(cfg.action_dims)) for _ in envs]

    log_rows = []
    episode = 0
    obs = [env.reset() for env in envs]
    ep_stats = [[0.0, [], 0.0] for _ in envs]
    while episode < hp.max_episodes:
        last_values = []
        for i, env in enumerate(envs):
            buf = buffers[i]
            while not buf.full:
                a, lp, v = act(params, obs[i], rng)
                tr = env.step(Action.from_array(cfg.mode, a))
                r = tr.reward.total
                buf.add(obs[i], a, lp, r, v, tr.done)
                st = ep_stats[i]
                st[0] += r
                st[1].append(float(tr.state.aoi.mean()))
                st[2] += tr.info.e_r
                if tr.done:
                    if episode < hp.max_episodes:
                        log_rows.append(episode_row(episode, st[0], st[1], st[2], tr.state.counts))
                        if log_every and episode % log_every == 0:
                            log.info("episode %d reward %.1f aoi %.2f", episode, st[0], np.mean(st[1]))
                    episode += 1
                    ep_stats[i] = [0.0, [], 0.0]
                    obs[i] = env.reset()
                else:
                    obs[i] = tr.obs
            last_values.append(0.0 if buf.dones[-1] else float(forward(params, obs[i])[1]))

        data = build_batch(buffers, last_values, hp.gamma)
        snapshot = {k: v.copy() for k, v in params.items()}
        try:
            ppo_update(params, optimizer, data, hp, rng)
        except TrainingError as err:
            err.params = snapshot
            if checkpoint_path is not None:
                save_checkpoint(checkpoint_path, snapshot, hp, cfg)
            raise
        for buf in buffers:
            buf.clear()

    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, params, hp, cfg)
    return TrainResult(params, log_rows, hp)


class PpoPolicy:
    """Wraps trained weights as a ``policy(env) -> PolicyDecision`` callable."""

    def __init__(self, params, greedy=True, seed=0):
        self.params = params
        self.greedy = greedy
        self.rng = np.random.default_rng(seed)

    def __call__(self, env):
        from .policies import PolicyDecision

        a, lp, _ = act(self.params, env.observe(), self.rng, greedy=self.greedy)
        return PolicyDecision(Action.from_array(env.config.mode, a), log_prob=lp)


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path, params, hp, env_config):
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "mode": env_config.mode.value,
        "obs_dim": env_config.obs_dim,
        "head_dims": list(head_dims_of(params)),
        "hyperparams": asdict(hp),
    }
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.array(json.dumps(meta, sort_keys=True)), **params)


def load_checkpoint(path, env_config=None):
    """Return (params, meta); refuses checkpoints that do not fit ``env_config``."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        params = {k: data[k].copy() for k in data.files if k != "__meta__"}
    if meta.get("format") != CHECKPOINT_FORMAT or meta.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint {meta.get('format')} v{meta.get('version')}")
    if env_config is not None:
        if meta["obs_dim"] != env_config.obs_dim or tuple(meta["head_dims"]) != tuple(env_config.action_dims):
            raise ValueError(
                f"checkpoint expects obs {meta['obs_dim']} / heads {meta['head_dims']}, "
                f"environment has {env_config.obs_dim} / {list(env_config.action_dims)}"
            )
        if meta["mode"] != env_config.mode.value:
            raise ValueError(f"checkpoint was trained in {meta['mode']} mode")
    return params, meta
