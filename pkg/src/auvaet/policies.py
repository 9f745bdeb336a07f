"""Scripted baselines: random walk, round robin and greedy centroid parking.

Every policy is a callable ``policy(env) -> PolicyDecision`` so that the
harness can drive baselines and the learned agent the same way.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .env import HOLD, MOVES, N_DIRECTIONS, Action, Mode


@dataclass(frozen=True)
class PolicyDecision:
    action: Action
    log_prob: Optional[float] = None


def _make_action(mode, direction, node, wet_node):
    if Mode(mode) is Mode.TDD:
        return Action(int(direction), int(node))
    return Action(int(direction), int(node), wet_node=int(wet_node))


def step_toward(env, target_xyz, allow_hold=False):
    """Axis move that most reduces Euclidean distance from the AUV to a point.

    Ties go to the lower direction index (x before y before z). Returns
    ``None`` when no move reduces the distance, or ``HOLD`` if allowed.
    """
    grid = env.config.grid
    pos = env.state.auv_pos
    target = np.asarray(target_xyz, dtype=float)
    best, best_d = None, float(np.linalg.norm(pos - target))
    for direction in range(N_DIRECTIONS):
        cand = pos + MOVES[direction]
        if not grid.contains(cand):
            continue
        d = float(np.linalg.norm(cand - target))
        if d < best_d - 1e-12:
            best, best_d = direction, d
    if best is None and allow_hold:
        return HOLD
    return best


def random_walk(env, rng):
    k = env.config.k_nodes
    direction = rng.integers(N_DIRECTIONS)
    node = rng.integers(k)
    wet = rng.integers(k)
    return PolicyDecision(_make_action(env.config.mode, direction, node, wet))


def round_robin(env, t):
    """Poll node ``t mod K`` and steer toward it; charge ``(t+1) mod K`` in FDD."""
    k = env.config.k_nodes
    positions = env.state.node_positions
    node = t % k
    nxt = (t + 1) % k
    direction = step_toward(env, positions[node])
    if direction is None:
        direction = step_toward(env, positions[nxt])
    if direction is None:
        # parked on every scheduled node (K = 1): first in-bounds move
        grid = env.config.grid
        direction = next(d for d in range(N_DIRECTIONS) if grid.contains(env.state.auv_pos + MOVES[d]))
    return PolicyDecision(_make_action(env.config.mode, direction, node, nxt))


def can_uplink(env):
    """Boolean mask of nodes that could complete an uplink from the current cell."""
    s = env.state
    req = env.required_energy()
    if env.config.mode is Mode.TDD:
        headroom = env.config.e_cap - s.energy
        return s.energy + np.minimum(env.harvest_per_slot(), headroom) >= req
    return s.energy >= req


def greedy(env):
    """Park near the node centroid and poll the stalest node that can transmit."""
    s = env.state
    centroid = s.node_positions.mean(axis=0)
    direction = step_toward(env, centroid, allow_hold=True)
    ok = can_uplink(env)
    # stalest node among those that can transmit, else stalest overall so it gets charged
    node = int(np.argmax(np.where(ok, s.aoi, -1))) if ok.any() else int(np.argmax(s.aoi))
    wet = int(np.argmin(s.energy))
    return PolicyDecision(_make_action(env.config.mode, direction, node, wet))


class RandomWalk:
    def __init__(self, seed=0):
        self.rng = np.random.default_rng(seed)

    def __call__(self, env):
        return random_walk(env, self.rng)


class RoundRobin:
    def __call__(self, env):
        return round_robin(env, env.state.t)


class Greedy:
    def __call__(self, env):
        return greedy(env)


BASELINES = {"rw": RandomWalk, "rr": RoundRobin, "ga": Greedy}


def make_baseline(name, seed=0):
    if name not in BASELINES:
        raise ValueError(f"unknown baseline {name!r}; choose from {sorted(BASELINES)}")
    return RandomWalk(seed) if name == "rw" else BASELINES[name]()
