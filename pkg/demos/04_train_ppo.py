"""Train a PPO agent on one layout and compare it with the baselines.

Usage: python 04_train_ppo.py [tdd|fdd] [episodes]
A 2000-episode run takes well under a minute per seed on one CPU core.
"""
import dataclasses
import sys

import numpy as np

from auvaet import AuvEnv
from auvaet.harness import ExperimentConfig, run_episode, train_agent
from auvaet.policies import make_baseline
from auvaet.ppo import PpoPolicy

mode = sys.argv[1] if len(sys.argv) > 1 else "tdd"
episodes = int(sys.argv[2]) if len(sys.argv) > 2 else 2000
seed = 0

cfg = ExperimentConfig(mode=mode, k_nodes=3)
cfg = cfg.replace(ppo=dataclasses.replace(cfg.ppo, max_episodes=episodes))
result = train_agent(cfg, seed, checkpoint_path=f"ppo_{mode}_seed{seed}.npz")

rewards = np.array([r["cumulative_reward"] for r in result.log])
k = max(1, len(rewards) // 10)
print(f"episode reward: first 10% median {np.median(rewards[:k]):.0f}, last 10% median {np.median(rewards[-k:]):.0f}")

env = AuvEnv(cfg.env_config(), seed=seed)
policies = {name: make_baseline(name, seed) for name in ("rw", "rr", "ga")}
policies["ppo"] = PpoPolicy(result.params, greedy=True)
for name, policy in policies.items():
    m = run_episode(env, policy)
    print(f"{name:>4}: AoI {m.mean_aoi:6.2f}  harvested {m.total_harvested:7.0f} J  Jain {m.jain:.3f}")
