"""Roll the scripted controllers through one episode each and print the metrics."""
import json

from auvaet import AuvEnv, EnvConfig
from auvaet.harness import run_episode
from auvaet.policies import make_baseline

for mode in ("tdd", "fdd"):
    env = AuvEnv(EnvConfig(mode=mode, k_nodes=3), seed=0)
    print(mode.upper(), "nodes at", env.node_positions.tolist())
    for name in ("rw", "rr", "ga"):
        m = run_episode(env, make_baseline(name, seed=0))
        print(f"  {name}: AoI {m.mean_aoi:6.2f}  harvested {m.total_harvested:7.0f} J  "
              f"Jain {m.jain:.3f}  uplinks {m.uplinks}")

# a trace is one JSON object per step
trace = []
run_episode(AuvEnv(EnvConfig(mode="fdd"), seed=0), make_baseline("rr"), trace=trace)
print(json.dumps(json.loads(trace[0]), indent=1))
