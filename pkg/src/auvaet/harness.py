"""Experiment orchestration: configs, seeded runs, metric tables and curve files."""
import csv
import dataclasses
import enum
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .acoustics import AcousticConfig
from .duplex import BETA_HI, solve_beta_star, tdd_energies
from .env import AuvEnv, EnvConfig, GridSpec, Mode, Penalties, jain_index, trace_record
from .policies import make_baseline
from .ppo import PpoHyperparams, PpoPolicy, load_checkpoint, train
from .uplink import UplinkConfig, kappa, required_energy_approx, required_energy_exact

OUTPUT_ENV_VAR = "AUVAET_OUTPUT_DIR"
POLICY_NAMES = ("rw", "rr", "ga", "ppo")
JAIN_MIN = 0.85

# Reference values of the true/approximate uplink energy comparison at 40 kHz.
TABLE3_DISTANCES = (100, 200, 300, 700, 800, 900)
TABLE3_BETAS = (0.1, 0.5, 0.9)
TABLE3_APPROX = (62.0503, 92.6695, 132.5527, 494.0117, 678.3817, 929.3624)
TABLE3_EXACT = (
    (62.0819, 62.1075, 62.3377),
    (92.7167, 92.7548, 93.0986),
    (132.6202, 132.6747, 133.1665),
    (494.2635, 494.4666, 496.2996),
    (678.7274, 679.0063, 681.5234),
    (929.8360, 930.2181, 933.6665),
)
TABLE3_KAPPA = 23.105
TABLE3_RTOL = 5e-3


@dataclass(frozen=True)
class ExperimentConfig:
    mode: Mode = Mode.TDD
    k_nodes: int = 3
    grid: GridSpec = field(default_factory=GridSpec)
    acoustic: AcousticConfig = field(default_factory=AcousticConfig)
    uplink: UplinkConfig = field(default_factory=UplinkConfig)
    beta_nominal: float = 0.5
    adaptive_beta: bool = False
    penalties: Penalties = field(default_factory=Penalties)
    a_max: int = 50
    e_cap: float = 2000.0
    e_init: float = 0.0
    total_time: float = 2500.0
    node_positions: Optional[tuple] = None
    ppo: Optional[PpoHyperparams] = None
    seeds: tuple = (0,)
    policies: tuple = ("rw", "rr", "ga")
    output_dir: Optional[str] = None
    jain_min: float = JAIN_MIN

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if isinstance(self.policies, str):
            object.__setattr__(self, "policies", (self.policies,))
        object.__setattr__(self, "policies", tuple(self.policies))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        bad = [p for p in self.policies if p not in POLICY_NAMES]
        if bad:
            raise ValueError(f"unknown policy {bad[0]!r}; choose from {', '.join(POLICY_NAMES)}")
        if self.ppo is None:
            hp = PpoHyperparams.tdd() if self.mode is Mode.TDD else PpoHyperparams.fdd()
            object.__setattr__(self, "ppo", hp)
        self.env_config()  # validates the environment part

    def env_config(self):
        return EnvConfig(
            mode=self.mode,
            k_nodes=self.k_nodes,
            grid=self.grid,
            acoustic=self.acoustic,
            uplink=self.uplink,
            beta=self.beta_nominal,
            adaptive_beta=self.adaptive_beta,
            penalties=self.penalties,
            a_max=self.a_max,
            e_cap=self.e_cap,
            e_init=self.e_init,
            total_time=self.total_time,
            node_positions=self.node_positions,
        )

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        def plain(x):
            if dataclasses.is_dataclass(x):
                return {f.name: plain(getattr(x, f.name)) for f in dataclasses.fields(x)}
            if isinstance(x, enum.Enum):
                return x.value
            if isinstance(x, (tuple, list)):
                return [plain(v) for v in x]
            return x

        return plain(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data or {})
        sections = {
            "grid": GridSpec,
            "acoustic": AcousticConfig,
            "uplink": UplinkConfig,
            "penalties": Penalties,
        }
        kwargs = {}
        for key, value in data.items():
            if key in sections:
                kwargs[key] = sections[key](**(value or {}))
            elif key == "ppo":
                continue
            elif key in {f.name for f in dataclasses.fields(cls)}:
                kwargs[key] = value
            else:
                raise ValueError(f"unknown config key {key!r}")
        mode = Mode(kwargs.get("mode", Mode.TDD))
        base = PpoHyperparams.tdd if mode is Mode.TDD else PpoHyperparams.fdd
        if "node_positions" in kwargs and kwargs["node_positions"] is not None:
            kwargs["node_positions"] = tuple(tuple(p) for p in kwargs["node_positions"])
        kwargs["ppo"] = base(**(data.get("ppo") or {}))
        return cls(**kwargs)


def load_config(path=None, **overrides):
    """Read a YAML experiment file; missing keys fall back to the defaults."""
    data = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def default_output_dir(config=None):
    if config is not None and config.output_dir:
        return Path(config.output_dir)
    return Path(os.environ.get(OUTPUT_ENV_VAR, "runs"))


# ---------------------------------------------------------------------------
# episodes and metrics


@dataclass(frozen=True)
class EpisodeMetrics:
    mean_aoi: float
    total_harvested: float
    jain: float
    cumulative_reward: float
    rho_location: float
    rho_information: float
    rho_occurrence: float
    uplinks: int


def run_episode(env, policy, trace=None):
    """Roll one full episode from ``env.reset()``; optionally append JSON lines to ``trace``."""
    env.reset()
    aoi_means = []
    harvested = reward = 0.0
    pen = np.zeros(3)
    done = False
    while not done:
        decision = policy(env)
        tr = env.step(decision.action)
        r = tr.reward
        aoi_means.append(float(tr.state.aoi.mean()))
        harvested += tr.info.e_r
        reward += r.total
        pen += (r.rho_location, r.rho_information, r.rho_occurrence)
        if trace is not None:
            trace.append(trace_record(tr.state.t, tr.state, decision.action, r))
        done = tr.done
    return EpisodeMetrics(
        mean_aoi=float(np.mean(aoi_means)),
        total_harvested=float(harvested),
        jain=jain_index(env.state.counts),
        cumulative_reward=float(reward),
        rho_location=float(pen[0]),
        rho_information=float(pen[1]),
        rho_occurrence=float(pen[2]),
        uplinks=int(env.state.counts.sum()),
    )


METRIC_COLUMNS = (
    "seed", "policy", "mode", "k_nodes", "mean_aoi", "total_harvested", "jain",
    "cumulative_reward", "rho_location", "rho_information", "rho_occurrence",
    "uplinks", "below_jain_min",
)

TRAIN_LOG_COLUMNS = ("episode", "cumulative_reward", "mean_aoi", "harvested_energy", "jain")


def fmt(x):
    """Locale-independent text for a CSV cell."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".10g")
    return str(x)


def to_csv(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def write_csv(path, rows, columns):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(rows, columns), encoding="utf-8")
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def train_agent(config, seed, checkpoint_path=None):
    env_cfg = config.env_config()
    return train(lambda i: AuvEnv(env_cfg, seed=seed), config.ppo, seed, checkpoint_path=checkpoint_path)


def _run_cell(args):
    config, seed, name, checkpoint = args
    env = AuvEnv(config.env_config(), seed=seed)
    if name == "ppo":
        if checkpoint is not None:
            params, _ = load_checkpoint(checkpoint, env.config)
        else:
            params = train_agent(config, seed).params
        policy = PpoPolicy(params, greedy=True)
    else:
        policy = make_baseline(name, seed)
    m = run_episode(env, policy)
    row = {"seed": seed, "policy": name, "mode": config.mode.value, "k_nodes": config.k_nodes}
    row.update(dataclasses.asdict(m))
    row["below_jain_min"] = m.jain < config.jain_min
    return row


def run_experiment(config, out_dir=None, checkpoints=None, n_jobs=1):
    """One metrics row per (seed, policy), in that order.

    PPO cells train on the seed's layout and are then evaluated greedily
    (argmax of every head). ``checkpoints`` may map seed -> checkpoint path to
    skip training. Rows whose Jain index is below ``config.jain_min`` are
    flagged, not dropped.
    """
    checkpoints = checkpoints or {}
    cells = [(config, s, p, checkpoints.get(s)) for s in config.seeds for p in config.policies]
    if n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        metrics = write_csv(out / "metrics.csv", rows, METRIC_COLUMNS)
        write_manifest(out / "manifest.json", config, [metrics])
    return rows


def summarize(rows, stat=np.median):
    """Per-policy aggregate (median by default) of the numeric metric columns."""
    out = {}
    for name in dict.fromkeys(r["policy"] for r in rows):
        sel = [r for r in rows if r["policy"] == name]
        out[name] = {
            c: float(stat([float(r[c]) for r in sel]))
            for c in ("mean_aoi", "total_harvested", "jain", "cumulative_reward")
        }
    return out


def write_manifest(path, config, artifacts):
    manifest = {
        "package_version": __version__,
        "config": config.to_dict(),
        "seeds": list(config.seeds),
        "artifacts": {
            Path(a).name: hashlib.sha256(Path(a).read_bytes()).hexdigest() for a in artifacts
        },
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


# ---------------------------------------------------------------------------
# closed-form curves


BETA_CURVE_COLUMNS = ("f_khz", "d_m", "beta_star", "status")
ENERGY_CURVE_COLUMNS = ("beta", "d_m", "e_harv", "e_req_exact", "e_req_approx")
TABLE3_COLUMNS = (
    "d_m", "approx", "approx_ref", "exact_b0.1", "exact_b0.5", "exact_b0.9",
    "ref_b0.1", "ref_b0.5", "ref_b0.9", "max_rel_err",
)


def beta_curves(config=None, frequencies=(10, 20, 40, 60), d_range=None, out=None):
    config = config or ExperimentConfig()
    d_range = np.arange(100, 1001, 10) if d_range is None else d_range
    rows = []
    for f in frequencies:
        for d in d_range:
            sol = solve_beta_star(float(d), float(f), config.uplink, config.acoustic)
            rows.append({"f_khz": float(f), "d_m": float(d), "beta_star": sol.beta, "status": sol.status.value})
    if out is not None:
        write_csv(out, rows, BETA_CURVE_COLUMNS)
    return rows


def cap_distance(rows, f_khz, cap=BETA_HI):
    """First distance at which the optimal splitting factor reaches the cap."""
    for r in rows:
        if r["f_khz"] == f_khz and r["beta_star"] >= cap - 1e-9:
            return r["d_m"]
    return float("inf")


def energy_curves(config=None, betas=(0.1, 0.5, 0.9), d_range=None, f_khz=None, out=None):
    """Harvested vs required energy per TDD slot over distance (same carrier both ways)."""
    config = config or ExperimentConfig()
    d_range = np.arange(100, 1001, 10) if d_range is None else d_range
    f = config.acoustic.f_charging_khz if f_khz is None else f_khz
    d = np.asarray(d_range, dtype=float)
    rows = []
    approx = required_energy_approx(d, config.uplink, config.acoustic, f_khz=f)
    for b in betas:
        e_harv, e_req = tdd_energies(d, b, config.uplink, config.acoustic, f_khz=f)
        for i in range(d.size):
            rows.append({"beta": float(b), "d_m": float(d[i]), "e_harv": float(e_harv[i]),
                         "e_req_exact": float(e_req[i]), "e_req_approx": float(approx[i])})
    if out is not None:
        write_csv(out, rows, ENERGY_CURVE_COLUMNS)
    return rows


def table3(config=None, f_khz=40.0):
    """Exact vs first-order uplink energy at the reference distances.

    Returns ``(rows, kappa_value, ok)`` where ``ok`` means every entry is
    within 0.5 % of the reference values and kappa is within 0.01.
    """
    config = config or ExperimentConfig()
    up, ac = config.uplink, config.acoustic
    rows = []
    ok = True
    for d, ref_a, ref_e in zip(TABLE3_DISTANCES, TABLE3_APPROX, TABLE3_EXACT):
        approx = required_energy_approx(d, up, ac, f_khz=f_khz)
        exact = [required_energy_exact(d, b, up, ac, f_khz=f_khz) for b in TABLE3_BETAS]
        errs = [abs(approx - ref_a) / ref_a] + [abs(e - r) / r for e, r in zip(exact, ref_e)]
        row = {"d_m": d, "approx": approx, "approx_ref": ref_a, "max_rel_err": max(errs)}
        for b, e, r in zip(TABLE3_BETAS, exact, ref_e):
            row[f"exact_b{b}"] = e
            row[f"ref_b{b}"] = r
        rows.append(row)
        ok &= max(errs) < TABLE3_RTOL
    k = kappa(up, ac)
    ok &= abs(k - TABLE3_KAPPA) < 0.01
    return rows, k, bool(ok)
