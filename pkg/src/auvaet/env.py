"""Episodic grid-world MDP: one AUV charging and polling K underwater nodes.

The AUV moves one cell per slot along one of six axis directions. In TDD
mode it picks a single node that is charged for part of the slot and then
uplinks for the rest; in FDD mode it charges one node and polls another on
separate carriers for the full slot.
"""
import enum
import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .acoustics import AcousticConfig, harvest_power_at
from .duplex import BETA_HI, BETA_LO
from .uplink import UplinkConfig, required_energy_exact


class Mode(str, enum.Enum):
    TDD = "tdd"
    FDD = "fdd"


class Direction(enum.IntEnum):
    RIGHT = 0
    LEFT = 1
    UP = 2
    DOWN = 3
    FORWARD = 4
    BACKWARD = 5


# Not part of the learnable action set; lets scripted baselines park.
HOLD = 6
N_DIRECTIONS = 6

MOVES = np.array(
    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1], [0, 0, 0]], dtype=np.int64
)


@dataclass(frozen=True)
class GridSpec:
    dims: tuple = (10, 10, 4)
    cell_size: float = 100.0  # m
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError(f"dims must be three positive cell counts, got {self.dims}")

    @property
    def n_cells(self):
        return int(np.prod(self.dims))

    @property
    def center(self):
        return tuple(n // 2 for n in self.dims)

    def contains(self, cell):
        return all(0 <= c < n for c, n in zip(cell, self.dims))

    def world(self, cell):
        return np.asarray(self.origin) + self.cell_size * np.asarray(cell, dtype=float)

    def all_cells(self):
        nx, ny, nz = self.dims
        return np.stack(np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"), -1).reshape(-1, 3)

    def flat_index(self, cell):
        nx, ny, nz = self.dims
        return (int(cell[0]) * ny + int(cell[1])) * nz + int(cell[2])


@dataclass(frozen=True)
class Penalties:
    loc: float = 50.0
    wrong_indice: float = 20.0
    occ: float = 10.0
    no_indices: float = 5.0
    only_charging: float = 10.0
    only_transmitting: float = 5.0

    def __post_init__(self):
        if min(vars(self).values()) < 0:
            raise ValueError("penalties must be non-negative")


@dataclass(frozen=True)
class EnvConfig:
    mode: Mode = Mode.TDD
    k_nodes: int = 3
    grid: GridSpec = field(default_factory=GridSpec)
    acoustic: AcousticConfig = field(default_factory=AcousticConfig)
    uplink: UplinkConfig = field(default_factory=UplinkConfig)
    beta: float = 0.5
    adaptive_beta: bool = False
    penalties: Penalties = field(default_factory=Penalties)
    a_max: int = 50
    e_cap: float = 2000.0  # J
    e_init: float = 0.0  # J
    total_time: float = 2500.0  # s
    node_positions: Optional[tuple] = None
    weights: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "beta", float(min(max(self.beta, BETA_LO), BETA_HI)))
        if self.k_nodes < 1:
            raise ValueError("k_nodes must be at least 1")
        if self.k_nodes > self.grid.n_cells - 1:
            raise ValueError(f"{self.k_nodes} nodes do not fit in {self.grid.n_cells - 1} free cells")
        if self.node_positions is not None:
            pos = tuple(tuple(int(c) for c in p) for p in self.node_positions)
            if len(pos) != self.k_nodes or not all(self.grid.contains(p) for p in pos):
                raise ValueError("node_positions must give k_nodes cells inside the grid")
            object.__setattr__(self, "node_positions", pos)
        if self.weights is not None and len(self.weights) != self.k_nodes:
            raise ValueError("weights must have one entry per node")
        if not 0.0 <= self.e_init <= self.e_cap:
            raise ValueError("e_init must lie in [0, e_cap]")

    @property
    def horizon_steps(self):
        return int(round(self.total_time / self.uplink.tau))

    @property
    def obs_dim(self):
        return 3 + 2 * self.k_nodes

    @property
    def action_dims(self):
        k = self.k_nodes
        return (N_DIRECTIONS, k) if self.mode is Mode.TDD else (N_DIRECTIONS, k, k)


@dataclass(frozen=True)
class Action:
    """Movement plus node choice.

    ``node`` is the uplink node; in TDD it is also the charged node. FDD
    actions carry a separate ``wet_node`` for energy transfer.
    """

    direction: int
    node: int
    wet_node: Optional[int] = None

    @classmethod
    def from_array(cls, mode, a):
        a = [int(x) for x in a]
        if Mode(mode) is Mode.TDD:
            return cls(a[0], a[1])
        # head order: direction, charged node, polled node
        return cls(a[0], a[2], wet_node=a[1])

    def to_array(self):
        if self.wet_node is None:
            return np.array([self.direction, self.node], dtype=np.int64)
        return np.array([self.direction, self.wet_node, self.node], dtype=np.int64)


@dataclass(frozen=True)
class NodeState:
    position: tuple
    aoi: int
    energy: float
    collected_count: int
    weight: float


@dataclass
class EnvState:
    auv_pos: np.ndarray
    aoi: np.ndarray
    energy: np.ndarray
    counts: np.ndarray
    t: int
    horizon_steps: int
    node_positions: np.ndarray
    weights: np.ndarray

    @property
    def nodes(self):
        return [
            NodeState(tuple(int(c) for c in p), int(a), float(e), int(n), float(w))
            for p, a, e, n, w in zip(self.node_positions, self.aoi, self.energy, self.counts, self.weights)
        ]

    def copy(self):
        return EnvState(
            self.auv_pos.copy(), self.aoi.copy(), self.energy.copy(), self.counts.copy(),
            self.t, self.horizon_steps, self.node_positions, self.weights,
        )

    def same_as(self, other):
        return (
            self.t == other.t
            and np.array_equal(self.auv_pos, other.auv_pos)
            and np.array_equal(self.aoi, other.aoi)
            and np.array_equal(self.energy, other.energy)
            and np.array_equal(self.counts, other.counts)
        )


@dataclass(frozen=True)
class RewardBreakdown:
    base: float
    rho_location: float = 0.0
    rho_information: float = 0.0
    rho_occurrence: float = 0.0

    @property
    def penalty(self):
        return self.rho_location + self.rho_information + self.rho_occurrence

    @property
    def total(self):
        return self.base - self.penalty

    def as_dict(self):
        return {
            "base": self.base,
            "rho_location": self.rho_location,
            "rho_information": self.rho_information,
            "rho_occurrence": self.rho_occurrence,
            "total": self.total,
        }


@dataclass(frozen=True)
class StepInfo:
    charged_node: Optional[int]
    uplink_node: Optional[int]
    e_r: float
    e_c: float
    beta_eff: Optional[float]
    out_of_bounds: bool


class Transition(NamedTuple):
    state: EnvState
    obs: np.ndarray
    reward: RewardBreakdown
    done: bool
    info: StepInfo


def jain_index(counts):
    """Jain's fairness index of per-node collection counts; 1 for all zeros."""
    d = np.asarray(counts, dtype=float)
    sq = float(np.dot(d, d))
    if sq == 0.0:
        return 1.0
    s = float(d.sum())
    return s * s / (d.size * sq)


def place_nodes(grid, k, seed, exclude=None):
    """Seeded uniform placement of ``k`` nodes on distinct cells."""
    rng = np.random.default_rng(seed)
    cells = grid.all_cells()
    if exclude is not None:
        cells = cells[np.any(cells != np.asarray(exclude), axis=1)]
    idx = rng.choice(len(cells), size=k, replace=False)
    return cells[np.sort(idx)]


class AuvEnv:
    """Single-AUV charging and data-collection environment.

    The node layout is fixed at construction (from ``config.node_positions``
    or from ``seed``). ``reset(seed)`` with a new seed re-draws it.
    """

    def __init__(self, config=None, seed=0):
        self.config = config or EnvConfig()
        self.seed = seed
        self.state = None
        self._layout(seed)

    def _layout(self, seed):
        cfg = self.config
        grid = cfg.grid
        if cfg.node_positions is not None:
            self.node_positions = np.array(cfg.node_positions, dtype=np.int64)
        else:
            self.node_positions = place_nodes(grid, cfg.k_nodes, seed, exclude=grid.center)
        self.weights = np.ones(cfg.k_nodes) if cfg.weights is None else np.asarray(cfg.weights, dtype=float)

        # per (cell, node) link quantities; distances between cell centres
        cells = grid.all_cells()
        dist = grid.cell_size * np.linalg.norm(cells[:, None, :] - self.node_positions[None, :, :], axis=-1)
        self.distances = dist
        ac, up = cfg.acoustic, cfg.uplink
        tau = up.tau
        p_charge = harvest_power_at(dist, ac.f_charging_khz, ac)
        self._harvest_full = p_charge * tau
        if cfg.mode is Mode.TDD:
            # one carrier for both directions in TDD
            self._harvest_split = p_charge * cfg.beta * tau
            self._req_split = required_energy_exact(dist, cfg.beta, up, ac, f_khz=ac.f_charging_khz)
            self._req_full = required_energy_exact(dist, 0.0, up, ac, f_khz=ac.f_charging_khz)
        else:
            self._req_full = required_energy_exact(dist, 0.0, up, ac, f_khz=ac.f_data_khz)

    def reset(self, seed=None):
        if seed is not None and seed != self.seed:
            self.seed = seed
            self._layout(seed)
        cfg = self.config
        k = cfg.k_nodes
        self.state = EnvState(
            auv_pos=np.array(cfg.grid.center, dtype=np.int64),
            aoi=np.ones(k, dtype=np.int64),
            energy=np.full(k, float(cfg.e_init)),
            counts=np.zeros(k, dtype=np.int64),
            t=0,
            horizon_steps=cfg.horizon_steps,
            node_positions=self.node_positions,
            weights=self.weights,
        )
        return self.observe(self.state)

    def observe(self, state=None):
        s = self.state if state is None else state
        cfg = self.config
        return np.concatenate(
            [s.auv_pos / np.asarray(cfg.grid.dims, dtype=float), s.aoi / cfg.a_max, s.energy / cfg.e_cap]
        )

    def feasible_nodes(self, state=None):
        """Nodes whose stored energy covers a full-slot uplink from the AUV's cell."""
        s = self.state if state is None else state
        c = self.config.grid.flat_index(s.auv_pos)
        return np.flatnonzero(s.energy >= self._req_full[c])

    def required_energy(self, state=None):
        """Per-node uplink energy at the AUV's current cell for the nominal slot split."""
        s = self.state if state is None else state
        c = self.config.grid.flat_index(s.auv_pos)
        return (self._req_split if self.config.mode is Mode.TDD else self._req_full)[c]

    def harvest_per_slot(self, state=None):
        s = self.state if state is None else state
        c = self.config.grid.flat_index(s.auv_pos)
        if self.config.mode is Mode.TDD:
            return self._harvest_split[c]
        return self._harvest_full[c]

    def step(self, action):
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        s = self.state
        if s.t >= s.horizon_steps:
            raise RuntimeError("episode is done; call reset()")
        cfg = self.config
        if not isinstance(action, Action):
            action = Action.from_array(cfg.mode, action)
        k_nodes = cfg.k_nodes
        if not 0 <= action.direction <= HOLD:
            raise ValueError(f"invalid direction {action.direction}")
        if not 0 <= action.node < k_nodes:
            raise ValueError(f"invalid node index {action.node}")
        if cfg.mode is Mode.FDD:
            if action.wet_node is None or not 0 <= action.wet_node < k_nodes:
                raise ValueError(f"FDD action needs a valid wet_node, got {action.wet_node}")
        elif action.wet_node is not None and action.wet_node != action.node:
            raise ValueError("TDD actions charge and poll the same node")

        pen = cfg.penalties
        nxt = s.copy()
        target = s.auv_pos + MOVES[action.direction]
        out_of_bounds = not cfg.grid.contains(target)
        if not out_of_bounds:
            nxt.auv_pos = target
        rho_loc = pen.loc if out_of_bounds else 0.0

        c = cfg.grid.flat_index(nxt.auv_pos)
        energy = nxt.energy
        k = action.node
        uplinked = False
        e_r = e_c = 0.0
        rho_info = 0.0
        beta_eff = None

        if cfg.mode is Mode.TDD:
            charged = k
            stored = energy[k]
            if cfg.adaptive_beta and stored >= cfg.e_cap:
                beta_eff = 0.0
                if stored >= self._req_full[c, k]:
                    uplinked, e_c = True, float(self._req_full[c, k])
                    rho_info = pen.only_transmitting
                else:
                    beta_eff = 1.0
                    rho_info = pen.only_charging
            else:
                beta_eff = cfg.beta
                e_r = min(float(self._harvest_split[c, k]), cfg.e_cap - stored)
                if stored + e_r >= self._req_split[c, k]:
                    uplinked, e_c = True, float(self._req_split[c, k])
                else:
                    beta_eff = 1.0
                    e_r = min(float(self._harvest_full[c, k]), cfg.e_cap - stored)
                    rho_info = pen.only_charging
            energy[k] = stored + e_r - e_c
        else:
            charged = action.wet_node
            feasible = energy >= self._req_full[c]
            if feasible[k]:
                uplinked, e_c = True, float(self._req_full[c, k])
                energy[k] -= e_c
            elif feasible.any():
                rho_info = pen.wrong_indice
            else:
                rho_info = pen.no_indices
            e_r = min(float(self._harvest_full[c, charged]), cfg.e_cap - energy[charged])
            energy[charged] += e_r

        # floating round-off guard; never moves energy by more than an ulp-scale amount
        np.clip(energy, 0.0, cfg.e_cap, out=energy)

        nxt.aoi = np.minimum(s.aoi + 1, cfg.a_max)
        if uplinked:
            nxt.aoi[k] = 1
            nxt.counts[k] += 1
        nxt.t = s.t + 1

        rho_occ = pen.occ if nxt.counts[k] > s.horizon_steps / k_nodes else 0.0
        discrimination = 1.0 - jain_index(nxt.counts)
        base = -(discrimination / k_nodes) * float(np.dot(nxt.weights, nxt.aoi))
        reward = RewardBreakdown(base, rho_loc, rho_info, rho_occ)

        self.state = nxt
        info = StepInfo(
            charged_node=None if beta_eff == 0.0 else int(charged),
            uplink_node=int(k) if uplinked else None,
            e_r=float(e_r),
            e_c=float(e_c),
            beta_eff=beta_eff,
            out_of_bounds=out_of_bounds,
        )
        return Transition(nxt, self.observe(nxt), reward, nxt.t == s.horizon_steps, info)


def tabular_key(state):
    """Hashable discretised state (1 J energy bins) for tabular debugging."""
    return (
        tuple(int(c) for c in state.auv_pos),
        tuple(int(a) for a in state.aoi),
        tuple(int(e) for e in np.floor(state.energy)),
    )


def trace_record(step, state, action, reward):
    """One line of an episode trace (JSON text)."""
    return json.dumps(
        {
            "step": int(step),
            "auv_pos": [int(c) for c in state.auv_pos],
            "action": [int(a) for a in action.to_array()],
            "aoi": [int(a) for a in state.aoi],
            "energy": [float(e) for e in state.energy],
            "reward": reward.as_dict(),
        },
        sort_keys=True,
    )
