"""TDD feasibility and the optimal time-splitting factor, plus FDD slot energies.

In TDD a slot of length tau is split into beta*tau of charging followed by
(1 - beta)*tau of uplink on the same carrier. Simultaneous charging and
uplink succeeds when the harvested energy covers the transmit energy, which
rewrites to ``g(beta) >= h(d)`` with g strictly increasing in beta.
"""
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .acoustics import attenuation, harvest_power_at, source_level
from .uplink import required_energy_exact

BETA_LO = 0.1
BETA_HI = 0.9


@dataclass(frozen=True)
class TddSplit:
    beta: float = 0.5
    tau: float = 25.0

    def __post_init__(self):
        if not BETA_LO <= self.beta <= BETA_HI:
            raise ValueError(f"beta must be in [{BETA_LO}, {BETA_HI}], got {self.beta}")

    @property
    def charging_time(self):
        return self.beta * self.tau

    @property
    def data_time(self):
        return (1.0 - self.beta) * self.tau


class BetaStatus(str, enum.Enum):
    ROOT = "root"
    ALWAYS_FEASIBLE = "always_feasible"
    INFEASIBLE = "infeasible"


class BetaStar(NamedTuple):
    beta: float
    status: BetaStatus


def g_of_beta(beta, cfg):
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0.0) or np.any(beta >= 1.0):
        raise ValueError("beta must lie in (0, 1)")
    x = cfg.bits / ((1.0 - beta) * cfg.tau * cfg.b)
    g = np.log10(beta / (1.0 - beta)) - np.log10(np.expm1(x * math.log(2.0)))
    return g if g.ndim else float(g)


def g_slope(beta, cfg):
    """Closed-form derivative of :func:`g_of_beta`."""
    beta = np.asarray(beta, dtype=float)
    c = cfg.bits / (cfg.tau * cfg.b)
    x = c / (1.0 - beta)
    two_x = 2.0**x
    return (1.0 / (beta * (1.0 - beta)) - two_x * math.log(2.0) * c / (1.0 - beta) ** 2 / (two_x - 1.0)) / math.log(10.0)


def kappa2(acfg):
    return acfg.eta / (4.0 * acfg.rp) * 10.0 ** ((acfg.rvs + source_level(acfg) - acfg.nl) / 10.0)


def kappa3(acfg):
    return kappa2(acfg) * 10.0 ** (-acfg.nl / 10.0)


def h_of_d(d, f_khz, cfg, acfg):
    h = np.asarray(attenuation(d, f_khz, acfg)) / 5.0 - math.log10(kappa3(acfg))
    return h if h.ndim else float(h)


def tdd_energies(d, beta, cfg, acfg, f_khz=None):
    """(harvested, required) energy in J for one TDD slot at distance ``d``."""
    f = acfg.f_charging_khz if f_khz is None else f_khz
    e_harv = harvest_power_at(d, f, acfg) * (np.asarray(beta) * cfg.tau)
    e_req = required_energy_exact(d, beta, cfg, acfg, f_khz=f)
    return e_harv, e_req


def fdd_energies(d_wet, d_data, cfg, acfg):
    """(harvested, required) energy in J for one FDD slot.

    Charging uses the full slot on the charging band; the uplink uses the
    full slot on the data band, so the two never compete for time.
    """
    e_harv = harvest_power_at(d_wet, acfg.f_charging_khz, acfg) * cfg.tau
    e_req = required_energy_exact(d_data, 0.0, cfg, acfg, f_khz=acfg.f_data_khz)
    return e_harv, e_req


def tdd_feasible(d, beta, cfg, acfg, f_khz=None):
    """True when the charging part of the slot pays for the uplink part."""
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        return False
    e_harv, e_req = tdd_energies(d, beta, cfg, acfg, f_khz)
    return bool(e_harv >= e_req)


def bisect_increasing(fn, lo, hi, tol=1e-9, max_iter=200):
    """Root of an increasing function with fn(lo) < 0 <= fn(hi)."""
    f_lo = fn(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if abs(f_mid) < tol or hi - lo < 1e-15:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_beta_star(d, f_khz, cfg, acfg, beta_lo=BETA_LO, beta_hi=BETA_HI, tol=1e-9):
    """Smallest splitting factor in [beta_lo, beta_hi] that makes the slot self-powering."""
    h = h_of_d(d, f_khz, cfg, acfg)
    if g_of_beta(beta_lo, cfg) >= h:
        return BetaStar(beta_lo, BetaStatus.ALWAYS_FEASIBLE)
    if g_of_beta(beta_hi, cfg) < h:
        return BetaStar(beta_hi, BetaStatus.INFEASIBLE)
    root = bisect_increasing(lambda b: g_of_beta(b, cfg) - h, beta_lo, beta_hi, tol=tol)
    return BetaStar(root, BetaStatus.ROOT)
