"""Walk through one acoustic link: source level, loss, received level, harvested power.

Then compare the exact uplink energy with its first-order approximation.
"""
import numpy as np

from auvaet.acoustics import AcousticConfig, received_level, thorp_absorption
from auvaet.uplink import UplinkConfig, kappa, required_energy_approx, required_energy_exact

ac = AcousticConfig()
up = UplinkConfig()

print("absorption at 10/40 kHz:", thorp_absorption(10.0), thorp_absorption(40.0), "dB/km")

for d in (100.0, 300.0, 900.0):
    lb = received_level(d, ac.f_charging_khz, ac)
    print(f"d={d:5.0f} m  SL={lb.sl:.1f}  AL={lb.al:.3f}  RL={lb.rl:.3f} dB  P={lb.p_harv:.4f} W")

# the uplink cost barely depends on how the slot is split
print("kappa =", kappa(up, ac))
d = np.array([100.0, 200.0, 300.0, 700.0, 800.0, 900.0])
approx = required_energy_approx(d, up, ac, f_khz=40.0)
for beta in (0.1, 0.5, 0.9):
    exact = required_energy_exact(d, beta, up, ac, f_khz=40.0)
    print(f"beta={beta}:", np.round(exact, 4), " max gap", np.max(np.abs(exact - approx) / approx))
print("approx:  ", np.round(approx, 4))
