"""Link budget and training design of the stock scenario.

Prints the per-link pathloss, the gains actually applied to the channel draws,
the pilot orthogonality property, and the RIS phase schedules of the two
training modes — including the shared training budget of 208 slots.
"""

import numpy as np

from ristensor import (
    ChannelModelConfig,
    SystemConfig,
    dft_matrix,
    link_gains,
    make_schedule,
    pathloss,
)

cfg = SystemConfig()
chan = ChannelModelConfig()

print("pathloss (distance-exponent model)")
for link, label in (("ua", "users -> AP"), ("ra", "RIS -> AP"), ("ur", "users -> RIS")):
    g = pathloss(chan, link)
    print(f"  {label:<14} {10 * np.log10(g):8.2f} dB")

gains = link_gains(chan)
print("applied gains (direct link normalized to 0 dB)")
for link in ("ua", "ra", "ur"):
    print(f"  {link}  {10 * np.log10(gains[link]):8.2f} dB")

print(f"\ntransmit power at {cfg.snr_db:g} dB SNR, unit noise: P = {cfg.power:g}")

for mode in ("two_stage", "e_als"):
    sched = make_schedule(cfg, mode)
    x = sched.pilots
    gram = x @ x.conj().T
    ortho = np.abs(gram - cfg.pilot_len * cfg.power * np.eye(cfg.k_users)).max()
    print(f"\n{mode}: {sched.blocks} blocks of {cfg.pilot_len} pilots", end="")
    if sched.off_pilots is not None:
        print(f" + {sched.off_pilots.shape[1]} RIS-OFF slots", end="")
    print(f" -> T = {cfg.training_len(mode)}")
    print(f"  pilot rows orthogonal: max |X X^H - L P I| = {ortho:.2e}")
    psi = sched.ris_phases
    print(f"  phase schedule {psi.shape}, unit modulus: {np.abs(np.abs(psi) - 1).max():.2e}")

# the e_als schedule is the DFT frame with its constant column removed, so
# prepending the all-ones column reconstitutes a full DFT matrix
sched = make_schedule(cfg, "e_als")
full = np.hstack([np.ones((cfg.n_ris + 1, 1)), sched.ris_phases])
print(f"\n[1 | Psi] equals the {cfg.n_ris + 1}-point DFT matrix: "
      f"{np.abs(full - dft_matrix(cfg.n_ris + 1)).max():.2e}")
