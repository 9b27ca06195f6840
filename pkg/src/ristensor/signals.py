"""Training schedules and received-signal synthesis.

A training frame is B blocks of L pilot symbols; the RIS holds one phase
pattern per block.  The two-stage scheme prepends a RIS-OFF stage of length
off_stage_len, the joint scheme keeps the RIS on for all B = N + 1 blocks.
Block b of the noiseless frame is (H_ua + H_ra * diag(psi_b) * H_ur) @ X.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .tensor_ops import crandn, dft_matrix, khatri_rao, row_diag

MODES = ("two_stage", "e_als")


@dataclass
class SystemConfig:
    m_ap: int = 4              # AP antennas
    k_users: int = 8
    n_ris: int = 25
    pilot_len: int = 8         # L, pilots per block
    off_stage_len: int = 8     # L', RIS-OFF stage (two_stage only)
    snr_db: float = 30.0
    noise_var: float = 1.0     # sigma^2; SNR is swept through the pilot power

    def __post_init__(self):
        for name in ("m_ap", "k_users", "n_ris", "pilot_len", "off_stage_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.pilot_len < self.k_users:
            raise ValueError("pilot_len must be >= k_users for full-row-rank pilots")
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")

    @property
    def power(self):
        """Per-user transmit power realizing snr_db against noise_var."""
        # noise_var = 0 keeps the unit-noise power scale so noiseless runs
        # still have a usable pilot amplitude
        base = self.noise_var if self.noise_var > 0 else 1.0
        return base * 10.0 ** (self.snr_db / 10.0)

    def blocks(self, mode):
        _check_mode(mode)
        return self.n_ris if mode == "two_stage" else self.n_ris + 1

    def training_len(self, mode):
        """Total training symbols T; identical across modes when off_stage_len == pilot_len."""
        _check_mode(mode)
        extra = self.off_stage_len if mode == "two_stage" else 0
        return extra + self.blocks(mode) * self.pilot_len

    def validate_for(self, mode):
        m, k, n, l = self.m_ap, self.k_users, self.n_ris, self.pilot_len
        b = self.blocks(mode)
        if mode == "two_stage" and m * l * b < n * (m + l):
            raise ValueError("two_stage needs M*L*B >= N*(M+L) for full-rank factors")
        if mode == "e_als" and b * l < n + k:
            raise ValueError("e_als needs B*L >= N+K for a full-row-rank stacked regressor")


@dataclass
class TrainingSchedule:
    pilots: np.ndarray               # X, (K, L)
    ris_phases: np.ndarray           # Psi, (B, N), unit modulus
    off_pilots: np.ndarray = None    # X bar, (K, L'), two_stage only

    @property
    def blocks(self):
        return self.ris_phases.shape[0]


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")


def make_pilots(k, l, power):
    """First k rows of an l x l DFT matrix scaled by sqrt(power); X X^H = l*power*I_k."""
    if l < k:
        raise ValueError(f"need at least as many pilot symbols as users, got l={l} < k={k}")
    return np.sqrt(power) * dft_matrix(l)[:k, :]


def make_phase_schedule(n, mode):
    """RIS phase rows: DFT(n) for two_stage, DFT(n+1) minus its ones column for e_als."""
    _check_mode(mode)
    if mode == "two_stage":
        return dft_matrix(n)
    return dft_matrix(n + 1)[:, 1:]


def make_schedule(cfg, mode):
    """Full training schedule for a mode; off-stage pilots reuse the DFT construction."""
    cfg.validate_for(mode)
    pilots = make_pilots(cfg.k_users, cfg.pilot_len, cfg.power)
    phases = make_phase_schedule(cfg.n_ris, mode)
    off = None
    if mode == "two_stage":
        off = make_pilots(cfg.k_users, cfg.off_stage_len, cfg.power)
    return TrainingSchedule(pilots=pilots, ris_phases=phases, off_pilots=off)


@dataclass
class ReceiveTensor:
    tensor: np.ndarray              # (M, L, B)
    off_stage: np.ndarray = None    # V, (M, L'), present iff the schedule has an OFF stage


def synthesize(channels, sched, cfg, rng):
    """Noisy received frame for one channel realization.

    Noise is one CN(0, noise_var) draw of shape (M, T) consumed in time order
    (OFF stage first, then block by block), so schedules with equal (M, T)
    fed from identically seeded generators see the same noise realization.
    """
    m, l = cfg.m_ap, cfg.pilot_len
    b = sched.blocks
    x = sched.pilots
    if channels.h_ua.shape != (m, cfg.k_users):
        raise ValueError(f"direct channel shape {channels.h_ua.shape} does not match config")
    if sched.ris_phases.shape[1] != cfg.n_ris or x.shape != (cfg.k_users, l):
        raise ValueError("schedule shapes do not match config")

    t_total = (sched.off_pilots.shape[1] if sched.off_pilots is not None else 0) + b * l
    noise = np.sqrt(cfg.noise_var) * crandn(rng, (m, t_total))

    off = None
    cursor = 0
    if sched.off_pilots is not None:
        l_off = sched.off_pilots.shape[1]
        off = channels.h_ua @ sched.off_pilots + noise[:, :l_off]
        cursor = l_off

    tensor = np.empty((m, l, b), dtype=complex)
    direct = channels.h_ua @ x
    for blk in range(b):
        ris_part = channels.h_ra @ row_diag(sched.ris_phases, blk) @ channels.h_ur @ x
        tensor[:, :, blk] = direct + ris_part + noise[:, cursor : cursor + l]
        cursor += l
    return ReceiveTensor(tensor=tensor, off_stage=off)


def model_unfoldings(channels, sched):
    """Noiseless mode-1 and mode-2 unfoldings straight from the factor matrices."""
    b = sched.blocks
    k = channels.h_ua.shape[1]
    z = channels.h_ur @ sched.pilots
    ones = np.ones((b, k))
    y1 = channels.h_ua @ khatri_rao(ones, sched.pilots.T).T \
        + channels.h_ra @ khatri_rao(sched.ris_phases, z.T).T
    y2 = sched.pilots.T @ khatri_rao(ones, channels.h_ua).T \
        + z.T @ khatri_rao(sched.ris_phases, channels.h_ra).T
    return y1, y2


def noiseless_tensor(channels, sched, cfg):
    """Synthesize with the noise generator disabled; convenience for model checks."""
    quiet = dataclasses.replace(cfg, noise_var=0.0)
    return synthesize(channels, sched, quiet, np.random.default_rng(0))
