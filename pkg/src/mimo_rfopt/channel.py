r"""Seedable i.i.d. complex Gaussian channels, antenna subsets, Gram stats.

Channel entries are circularly-symmetric CN(0, 1): real and imaginary
parts are independent N(0, 1/2) so each entry has unit total variance.

Reproducibility contract: every random quantity is keyed by
(master_seed, trial_index, stream). Trials can therefore run in any order
on any number of workers and still reproduce bit-identical values.
"""

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, chain_value

_SEED_MASK = (1 << 64) - 1

#: Sub-stream identifiers under one (master_seed, trial_index) pair.
CHANNEL_STREAM = 0
SELECTION_STREAM = 1
FROZEN_SELECTION_STREAM = 2


def _seed_sequence(*key) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(k) & _SEED_MASK for k in key])


def derive_seed(master_seed: int, trial_index: int, stream: int) -> int:
    """Collapse a (master_seed, trial, stream) key into one 64-bit seed."""
    return int(_seed_sequence(master_seed, trial_index, stream)
               .generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ChannelMatrix:
    """Complex gains for the currently selected antenna subset.

    Rows are users, columns are antennas. ``seed_label`` is an opaque
    reproducibility token recording how the matrix was produced.
    """

    gains: np.ndarray
    seed_label: str

    def __post_init__(self):
        if self.gains.ndim != 2:
            raise ValueError("gains must be a 2-D matrix")
        if not np.iscomplexobj(self.gains):
            raise ValueError("gains must be complex")

    @property
    def n_users(self) -> int:
        return self.gains.shape[0]

    @property
    def n_selected(self) -> int:
        return self.gains.shape[1]


def generate_channel(cfg: SystemConfig, master_seed: int,
                     trial_index: int) -> ChannelMatrix:
    """Draw one full K x N realization for the given trial.

    Identical (master_seed, trial_index) pairs reproduce bit-identical
    matrices regardless of execution order or worker count.
    """
    rng = np.random.Generator(np.random.PCG64(
        _seed_sequence(master_seed, trial_index, CHANNEL_STREAM)))
    shape = (cfg.n_users, cfg.n_antennas)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    gains = (re + 1j * im) * np.sqrt(0.5)
    gains.setflags(write=False)
    return ChannelMatrix(gains, f"{master_seed}/{trial_index}")


def antenna_permutation(n_antennas: int, selection_seed: int) -> np.ndarray:
    """Uniformly random permutation of column indices (Fisher-Yates).

    The subset of size s is the first s entries, so one permutation yields
    nested subsets across a sweep over s.
    """
    rng = np.random.Generator(np.random.PCG64(_seed_sequence(selection_seed)))
    return rng.permutation(n_antennas)


def select_antennas(full: ChannelMatrix, s, selection_seed: int) -> ChannelMatrix:
    """Submatrix of s distinct columns chosen uniformly at random.

    Deterministic given selection_seed; the same seed with increasing s
    returns nested subsets.
    """
    v = chain_value(s)
    if not 1 <= v <= full.n_selected:
        raise ValueError(
            f"cannot select {v} of {full.n_selected} antennas")
    perm = antenna_permutation(full.n_selected, selection_seed)
    gains = np.array(full.gains[:, perm[:v]])
    gains.setflags(write=False)
    label = f"{full.seed_label}|sel={int(selection_seed) & _SEED_MASK}:{v}"
    return ChannelMatrix(gains, label)


@dataclass(frozen=True)
class GramStats:
    r"""Per-realization Gram quantities consumed by the SINR formulas.

    beta_sq[k] = \|h_k\|^4, the squared self-gain of user k.
    cross_sq[k, i] = |h_k h_i^H|^2 for i != k; the diagonal is unused and
    kept at zero so an accidental read is loud rather than subtly wrong.
    eta = \|H\|_F^2, the beamformer normalization constant.
    """

    beta_sq: np.ndarray
    cross_sq: np.ndarray
    eta: float

    @property
    def n_users(self) -> int:
        return self.beta_sq.size


def gram_stats(ch: ChannelMatrix) -> GramStats:
    """Compute self-gains, cross-gains and the Frobenius normalization."""
    g = ch.gains
    row_power = np.abs(g) ** 2
    row_norm_sq = row_power.sum(axis=1)
    beta_sq = row_norm_sq ** 2
    gram = g @ g.conj().T
    mags = np.abs(gram) ** 2
    # mirror the upper triangle so cross_sq is exactly symmetric
    upper = np.triu(mags, k=1)
    cross_sq = upper + upper.T
    beta_sq.setflags(write=False)
    cross_sq.setflags(write=False)
    return GramStats(beta_sq, cross_sq, float(row_norm_sq.sum()))


def format_channel_entry(z: complex) -> str:
    """Render one complex gain as re+imj with round-trip precision."""
    return f"{z.real:.17g}{z.imag:+.17g}j"


def dump_channel(ch: ChannelMatrix, destination) -> None:
    """Write a realization as text: one row per user, entries re+imj
    separated by single spaces."""
    if hasattr(destination, "write"):
        fh = destination
        close = False
    else:
        fh = open(destination, "w", encoding="utf-8")
        close = True
    try:
        for row in ch.gains:
            fh.write(" ".join(format_channel_entry(z) for z in row))
            fh.write("\n")
    finally:
        if close:
            fh.close()


def load_channel_dump(source) -> np.ndarray:
    """Parse the text format written by dump_channel back into an array."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    rows = [[complex(tok) for tok in line.split()]
            for line in text.splitlines() if line.strip()]
    return np.array(rows, dtype=complex)
