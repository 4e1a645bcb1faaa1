"""Probe unitaries, Stokes extraction, noise models, and labeled dataset
generation for the correlated-Pauli process family.

A dataset row holds the 9 Stokes parameters measured after each of the
three probe unitaries, the non-Markovianity of the realized process as the
label, and the exact-pmf label plus generation metadata. Rows are derived
from independent per-row random streams keyed on (pair_index, pmf_index,
base_seed), so generation order never matters and any row can be rebuilt
in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .process import (
    born_probability,
    choi_unitary,
    empirical_pmf,
    joint_pmf,
    mixed_process,
    non_markovianity,
    pauli,
    prepared_state,
    sample_marginal,
)

TWO_PI = 2.0 * math.pi

# The (correlation, identity-bias) grid of the standard generation plan.
STANDARD_QR_PAIRS = (
    (0.8, 1.0), (0.8, 1.5), (0.8, 1.25),
    (0.9, 1.0), (0.9, 1.5), (0.9, 1.25),
    (0.95, 1.0), (0.95, 1.5), (0.95, 1.25),
    (1.0, 1.0),
)

DEFAULT_PROBE_ANGLE = math.pi / 8.0


@dataclass
class ProbeConfig:
    """Angles of the axis rotation that tilts the three probe Paulis."""

    alpha: float = DEFAULT_PROBE_ANGLE
    beta: float = DEFAULT_PROBE_ANGLE
    gamma: float = DEFAULT_PROBE_ANGLE

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            setattr(self, name, value % TWO_PI)


@dataclass
class NoiseConfig:
    """Measurement imperfections applied to simulated Stokes parameters.

    ``white_noise_eps`` mixes the output state with the maximally mixed
    state; ``shots`` simulates per-setting binomial counting statistics
    (``None`` means exact expectation values).
    """

    white_noise_eps: float = 0.0
    shots: int | None = 5000

    def __post_init__(self):
        if not 0.0 <= self.white_noise_eps <= 1.0:
            raise ValueError(
                f"white_noise_eps must be in [0, 1], got {self.white_noise_eps!r}")
        if self.shots is not None and int(self.shots) < 1:
            raise ValueError(f"shots must be >= 1 or None, got {self.shots!r}")


@dataclass(frozen=True)
class DatasetRow:
    """One labeled example: 9 Stokes features plus the measure and metadata."""

    features: tuple[float, ...]
    label: float
    exact_label: float
    q: float
    r: float
    pair_index: int
    pmf_index: int
    seed: int


@dataclass
class GenerationPlan:
    """Everything needed to generate a dataset deterministically."""

    qr_pairs: tuple[tuple[float, float], ...] = STANDARD_QR_PAIRS
    pmfs_per_pair: int = 100
    samples_per_pmf: int | None = 50  # None: use the exact joint pmf
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    base_seed: int = 0
    measurement_indices: tuple[int, ...] = (1, 2, 3)

    def validate(self):
        if not self.qr_pairs:
            raise ValueError("plan has no (q, R) pairs")
        for q, r in self.qr_pairs:
            if not 0.0 <= q <= 1.0:
                raise ValueError(f"correlation strength out of range: {q!r}")
            if r < 1.0:
                raise ValueError(f"identity bias out of range: {r!r}")
        if self.pmfs_per_pair < 1:
            raise ValueError(f"pmfs_per_pair must be >= 1, got {self.pmfs_per_pair!r}")
        if self.samples_per_pmf is not None and self.samples_per_pmf < 1:
            raise ValueError(
                f"samples_per_pmf must be >= 1 or None, got {self.samples_per_pmf!r}")
        if not self.measurement_indices:
            raise ValueError("measurement_indices is empty")
        if not set(self.measurement_indices).issubset({0, 1, 2, 3}):
            raise ValueError(
                f"measurement_indices outside 0..3: {self.measurement_indices!r}")

    @property
    def n_rows(self) -> int:
        return len(self.qr_pairs) * self.pmfs_per_pair


def feature_names(measurement_indices: tuple[int, ...] = (1, 2, 3)) -> list[str]:
    """Canonical feature order: probe-major, measurement-minor."""
    return [f"s_k{k}_l{l}" for k in (0, 1, 2) for l in measurement_indices]


def rotation_unitary(cfg: ProbeConfig) -> np.ndarray:
    """Rotation by alpha around the unit axis set by (beta, gamma):

    cos(alpha/2) I - i sin(alpha/2) (sin(beta) sin(gamma) X
                                     + cos(beta) sin(gamma) Y
                                     + cos(gamma) Z).
    """
    axis = (math.sin(cfg.beta) * math.sin(cfg.gamma) * pauli(1)
            + math.cos(cfg.beta) * math.sin(cfg.gamma) * pauli(2)
            + math.cos(cfg.gamma) * pauli(3))
    return (math.cos(cfg.alpha / 2.0) * np.eye(2, dtype=complex)
            - 1j * math.sin(cfg.alpha / 2.0) * axis)


def probe_unitary(k: int, cfg: ProbeConfig) -> np.ndarray:
    """Rotated Pauli probe R sigma_k R^dag for k in {0, 1, 2}."""
    if k not in (0, 1, 2):
        raise ValueError(f"probe index must be in {{0, 1, 2}}, got {k!r}")
    if k == 0:
        return np.eye(2, dtype=complex)  # conjugation fixes the identity
    rot = rotation_unitary(cfg)
    return rot @ pauli(k) @ rot.conj().T


def output_state(p_tilde: np.ndarray, rho: np.ndarray,
                 u_k: np.ndarray) -> np.ndarray:
    """Average output state under the correlated Pauli pair:

    sum_ij p(i,j) (sigma_j U_k sigma_i) rho (sigma_j U_k sigma_i)^dag.
    """
    p_tilde = np.asarray(p_tilde, dtype=float)
    rho = np.asarray(rho, dtype=complex)
    u_k = np.asarray(u_k, dtype=complex)
    out = np.zeros((2, 2), dtype=complex)
    for i in range(4):
        inner = u_k @ pauli(i)
        for j in range(4):
            if p_tilde[i, j] != 0.0:
                full = pauli(j) @ inner
                out += p_tilde[i, j] * (full @ rho @ full.conj().T)
    return out


def stokes(rho_k: np.ndarray, l: int) -> float:
    """Stokes parameter tr(sigma_l rho_k) of a qubit state."""
    rho_k = np.asarray(rho_k, dtype=complex)
    if rho_k.shape != (2, 2):
        raise ValueError(f"state must be 2x2, got {rho_k.shape}")
    return float(np.real(np.trace(pauli(l) @ rho_k)))


def stokes_via_contraction(w: np.ndarray, u_k: np.ndarray, l: int) -> float:
    """Same Stokes parameter read directly off the process matrix.

    Contracts W with the transposed Choi matrix of the probe channel on the
    A factors and the transposed Pauli observable at B; agrees with
    ``stokes(output_state(...), l)`` by construction.
    """
    return born_probability(w, choi_unitary(u_k).T, pauli(l).T)


def add_white_noise(rho: np.ndarray, eps: float) -> np.ndarray:
    """Mix a state with the maximally mixed state: (1-eps) rho + eps I/2."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be in [0, 1], got {eps!r}")
    rho = np.asarray(rho, dtype=complex)
    return (1.0 - eps) * rho + eps * np.eye(2, dtype=complex) / 2.0


def shot_noise(s: float, n: int, rng: np.random.Generator) -> float:
    """Finite-count estimate of a Stokes value from n binomial trials."""
    p = min(max((1.0 + s) / 2.0, 0.0), 1.0)
    c = rng.binomial(int(n), p)
    return 2.0 * c / n - 1.0


def _row_stream(base_seed: int, pair_index: int,
                pmf_index: int) -> tuple[np.random.Generator, int]:
    ss = np.random.SeedSequence(base_seed, spawn_key=(pair_index, pmf_index))
    seed_word = int(ss.generate_state(1)[0])
    return np.random.default_rng(ss), seed_word


def generate_row(plan: GenerationPlan, pair_index: int,
                 pmf_index: int) -> DatasetRow:
    """Build the single row keyed by (pair_index, pmf_index).

    Independent of any other row: the random stream is derived from
    (base_seed, pair_index, pmf_index) alone.
    """
    q, r = plan.qr_pairs[pair_index]
    rng, seed_word = _row_stream(plan.base_seed, pair_index, pmf_index)
    rho = prepared_state()

    marginal = sample_marginal(r, rng)
    joint = joint_pmf(marginal, q)
    if plan.samples_per_pmf is None:
        realized = joint
    else:
        realized = empirical_pmf(joint, plan.samples_per_pmf, rng)

    label = non_markovianity(mixed_process(realized, rho))
    if plan.samples_per_pmf is None:
        exact_label = label
    else:
        exact_label = non_markovianity(mixed_process(joint, rho))

    values = []
    for k in (0, 1, 2):
        rho_k = output_state(realized, rho, probe_unitary(k, plan.probe))
        if plan.noise.white_noise_eps > 0.0:
            rho_k = add_white_noise(rho_k, plan.noise.white_noise_eps)
        for l in plan.measurement_indices:
            s = stokes(rho_k, l)
            if plan.noise.shots is not None:
                s = shot_noise(s, plan.noise.shots, rng)
            values.append(s)

    return DatasetRow(
        features=tuple(values),
        label=label,
        exact_label=exact_label,
        q=q,
        r=r,
        pair_index=pair_index,
        pmf_index=pmf_index,
        seed=seed_word,
    )


def generate_dataset(plan: GenerationPlan) -> list[DatasetRow]:
    """All rows of the plan in canonical order (pair-major, pmf-minor)."""
    plan.validate()
    return [
        generate_row(plan, pair_index, pmf_index)
        for pair_index in range(len(plan.qr_pairs))
        for pmf_index in range(plan.pmfs_per_pair)
    ]
