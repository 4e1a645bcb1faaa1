"""Simulation of two-station quantum processes with classical memory,
an entropic non-Markovianity measure, labeled Stokes-parameter datasets,
and regression models that predict the measure from them."""

__version__ = "0.1.0"

from .linalg import (
    EigenDecomposition,
    hermitian_eigen,
    kron,
    partial_trace,
    relative_entropy,
    von_neumann_entropy,
)
from .process import (
    born_probability,
    choi_unitary,
    constituent_process,
    empirical_pmf,
    joint_pmf,
    markov_projection,
    mixed_process,
    non_markovianity,
    non_markovianity_direct,
    pauli,
    prepared_state,
    sample_marginal,
)
from .simulate import (
    DatasetRow,
    GenerationPlan,
    NoiseConfig,
    ProbeConfig,
    STANDARD_QR_PAIRS,
    add_white_noise,
    feature_names,
    generate_dataset,
    generate_row,
    output_state,
    probe_unitary,
    rotation_unitary,
    shot_noise,
    stokes,
    stokes_via_contraction,
)

__all__ = [name for name in dir() if not name.startswith("_")]
