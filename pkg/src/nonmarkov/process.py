"""Two-station quantum processes with classically correlated Pauli noise.

A process matrix W lives on the 8-dimensional space A_in x A_out x B_in
(three qubit factors in that fixed order). A realized process is a convex
combination of constituent pieces

    W_ij = (sigma_i rho sigma_i) (x) choi(sigma_j),

weighted by a joint pmf p(i, j) over Pauli indices. Correlation between i
and j is what makes the process non-Markovian; the measure below is the
relative entropy between the normalized process and the product of its
marginals, i.e. a quantum mutual information across the A_in : (A_out B_in)
cut, reported in bits by default.
"""

import numpy as np

from . import tolerances as tol
from .linalg import (
    eigenvalues_hermitian,
    is_hermitian,
    kron,
    partial_trace,
    relative_entropy,
    spectrum_entropy,
)

_PAULIS = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# Tensor factors of a process matrix, each a qubit: (A_in, A_out, B_in).
PROCESS_FACTORS = (2, 2, 2)
PROCESS_DIM = 8


def pauli(i: int) -> np.ndarray:
    """The 2x2 Pauli matrix for index i in {0: I, 1: X, 2: Y, 3: Z}."""
    if i not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be in 0..3, got {i!r}")
    return _PAULIS[i].copy()


def prepared_state() -> np.ndarray:
    """Density matrix of the fixed probe input state.

    Built from the amplitudes (0.16, 0.99 e^{-i 0.16 pi}), renormalized:
    the raw amplitudes have norm slightly above one.
    """
    psi = np.array([0.16, 0.99 * np.exp(-1j * 0.16 * np.pi)], dtype=complex)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def choi_unitary(u: np.ndarray) -> np.ndarray:
    """Choi matrix (channel convention, no transposition) of a qubit unitary.

    Returns sum_{jk} |j><k| (x) U|j><k|U^dag, a rank-one operator with
    trace 2; the first factor is the channel input.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 unitary, got shape {u.shape}")
    if float(np.max(np.abs(u.conj().T @ u - np.eye(2)))) > tol.UNITARY_ATOL:
        raise ValueError("matrix is not unitary within tolerance")
    v = u.T.reshape(-1)  # component (j, b) = U[b, j]
    return np.outer(v, v.conj())


def born_probability(w: np.ndarray, m_a: np.ndarray, m_b: np.ndarray) -> float:
    """Outcome probability tr[W (M_A (x) M_B)] for one operation per station.

    ``m_a`` is the Choi matrix, in the transposed convention used for
    inserted operations, of a CP map acting between A_in and A_out.
    ``m_b`` is the station-B POVM effect supplied in transposed form; the
    transposition is undone inside the contraction, so the result equals
    tr(effect . output_state) of the corresponding circuit.
    """
    w = np.asarray(w, dtype=complex)
    m_a = np.asarray(m_a, dtype=complex)
    m_b = np.asarray(m_b, dtype=complex)
    if w.shape != (8, 8) or m_a.shape != (4, 4) or m_b.shape != (2, 2):
        raise ValueError(
            f"dimension mismatch: W {w.shape}, M_A {m_a.shape}, M_B {m_b.shape}")
    return float(np.real(np.trace(w @ kron(m_a, m_b.T))))


def constituent_process(i: int, j: int, rho: np.ndarray) -> np.ndarray:
    """Process matrix for one fixed Pauli pair (sigma_i before, sigma_j after
    the probe slot): (sigma_i rho sigma_i) (x) choi(sigma_j)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"state must be 2x2, got {rho.shape}")
    s_i = pauli(i)
    return kron(s_i @ rho @ s_i.conj().T, choi_unitary(pauli(j)))


def sample_marginal(r: float, rng: np.random.Generator) -> np.ndarray:
    """Draw a random Pauli marginal biased toward the identity.

    The weight for index 0 is uniform on [0, r]; the other three weights
    are uniform on [0, 1]; the four are then normalized. Larger ``r`` biases
    the marginal toward the identity operation.
    """
    if r < 1.0:
        raise ValueError(f"identity bias must be >= 1, got {r!r}")
    raw = np.empty(4)
    raw[0] = rng.uniform(0.0, r)
    raw[1:] = rng.uniform(0.0, 1.0, size=3)
    return raw / raw.sum()


def _check_marginal(marginal: np.ndarray) -> np.ndarray:
    marginal = np.asarray(marginal, dtype=float)
    if marginal.shape != (4,):
        raise ValueError(f"marginal must have 4 entries, got {marginal.shape}")
    if np.any(marginal < 0.0):
        raise ValueError("marginal has negative entries")
    if abs(float(marginal.sum()) - 1.0) > tol.PMF_NORM_ATOL:
        raise ValueError(f"marginal sums to {float(marginal.sum())!r}, expected 1")
    return marginal


def joint_pmf(marginal: np.ndarray, q: float) -> np.ndarray:
    """Correlated joint table p(i,j) = p(i) [q delta_ij + (1-q) p(j)].

    ``q`` interpolates between independent draws (q=0) and perfectly
    correlated pairs (q=1). Both marginals of the table equal the input
    marginal identically.
    """
    marginal = _check_marginal(marginal)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"correlation strength must be in [0, 1], got {q!r}")
    return q * np.diag(marginal) + (1.0 - q) * np.outer(marginal, marginal)


def _check_joint(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (4, 4):
        raise ValueError(f"joint pmf must be 4x4, got {p.shape}")
    if np.any(p < 0.0):
        raise ValueError("joint pmf has negative entries")
    if abs(float(p.sum()) - 1.0) > tol.PMF_NORM_ATOL:
        raise ValueError(f"joint pmf sums to {float(p.sum())!r}, expected 1")
    return p


def empirical_pmf(p: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Frequency table from n independent draws of the pair (i, j).

    Every entry of the result is an integer multiple of 1/n.
    """
    p = _check_joint(p)
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n!r}")
    flat = p.reshape(-1)
    counts = rng.multinomial(n, flat / flat.sum())
    return counts.reshape(4, 4) / float(n)


def mixed_process(p: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Convex combination sum_ij p(i,j) W_ij of constituent processes."""
    p = _check_joint(p)
    rho = np.asarray(rho, dtype=complex)
    states = [s @ rho @ s.conj().T for s in _PAULIS]
    chois = [choi_unitary(s) for s in _PAULIS]
    w = np.zeros((8, 8), dtype=complex)
    for i in range(4):
        for j in range(4):
            if p[i, j] != 0.0:
                w += p[i, j] * kron(states[i], chois[j])
    return w


def markov_projection(w_tilde: np.ndarray) -> np.ndarray:
    """Product of marginals: (A_in part) (x) (A_out B_in part).

    Input and output are unit-trace. This is the closest Markovian shape in
    the sense used by the measure below: a process whose initial state and
    subsequent channel are uncorrelated.
    """
    w_tilde = np.asarray(w_tilde, dtype=complex)
    if w_tilde.shape != (8, 8):
        raise ValueError(f"expected an 8x8 matrix, got {w_tilde.shape}")
    if abs(float(np.real(np.trace(w_tilde))) - 1.0) > tol.TRACE_ATOL:
        raise ValueError("markov_projection expects a unit-trace input")
    state_part = partial_trace(w_tilde, PROCESS_FACTORS, keep={0})
    channel_part = partial_trace(w_tilde, PROCESS_FACTORS, keep={1, 2})
    return kron(state_part, channel_part)


def _check_process(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    if w.shape != (PROCESS_DIM, PROCESS_DIM):
        raise ValueError(f"process matrix must be 8x8, got {w.shape}")
    if not is_hermitian(w, tol.HERMITIAN_INPUT_ATOL):
        raise ValueError("process matrix is not Hermitian within tolerance")
    trace = float(np.real(np.trace(w)))
    if abs(trace - 2.0) > tol.PROCESS_TRACE_ATOL:
        raise ValueError(f"process matrix has trace {trace!r}, expected 2")
    return w


def _clamped_entropy(m: np.ndarray, log_base: float, name: str) -> float:
    values = eigenvalues_hermitian(m)
    lowest = float(values[-1])
    if lowest < -tol.PROCESS_PSD_ATOL:
        raise ValueError(f"{name} has negative eigenvalue {lowest:.3e}")
    return spectrum_entropy(np.maximum(values, 0.0), log_base)


def non_markovianity(w: np.ndarray, log_base: float = 2.0) -> float:
    """Relative entropy between W/2 and the product of its marginals.

    Evaluated in the algebraically identical mutual-information form

        S(A_in marginal) + S(A_out B_in marginal) - S(W/2),

    which sidesteps logarithms of the rank-deficient product. Values inside
    the zero window collapse to exactly 0; values below it raise.
    """
    w = _check_process(w)
    w_tilde = w / 2.0
    s_full = _clamped_entropy(w_tilde, log_base, "normalized process")
    s_state = _clamped_entropy(
        partial_trace(w_tilde, PROCESS_FACTORS, keep={0}), log_base,
        "A_in marginal")
    s_channel = _clamped_entropy(
        partial_trace(w_tilde, PROCESS_FACTORS, keep={1, 2}), log_base,
        "A_out B_in marginal")
    value = s_state + s_channel - s_full
    if value < -tol.MEASURE_ZERO_ATOL:
        raise ArithmeticError(
            f"measure evaluated to {value:.3e}, below the numerical floor")
    if abs(value) <= tol.MEASURE_ZERO_ATOL:
        return 0.0
    return value


def non_markovianity_direct(w: np.ndarray, log_base: float = 2.0) -> float:
    """Cross-check route: the measure as an explicit relative entropy
    between W/2 and its Markovian projection."""
    w = _check_process(w)
    w_tilde = w / 2.0
    return relative_entropy(w_tilde, markov_projection(w_tilde), log_base)
