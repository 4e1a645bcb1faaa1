"""Dense complex-matrix kernel: Kronecker products, partial traces,
Hermitian eigendecomposition, and the entropy functionals built on it.

All matrices are plain ``numpy.ndarray`` objects of dtype complex128 in
row-major order. Operations are pure functions; nothing here holds state.

The eigensolver is a cyclic Jacobi iteration specialized to Hermitian
matrices. Every spectrum needed downstream is at most 8-dimensional, where
Jacobi is simple, dependency-free, and accurate to machine precision.
"""

import math
from typing import Iterable, NamedTuple

import numpy as np

from . import tolerances as tol


class JacobiConvergenceError(ArithmeticError):
    """Raised when the Jacobi sweep budget is exhausted before convergence."""


class InfiniteDivergenceError(ArithmeticError):
    """Raised when relative entropy is evaluated outside the second
    argument's support."""


class EigenDecomposition(NamedTuple):
    """Spectral decomposition M = V diag(w) V^dag.

    ``eigenvalues`` are real and sorted in descending order;
    ``eigenvectors`` holds the matching unit column vectors.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def frobenius(m: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(m) ** 2)))


def _offdiag_norm(m: np.ndarray) -> float:
    off = m.copy()
    np.fill_diagonal(off, 0.0)
    return frobenius(off)


def is_hermitian(m: np.ndarray, atol: float = tol.HERMITIAN_ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and \
        float(np.max(np.abs(m - m.conj().T))) <= atol


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; output dimensions are the entrywise products."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m: np.ndarray, factor_dims: Iterable[int],
                  keep: Iterable[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``.

    ``factor_dims`` gives the dimension of each factor in order; their
    product must equal the matrix dimension. The kept factors preserve
    their relative order. ``keep`` empty reduces to the scalar trace,
    returned as a 1x1 matrix.
    """
    m = np.asarray(m, dtype=complex)
    dims = [int(d) for d in factor_dims]
    total = math.prod(dims)
    if m.ndim != 2 or m.shape != (total, total):
        raise ValueError(
            f"matrix shape {m.shape} does not match factor dims {dims}")
    keep_set = set(int(k) for k in keep)
    if not keep_set.issubset(range(len(dims))):
        raise ValueError(f"keep={sorted(keep_set)} outside factor range "
                         f"0..{len(dims) - 1}")

    tensor = m.reshape(dims + dims)
    remaining = list(dims)
    for i in sorted(set(range(len(dims))) - keep_set, reverse=True):
        tensor = np.trace(tensor, axis1=i, axis2=i + len(remaining))
        del remaining[i]
    d_out = math.prod(remaining) if remaining else 1
    return tensor.reshape(d_out, d_out)


def _jacobi(a: np.ndarray, want_vectors: bool) -> tuple[np.ndarray, np.ndarray | None]:
    """Cyclic Jacobi rotations on a Hermitian matrix.

    Returns (unsorted eigenvalues, eigenvector columns or None). Each
    rotation annihilates one off-diagonal pair with a complex plane
    rotation; sweeps repeat until the off-diagonal Frobenius norm falls
    below the convergence target.
    """
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)  # symmetrize roundoff in the input
    v = np.eye(n, dtype=complex) if want_vectors else None
    threshold = tol.JACOBI_OFF_FROBENIUS * max(1.0, frobenius(a))
    # Rotations smaller than this cannot move the off norm past threshold.
    skip = threshold / max(n, 1)

    for _ in range(tol.JACOBI_MAX_SWEEPS):
        off = _offdiag_norm(a)
        if off < threshold:
            diag = np.real(np.diag(a)).copy()
            return diag, v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                h = abs(apq)
                if h <= skip:
                    continue
                phase = apq / h
                tau = (a[q, q].real - a[p, p].real) / (2.0 * h)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # A <- J^dag A J with J embedding [[c, s*phase],
                #                                  [-s*conj(phase), c]]
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * phase * rq
                a[q, :] = s * np.conj(phase) * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * np.conj(phase) * cq
                a[:, q] = s * phase * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if v is not None:
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = c * vp - s * np.conj(phase) * vq
                    v[:, q] = s * phase * vp + c * vq

    off = _offdiag_norm(a)
    raise JacobiConvergenceError(
        f"no convergence after {tol.JACOBI_MAX_SWEEPS} sweeps: "
        f"off-diagonal norm {off:.3e}, target {threshold:.3e}, size {n}x{n}")


def hermitian_eigen(m: np.ndarray) -> EigenDecomposition:
    """Full spectral decomposition of a Hermitian matrix by cyclic Jacobi.

    The input must be Hermitian within ``HERMITIAN_INPUT_ATOL``. Eigenvalues
    come back in descending order with matching eigenvector columns.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol.HERMITIAN_INPUT_ATOL):
        raise ValueError("input is not Hermitian within tolerance")
    values, vectors = _jacobi(m.copy(), want_vectors=True)
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values[order], vectors[:, order])


def eigenvalues_hermitian(m: np.ndarray) -> np.ndarray:
    """Descending eigenvalues only; skips eigenvector accumulation."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol.HERMITIAN_INPUT_ATOL):
        raise ValueError("input is not Hermitian within tolerance")
    values, _ = _jacobi(m.copy(), want_vectors=False)
    return np.sort(values)[::-1]


def spectrum_entropy(values: np.ndarray, log_base: float) -> float:
    """-sum(w log w) over the clamped spectrum, with 0 log 0 = 0."""
    w = values[values > tol.EIGENVALUE_CLAMP]
    if w.size == 0:
        return 0.0
    return float(-np.sum(w * np.log(w)) / math.log(log_base))


def _check_state(rho: np.ndarray, name: str) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho, tol.HERMITIAN_INPUT_ATOL):
        raise ValueError(f"{name} is not Hermitian within tolerance")
    trace = float(np.real(np.trace(rho)))
    if abs(trace - 1.0) > tol.TRACE_ATOL:
        raise ValueError(f"{name} has trace {trace!r}, expected 1")
    return rho


def von_neumann_entropy(rho: np.ndarray, log_base: float = 2.0) -> float:
    """Entropy -tr(rho log rho) of a unit-trace PSD matrix.

    Eigenvalues below ``EIGENVALUE_CLAMP`` are treated as exact zeros;
    eigenvalues below ``-PSD_ATOL`` raise.
    """
    rho = _check_state(rho, "rho")
    values = eigenvalues_hermitian(rho)
    if float(values[-1]) < -tol.PSD_ATOL:
        raise ValueError(
            f"rho has negative eigenvalue {float(values[-1]):.3e}")
    return spectrum_entropy(values, log_base)


def relative_entropy(a: np.ndarray, b: np.ndarray,
                     log_base: float = 2.0) -> float:
    """Quantum relative entropy tr[a (log a - log b)].

    Both arguments must be Hermitian, PSD, and unit trace. The support of
    ``a`` must lie inside the support of ``b``; otherwise the divergence is
    infinite and ``InfiniteDivergenceError`` is raised.
    """
    a = _check_state(a, "first argument")
    b = _check_state(b, "second argument")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")

    wa = eigenvalues_hermitian(a)
    if float(wa[-1]) < -tol.PSD_ATOL:
        raise ValueError(
            f"first argument has negative eigenvalue {float(wa[-1]):.3e}")
    wb, vb = hermitian_eigen(b)
    if float(wb[-1]) < -tol.PSD_ATOL:
        raise ValueError(
            f"second argument has negative eigenvalue {float(wb[-1]):.3e}")

    support = wb > tol.EIGENVALUE_CLAMP
    # <v_j| a |v_j> for every eigenvector of b.
    overlaps = np.real(np.sum(vb.conj() * (a @ vb), axis=0))
    kernel_mass = float(np.sum(overlaps[~support]))
    if kernel_mass > tol.SUPPORT_MASS_ATOL:
        raise InfiniteDivergenceError(
            f"support violation: mass {kernel_mass:.3e} of the first "
            "argument lies outside the second argument's support")

    wa_pos = wa[wa > tol.EIGENVALUE_CLAMP]
    term_a = float(np.sum(wa_pos * np.log(wa_pos))) if wa_pos.size else 0.0
    term_b = float(np.sum(overlaps[support] * np.log(wb[support])))
    return (term_a - term_b) / math.log(log_base)
