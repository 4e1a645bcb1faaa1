"""Shared random-input builders for the test suite."""

import numpy as np

from nonmarkov.process import (
    joint_pmf,
    mixed_process,
    prepared_state,
    sample_marginal,
)


def random_hermitian(n, rng, scale=1.0):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (g + g.conj().T)


def random_density(n, rng):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_pure(n, rng):
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_qr_marginal(rng, r_max=10.0):
    """One (q, R, marginal) draw from the same family the generator uses."""
    q = rng.uniform(0.0, 1.0)
    r = rng.uniform(1.0, r_max)
    return q, r, sample_marginal(r, rng)


def random_mixed_process(rng, rho=None):
    q, _, marginal = random_qr_marginal(rng)
    rho = prepared_state() if rho is None else rho
    return mixed_process(joint_pmf(marginal, q), rho)
