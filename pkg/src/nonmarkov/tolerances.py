"""Numeric tolerances shared by the library and its test suite.

Every comparison threshold used anywhere in the package lives here, so the
tests and the implementation cannot drift apart.
"""

# Hermiticity: max |M - M^dag| entrywise.
HERMITIAN_ATOL = 1e-12
# Looser gate applied to eigensolver inputs (accumulated roundoff allowed).
HERMITIAN_INPUT_ATOL = 1e-10

# Jacobi eigensolver: converged once the off-diagonal Frobenius norm drops
# below JACOBI_OFF_FROBENIUS (scaled by max(1, ||M||_F) so large-norm inputs
# remain reachable in float64).
JACOBI_OFF_FROBENIUS = 1e-12
JACOBI_MAX_SWEEPS = 60

# Eigendecomposition contract: ||V L V^dag - M||_F relative to ||M||_F,
# and ||V^dag V - I|| entrywise.
EIGEN_RECON_RTOL = 1e-10
EIGEN_UNITARY_ATOL = 1e-10

# Spectra: eigenvalues below this are treated as exact zeros (0 log 0 = 0).
EIGENVALUE_CLAMP = 1e-12
# Most negative eigenvalue a nominally-PSD entropy input may carry.
PSD_ATOL = 1e-10
# Unit-trace gate for states and normalized process matrices.
TRACE_ATOL = 1e-9

# Process matrices (trace 2, PSD): positivity slack on the normalized form.
PROCESS_PSD_ATOL = 1e-9
PROCESS_TRACE_ATOL = 1e-9

# Relative entropy: mass of the first argument allowed outside the support
# of the second before the divergence is declared infinite.
SUPPORT_MASS_ATOL = 1e-9

# Non-Markovianity values inside [-MEASURE_ZERO_ATOL, MEASURE_ZERO_ATOL]
# collapse to exactly 0; anything below the window is a numerical failure.
MEASURE_ZERO_ATOL = 1e-9

# Unitarity gate for Choi construction and probe rotations.
UNITARY_ATOL = 1e-10

# Probability tables: normalization slack.
PMF_NORM_ATOL = 1e-12

# Least squares: singular-value cutoff relative to the largest singular value.
LSTSQ_RCOND = 1e-10
