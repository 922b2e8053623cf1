"""Fock-space states, operators and phase-space readouts for a single trapped ion.

Everything in this module works in dimensionless harmonic-oscillator units:
lengths are measured in the ground-state size x0 = (hbar/2*M*omega0)^(1/2) and
the quadratures are

    X = a + a^dag        P = -i (a - a^dag)

so that the vacuum has unit variance in each quadrature.  This convention is
used everywhere in the package.  The Wigner function is normalised to
integrate to 1 over the (X, P) plane, which puts the vacuum peak at 1/(2*pi).

States are plain complex amplitude vectors over a truncated Fock basis
n = 0 .. n_max.  All functions are pure: nothing here mutates its inputs, so
values can be shared freely between threads and batch drivers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

__all__ = [
    "TruncationError",
    "UnitSystem",
    "MotionalState",
    "SpinBranchPair",
    "ThermalEnsemble",
    "coherent_state",
    "fock_state",
    "displacement_matrix",
    "cos_sin_operators",
    "overlap",
    "quadrature_moments",
    "squeezing_ratio",
    "wigner",
    "thermal_weights",
]

HBAR = 1.054571817e-34  # J s (CODATA 2018)
ATOMIC_MASS = 1.66053906660e-27  # kg

# Truncation guard: occupation in the top TAIL_BAND levels must stay below
# TAIL_TOL or the state is considered unreliable.
TAIL_BAND = 10
TAIL_TOL = 1e-6


class TruncationError(RuntimeError):
    """Raised when a state has leaked into the top of the Fock basis."""


@dataclass(frozen=True)
class UnitSystem:
    """Trap frequency and length scale tying dimensionless units to SI.

    Attributes
    ----------
    omega0 : float
        Angular trap frequency (rad/s).
    x0 : float
        Ground-state wavepacket size (m).  The ion mass enters only here.
    eta : float
        Lamb-Dicke parameter, eta = k * x0.
    k : float
        Effective wavevector of the drive along the trap axis (1/m).
    """

    omega0: float
    x0: float
    eta: float
    k: float

    def __post_init__(self):
        if self.omega0 <= 0 or self.x0 <= 0 or self.eta <= 0:
            raise ValueError("omega0, x0 and eta must all be positive")
        if abs(self.eta - self.k * self.x0) > 1e-12 * self.eta:
            raise ValueError("inconsistent units: eta != k * x0")

    @classmethod
    def from_eta(cls, omega0, eta, mass_kg=40 * ATOMIC_MASS):
        """Build a unit system from the trap frequency and Lamb-Dicke parameter.

        The mass fixes x0 = sqrt(hbar / (2 M omega0)); the wavevector is then
        whatever k makes eta = k * x0 hold.  Default mass is a single
        calcium-40 ion.
        """
        x0 = np.sqrt(HBAR / (2.0 * mass_kg * omega0))
        return cls(omega0=omega0, x0=x0, eta=eta, k=eta / x0)

    @classmethod
    def from_wavevector(cls, omega0, k, mass_kg=40 * ATOMIC_MASS):
        """Build a unit system from the trap frequency and drive wavevector."""
        x0 = np.sqrt(HBAR / (2.0 * mass_kg * omega0))
        return cls(omega0=omega0, x0=x0, eta=k * x0, k=k)


@dataclass(frozen=True)
class MotionalState:
    """Normalised motional state over the truncated Fock basis n = 0..n_max.

    The constructor renormalises the supplied amplitudes, so every instance
    satisfies sum |c_n|^2 = 1 to machine precision.
    """

    amplitudes: np.ndarray
    n_max: int = -1  # filled in from the vector length when omitted

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).copy()
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a 1-d vector of length >= 2")
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            raise ValueError("cannot normalise a zero amplitude vector")
        amps /= norm
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        n_max = amps.size - 1
        if self.n_max >= 0 and self.n_max != n_max:
            raise ValueError(f"n_max={self.n_max} does not match vector length {amps.size}")
        object.__setattr__(self, "n_max", n_max)

    @property
    def nbar(self):
        """Mean occupation number <n>."""
        n = np.arange(self.n_max + 1)
        return float(np.sum(n * np.abs(self.amplitudes) ** 2))

    @property
    def tail_probability(self):
        """Occupation of the top TAIL_BAND levels of the basis."""
        return float(np.sum(np.abs(self.amplitudes[-TAIL_BAND:]) ** 2))

    @property
    def truncation_ok(self):
        return self.tail_probability < TAIL_TOL

    def mean_a(self):
        """Expectation value <a>, i.e. the phase-space centroid alpha."""
        c = self.amplitudes
        n = np.arange(1, self.n_max + 1)
        return complex(np.sum(np.conj(c[:-1]) * np.sqrt(n) * c[1:]))


@dataclass(frozen=True)
class SpinBranchPair:
    """Motional states of the two spin branches plus their scalar phases.

    phase_up/phase_down track phases that multiply the whole branch (for
    instance the differential light-shift precession), kept separate from the
    motional amplitudes.
    """

    up: MotionalState
    down: MotionalState
    phase_up: float = 0.0
    phase_down: float = 0.0

    def __post_init__(self):
        if self.up.n_max != self.down.n_max:
            raise ValueError("both branches must share the same n_max")

    def branch_overlap(self):
        """<up|down> including the accumulated scalar phases."""
        return overlap(self.up, self.down) * np.exp(1j * (self.phase_down - self.phase_up))


@dataclass(frozen=True)
class ThermalEnsemble:
    """Truncated geometric distribution over initial Fock levels."""

    nbar0: float
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("thermal weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("thermal weights must sum to 1")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def n_levels(self):
        return int(self.weights.size)


def coherent_state(alpha, n_max):
    """Coherent state |alpha> on the truncated basis.

    Amplitudes are c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!), evaluated in
    log space so the construction is stable up to n_max = 100 and beyond.

    Raises
    ------
    ValueError
        If |alpha|^2 >= n_max / 4 (no headroom above the coherent tail).
    TruncationError
        If the truncation guard fails despite the precondition.
    """
    alpha = complex(alpha)
    if abs(alpha) ** 2 >= n_max / 4.0:
        raise ValueError(
            f"|alpha|^2 = {abs(alpha)**2:.2f} too large for n_max = {n_max}; "
            "need |alpha|^2 < n_max/4"
        )
    n = np.arange(n_max + 1)
    if alpha == 0:
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[0] = 1.0
        return MotionalState(amps)
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    amps = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    state = MotionalState(amps)
    if not state.truncation_ok:
        raise TruncationError(
            f"coherent state alpha={alpha} does not fit in n_max={n_max}"
        )
    return state


def fock_state(n, n_max):
    """Number state |n> on the truncated basis."""
    if not 0 <= n <= n_max:
        raise ValueError(f"need 0 <= n <= n_max, got n={n}")
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[n] = 1.0
    return MotionalState(amps)


def displacement_matrix(eta, n_max):
    """Matrix of exp(i eta (a + a^dag)) on the truncated basis.

    Uses the associated-Laguerre closed form

        <n| e^{i eta X} |n+k> = e^{-eta^2/2} (i eta)^k sqrt(n!/(n+k)!) L_n^k(eta^2)

    with log-space factorial ratios, stable through n = 100.  The matrix is
    complex symmetric, and unitary away from the truncation edge.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    dim = n_max + 1
    if eta == 0:
        return np.eye(dim, dtype=complex)
    x = eta * eta
    D = np.zeros((dim, dim), dtype=complex)
    lgamma = gammaln(np.arange(1, dim + 1, dtype=float))
    for k in range(dim):
        n = np.arange(dim - k)
        # sqrt(n!/(n+k)!) * eta^k, all in log space
        log_pref = 0.5 * (lgamma[n] - lgamma[n + k]) + k * np.log(eta)
        vals = (1j**k) * np.exp(-0.5 * x + log_pref) * eval_genlaguerre(n, k, x)
        idx = np.arange(dim - k)
        D[idx, idx + k] = vals
        if k:
            D[idx + k, idx] = vals
    return D


def cos_sin_operators(eta, n_max):
    """Hermitian operators C = cos(eta X) and S = sin(eta X).

    Built as the real and imaginary parts of the displacement matrix, which
    makes both exactly real symmetric.
    """
    D = displacement_matrix(eta, n_max)
    C = 0.5 * (D.real + D.real.T)
    S = 0.5 * (D.imag + D.imag.T)
    return C, S


def overlap(s1, s2):
    """Inner product <s1|s2> of two motional states."""
    if s1.n_max != s2.n_max:
        raise ValueError(f"dimension mismatch: n_max {s1.n_max} vs {s2.n_max}")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes))


def _raw_moments(c):
    """<a>, <a^2>, <n> from an amplitude vector, without building matrices."""
    dim = c.size
    rt = np.sqrt(np.arange(1, dim))
    a_c = rt * c[1:]  # (a c)_n = sqrt(n+1) c_{n+1}
    mean_a = np.sum(np.conj(c[:-1]) * a_c)
    mean_a2 = np.sum(np.conj(c[:-2]) * rt[:-1] * a_c[1:])
    mean_n = np.sum(np.arange(dim) * np.abs(c) ** 2)
    return mean_a, mean_a2, float(mean_n.real)


def quadrature_moments(s):
    """Means and covariance of the quadratures X = a+a^dag, P = -i(a-a^dag).

    Returns
    -------
    (mean_x, mean_p, cov)
        Scalars and a symmetric 2x2 covariance matrix.  The vacuum gives
        (0, 0, identity); a number state |n> gives (2n+1) * identity.
    """
    mean_a, mean_a2, mean_n = _raw_moments(s.amplitudes)
    mean_x = 2.0 * mean_a.real
    mean_p = 2.0 * mean_a.imag
    vxx = 2.0 * mean_a2.real + 2.0 * mean_n + 1.0 - mean_x**2
    vpp = -2.0 * mean_a2.real + 2.0 * mean_n + 1.0 - mean_p**2
    vxp = 2.0 * mean_a2.imag - mean_x * mean_p
    cov = np.array([[vxx, vxp], [vxp, vpp]])
    return mean_x, mean_p, cov


def squeezing_ratio(s):
    """Ratio of the principal axes of the phase-space uncertainty ellipse.

    Defined as sqrt(lambda_max / lambda_min) of the quadrature covariance
    eigenvalues; 1 for coherent states, > 1 for squeezed ones.  Invariant
    under phase-space rotations of the state.
    """
    _, _, cov = quadrature_moments(s)
    lo, hi = np.linalg.eigvalsh(cov)
    if lo <= 0:
        raise ValueError("covariance matrix is not positive definite")
    return float(np.sqrt(hi / lo))


def _laguerre_clenshaw(L, x, coeffs):
    """Clenshaw evaluation of sum_n c_n (-1)^n sqrt(L! n!/(L+n)!) L_n^L(x).

    x may be an array; coeffs is a 1-d coefficient vector along a diagonal of
    the density matrix.
    """
    if len(coeffs) == 1:
        y0 = coeffs[0] * np.ones_like(x)
        y1 = np.zeros_like(x)
    elif len(coeffs) == 2:
        y0 = coeffs[0] * np.ones_like(x)
        y1 = coeffs[1] * np.ones_like(x)
    else:
        k = len(coeffs)
        y0 = coeffs[-2] * np.ones_like(x)
        y1 = coeffs[-1] * np.ones_like(x)
        for i in range(3, len(coeffs) + 1):
            k -= 1
            y0, y1 = (
                coeffs[-i] - y1 * np.sqrt(((k - 1.0) * (L + k - 1.0)) / ((L + k) * k)),
                y0 - y1 * ((L + 2.0 * k - 1.0) - x) / np.sqrt((L + k) * k),
            )
    return y0 - y1 * ((L + 1.0) - x) / np.sqrt(L + 1.0)


def wigner(s, x, p):
    """Wigner function of a motional state on a rectangular grid.

    Parameters
    ----------
    s : MotionalState
    x, p : 1-d arrays
        Grid axes in the X = a+a^dag, P = -i(a-a^dag) quadrature units.

    Returns
    -------
    ndarray of shape (len(x), len(p))
        Real-valued W(x_i, p_j), normalised so that the double integral over
        the plane is 1.  The vacuum is the isotropic Gaussian
        exp(-(X^2+P^2)/2) / (2 pi), peak value 1/(2 pi); a coherent state
        |alpha> is the same Gaussian centred at (2 Re alpha, 2 Im alpha).

    Notes
    -----
    Evaluated by a Clenshaw-summed Laguerre series over the density-matrix
    diagonals, one pass per diagonal, vectorised over the grid.  Cost is
    O(n_max^2) vector operations, fine for n_max <= 100 and modest grids.
    """
    if not s.truncation_ok:
        raise TruncationError(
            f"state tail probability {s.tail_probability:.2e} exceeds {TAIL_TOL:g}"
        )
    c = s.amplitudes
    dim = c.size
    X, P = np.meshgrid(np.asarray(x, float), np.asarray(p, float), indexing="ij")
    A = X + 1j * P
    B = np.abs(A) ** 2
    rho = np.outer(c, np.conj(c))
    # fold the conjugate (lower) diagonals into the upper ones
    rho = rho * (2.0 - np.eye(dim))
    w = (2.0 * rho[0, -1]) * np.ones_like(A)
    for L in range(dim - 2, -1, -1):
        diag = np.diagonal(rho, offset=L)
        w = _laguerre_clenshaw(L, B, diag) + w * A / np.sqrt(L + 1.0)
    return w.real * np.exp(-0.5 * B) / (2.0 * np.pi)


def thermal_weights(nbar0, tail_tol=1e-8):
    """Geometric occupation distribution p_n = nbar0^n / (nbar0+1)^(n+1).

    Truncated once the discarded tail drops below tail_tol, then renormalised
    so the kept weights sum to 1 exactly.
    """
    if nbar0 < 0:
        raise ValueError("nbar0 must be >= 0")
    if nbar0 == 0:
        return ThermalEnsemble(nbar0=0.0, weights=np.array([1.0]))
    t = nbar0 / (nbar0 + 1.0)
    # tail after keeping levels 0..N is t^(N+1)
    n_keep = max(1, int(np.ceil(np.log(tail_tol) / np.log(t))))
    n = np.arange(n_keep)
    w = (1.0 - t) * t**n
    w /= w.sum()
    return ThermalEnsemble(nbar0=float(nbar0), weights=w)
