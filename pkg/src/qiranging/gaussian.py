"""Zero-mean Gaussian states, thermal-loss channels and Gaussian fidelity.

Covariance matrices use the mode-interleaved ordering (x1, p1, x2, p2, ...)
and the convention in which the vacuum has covariance equal to the identity.
Mode 0 is the signal, mode 1 the idler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .exceptions import DomainError

SYMMETRY_ATOL = 1e-12
PHYSICALITY_ATOL = 1e-9
EQUAL_COV_ATOL = 1e-9
# below this |log F| the double-precision path loses relative accuracy
EXTENDED_PRECISION_BELOW = 1e-5
EXTENDED_DPS = 50
NEAR_SINGULAR = 1e-6
# eigenvalues below -CLIP_SILENT are suspicious, below -CLIP_HARD fatal
CLIP_SILENT = 1e-10
CLIP_HARD = 1e-6

_Z = np.diag([1.0, -1.0])


def symplectic_form(num_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for the interleaved ordering."""
    return np.kron(np.eye(num_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of ``cov``, sorted ascending, one per mode."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ cov))
    # eigenvalues come in +/- pairs
    return np.sort(ev)[::2]


@dataclass(frozen=True)
class GaussianState:
    """Zero-mean bosonic Gaussian state given by its quadrature covariance."""

    cov: np.ndarray
    mean: np.ndarray = field(default=None)

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise DomainError(f"covariance must be 2n x 2n, got shape {cov.shape}")
        if not np.all(np.isfinite(cov)):
            raise DomainError("covariance has non-finite entries")
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_ATOL:
            raise DomainError("covariance is not symmetric")
        nu = symplectic_eigenvalues(cov)
        if nu.min() < 1.0 - PHYSICALITY_ATOL:
            raise DomainError(
                f"covariance violates the uncertainty principle (min symplectic eigenvalue {nu.min():.3g})"
            )
        mean = np.zeros(cov.shape[0]) if self.mean is None else np.array(self.mean, dtype=float)
        if mean.shape != (cov.shape[0],):
            raise DomainError("mean vector has the wrong length")
        cov.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)

    @property
    def num_modes(self) -> int:
        return self.cov.shape[0] // 2

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalues(self.cov)

    def is_pure(self, rtol: float = 1e-10) -> bool:
        return abs(np.linalg.det(self.cov) - 1.0) <= rtol

    def mean_photons(self) -> np.ndarray:
        """Mean photon number of each mode, ``(tr(block) / 2 - 1) / 2``."""
        n = self.num_modes
        return np.array(
            [(np.trace(self.cov[2 * k : 2 * k + 2, 2 * k : 2 * k + 2]) / 2.0 - 1.0) / 2.0 for k in range(n)]
        )


@dataclass(frozen=True)
class ThermalLossChannel:
    """Thermal-loss channel with transmissivity ``mu`` and environment photons ``n_thermal``."""

    mu: float
    n_thermal: float

    def __post_init__(self):
        if not (0.0 <= self.mu <= 1.0):
            raise DomainError(f"transmissivity must lie in [0, 1], got {self.mu}")
        if not (math.isfinite(self.n_thermal) and self.n_thermal >= 0.0):
            raise DomainError(f"thermal photon number must be finite and >= 0, got {self.n_thermal}")

    @property
    def output_noise(self) -> float:
        return (1.0 - self.mu) * self.n_thermal


def _check_photons(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value >= 0.0):
        raise DomainError(f"{name} must be finite and >= 0, got {value}")
    return value


def tmsv_state(n_s: float) -> GaussianState:
    """Two-mode squeezed vacuum with ``n_s`` mean photons in each mode."""
    n_s = _check_photons("n_s", n_s)
    a = (2.0 * n_s + 1.0) * np.eye(2)
    c = 2.0 * math.sqrt(n_s * (n_s + 1.0)) * _Z
    return GaussianState(np.block([[a, c], [c, a]]))


def thermal_state(n: float) -> GaussianState:
    """Single-mode thermal state with mean photon number ``n``."""
    n = _check_photons("n", n)
    return GaussianState((2.0 * n + 1.0) * np.eye(2))


def apply_thermal_loss(state: GaussianState, ch: ThermalLossChannel, mode_index: int) -> GaussianState:
    """Send one mode of ``state`` through ``ch``; the other modes are untouched."""
    n = state.num_modes
    if not (0 <= mode_index < n):
        raise DomainError(f"mode index {mode_index} out of range for a {n}-mode state")
    x = np.ones(2 * n)
    x[2 * mode_index : 2 * mode_index + 2] = math.sqrt(ch.mu)
    y = np.zeros(2 * n)
    y[2 * mode_index : 2 * mode_index + 2] = (1.0 - ch.mu) * (2.0 * ch.n_thermal + 1.0)
    cov = x[:, None] * state.cov * x[None, :] + np.diag(y)
    return GaussianState(cov, state.mean * x)


def target_output_state(eta: float, n_b: float, n_s: float) -> GaussianState:
    """Signal-idler state after the target channel: loss ``eta`` plus ``n_b`` background photons.

    The environment holds ``n_b / (1 - eta)`` photons so that exactly ``n_b``
    noise photons reach the receiver.
    """
    n_b = _check_photons("n_b", n_b)
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    if eta == 1.0:
        if n_b > 0.0:
            raise DomainError("eta = 1 with n_b > 0 needs an infinitely bright environment")
        return tmsv_state(n_s)
    ch = ThermalLossChannel(eta, n_b / (1.0 - eta))
    return apply_thermal_loss(tmsv_state(n_s), ch, 0)


def background_output_state(n_b: float, n_s: float) -> GaussianState:
    """Signal fully replaced by ``n_b`` thermal photons; idler untouched."""
    return apply_thermal_loss(tmsv_state(n_s), ThermalLossChannel(0.0, _check_photons("n_b", n_b)), 0)


def _clip_nonnegative(values: np.ndarray, what: str) -> np.ndarray:
    worst = values.min() if values.size else 0.0
    if worst < -CLIP_HARD:
        raise DomainError(f"{what} has a negative eigenvalue {worst:.3g}; input is not physical")
    return np.clip(values, 0.0, None)


def gaussian_log_fidelity(a: GaussianState, b: GaussianState) -> float:
    """Natural log of the root (Uhlmann) fidelity between two zero-mean Gaussian states.

    Uses the closed form for arbitrary multimode Gaussian states, written in
    terms of the eigenvalues of the auxiliary matrix ``V_aux @ Omega`` so that
    no non-symmetric matrix square root is needed.
    """
    if a.num_modes != b.num_modes:
        raise DomainError(f"mode counts differ: {a.num_modes} vs {b.num_modes}")
    if np.any(a.mean) or np.any(b.mean):
        raise DomainError("gaussian_fidelity only handles zero-mean states")
    if np.max(np.abs(a.cov - b.cov)) <= EQUAL_COV_ATOL:
        return 0.0

    # evaluate in a canonical order so the result is exactly symmetric
    if a.cov.tobytes() > b.cov.tobytes():
        a, b = b, a
    # convert to the vacuum-variance-1/2 convention of the closed form
    v1 = a.cov / 2.0
    v2 = b.cov / 2.0
    vsum = v1 + v2
    sign, logdet_sum = np.linalg.slogdet(vsum)
    if sign <= 0:
        raise DomainError("sum of covariances is not positive definite")

    if a.is_pure() or b.is_pure():
        # F^2 = tr(rho sigma) when one state is pure
        return -0.25 * logdet_sum

    log_f, inner_min = _log_fidelity_mixed(v1, v2, vsum, logdet_sum)
    # near-identical states lose relative accuracy, and a near-unit symplectic
    # eigenvalue puts the square root at its branch point
    if -log_f < EXTENDED_PRECISION_BELOW or inner_min < NEAR_SINGULAR:
        log_f = _log_fidelity_mixed_mp(v1, v2)
    return min(0.0, log_f)


def _log_fidelity_mixed(v1, v2, vsum, logdet_sum) -> tuple[float, float]:
    n = v1.shape[0] // 2
    omega = symplectic_form(n)
    v_aux = omega.T @ np.linalg.solve(vsum, omega / 4.0 + v2 @ omega @ v1)
    lam = np.linalg.eigvals(v_aux @ omega)
    # 1 + lam^-2 / 4 is real and >= 0 for physical inputs
    inner = _clip_nonnegative((1.0 + 0.25 / lam**2).real, "fidelity auxiliary matrix")
    sign_aux, logdet_aux = np.linalg.slogdet(v_aux)
    if sign_aux <= 0:
        raise DomainError("auxiliary covariance is not positive definite")
    log_ftot4 = float(np.sum(np.log(2.0 * (np.sqrt(inner) + 1.0)))) + logdet_aux
    return 0.25 * (log_ftot4 - logdet_sum), float(inner.min())


def _log_fidelity_mixed_mp(v1, v2) -> float:
    """Same closed form as ``_log_fidelity_mixed`` evaluated with mpmath."""
    n = v1.shape[0] // 2
    with mpmath.workdps(EXTENDED_DPS):
        a = mpmath.matrix(v1.tolist())
        b = mpmath.matrix(v2.tolist())
        omega = mpmath.matrix(symplectic_form(n).tolist())
        vsum = a + b
        v_aux = omega.T * mpmath.inverse(vsum) * (omega / 4 + b * omega * a)
        lam = mpmath.eig(v_aux * omega, left=False, right=False)
        log_ftot4 = mpmath.log(mpmath.det(v_aux))
        for ev in lam:
            inner = mpmath.re(1 + 1 / (4 * ev**2))
            if inner < -CLIP_HARD:
                raise DomainError("fidelity auxiliary matrix has a negative eigenvalue")
            log_ftot4 += mpmath.log(2 * (mpmath.sqrt(max(inner, 0)) + 1))
        return float((log_ftot4 - mpmath.log(mpmath.det(vsum))) / 4)


def gaussian_fidelity(a: GaussianState, b: GaussianState) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` between zero-mean Gaussian states."""
    return math.exp(gaussian_log_fidelity(a, b))
