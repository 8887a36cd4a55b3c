"""Closed-form error-probability bounds for channel position finding and target ranging."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DomainError


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _finite_nonneg(name: str, x: float) -> float:
    x = float(x)
    _require(math.isfinite(x) and x >= 0.0, f"{name} must be finite and >= 0, got {x}")
    return x


@dataclass(frozen=True)
class ScenarioParams:
    """Ranging scenario: ``m`` bins, ``big_m`` modes per bin, ``n_s`` signal photons
    per mode, round-trip transmissivity ``eta`` and ``n_b`` background photons per mode."""

    m: int
    big_m: int
    n_s: float
    eta: float
    n_b: float

    def __post_init__(self):
        _require(int(self.m) == self.m and self.m >= 2, f"m must be an integer >= 2, got {self.m}")
        _require(int(self.big_m) == self.big_m and self.big_m >= 1, f"M must be an integer >= 1, got {self.big_m}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "big_m", int(self.big_m))
        object.__setattr__(self, "n_s", _finite_nonneg("n_s", self.n_s))
        object.__setattr__(self, "n_b", _finite_nonneg("n_b", self.n_b))
        eta = float(self.eta)
        _require(0.0 <= eta <= 1.0, f"eta must lie in [0, 1], got {eta}")
        object.__setattr__(self, "eta", eta)

    @property
    def snr(self) -> float:
        """Single-use signal-to-noise ratio ``eta * n_s / n_b``."""
        _require(self.n_b > 0.0, "SNR is undefined when n_b = 0")
        return self.eta * self.n_s / self.n_b

    @property
    def total_photons(self) -> float:
        return self.m * self.big_m * self.n_s


@dataclass(frozen=True)
class CNParams:
    zeta1: float
    zeta2: float
    n_hyp: int

    def __post_init__(self):
        for name in ("zeta1", "zeta2"):
            v = float(getattr(self, name))
            _require(0.0 <= v <= 1.0, f"{name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, v)
        _require(int(self.n_hyp) == self.n_hyp and self.n_hyp >= 2, f"number of hypotheses must be >= 2, got {self.n_hyp}")
        object.__setattr__(self, "n_hyp", int(self.n_hyp))


REPORT_COLUMNS = (
    "m",
    "M",
    "n_s",
    "eta",
    "n_b",
    "gamma",
    "classical_cpf_lb",
    "quantum_ub_exact",
    "quantum_ub_asym",
    "cn_qtr_asym",
    "classical_ctr_lb",
    "advantage_possible",
)


@dataclass(frozen=True)
class BoundsReport:
    """Every bound for one scenario; probabilities are raw and may exceed 1."""

    params: ScenarioParams
    classical_cpf_lb: float
    quantum_ub_exact: float
    quantum_ub_asym: float
    cn_qtr_asym: float
    classical_ctr_lb: float
    advantage_possible: bool
    condition_holds: bool = field(default=False)

    @property
    def gamma(self) -> float:
        return self.params.snr

    @property
    def vacuous(self) -> bool:
        """True when some upper bound exceeds 1 and therefore says nothing."""
        return max(self.quantum_ub_exact, self.quantum_ub_asym, self.cn_qtr_asym) > 1.0

    def as_row(self) -> dict:
        p = self.params
        return {
            "m": p.m,
            "M": p.big_m,
            "n_s": p.n_s,
            "eta": p.eta,
            "n_b": p.n_b,
            "gamma": self.gamma,
            "classical_cpf_lb": self.classical_cpf_lb,
            "quantum_ub_exact": self.quantum_ub_exact,
            "quantum_ub_asym": self.quantum_ub_asym,
            "cn_qtr_asym": self.cn_qtr_asym,
            "classical_ctr_lb": self.classical_ctr_lb,
            "advantage_possible": self.advantage_possible,
        }


def _check_m(m) -> int:
    _require(int(m) == m and m >= 2, f"m must be an integer >= 2, got {m}")
    return int(m)


def _check_big_m(big_m) -> int:
    _require(int(big_m) == big_m and big_m >= 1, f"M must be an integer >= 1, got {big_m}")
    return int(big_m)


def cpf_noise_constant(e_b: float, e_t: float) -> float:
    """``[1 + (sqrt(E_B (1 + E_T)) - sqrt(E_T (1 + E_B)))^2]^-1``."""
    e_b = _finite_nonneg("E_B", e_b)
    e_t = _finite_nonneg("E_T", e_t)
    d = math.sqrt(e_b * (1.0 + e_t)) - math.sqrt(e_t * (1.0 + e_b))
    return 1.0 / (1.0 + d * d)


def classical_cpf_lower_bound(m, big_m, n_s, mu_b, mu_t, e_b, e_t) -> float:
    """Helstrom lower bound on the error of CPF with any classical (positive-P) source."""
    m = _check_m(m)
    big_m = _check_big_m(big_m)
    n_s = _finite_nonneg("n_s", n_s)
    _require(0.0 <= mu_b <= 1.0 and 0.0 <= mu_t <= 1.0, "transmissivities must lie in [0, 1]")
    c = cpf_noise_constant(e_b, e_t)
    dist = (math.sqrt(mu_b) - math.sqrt(mu_t)) ** 2
    exponent = 2.0 * big_m * math.log(c) - 2.0 * big_m * n_s * dist / (1.0 + e_b + e_t)
    return (m - 1) / (2.0 * m) * math.exp(exponent)


def quantum_cpf_upper_bound_exact(m, big_m, single_copy_fidelity: float) -> float:
    """``(m - 1) F^(2M)`` for the entangled source; ``F`` is the single-copy root fidelity."""
    m = _check_m(m)
    big_m = _check_big_m(big_m)
    f = float(single_copy_fidelity)
    _require(0.0 <= f <= 1.0, f"fidelity must lie in [0, 1], got {f}")
    if f == 0.0:
        return 0.0
    return quantum_cpf_upper_bound_from_log(m, big_m, math.log(f))


def quantum_cpf_upper_bound_from_log(m, big_m, log_fidelity: float) -> float:
    """Same as ``quantum_cpf_upper_bound_exact`` but takes ``ln F``, avoiding rounding of F near 1."""
    _require(log_fidelity <= 0.0, "log fidelity must be <= 0")
    return (m - 1) * math.exp(2.0 * big_m * log_fidelity)


def qtr_quantum_ub_asymptotic(s: ScenarioParams) -> float:
    return (s.m - 1) * math.exp(-s.big_m * s.eta * s.n_s / (s.n_b + 1.0))


def _cn_sum(zeta1: float, n: int) -> float:
    # sum_{j=1}^{n-1} [1 - (1 - zeta1)^j] = (n zeta1 + (1 - zeta1)^n - 1) / zeta1
    if zeta1 == 0.0:
        return 0.0
    if zeta1 == 1.0:
        return float(n - 1)
    l1 = math.log1p(-zeta1)
    return math.fsum(-math.expm1(j * l1) for j in range(1, n))


def cn_error_probability(p: CNParams) -> float:
    """Mean error of the conditional-nulling receiver.

    Evaluates ``(zeta2 / (N zeta1)) (N zeta1 + (1 - zeta1)^N - 1)`` through the
    equivalent sum over target positions, which stays accurate as zeta1 -> 0
    and takes the continuous value 0 there.
    """
    return p.zeta2 * _cn_sum(p.zeta1, p.n_hyp) / p.n_hyp


def log_qtr_cn_asymptotic(s: ScenarioParams) -> float:
    _require(s.n_b > 0.0, "the CN asymptote diverges at n_b = 0")
    return math.log(0.5 * (s.m - 1)) - 2.0 * s.big_m * s.eta * s.n_s / s.n_b


def qtr_cn_asymptotic(s: ScenarioParams) -> float:
    return math.exp(log_qtr_cn_asymptotic(s))


def cn_zeta(s: ScenarioParams) -> float:
    """Common Type-I/II rate ``exp(-M eta n_s / n_b)`` of the SFG-based CN receiver."""
    _require(s.n_b > 0.0, "zeta is undefined at n_b = 0")
    return math.exp(-s.big_m * s.eta * s.n_s / s.n_b)


def classical_qtr_lower_bound_per_bin(s: ScenarioParams) -> float:
    return (s.m - 1) / (2.0 * s.m) * math.exp(-2.0 * s.big_m * s.eta * s.n_s / (2.0 * s.n_b + 1.0))


def log_classical_ctr_lower_bound(s: ScenarioParams) -> float:
    return math.log((s.m - 1) / (2.0 * s.m)) - 2.0 * s.m * s.big_m * s.eta * s.n_s / (2.0 * s.n_b + 1.0)


def classical_ctr_lower_bound(s: ScenarioParams) -> float:
    """Classical bound when the whole ``m M n_s`` budget is sent as one pulse."""
    return math.exp(log_classical_ctr_lower_bound(s))


def advantage_rhs(m, big_m, gamma, n_b):
    """Right-hand side ``2 M gamma (n_b (2 - m) + 1) / (2 n_b + 1)``; broadcasts over arrays."""
    return 2.0 * big_m * gamma * (n_b * (2.0 - m) + 1.0) / (2.0 * n_b + 1.0)


def advantage_condition(m, big_m, gamma: float, n_b: float) -> bool:
    """Whether the CN quantum bound can undercut the one-pulse classical bound."""
    m = _check_m(m)
    big_m = _check_big_m(big_m)
    _require(math.isfinite(gamma) and gamma > 0.0, f"gamma must be > 0, got {gamma}")
    _require(math.isfinite(n_b) and n_b > 0.0, f"n_b must be > 0, got {n_b}")
    return math.log(m) <= advantage_rhs(m, big_m, gamma, n_b)


def witness_negative(m, n_b):
    """``n_b (2 - m) + 1 < 0``: the condition's sign factor, negative iff n_b > 1/(m - 2)."""
    return n_b * (2.0 - m) + 1.0 < 0.0


@dataclass
class AdvantageSearch:
    grid_size: int
    satisfying: list  # (m, M, n_b, gamma) tuples
    witness_points: int  # grid points with n_b > 1/(m - 2)
    witness_violations: int  # such points that still satisfy the condition
    restricted_points: int  # grid points with n_b > 1 and m > 2
    restricted_satisfying: int

    @property
    def empty(self) -> bool:
        return not self.satisfying


def _grid(values, name, positive=False, integer=False) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float)
    _require(arr.size > 0, f"{name} grid is empty")
    _require(np.all(np.isfinite(arr)), f"{name} grid has non-finite values")
    if positive:
        _require(np.all(arr > 0), f"{name} grid must be strictly positive")
    if integer:
        _require(np.all(arr == np.round(arr)), f"{name} grid must hold integers")
    return arr


def advantage_region_search(
    m_range: Sequence[int],
    n_b_range: Sequence[float],
    big_m_range: Sequence[int],
    gamma_range: Sequence[float],
) -> AdvantageSearch:
    """Evaluate the advantage condition on the full Cartesian grid."""
    ms = _grid(m_range, "m", integer=True)
    _require(np.all(ms >= 2), "m grid must be >= 2")
    nbs = _grid(n_b_range, "n_b", positive=True)
    bms = _grid(big_m_range, "M", integer=True)
    _require(np.all(bms >= 1), "M grid must be >= 1")
    gs = _grid(gamma_range, "gamma", positive=True)

    m, nb, bm, g = np.meshgrid(ms, nbs, bms, gs, indexing="ij")
    ok = np.log(m) <= advantage_rhs(m, bm, g, nb)
    wit = (m > 2) & witness_negative(m, nb)
    restricted = (m > 2) & (nb > 1.0)
    idx = np.argwhere(ok)
    satisfying = [(int(ms[i]), int(bms[k]), float(nbs[j]), float(gs[l])) for i, j, k, l in idx]
    return AdvantageSearch(
        grid_size=int(ok.size),
        satisfying=satisfying,
        witness_points=int(wit.sum()),
        witness_violations=int((wit & ok).sum()),
        restricted_points=int(restricted.sum()),
        restricted_satisfying=int((restricted & ok).sum()),
    )
