"""Monte Carlo simulation of the conditional-nulling (CN) receiver.

The receiver scans bins 1..N with the target-test measurement. The true
target always answers "t"; a reference bin answers "t" (false alarm) with
probability zeta1. After a false alarm the receiver keeps that bin as its
guess and switches to confirming the remaining bins with the reference
measurement: references always answer "r", the target answers "r" (miss)
with probability zeta2, in which case the wrong guess stands.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.stats import binomtest

from .bounds import CNParams, ScenarioParams, cn_error_probability, cn_zeta
from .exceptions import DomainError

# entries of the per-block uniform matrix; fixes the block partition for a given N
_BLOCK_ENTRIES = 1 << 21
ZETA_FLOOR = 1e-300


class Phase(Enum):
    SCAN = "scan"
    CONFIRM = "confirm"


@dataclass(frozen=True)
class CNSimConfig:
    cn: CNParams
    trials: int
    master_seed: int = 42

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials}")
        if not (0 <= self.master_seed < 2**64):
            raise DomainError("master_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class CNSimResult:
    config: CNSimConfig
    error_count: int
    error_rate: float
    std_error: float
    wilson_95_interval: tuple
    analytic: float
    analytic_only: bool = field(default=False)

    def as_dict(self) -> dict:
        cn = self.config.cn
        return {
            "zeta1": cn.zeta1,
            "zeta2": cn.zeta2,
            "hypotheses": cn.n_hyp,
            "trials": self.config.trials,
            "seed": self.config.master_seed,
            "error_count": self.error_count,
            "error_rate": self.error_rate,
            "std_error": self.std_error,
            "wilson_lo": self.wilson_95_interval[0],
            "wilson_hi": self.wilson_95_interval[1],
            "analytic": self.analytic,
            "analytic_only": self.analytic_only,
        }


def simulate_cn_trial(cn: CNParams, target_bin: int, rng: np.random.Generator, trace: list | None = None) -> bool:
    """Run one receiver pass; returns True on a wrong decision.

    ``trace``, if given, collects ``(phase, bin, outcome)`` for every measurement.
    """
    n = cn.n_hyp
    if not (1 <= target_bin <= n):
        raise DomainError(f"target bin {target_bin} outside 1..{n}")
    phase = Phase.SCAN
    guess = None
    for b in range(1, n + 1):
        if phase is Phase.SCAN:
            if b == target_bin:
                outcome = "t"
            else:
                outcome = "t" if rng.random() < cn.zeta1 else "r"
            if trace is not None:
                trace.append((phase, b, outcome))
            if outcome == "t":
                if b == target_bin:
                    return False
                guess = b
                phase = Phase.CONFIRM
        else:
            if b == target_bin:
                outcome = "r" if rng.random() < cn.zeta2 else "t"
            else:
                outcome = "r"
            if trace is not None:
                trace.append((phase, b, outcome))
            if b == target_bin:
                # a miss leaves the false-alarm guess in place
                return outcome == "r" and guess != target_bin
    raise AssertionError("the scan always reaches the target bin")


def _block_rng(master_seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(block,))))


def _block_size(n_hyp: int) -> int:
    return max(1, _BLOCK_ENTRIES // n_hyp)


def _block_errors(cn: CNParams, master_seed: int, block: int, size: int) -> int:
    rng = _block_rng(master_seed, block)
    n = cn.n_hyp
    target = rng.integers(1, n + 1, size=size)
    scan = rng.random((size, n - 1))
    confirm = rng.random(size)
    # column j is the (j+1)-th bin; only bins before the target are scanned as references
    before = np.arange(n - 1)[None, :] < (target - 1)[:, None]
    false_alarm = np.any((scan < cn.zeta1) & before, axis=1)
    return int(np.count_nonzero(false_alarm & (confirm < cn.zeta2)))


def _resolve_threads(threads: int) -> int:
    if threads < 0:
        raise DomainError("threads must be >= 0")
    return threads or os.cpu_count() or 1


def wilson_interval(errors: int, trials: int) -> tuple:
    ci = binomtest(errors, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return (float(ci.low), float(ci.high))


def _result(config: CNSimConfig, errors: int) -> CNSimResult:
    n = config.trials
    p = errors / n
    lo, hi = wilson_interval(errors, n)
    return CNSimResult(
        config=config,
        error_count=errors,
        error_rate=p,
        std_error=math.sqrt(p * (1.0 - p) / n),
        wilson_95_interval=(min(lo, p), max(hi, p)),
        analytic=cn_error_probability(config.cn),
    )


def simulate_cn(config: CNSimConfig, threads: int = 1) -> CNSimResult:
    """Estimate the CN error rate; the result depends only on ``config``.

    Trials are cut into fixed blocks, each with its own stream derived from
    (master_seed, block index), so ``threads`` changes speed only.
    """
    size = _block_size(config.cn.n_hyp)
    nblocks = -(-config.trials // size)
    sizes = [size] * (nblocks - 1) + [config.trials - size * (nblocks - 1)]

    def run(i):
        return _block_errors(config.cn, config.master_seed, i, sizes[i])

    workers = _resolve_threads(threads)
    if workers == 1 or nblocks == 1:
        errors = sum(map(run, range(nblocks)))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = sum(pool.map(run, range(nblocks)))
    return _result(config, errors)


def simulate_cn_trials(config: CNSimConfig) -> CNSimResult:
    """Slow reference path: one explicit state-machine pass per trial."""
    rng = _block_rng(config.master_seed, 0)
    n = config.cn.n_hyp
    errors = 0
    for _ in range(config.trials):
        errors += simulate_cn_trial(config.cn, int(rng.integers(1, n + 1)), rng)
    return _result(config, errors)


def simulate_qtr_cn(s: ScenarioParams, trials: int, master_seed: int = 42, threads: int = 1) -> CNSimResult:
    """CN receiver for target ranging with ``zeta1 = zeta2 = exp(-M eta n_s / n_b)`` and N = m."""
    zeta = cn_zeta(s)
    config = CNSimConfig(CNParams(zeta, zeta, s.m), trials, master_seed)
    if zeta < ZETA_FLOOR:
        p = cn_error_probability(config.cn)
        return CNSimResult(config, 0, p, 0.0, (p, p), p, analytic_only=True)
    return simulate_cn(config, threads)
