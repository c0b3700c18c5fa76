"""Chunked, counter-seeded Monte Carlo link simulation.

Each trial draws a fresh stale estimate, runs the scheme's selection on it,
ages the winner by one feedback step, and tests the aged effective gain
against the outage threshold.  Trials are split into fixed-size chunks; chunk
j consumes the counter-based stream (seed, offset + j), so the outage count
depends only on (trials, seed, chunk) and never on how many workers execute
the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import SchemeId, scheme_uses_codebook, validate_scheme
from .channel import RngStream, SystemConfig, derive_params
from .codebook import Codebook

__all__ = ["McResult", "TrialPlan", "simulate_outage", "sweep"]

#: Stream-id stride between sweep axis values; chunk indices stay below it.
_SWEEP_STRIDE = 1 << 32


@dataclass(frozen=True)
class TrialPlan:
    trials: int
    seed: int
    workers: int = 1
    chunk: int = 1 << 16

    def __post_init__(self) -> None:
        for name, val in (("trials", self.trials), ("workers", self.workers), ("chunk", self.chunk)):
            if int(val) != val or val < 1:
                raise ValueError(f"{name} must be a positive integer, got {val!r}")


@dataclass(frozen=True)
class McResult:
    outage_count: int
    trials: int

    def __post_init__(self) -> None:
        if not 0 <= self.outage_count <= self.trials:
            raise ValueError("outage_count must lie in [0, trials]")

    @property
    def p_hat(self) -> float:
        return self.outage_count / self.trials

    @property
    def std_err(self) -> float:
        # Degenerate counts get 1/trials so the +-3 std_err interval matches
        # the rule-of-three bound 3/trials.
        if self.outage_count in (0, self.trials):
            return 1.0 / self.trials
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)


def _cn(gen: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    z = gen.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def _rvq_vectors(gen, n: int, size: int, n_t: int, cb: Codebook | None, fixed: bool):
    if fixed:
        return cb.vectors, True
    raw = _cn(gen, (n, size, n_t))
    return raw / np.linalg.norm(raw, axis=2, keepdims=True), False


def _count_chunk(
    scheme: SchemeId,
    config: SystemConfig,
    n: int,
    rng: RngStream,
    gamma0: float,
    rho: float,
    cb: Codebook | None,
    fixed_codebook: bool,
) -> int:
    gen = rng.generator()
    decay = math.sqrt(1.0 - rho * rho)
    n_t = config.n_t
    idx = np.arange(n)

    if scheme is SchemeId.MISO_PBF:
        h = _cn(gen, (n, n_t))
        e = _cn(gen, (n, n_t))
        aged = rho * h + decay * e
        num = np.abs(np.einsum("ij,ij->i", aged, h.conj())) ** 2
        den = np.einsum("ij,ij->i", h, h.conj()).real
        gain = num / den
    elif scheme is SchemeId.MISO_RVQ:
        h = _cn(gen, (n, n_t))
        vecs, shared = _rvq_vectors(gen, n, cb.cardinality, n_t, cb, fixed_codebook)
        if shared:
            proj = np.abs(h @ vecs.conj().T) ** 2
            best = vecs[np.argmax(proj, axis=1)]
        else:
            proj = np.abs(np.einsum("ij,ikj->ik", h, vecs.conj())) ** 2
            best = vecs[idx, np.argmax(proj, axis=1)]
        e = _cn(gen, (n, n_t))
        aged = rho * h + decay * e
        gain = np.abs(np.einsum("ij,ij->i", aged, best.conj())) ** 2
    elif scheme is SchemeId.MISO_TAS:
        h = _cn(gen, (n, n_t))
        e = _cn(gen, (n, n_t))
        sel = np.argmax(np.abs(h) ** 2, axis=1)
        aged = (rho * h + decay * e)[idx, sel]
        gain = aged.real ** 2 + aged.imag ** 2
    elif scheme is SchemeId.MU_TAS:
        h = _cn(gen, (n, config.n_u, n_t, config.n_r))
        norms = np.sum(np.abs(h) ** 2, axis=3).reshape(n, -1)  # user-major (k, i) order
        rows = h.reshape(n, -1, config.n_r)[idx, np.argmax(norms, axis=1)]
        e = _cn(gen, (n, config.n_r))
        aged = rho * rows + decay * e
        gain = np.sum(np.abs(aged) ** 2, axis=1)
    elif scheme is SchemeId.MU_PBF:
        h = _cn(gen, (n, config.n_u, n_t))
        win = h[idx, np.argmax(np.sum(np.abs(h) ** 2, axis=2), axis=1)]
        e = _cn(gen, (n, n_t))
        aged = rho * win + decay * e
        gain = np.sum(np.abs(aged) ** 2, axis=1)
    elif scheme is SchemeId.MU_RVQ:
        h = _cn(gen, (n, config.n_u, n_t))
        win = h[idx, np.argmax(np.sum(np.abs(h) ** 2, axis=2), axis=1)]
        vecs, shared = _rvq_vectors(gen, n, cb.cardinality, n_t, cb, fixed_codebook)
        if shared:
            proj = np.abs(win @ vecs.conj().T) ** 2
        else:
            proj = np.abs(np.einsum("ij,ikj->ik", win, vecs.conj())) ** 2
        nu = np.max(proj, axis=1) / np.sum(np.abs(win) ** 2, axis=1)
        e = _cn(gen, (n, n_t))
        aged = rho * np.sqrt(nu)[:, None] * win + decay * e
        gain = np.sum(np.abs(aged) ** 2, axis=1)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return int(np.count_nonzero(gain < gamma0))


def simulate_outage(
    scheme: SchemeId,
    config: SystemConfig,
    codebook: Codebook | None,
    plan: TrialPlan,
    fixed_codebook: bool = False,
    stream_offset: int = 0,
) -> McResult:
    """Empirical outage probability over plan.trials link realizations.

    RVQ schemes need a codebook argument; by default only its cardinality is
    used and a fresh codebook is drawn every trial, so the estimate averages
    over codebook realizations.  Pass fixed_codebook=True to reuse the given
    vectors in every trial.  PBF and TAS ignore the codebook (theirs are
    virtual).
    """
    validate_scheme(scheme, config)
    if scheme_uses_codebook(scheme):
        if codebook is None or codebook.cardinality < 1:
            raise ValueError(f"{scheme.value} needs a codebook with at least one vector")
        if codebook.n_t != config.n_t:
            raise ValueError("codebook dimension does not match n_t")
    rho = config.rho
    gamma0 = derive_params(config).gamma0

    sizes = [plan.chunk] * (plan.trials // plan.chunk)
    if plan.trials % plan.chunk:
        sizes.append(plan.trials % plan.chunk)

    def job(j_size):
        j, size = j_size
        return _count_chunk(
            scheme, config, size, RngStream(plan.seed, stream_offset + j),
            gamma0, rho, codebook, fixed_codebook,
        )

    jobs = list(enumerate(sizes))
    if plan.workers == 1:
        counts = [job(item) for item in jobs]
    else:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            counts = list(pool.map(job, jobs))
    return McResult(outage_count=sum(counts), trials=plan.trials)


def _config_for(config: SystemConfig, axis: str, value) -> SystemConfig:
    from .channel import PersistenceSpec

    if axis == "snr_db":
        return SystemConfig(
            n_t=config.n_t, rate_bits=config.rate_bits,
            snr_linear=10.0 ** (float(value) / 10.0),
            persistence=config.persistence, n_r=config.n_r, n_u=config.n_u,
        )
    if axis == "rho":
        return SystemConfig(
            n_t=config.n_t, rate_bits=config.rate_bits, snr_linear=config.snr_linear,
            persistence=PersistenceSpec.from_rho(float(value)), n_r=config.n_r, n_u=config.n_u,
        )
    if axis == "users":
        return SystemConfig(
            n_t=config.n_t, rate_bits=config.rate_bits, snr_linear=config.snr_linear,
            persistence=config.persistence, n_r=config.n_r, n_u=int(value),
        )
    if axis == "codebook_size":
        return config
    raise ValueError(f"unknown sweep axis {axis!r}")


def sweep(
    scheme: SchemeId,
    config_template: SystemConfig,
    axis: str,
    values,
    plan: TrialPlan,
    codebook: Codebook | None = None,
    fixed_codebook: bool = False,
) -> list[tuple[float, McResult]]:
    """One simulate_outage per axis value with stream-separated randomness.

    The first value reuses the unshifted streams, so a single-value sweep
    reproduces a direct simulate_outage call with the same plan.
    """
    from .codebook import rvq_generate

    out = []
    for i, value in enumerate(values):
        cfg = _config_for(config_template, axis, value)
        cb = codebook
        if axis == "codebook_size" and scheme_uses_codebook(scheme):
            # only the cardinality matters unless the codebook is held fixed
            cb = rvq_generate(RngStream(plan.seed, _SWEEP_STRIDE - 1), int(value), cfg.n_t)
        result = simulate_outage(
            scheme, cfg, cb, plan,
            fixed_codebook=fixed_codebook, stream_offset=i * _SWEEP_STRIDE,
        )
        out.append((value, result))
    return out
