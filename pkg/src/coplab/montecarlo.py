"""Reproducible Monte Carlo SER estimation.

Randomness contract: every trial owns the stream
``default_rng(SeedSequence((master_seed, trial_index)))`` and consumes, in
this order, the channel (unless a fixed channel is configured), the symbol
indices, and the unit noise.  Precoding consumes no randomness, so every
precoder sees identical (H, s, v) at a given (seed, trial) pair, and
results are independent of worker count or scheduling.

Sweeps over SNR re-seed each point through :func:`point_seed` so curve
points are statistically independent; sweeps over tau share the base seed
across points for paired comparison at a fixed SNR.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from time import perf_counter

import numpy as np

from coplab.constellation import Constellation, FoldMode, make_qam
from coplab.link import (
    ChannelRealization,
    demodulate,
    draw_channel,
    normalize_transmit,
    receive_rescale,
)
from coplab.numerics import qfunc
from coplab.precoder import (
    PerturbAlphabet,
    precode_cop,
    precode_dkvp,
    precode_vp,
    precode_wl_cop,
    precode_zf,
)

PRECODERS = ("zf", "vp", "dkvp", "cop", "wlcop")

# Stream index reserved for the shared channel when channel_per_trial is
# false; trial indices are always below 2**64.
CHANNEL_STREAM_INDEX = 1 << 64

# Arbitrary fixed salt separating per-point sweep seeds from trial streams.
POINT_SALT = 0x5EEDF00D


def derive_stream(master_seed: int, trial_index: int):
    """Deterministic, statistically independent stream per (seed, index).

    Built as ``default_rng(SeedSequence((master_seed, trial_index)))``; the
    contract is functional determinism for the pair, independent of the
    order streams are created in.
    """
    return np.random.default_rng(np.random.SeedSequence((master_seed, trial_index)))


def point_seed(master_seed: int, point_index: int) -> int:
    """Master seed for one sweep point.

    Point 0 keeps the base seed (a single-point sweep equals a plain
    estimate); later points hash (master_seed, POINT_SALT, index) so curve
    points are decorrelated but reproducible.
    """
    if point_index == 0:
        return int(master_seed)
    ss = np.random.SeedSequence((master_seed, POINT_SALT, point_index))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class LinkConfig:
    """One experiment point.

    ``tau`` is the perturbation spacing: alpha for the symbol-domain schemes
    (VP, DKVP), tau for the constellation-domain ones (COP, WL-COP).
    """

    n_users: int
    n_tx: int
    modulation: int
    precoder: str
    esn0_db: float
    trials: int
    master_seed: int = 0
    tau: float = 2.5
    fold_mode: FoldMode = FoldMode.NONE
    k: int = 1
    alphabet: PerturbAlphabet = field(default_factory=PerturbAlphabet)
    channel_per_trial: bool = True


@dataclass(frozen=True)
class SerRecord:
    """Aggregated result of one estimate_ser run.

    ``mean_objective`` is a diagnostic (average norm_sq(x_raw)); it is not
    part of the CSV schema and its low-order bits may depend on the worker
    count through summation order.
    """

    config: LinkConfig
    symbols_sent: int
    symbol_errors: int
    ser: float
    wall_seconds: float
    candidates: int
    mean_objective: float = 0.0


def validate_config(cfg: LinkConfig, strict_c4: bool = False) -> None:
    """Raise ValueError on an unusable configuration.

    The perturbation spacing must always exceed the largest axis level, or
    the receiver fold would corrupt even clean symbols.  ``strict_c4``
    additionally requires tau > 2 * max axis level (the clean-fold
    condition); tau sweeps deliberately cross that threshold, so it is
    enforced only where a single operating point is requested.
    """
    if cfg.n_users < 1:
        raise ValueError("n_users must be at least 1")
    if cfg.n_users > cfg.n_tx:
        raise ValueError("n_users must not exceed n_tx")
    if cfg.trials < 1:
        raise ValueError("trials must be at least 1")
    if cfg.precoder not in PRECODERS:
        raise ValueError(f"unknown precoder {cfg.precoder!r}, expected {PRECODERS}")
    if cfg.precoder == "dkvp" and not 1 <= cfg.k <= cfg.n_users:
        raise ValueError("dkvp needs 1 <= k <= n_users")
    if not isinstance(cfg.fold_mode, FoldMode):
        raise ValueError("fold_mode must be a FoldMode")
    if cfg.master_seed < 0:
        raise ValueError("master_seed must be nonnegative")
    cons = make_qam(cfg.modulation)  # raises UnsupportedModulation
    if not math.isfinite(cfg.tau) or cfg.tau <= cons.max_axis:
        raise ValueError(
            f"tau {cfg.tau} must exceed the largest axis level "
            f"{cons.max_axis:.6g} of {cfg.modulation}-QAM"
        )
    if strict_c4 and cfg.tau <= 2.0 * cons.max_axis:
        raise ValueError(
            f"tau {cfg.tau} violates the clean-fold condition "
            f"tau > {2.0 * cons.max_axis:.6g} for {cfg.modulation}-QAM"
        )


_cons_cache: dict = {}


def _constellation(order: int) -> Constellation:
    cons = _cons_cache.get(order)
    if cons is None:
        cons = make_qam(order)
        _cons_cache[order] = cons
    return cons


def fixed_channel(cfg: LinkConfig) -> ChannelRealization:
    """The shared channel used when channel_per_trial is false."""
    rng = derive_stream(cfg.master_seed, CHANNEL_STREAM_INDEX)
    return draw_channel(cfg.n_users, cfg.n_tx, rng)


def trial_draws(cfg: LinkConfig, trial_index: int, channel: ChannelRealization = None):
    """All randomness of one trial: (channel, symbol indices, unit noise).

    This is the single source of truth for the draw order; run_trial
    consumes exactly these values, which is what makes comparisons across
    precoders common-random-number pairs.
    """
    rng = derive_stream(cfg.master_seed, trial_index)
    if cfg.channel_per_trial:
        ch = draw_channel(cfg.n_users, cfg.n_tx, rng)
    else:
        ch = channel if channel is not None else fixed_channel(cfg)
    s_indices = rng.integers(0, cfg.modulation, size=cfg.n_users)
    v_unit = rng.standard_normal((2, cfg.n_users))
    return ch, s_indices, v_unit


def _precode(cfg: LinkConfig, w, s, s_indices, cons):
    if cfg.precoder == "zf":
        return precode_zf(w, s)
    if cfg.precoder == "vp":
        return precode_vp(w, s, cfg.tau, cfg.alphabet)
    if cfg.precoder == "dkvp":
        return precode_dkvp(w, s, cfg.tau, cfg.alphabet, cfg.k)
    if cfg.precoder == "cop":
        return precode_cop(w, s_indices, cons, cfg.tau, cfg.alphabet)
    if cfg.precoder == "wlcop":
        return precode_wl_cop(w, s_indices, cons, cfg.tau, cfg.alphabet, cfg.fold_mode)
    raise ValueError(f"unknown precoder {cfg.precoder!r}")


def run_trial(cfg: LinkConfig, trial_index: int, channel: ChannelRealization = None):
    """One block: draw, precode, transmit, demodulate.

    Returns (errors, objective, candidates).  Dimension and conditioning
    failures propagate as trial-fatal errors.
    """
    cons = _constellation(cfg.modulation)
    ch, s_indices, v_unit = trial_draws(cfg, trial_index, channel)
    s = cons.points[s_indices]
    pres = _precode(cfg, ch.w, s, s_indices, cons)
    x, gamma = normalize_transmit(pres.x_raw, cfg.n_users)
    sigma2 = 10.0 ** (-float(cfg.esn0_db) / 10.0)
    v = (v_unit[0] + 1j * v_unit[1]) * math.sqrt(sigma2 / 2.0)
    y = ch.h @ x + v
    y_tilde = receive_rescale(y, gamma)
    idx_hat = demodulate(y_tilde, cons, cfg.tau, use_modulo=cfg.precoder != "zf")
    errors = int(np.count_nonzero(idx_hat != s_indices))
    return errors, pres.objective, pres.candidates


def _run_range(cfg: LinkConfig, start: int, stop: int):
    channel = None if cfg.channel_per_trial else fixed_channel(cfg)
    errors = 0
    candidates = 0
    obj_sum = 0.0
    for t in range(start, stop):
        e, obj, cand = run_trial(cfg, t, channel)
        errors += e
        candidates += cand
        obj_sum += obj
    return errors, candidates, obj_sum


def estimate_ser(cfg: LinkConfig, workers: int = 1) -> SerRecord:
    """Average SER over cfg.trials independent trials.

    The per-trial error and candidate counts are integers derived only from
    (master_seed, trial_index), so their sums are identical for any worker
    count or chunking.
    """
    validate_config(cfg)
    t0 = perf_counter()
    workers = max(1, int(workers))
    if workers == 1 or cfg.trials == 1:
        errors, candidates, obj_sum = _run_range(cfg, 0, cfg.trials)
    else:
        workers = min(workers, cfg.trials)
        bounds = np.linspace(0, cfg.trials, workers + 1, dtype=int)
        errors = 0
        candidates = 0
        obj_sum = 0.0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_range, cfg, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:])
                if b > a
            ]
            for fut in futures:
                e, cand, obj = fut.result()
                errors += e
                candidates += cand
                obj_sum += obj
    wall = perf_counter() - t0
    symbols = cfg.trials * cfg.n_users
    return SerRecord(
        config=cfg,
        symbols_sent=symbols,
        symbol_errors=errors,
        ser=errors / symbols,
        wall_seconds=wall,
        candidates=candidates,
        mean_objective=obj_sum / cfg.trials,
    )


def sweep_snr(cfg_base: LinkConfig, esn0_list, workers: int = 1):
    """One SerRecord per SNR point, each point independently seeded."""
    if len(esn0_list) == 0:
        raise ValueError("esn0_list must not be empty")
    records = []
    for i, esn0 in enumerate(esn0_list):
        cfg = replace(
            cfg_base,
            esn0_db=float(esn0),
            master_seed=point_seed(cfg_base.master_seed, i),
        )
        records.append(estimate_ser(cfg, workers))
    return records


def sweep_tau(cfg_base: LinkConfig, tau_list, workers: int = 1):
    """One SerRecord per tau at the base SNR.

    All points share the base seed, so SER differences across tau are
    paired comparisons on identical (H, s, v) realizations.
    """
    if len(tau_list) == 0:
        raise ValueError("tau_list must not be empty")
    records = []
    for tau in tau_list:
        cfg = replace(cfg_base, tau=float(tau))
        records.append(estimate_ser(cfg, workers))
    return records


def awgn_ser_reference(modulation: int, esn0_db: float) -> float:
    """Closed-form SER of square QAM on the pure AWGN channel.

    Standard minimum-distance union result for unit-energy L-QAM: with
    per-axis error probability P = 2 (1 - 1/sqrt(L)) Q(sqrt(3 g / (L - 1)))
    at Es/N0 = g, the symbol error rate is 1 - (1 - P)^2.  Serves as the
    interference-free lower bound alongside simulated curves.
    """
    cons = _constellation(modulation)  # validates the order
    side = cons.side
    g = 10.0 ** (float(esn0_db) / 10.0)
    p_axis = 2.0 * (1.0 - 1.0 / side) * float(qfunc(math.sqrt(3.0 * g / (modulation - 1))))
    return 1.0 - (1.0 - p_axis) ** 2
