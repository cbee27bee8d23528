"""Channel realization, power normalization, AWGN, and the modulo receiver.

Power convention: each transmit block is normalized to squared norm N (one
unit of energy per served user) and the receiver is granted the scalar
sqrt(gamma) that undoes the scaling, so the perturbation objective
``norm_sq(x_raw)`` directly governs post-rescale noise enhancement.  Under
this convention Es/N0 = 1/sigma2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from coplab.constellation import Constellation, nearest_point
from coplab.errors import ZeroBlock
from coplab.numerics import norm_sq
from coplab.precoder import zf_matrix


@dataclass(frozen=True)
class ChannelRealization:
    """A channel draw with its zero-forcing matrix cached."""

    h: np.ndarray  # (N, M)
    w: np.ndarray  # (M, N), h @ w == I_N up to solver residual


@dataclass(frozen=True)
class NoiseModel:
    """Complex noise variance per receive entry and the SNR it came from."""

    sigma2: float
    esn0_db: float

    @classmethod
    def from_esn0_db(cls, esn0_db: float) -> "NoiseModel":
        # 10**(-inf/10) underflows to exactly 0.0, giving a noiseless model
        return cls(sigma2=10.0 ** (-float(esn0_db) / 10.0), esn0_db=float(esn0_db))


def draw_channel(n_users: int, n_tx: int, rng) -> ChannelRealization:
    """Draw an i.i.d. complex Gaussian channel, unit variance per entry.

    The real and imaginary blocks come from one ``standard_normal((2, N, M))``
    call, which fixes the draw order for reproducibility.
    """
    if n_users > n_tx:
        raise ValueError("n_users must not exceed n_tx")
    z = rng.standard_normal((2, n_users, n_tx))
    h = np.ascontiguousarray((z[0] + 1j * z[1]) * math.sqrt(0.5))
    return ChannelRealization(h=h, w=zf_matrix(h))


def noise_unit(rng, n: int) -> np.ndarray:
    """Unit-variance noise components, shape (2, n): real block then imaginary."""
    return rng.standard_normal((2, n))


def transmit(ch: ChannelRealization, x: np.ndarray, noise: NoiseModel, rng) -> np.ndarray:
    """Propagate x through the channel and add circular complex noise.

    The unit draw is consumed even when sigma2 == 0 so that the stream
    position does not depend on the SNR.
    """
    v_unit = noise_unit(rng, ch.h.shape[0])
    v = (v_unit[0] + 1j * v_unit[1]) * math.sqrt(noise.sigma2 / 2.0)
    return ch.h @ x + v


def normalize_transmit(x_raw: np.ndarray, n_users: int):
    """Scale a block to squared norm n_users; returns (x, gamma).

    gamma = norm_sq(x_raw) / n_users is the power the precoder spent per
    user; the receiver multiplies by sqrt(gamma), so noise is enhanced in
    proportion to the minimized objective.
    """
    nsq = norm_sq(x_raw)
    if nsq == 0.0:
        raise ZeroBlock("transmit block has zero power")
    gamma = nsq / n_users
    return x_raw / math.sqrt(gamma), gamma


def receive_rescale(y: np.ndarray, gamma: float) -> np.ndarray:
    """Undo the transmit normalization with genie knowledge of gamma."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return math.sqrt(gamma) * y


def modulo_fold(y, tau: float):
    """Fold each axis into the half-open interval [-tau/2, tau/2).

    Per axis: v - tau * floor(v / tau + 1/2).  A value exactly on +tau/2
    folds to -tau/2, which keeps the boundary deterministic.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    arr = np.asarray(y, dtype=np.complex128)
    re = arr.real - tau * np.floor(arr.real / tau + 0.5)
    im = arr.imag - tau * np.floor(arr.imag / tau + 0.5)
    out = re + 1j * im
    if np.ndim(y) == 0:
        return complex(out)
    return out


def demodulate(y, cons: Constellation, tau: float, use_modulo: bool):
    """Map received values to constellation indices.

    The modulo path folds perturbation lattice offsets out first; the linear
    path (zero forcing) goes straight to the nearest point.
    """
    if use_modulo:
        y = modulo_fold(y, tau)
    return nearest_point(y, cons)
