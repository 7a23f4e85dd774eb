"""Reproducible Gaussian noise from a counter-based generator.

The stream is fully specified so it can be reproduced in any language:
Philox 4x64 (10 rounds) with key = (seed, 0) and counter starting at 0
produces 64-bit words w_0, w_1, ...; uniforms are u_i = (w_i >> 11) * 2^-53
and normal deviates follow the Box-Muller cosine branch,

    z_k = sqrt(-2 ln(1 - u_{2k})) * cos(2 pi u_{2k+1}).
"""

from __future__ import annotations

import numpy as np

from .spectra import Spectrum


def normal_samples(n, seed):
    """n standard normal deviates for a given integer seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not 0 <= int(seed) < 2 ** 64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    if n == 0:
        return np.empty(0)
    raw = np.random.Philox(key=int(seed)).random_raw(2 * n)
    u = (raw >> np.uint64(11)) * 2.0 ** -53
    return np.sqrt(-2.0 * np.log1p(-u[0::2])) * np.cos(2.0 * np.pi * u[1::2])


def apply_noise(spectrum, sigma, seed):
    """Spectrum with additive Gaussian contrast noise of scale sigma."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return spectrum
    noisy = spectrum.contrast + sigma * normal_samples(len(spectrum), seed)
    return Spectrum(frequencies_hz=spectrum.frequencies_hz, contrast=noisy)
