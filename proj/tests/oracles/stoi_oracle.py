#!/usr/bin/env python3
# tests/oracles/stoi_oracle.py

# Copyright 2026 rirbench authors

# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
# KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
# WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
# MERCHANTABLITY OR NON-INFRINGEMENT.
# See the Apache 2 License for the specific language governing permissions and
# limitations under the License.


"""Reference STOI values on a deterministic 10 kHz test signal.

The signal and noise generators are mirrored in tests/unit/test_speech.cpp.
"""

import numpy as np
from pystoi import stoi

RATE = 10000
N = 30000


def lcg_noise(n, seed):
    out = np.empty(n)
    x = seed
    for i in range(n):
        x = (1103515245 * x + 12345) % 2147483648
        out[i] = x / 2147483648.0 - 0.5
    return out


def speechy(n):
    t = np.arange(n) / RATE
    env = np.maximum(0.0, np.sin(2 * np.pi * 3.0 * t)) ** 2
    env[(t > 1.2) & (t < 1.5)] = 0.0
    carrier = np.zeros(n)
    for k, f in enumerate((180.0, 360.0, 720.0, 1100.0, 2300.0)):
        carrier += np.sin(2 * np.pi * f * t * (1.0 + 0.05 * np.sin(2 * np.pi * 0.7 * t)) + k) / (k + 1)
    return env * carrier + 0.2 * env * lcg_noise(n, 7)


def speech_shaped(n):
    """Noise with a falling spectrum under a 2.5 Hz syllabic envelope."""
    w = lcg_noise(n, 31)
    y = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc = 0.95 * acc + w[i]
        y[i] = acc
    t = np.arange(n) / RATE
    return np.maximum(0.0, np.sin(2 * np.pi * 2.5 * t)) ** 1.5 * y


def main():
    clean = speechy(N)
    noise = lcg_noise(N, 12345)
    p_clean = np.mean(clean ** 2)
    p_noise = np.mean(noise ** 2)
    for snr in (10.0, 5.0, 0.0, -5.0, -10.0):
        g = np.sqrt(p_clean / (p_noise * 10 ** (snr / 10)))
        print(f"snr {snr:+.0f}: {stoi(clean, clean + g * noise, RATE):.12f}")
    rir = np.exp(-np.arange(3000) / (0.08 * RATE)) * lcg_noise(3000, 99)
    rir[0] = 1.0
    reverb = np.convolve(clean, rir)[:N]
    print(f"reverb: {stoi(clean, reverb, RATE):.12f}")
    shaped = speech_shaped(N)
    p_shaped = np.mean(shaped ** 2)
    for snr in (5.0, 0.0, -5.0, -10.0):
        g = np.sqrt(p_shaped / (p_noise * 10 ** (snr / 10)))
        print(f"shaped snr {snr:+.0f}: {stoi(shaped, shaped + g * noise, RATE):.12f}")


if __name__ == "__main__":
    main()
