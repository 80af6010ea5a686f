#!/usr/bin/env python3
# tests/oracles/ism_oracle.py

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

"""Vectorized image-source renderer used to freeze regression values.

Prints T30 / T20 of the 6x5x3 m room (source at 1/3, receiver at 2/3 of
each dimension, 16 kHz, max_time 1.5 s) for alpha 0.3 and 0.1, next to the
Eyring prediction. Usage: python3 ism_oracle.py
"""

import numpy as np


def render(dims, alpha, src, rcv, tmax, fs=16000, c=343.0, half=16):
    dims, src, rcv = (np.asarray(v, float) for v in (dims, src, rcv))
    axes = []
    for a in range(3):
        n = int(np.ceil(c * tmax / dims[a])) + 1
        i = np.arange(-n, n + 1)
        pos = np.where(i % 2 == 0, src[a] + i * dims[a], -src[a] + (i + 1) * dims[a])
        axes.append((pos - rcv[a], np.abs(i)))
    (dx, hx), (dy, hy), (dz, hz) = axes
    d = np.sqrt(dx[:, None, None] ** 2 + dy[None, :, None] ** 2 + dz[None, None, :] ** 2).ravel()
    hits = (hx[:, None, None] + hy[None, :, None] + hz[None, None, :]).ravel()
    keep = d <= c * tmax
    d, hits = d[keep], hits[keep]
    gain = np.sqrt(1.0 - alpha) ** hits / (4 * np.pi * d)
    delay = d / c * fs
    out = np.zeros(int(np.ceil(delay.max())) + half + 1)
    base = np.floor(delay).astype(int)
    for j in range(-half + 1, half + 1):
        u = j - (delay - base)
        w = np.where(np.abs(u) < half, 0.5 * (1 + np.cos(np.pi * u / half)), 0.0)
        np.add.at(out, base + j, gain * np.sinc(u) * w)
    return out


def decay_time(h, fs, hi, lo):
    e = h ** 2
    e = e[np.argmax(e >= e.max() * 0.01):]
    edc = np.cumsum(e[::-1])[::-1]
    edc = 10 * np.log10(edc / edc[0] + 1e-300)
    idx = np.where((edc <= hi) & (edc >= lo))[0]
    slope = np.polyfit(idx / fs, edc[idx], 1)[0]
    return -60.0 / slope


if __name__ == "__main__":
    dims = np.array([6.0, 5.0, 3.0])
    for alpha in (0.3, 0.1):
        h = render(dims, alpha, dims / 3, 2 * dims / 3, 1.5)
        eyring = 0.161 * 90 / (-126 * np.log(1 - alpha))
        print(f"alpha={alpha} T30={decay_time(h, 16000, -5, -35):.6f} "
              f"T20={decay_time(h, 16000, -5, -25):.6f} eyring={eyring:.6f}")
