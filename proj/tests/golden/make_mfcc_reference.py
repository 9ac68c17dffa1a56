# Copyright 2026 The Phonemode Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Independent numpy/scipy MFCC reference for mfcc_440hz.txt.

Usage: python3 make_mfcc_reference.py [golden_file]
Prints the max relative deviation between this reference and the file.
"""
import sys

import numpy as np
from scipy.fft import dct, rfft

RATE, FRAME, SHIFT, NFFT, NMELS, NCEP = 16000, 400, 160, 512, 26, 13


def mel(f):
    return 2595.0 * np.log10(1.0 + f / 700.0)


def fixture():
    i = np.arange(16000)
    return np.rint(16384 * np.sin(2 * np.pi * 440 * i / RATE)) / 32768.0


def filterbank():
    edges = np.linspace(mel(0.0), mel(RATE / 2), NMELS + 2)
    bins = mel(np.arange(NFFT // 2 + 1) * RATE / NFFT)
    fb = np.zeros((NMELS, bins.size))
    for m in range(NMELS):
        lo, c, hi = edges[m:m + 3]
        up = (bins > lo) & (bins <= c)
        down = (bins > c) & (bins < hi)
        fb[m, up] = (bins[up] - lo) / (c - lo)
        fb[m, down] = (hi - bins[down]) / (hi - c)
    return fb


def mfcc(x):
    n = (x.size - FRAME) // SHIFT + 1
    idx = np.arange(FRAME)[None, :] + SHIFT * np.arange(n)[:, None]
    frames = x[idx] * np.hamming(FRAME)
    power = np.abs(rfft(frames, NFFT)) ** 2
    logmel = np.log(np.maximum(power @ filterbank().T, 1e-10))
    return dct(logmel, type=2, norm="ortho", axis=1)[:, :NCEP]


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else "mfcc_440hz.txt"
    with open(path) as f:
        rows, cols = map(int, f.readline().split())
        golden = np.loadtxt(f).reshape(rows, cols)
    ref = mfcc(fixture())
    assert ref.shape == golden.shape, (ref.shape, golden.shape)
    rel = np.abs(ref - golden) / np.maximum(np.abs(ref), 1.0)
    print("max relative deviation %.3g" % rel.max())
    return 0 if rel.max() < 1e-9 else 1


if __name__ == "__main__":
    sys.exit(main())
