"""Shared box constructors for the test suite."""

from __future__ import annotations

import numpy as np

from icbox.behaviors import (Behavior, all_local_deterministic, bit_tuples,
                             mix, named_box)

_DET_CACHE: dict[int, list[Behavior]] = {}


def local_deterministic_boxes(parties: int) -> list[Behavior]:
    if parties not in _DET_CACHE:
        _DET_CACHE[parties] = list(all_local_deterministic(parties))
    return _DET_CACHE[parties]


def make_svetlichny() -> Behavior:
    """Tripartite extremal box with xor(outputs) = xy + yz + zx (mod 2)."""
    table = np.zeros((8, 8))
    for xi, (x, y, z) in enumerate(bit_tuples(3)):
        cond = (x & y) ^ (y & z) ^ (z & x)
        for oi, (a, b, c) in enumerate(bit_tuples(3)):
            if a ^ b ^ c == cond:
                table[xi, oi] = 0.25
    return Behavior(3, table)


def make_ghz_style() -> Behavior:
    """Odd-weight inputs parity-pinned (to 1 only at x=y=z=1), even-weight
    inputs uniform.  Sits exactly on the tripartite quadratic boundary."""
    table = np.zeros((8, 8))
    for xi, (x, y, z) in enumerate(bit_tuples(3)):
        w = x + y + z
        if w % 2 == 1:
            g = 1 if w == 3 else 0
            for oi, (a, b, c) in enumerate(bit_tuples(3)):
                if a ^ b ^ c == g:
                    table[xi, oi] = 0.25
        else:
            table[xi, :] = 1.0 / 8
    return Behavior(3, table)


def random_local_mixture(rng: np.random.Generator, parties: int,
                         extremal: Behavior | None = None,
                         extremal_weight: float = 0.0) -> Behavior:
    """Random convex mixture of local deterministic boxes, optionally with a
    fixed weight on one extremal no-signaling box.  Always no-signaling."""
    dets = local_deterministic_boxes(parties)
    weights = rng.dirichlet(np.ones(len(dets))) * (1.0 - extremal_weight)
    comps = list(zip(weights.tolist(), dets))
    if extremal is not None and extremal_weight > 0.0:
        comps.append((extremal_weight, extremal))
    return mix(comps)


def random_ns_box(rng: np.random.Generator, parties: int) -> Behavior:
    """Random no-signaling box: local mixture blended with a random weight on
    the parity-extremal box for the scenario."""
    extremal = named_box("pr") if parties == 2 else named_box(
        "box45", parties=parties)
    w = float(rng.uniform(0.0, 1.0))
    return random_local_mixture(rng, parties, extremal=extremal,
                                extremal_weight=w)
