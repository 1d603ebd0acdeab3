"""Finite joint distributions, Shannon quantities, binary symmetric channels.

All entropies are in bits.  Distributions are dense numpy arrays with one
axis per named variable; marginalization is an axis sum, so every quantity
is an exact finite sum over the support (no sampling anywhere).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

PMF_TOL = 1e-9           # pmf must sum to 1 within this
ENTRY_CLAMP = 1e-12      # tiny negatives clamped, worse ones rejected
NONNEG_CLAMP = 1e-12     # conditional MI values in (-1e-12, 0) clamp to 0


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Named finite joint pmf.

    names: variable names, probs axis i belongs to names[i], axis length is
    that variable's cardinality.
    """

    names: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        names = tuple(self.names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != len(names):
            raise ValueError(f"{len(names)} names but pmf has {p.ndim} axes")
        if p.min() < -ENTRY_CLAMP:
            raise ValueError(f"pmf entry below -{ENTRY_CLAMP}: {p.min()}")
        p = np.where(p < 0.0, 0.0, p)
        total = float(p.sum())
        if abs(total - 1.0) > PMF_TOL:
            raise ValueError(f"pmf sums to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "probs", p)

    @property
    def cards(self) -> tuple[int, ...]:
        return self.probs.shape

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}; have {self.names}") from None

    def pmf_items(self) -> Iterable[tuple[tuple[int, ...], float]]:
        it = np.nditer(self.probs, flags=["multi_index"])
        for v in it:
            p = float(v)
            if p != 0.0:
                yield it.multi_index, p


def from_atoms(variables: Sequence[tuple[str, int]],
               atoms: Mapping[tuple[int, ...], float]) -> JointDistribution:
    names = tuple(n for n, _ in variables)
    cards = tuple(c for _, c in variables)
    p = np.zeros(cards)
    for values, w in atoms.items():
        p[values] += w
    return JointDistribution(names, p)


def _resolve(d: JointDistribution, names: Sequence[str] | str) -> tuple[str, ...]:
    if isinstance(names, str):
        names = (names,)
    out = tuple(names)
    for n in out:
        d.axis(n)  # raises on unknown
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate names in {out}")
    return out


def marginal(d: JointDistribution, names: Sequence[str] | str) -> JointDistribution:
    """Marginal distribution over `names`, axes reordered to match `names`."""
    keep = _resolve(d, names)
    drop = tuple(i for i, n in enumerate(d.names) if n not in keep)
    p = d.probs.sum(axis=drop) if drop else d.probs
    kept_order = [n for n in d.names if n in keep]
    p = np.moveaxis(p, [kept_order.index(n) for n in keep], range(len(keep)))
    return JointDistribution(keep, np.ascontiguousarray(p))


def _entropy_of_array(p: np.ndarray) -> float:
    flat = p.ravel()
    pos = flat[flat > 0.0]
    return float(-(pos * np.log2(pos)).sum())


def entropy(d: JointDistribution, names: Sequence[str] | str | None = None) -> float:
    """Shannon entropy H(names) in bits (all variables when names is None)."""
    if names is None:
        return _entropy_of_array(d.probs)
    keep = _resolve(d, names)
    drop = tuple(i for i, n in enumerate(d.names) if n not in keep)
    return _entropy_of_array(d.probs.sum(axis=drop) if drop else d.probs)


def mutual_information(d: JointDistribution,
                       a: Sequence[str] | str, b: Sequence[str] | str) -> float:
    """I(A:B) = H(A) + H(B) - H(A,B).  A and B must be disjoint."""
    aa, bb = _resolve(d, a), _resolve(d, b)
    if set(aa) & set(bb):
        raise ValueError(f"variable sets overlap: {set(aa) & set(bb)}")
    return entropy(d, aa) + entropy(d, bb) - entropy(d, aa + bb)


def cond_mutual_information(d: JointDistribution, a: Sequence[str] | str,
                            b: Sequence[str] | str, c: Sequence[str] | str) -> float:
    """I(A:B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), clamped at 0.

    The identity is evaluated as stated; values in (-1e-12, 0) are rounding
    noise and clamp to exactly 0.  Anything more negative means a broken
    input distribution and raises.
    """
    aa, bb, cc = _resolve(d, a), _resolve(d, b), _resolve(d, c)
    joint = set(aa) & set(bb) | set(aa) & set(cc) | set(bb) & set(cc)
    if joint:
        raise ValueError(f"variable sets overlap: {joint}")
    v = (entropy(d, aa + cc) + entropy(d, bb + cc)
         - entropy(d, aa + bb + cc) - entropy(d, cc))
    if v < 0.0:
        if v < -NONNEG_CLAMP:
            raise ArithmeticError(f"conditional mutual information {v} < -{NONNEG_CLAMP}")
        v = 0.0
    return v


def binary_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2 (1-p) for p in [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary_entropy needs p in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    q = 1.0 - p
    return float(-p * math.log2(p) - q * math.log2(q))


# ---------------------------------------------------------------------------
# channels

@dataclass(frozen=True)
class Channel:
    """Binary symmetric channel flipping the bit with probability epsilon."""

    epsilon: float
    kind: str = "bsc"

    def __post_init__(self) -> None:
        if self.kind != "bsc":
            raise ValueError(f"unsupported channel kind {self.kind!r}")
        if not 0.0 <= self.epsilon <= 0.5:
            raise ValueError(f"bsc epsilon must be in [0, 0.5], got {self.epsilon}")

    def transition(self) -> np.ndarray:
        e = self.epsilon
        return np.array([[1.0 - e, e], [e, 1.0 - e]])


def apply_channel(d: JointDistribution, var: str, ch: Channel,
                  new_name: str) -> JointDistribution:
    """Append `new_name`, the channel output for `var`, to the joint.

    The noise is fresh randomness, so I(new : anything | var) = 0 by
    construction.  `var` must be binary.
    """
    ax = d.axis(var)
    if d.probs.shape[ax] != 2:
        raise ValueError(f"{var!r} has cardinality {d.probs.shape[ax]}, need 2")
    if new_name in d.names:
        raise ValueError(f"name {new_name!r} already present")
    moved = np.moveaxis(d.probs, ax, -1)
    out = moved[..., :, None] * ch.transition()[(None,) * (moved.ndim - 1)]
    out = np.moveaxis(out, -2, ax)  # original axis back in place, output last
    return JointDistribution(d.names + (new_name,), np.ascontiguousarray(out))


def capacity(ch: Channel) -> float:
    """Capacity of the binary symmetric channel, 1 - h(epsilon) bits."""
    return 1.0 - binary_entropy(ch.epsilon)


# ---------------------------------------------------------------------------
# JSON (debugging aid, mirrors the behavior file style)

def to_json_obj(d: JointDistribution) -> dict:
    return {
        "format": "jointpmf-v1",
        "variables": [[n, int(c)] for n, c in zip(d.names, d.cards)],
        "pmf": [{"v": list(map(int, vals)), "p": p} for vals, p in d.pmf_items()],
    }


def from_json_obj(obj: Mapping) -> JointDistribution:
    if obj.get("format") != "jointpmf-v1":
        raise ValueError(f"unsupported pmf format {obj.get('format')!r}")
    variables = [(str(n), int(c)) for n, c in obj["variables"]]
    atoms = {tuple(int(v) for v in row["v"]): float(row["p"]) for row in obj["pmf"]}
    return from_atoms(variables, atoms)
