"""Multipartite no-signaling behaviors with binary inputs and outputs.

A behavior is the conditional table p(a|x) for N parties, x, a in {0,1}^N.
Tables are stored dense as a (2^N, 2^N) float array, rows indexed by the
joint input, columns by the joint outcome.  Bit tuples map to indices with
party 1 as the most significant bit, so for 3 parties the input (x1,x2,x3)
has row index 4*x1 + 2*x2 + x3.  The receiver of the communication task is
always the last party.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_PARTIES = 6
PROB_TOL = 1e-9          # normalization / no-signaling slack
ENTRY_CLAMP = 1e-12      # negatives above -ENTRY_CLAMP are clamped to 0
JSON_FORMAT = "nsbox-v1"

Bits = tuple[int, ...]


class StructureError(ValueError):
    """Malformed table: wrong shape, missing entries, NaN, bad party count.

    Distinct from constraint violations, which validate() reports instead of
    raising.
    """


def tuple_to_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | (b & 1)
    return idx


def index_to_tuple(idx: int, width: int) -> Bits:
    return tuple((idx >> (width - 1 - i)) & 1 for i in range(width))


def bit_tuples(width: int) -> Iterable[Bits]:
    return itertools.product((0, 1), repeat=width)


def _parity(idx: int) -> int:
    return bin(idx).count("1") & 1


@dataclass(frozen=True, eq=False)
class Behavior:
    """Immutable N-party behavior. Use the module constructors, not raw init."""

    parties: int
    table: np.ndarray

    def __post_init__(self) -> None:
        n = self.parties
        if not isinstance(n, int) or n < 2 or n > MAX_PARTIES:
            raise StructureError(f"parties must be an int in [2, {MAX_PARTIES}], got {n!r}")
        t = np.asarray(self.table, dtype=float)
        if t.shape != (2**n, 2**n):
            raise StructureError(
                f"table shape {t.shape} does not cover all {2**n}x{2**n} entries"
            )
        if np.isnan(t).any():
            raise StructureError("table contains NaN entries")
        # clamp tiny negatives on load; anything below -ENTRY_CLAMP is kept
        # for validate() to report as a nonnegativity violation
        t = np.where((t < 0.0) & (t >= -ENTRY_CLAMP), 0.0, t)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def prob(self, x: Sequence[int], a: Sequence[int]) -> float:
        return float(self.table[tuple_to_index(x), tuple_to_index(a)])

    def entries(self) -> Iterable[tuple[Bits, Bits, float]]:
        n = self.parties
        for xi in range(2**n):
            for ai in range(2**n):
                yield index_to_tuple(xi, n), index_to_tuple(ai, n), float(self.table[xi, ai])


def behaviors_close(b1: Behavior, b2: Behavior, atol: float = 1e-12) -> bool:
    return b1.parties == b2.parties and bool(np.allclose(b1.table, b2.table, atol=atol, rtol=0.0))


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class ConstraintViolation:
    constraint: str        # "normalization" | "nonnegativity" | "no-signaling"
    context: str
    magnitude: float


@dataclass(frozen=True)
class ValidationReport:
    parties: int
    violations: tuple[ConstraintViolation, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return "valid"
        lines = [f"{len(self.violations)} constraint violation(s):"]
        for v in self.violations:
            lines.append(f"  {v.constraint}: {v.context} (magnitude {v.magnitude:.3e})")
        return "\n".join(lines)


def validate(b: Behavior, atol: float = PROB_TOL) -> ValidationReport:
    """Check normalization, nonnegativity and full-subset no-signaling.

    No-signaling is checked for every nonempty proper subset S of parties:
    the marginal on S's outcomes must not depend on the inputs outside S.
    The reported magnitude is the largest spread of a marginal entry across
    the outside inputs.  Structural problems raise StructureError; this
    function only reports constraint violations.
    """
    n = b.parties
    t = b.table
    if np.isnan(t).any():  # defensive, already rejected at construction
        raise StructureError("table contains NaN entries")
    found: list[ConstraintViolation] = []

    neg = t < -ENTRY_CLAMP
    if neg.any():
        xi, ai = np.unravel_index(int(np.argmin(t)), t.shape)
        found.append(ConstraintViolation(
            "nonnegativity",
            f"entry x={index_to_tuple(int(xi), n)} a={index_to_tuple(int(ai), n)}",
            float(-t.min()),
        ))

    row_sums = t.sum(axis=1)
    bad = np.abs(row_sums - 1.0) > atol
    if bad.any():
        xi = int(np.argmax(np.abs(row_sums - 1.0)))
        found.append(ConstraintViolation(
            "normalization",
            f"input x={index_to_tuple(xi, n)} sums to {row_sums[xi]:.12g}",
            float(np.abs(row_sums - 1.0).max()),
        ))

    # tensor view: axes 0..n-1 inputs, n..2n-1 outcomes
    tens = t.reshape((2,) * (2 * n))
    parties = list(range(n))
    for size in range(1, n):
        for subset in itertools.combinations(parties, size):
            outside = [p for p in parties if p not in subset]
            # marginal over outcomes of the outside parties
            marg = tens.sum(axis=tuple(n + p for p in outside))
            # spread across the outside parties' inputs must vanish
            spread = marg.max(axis=tuple(outside)) - marg.min(axis=tuple(outside))
            worst = float(spread.max())
            if worst > atol:
                loc = np.unravel_index(int(np.argmax(spread)), spread.shape)
                names = ",".join(str(p + 1) for p in subset)
                found.append(ConstraintViolation(
                    "no-signaling",
                    f"marginal of parties {{{names}}} varies with outside inputs "
                    f"(at x_S,a_S index {tuple(int(v) for v in loc)})",
                    worst,
                ))
    return ValidationReport(parties=n, violations=tuple(found))


# ---------------------------------------------------------------------------
# named boxes

def _parity_condition_box(parties: int, cond) -> Behavior:
    """Uniform box on the set {a : parity(a) == cond(x)}, weight 2^-(N-1)."""
    n = parties
    t = np.zeros((2**n, 2**n))
    for xi in range(2**n):
        want = cond(index_to_tuple(xi, n))
        for ai in range(2**n):
            if _parity(ai) == want:
                t[xi, ai] = 1.0 / 2 ** (n - 1)
    return Behavior(n, t)


def named_box(name: str, **params) -> Behavior:
    """Construct a built-in behavior.

    pr                    bipartite box with a1 ⊕ a2 = x1 x2
    box45                 N-party box with ⊕_k a_k = (x1 ⊕ ... ⊕ x_{N-1}) x_N
    white                 uniform noise, 2^-N everywhere
    deterministic-zero    all parties output 0
    isotropic             E * box45(N) + (1-E) * white(N), E in [0, 1]

    params: parties (default 2 for pr, else 3), bias (isotropic only).
    """
    parties = params.pop("parties", None)
    bias = params.pop("bias", None)
    if params:
        raise ValueError(f"unknown named_box parameters {sorted(params)}")

    if name == "pr":
        if parties not in (None, 2):
            raise ValueError("pr box is bipartite; parties must be 2")
        return _parity_condition_box(2, lambda x: x[0] & x[1])

    if parties is None:
        parties = 3
    if not 2 <= parties <= MAX_PARTIES:
        raise ValueError(f"parties must be in [2, {MAX_PARTIES}], got {parties}")

    if name == "box45":
        def cond(x: Bits) -> int:
            s = 0
            for xk in x[:-1]:
                s ^= xk & x[-1]
            return s
        return _parity_condition_box(parties, cond)
    if name == "white":
        n = parties
        return Behavior(n, np.full((2**n, 2**n), 1.0 / 2**n))
    if name == "deterministic-zero":
        n = parties
        t = np.zeros((2**n, 2**n))
        t[:, 0] = 1.0
        return Behavior(n, t)
    if name == "isotropic":
        if bias is None:
            raise ValueError("isotropic box needs bias=E")
        if not 0.0 <= bias <= 1.0:
            raise ValueError(f"isotropic bias must be in [0, 1], got {bias}")
        return mix([(bias, named_box("box45", parties=parties)),
                    (1.0 - bias, named_box("white", parties=parties))])
    raise ValueError(f"unknown box name {name!r}")


def local_deterministic(parties: int, funcs: Sequence[tuple[int, int]]) -> Behavior:
    """Deterministic local box: party k outputs funcs[k][x_k]."""
    n = parties
    if len(funcs) != n:
        raise ValueError("need one response pair per party")
    t = np.zeros((2**n, 2**n))
    for xi in range(2**n):
        x = index_to_tuple(xi, n)
        a = tuple(funcs[k][x[k]] & 1 for k in range(n))
        t[xi, tuple_to_index(a)] = 1.0
    return Behavior(n, t)


def all_local_deterministic(parties: int) -> Iterable[Behavior]:
    """All 4^N local deterministic boxes (every per-party response function)."""
    per_party = list(itertools.product((0, 1), repeat=2))
    for combo in itertools.product(per_party, repeat=parties):
        yield local_deterministic(parties, combo)


def mix(components: Sequence[tuple[float, Behavior]]) -> Behavior:
    """Convex combination. Weights must be >= 0 and sum to 1 within 1e-9."""
    if not components:
        raise ValueError("mix of zero components")
    n = components[0][1].parties
    total = 0.0
    acc = np.zeros_like(components[0][1].table)
    for w, b in components:
        if b.parties != n:
            raise ValueError("mix components must share the party count")
        if w < -ENTRY_CLAMP:
            raise ValueError(f"negative mixture weight {w}")
        total += w
        acc += w * b.table
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(f"mixture weights sum to {total!r}, not 1")
    return Behavior(n, acc)


def correlator(b: Behavior, x: Sequence[int]) -> float:
    """Full N-party correlator sum_a (-1)^(a1+...+aN) p(a|x)."""
    row = b.table[tuple_to_index(x)]
    n = b.parties
    signs = np.array([1.0 if _parity(ai) == 0 else -1.0 for ai in range(2**n)])
    return float(row @ signs)


# ---------------------------------------------------------------------------
# relabelings (used by the Uffink orbit and catalog classification)

def permute_parties(b: Behavior, perm: Sequence[int]) -> Behavior:
    """Behavior whose party i is b's party perm[i] (perm is 0-based)."""
    n = b.parties
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm must be a permutation of 0..{n-1}")
    tens = b.table.reshape((2,) * (2 * n))
    axes = [*perm, *(n + p for p in perm)]
    out = np.ascontiguousarray(tens.transpose(axes)).reshape(2**n, 2**n)
    return Behavior(n, out)


def flip_inputs(b: Behavior, mask: Sequence[int]) -> Behavior:
    """Relabel inputs x_k -> x_k ⊕ mask[k]."""
    n = b.parties
    tens = b.table.reshape((2,) * (2 * n))
    for k, m in enumerate(mask):
        if m & 1:
            tens = np.flip(tens, axis=k)
    return Behavior(n, np.ascontiguousarray(tens).reshape(2**n, 2**n))


def relabel_outputs(b: Behavior, offsets: Sequence[int],
                    input_conditioned: Sequence[int] | None = None) -> Behavior:
    """Relabel outputs a_k -> a_k ⊕ offsets[k] ⊕ input_conditioned[k]*x_k."""
    n = b.parties
    alpha = input_conditioned or (0,) * n
    t = np.empty_like(b.table)
    for xi in range(2**n):
        x = index_to_tuple(xi, n)
        for ai in range(2**n):
            a = index_to_tuple(ai, n)
            src = tuple((a[k] ^ (offsets[k] & 1) ^ ((alpha[k] & 1) & x[k])) for k in range(n))
            t[xi, ai] = b.table[xi, tuple_to_index(src)]
    return Behavior(n, t)


def relabeling_index_maps(parties: int) -> np.ndarray:
    """Flat-index maps for the full relabeling group, shape (G, 4^N).

    Row g maps new flat index (x*2^N + a) to the source flat index, so the
    relabeled table is table.ravel()[maps[g]].  G = N! * 2^N * 4^N covers all
    party permutations, input flips and per-party output maps
    a -> a ⊕ β ⊕ αx.  For N=3 that is 6*8*64 = 3072 group elements.
    """
    n = parties
    tracer = Behavior(n, _tracer_table(n))

    def as_map(beh: Behavior) -> np.ndarray:
        return np.rint(beh.table).astype(np.int64).ravel()

    perm_maps = [as_map(permute_parties(tracer, p))
                 for p in itertools.permutations(range(n))]
    flip_maps = [as_map(flip_inputs(tracer, m)) for m in bit_tuples(n)]
    out_maps = [as_map(relabel_outputs(tracer, beta, alpha))
                for beta in bit_tuples(n) for alpha in bit_tuples(n)]

    maps = []
    for pm in perm_maps:
        for fm in flip_maps:
            pf = pm[fm]  # compose: apply perm, then flips
            for om in out_maps:
                maps.append(pf[om])
    return np.asarray(maps, dtype=np.int64)


def _tracer_table(n: int) -> np.ndarray:
    # not a probability table; carries flat indices through the relabel ops
    return np.arange(4**n, dtype=float).reshape(2**n, 2**n)


# ---------------------------------------------------------------------------
# JSON I/O

def to_json_obj(b: Behavior) -> dict:
    table = []
    for x, a, p in b.entries():
        if p != 0.0:
            table.append({"x": list(x), "a": list(a), "p": p})
    return {"parties": b.parties, "format": JSON_FORMAT, "table": table}


def from_json_obj(obj: Mapping) -> Behavior:
    if not isinstance(obj, Mapping):
        raise StructureError("behavior JSON must be an object")
    if obj.get("format") != JSON_FORMAT:
        raise StructureError(f"unsupported behavior format {obj.get('format')!r}")
    n = obj.get("parties")
    if not isinstance(n, int):
        raise StructureError("parties must be an integer")
    if not 2 <= n <= MAX_PARTIES:
        raise StructureError(f"parties must be in [2, {MAX_PARTIES}], got {n}")
    t = np.zeros((2**n, 2**n))  # omitted entries default to 0
    for row in obj.get("table", ()):
        x, a, p = row["x"], row["a"], row["p"]
        if len(x) != n or len(a) != n:
            raise StructureError(f"entry with wrong arity: x={x} a={a}")
        t[tuple_to_index(x), tuple_to_index(a)] = float(p)
    return Behavior(n, t)


def behavior_from_entries(parties: int, entries: Mapping[tuple[Bits, Bits], float],
                          fill_missing: bool = False) -> Behavior:
    """Build from a {(x, a): p} mapping.

    With fill_missing=False every one of the 2^N x 2^N entries must be
    present, otherwise a StructureError is raised (missing entries are a
    structural problem, not a constraint violation).
    """
    n = parties
    t = np.full((2**n, 2**n), np.nan)
    for (x, a), p in entries.items():
        t[tuple_to_index(x), tuple_to_index(a)] = p
    missing = int(np.isnan(t).sum())
    if missing:
        if not fill_missing:
            raise StructureError(f"table is missing {missing} of {4**n} entries")
        t = np.nan_to_num(t, nan=0.0)
    return Behavior(n, t)


def save_behavior(b: Behavior, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_obj(b), fh, indent=1)
        fh.write("\n")


def load_behavior(path) -> Behavior:
    with open(path) as fh:
        return from_json_obj(json.load(fh))


@dataclass(frozen=True)
class CatalogEntry:
    class_id: int
    behavior: Behavior


def load_catalog(path) -> list[CatalogEntry]:
    """Load a JSON array of {"class": int, "behavior": {...}} entries.

    Every behavior is validated; entries that fail validation abort the load.
    """
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise StructureError("catalog must be a JSON array")
    entries = []
    for i, item in enumerate(data):
        if "class" not in item or "behavior" not in item:
            raise StructureError(f"catalog entry {i} lacks class/behavior keys")
        beh = from_json_obj(item["behavior"])
        report = validate(beh)
        if not report.ok:
            raise ValueError(
                f"catalog entry {i} (class {item['class']}) fails validation:\n"
                + report.summary()
            )
        entries.append(CatalogEntry(int(item["class"]), beh))
    return entries
