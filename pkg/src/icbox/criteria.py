"""Information-causality style criteria evaluated on boxes and task joints.

Entropic criteria (ic-bipartite, ic-bipartite-strong, ic-multi, ic-noisy)
read mutual informations off the exact task joint distribution; the
quadratic criteria (ic-multicopy, uffink-2, uffink-3) and the concatenated
success bound (ic-success-bound) are closed forms in the box biases and
correlators.  Every evaluator returns a CriterionReport with lhs, rhs,
margin = lhs - rhs and a violated flag at threshold VIOLATION_TOL.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .behaviors import Behavior, relabeling_index_maps
from .entropy import (Channel, JointDistribution, binary_entropy, entropy,
                      cond_mutual_information, mutual_information)
from .protocol import (ProtocolConfig, biases, guess_name, message_name,
                       noisy_message_name, single_copy_joint, x_bit_name)

VIOLATION_TOL = 1e-9

CRITERION_IDS = ("ic-bipartite", "ic-bipartite-strong", "ic-multi",
                 "ic-multicopy", "ic-success-bound", "uffink-2", "uffink-3",
                 "ic-noisy")


@dataclass(frozen=True)
class CriterionReport:
    criterion_id: str
    lhs: float
    rhs: float
    margin: float
    violated: bool
    details: dict[str, Any] = field(default_factory=dict)

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "criterion": self.criterion_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "violated": self.violated,
            "details": self.details,
        }


def _report(cid: str, lhs: float, rhs: float,
            details: dict[str, Any] | None = None) -> CriterionReport:
    margin = lhs - rhs
    return CriterionReport(cid, lhs, rhs, margin, margin > VIOLATION_TOL,
                           details or {})


def _joint_bits(joint: JointDistribution, sender: int) -> list[int]:
    """Bit indices i with X_i^sender present, in increasing i."""
    out = []
    i = 1
    while x_bit_name(sender, i) in joint.names:
        out.append(i)
        i += 1
    if not out:
        raise KeyError(f"joint has no input bits for sender {sender}")
    return out


def _joint_senders(joint: JointDistribution) -> list[int]:
    out = []
    k = 1
    while x_bit_name(k, 1) in joint.names:
        out.append(k)
        k += 1
    return out


def eval_bipartite_ic(joint: JointDistribution) -> CriterionReport:
    """Sum_i I(X_i : G_i) against the message entropy H(M)."""
    bits = _joint_bits(joint, 1)
    terms = [mutual_information(joint, x_bit_name(1, i), guess_name(i))
             for i in bits]
    rhs = entropy(joint, message_name(1))
    return _report("ic-bipartite", sum(terms), rhs,
                   {"terms": terms})


def eval_stronger_bipartite(joint: JointDistribution) -> CriterionReport:
    """Message-conditioned strengthening of the bipartite criterion.

    LHS = Sum_i I(X_i : G_i, M) + Sum_{i>=2} I(X_1 : X_i | G_i, M);
    RHS = H(M) + Sum_{i>=2} H(X_i) - H(X_2,...,X_n), which reduces to H(M)
    for independent input bits.  Only independent inputs are supported: the
    RHS correction is exactly zero there, and that is the regime this
    strengthening is stated for.
    """
    bits = _joint_bits(joint, 1)
    xs = [x_bit_name(1, i) for i in bits]
    for i in range(1, len(xs)):
        if mutual_information(joint, xs[0], xs[i]) > 1e-9:
            raise NotImplementedError(
                "stronger bipartite criterion supports independent input "
                "bits only")
    m = message_name(1)
    lhs = 0.0
    for i in bits:
        lhs += mutual_information(joint, xs[i - 1], (guess_name(i), m))
    for i in bits[1:]:
        lhs += cond_mutual_information(joint, xs[0], xs[i - 1],
                                       (guess_name(i), m))
    rhs = entropy(joint, m)
    if len(xs) > 1:
        rhs += sum(entropy(joint, x) for x in xs[1:])
        rhs -= entropy(joint, tuple(xs[1:]))
    return _report("ic-bipartite-strong", lhs, rhs, {})


def _multi_lhs_terms(joint: JointDistribution, senders: list[int],
                     bits: list[int], pick: list[int] | None = None
                     ) -> dict[tuple[int, int], float]:
    """I(X_i^k : X_i^(others), G_i) for each requested sender k and bit i."""
    todo = senders if pick is None else pick
    out = {}
    for k in todo:
        for i in bits:
            others = tuple(x_bit_name(j, i) for j in senders if j != k)
            out[(k, i)] = mutual_information(
                joint, x_bit_name(k, i), others + (guess_name(i),))
    return out


def _input_correlation_term(joint: JointDistribution, senders: list[int],
                            bits: list[int], pick: list[int] | None = None
                            ) -> float:
    """Sum_k Sum_i I(X_{i+1}^k ... X_n^k : X_i^k); zero for independent bits."""
    total = 0.0
    for k in (senders if pick is None else pick):
        for idx, i in enumerate(bits[:-1]):
            later = tuple(x_bit_name(k, j) for j in bits[idx + 1:])
            total += mutual_information(joint, x_bit_name(k, i), later)
    return total


def eval_multipartite_ic(joint: JointDistribution, parties: int | None = None,
                         bits_per_sender: int | None = None) -> CriterionReport:
    """Sum over senders of bitwise guess informations against the joint
    message entropy plus the input-correlation correction."""
    senders = _joint_senders(joint)
    bits = _joint_bits(joint, 1)
    if parties is not None and parties != len(senders) + 1:
        raise ValueError(f"joint carries {len(senders)} senders, expected "
                         f"{parties - 1}")
    if bits_per_sender is not None and bits_per_sender != len(bits):
        raise ValueError(f"joint carries {len(bits)} bits per sender, "
                         f"expected {bits_per_sender}")
    terms = _multi_lhs_terms(joint, senders, bits)
    lhs = sum(terms.values())
    msg_entropy = entropy(joint, tuple(message_name(k) for k in senders))
    correction = _input_correlation_term(joint, senders, bits)
    return _report("ic-multi", lhs, msg_entropy + correction, {
        "message_entropy": msg_entropy,
        "input_correlation": correction,
        "terms": {f"k={k},i={i}": v for (k, i), v in sorted(terms.items())},
    })


def eval_multicopy(b: Behavior) -> CriterionReport:
    """E_I^2 + E_II^2 against 1 (canonical party roles and labels)."""
    e_one, e_two = biases(b)
    return _report("ic-multicopy", e_one ** 2 + e_two ** 2, 1.0,
                   {"E_I": e_one, "E_II": e_two})


def eval_success_bound(b: Behavior, depth: int) -> CriterionReport:
    """Concatenated Fano chain at depth K:

    (N-1) Sum_r C(K,r) [1 - h((1 + E_I^(K-r) E_II^r)/2)]  vs  N-1,

    the right side being the joint entropy of N-1 one-bit messages.  The
    details carry the analytic lower bound
    (N-1)/(2 ln 2) (E_I^2 + E_II^2)^K, which never exceeds the LHS.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    e_one, e_two = biases(b)
    scale = b.parties - 1
    lhs = 0.0
    for r in range(depth + 1):
        gap = e_one ** (depth - r) * e_two ** r
        lhs += math.comb(depth, r) * (1.0 - binary_entropy(0.5 * (1.0 + gap)))
    lhs *= scale
    analytic = scale / (2.0 * math.log(2.0)) * (e_one ** 2 + e_two ** 2) ** depth
    return _report("ic-success-bound", lhs, float(scale), {
        "E_I": e_one, "E_II": e_two, "depth": depth,
        "analytic_lower_bound": analytic,
    })


_UFFINK_POS = (0b001, 0b010, 0b100)   # inputs in the first bracket, +sign
_UFFINK_NEG_FIRST = 0b111


@functools.cache
def _cached_maps(parties: int) -> np.ndarray:
    return relabeling_index_maps(parties)


def _orbit_tables(b: Behavior) -> np.ndarray:
    """All relabeled variants of the behavior, flattened: (orbit, 4^N)."""
    return b.table.ravel()[_cached_maps(b.parties)]


def _correlators(flat_tables: np.ndarray, parties: int) -> np.ndarray:
    """Full-party correlators C_x for each flattened table row."""
    n_in = 2 ** parties
    tables = flat_tables.reshape(-1, n_in, n_in)
    signs = np.array([1.0 if bin(o).count("1") % 2 == 0 else -1.0
                      for o in range(n_in)])
    return tables @ signs


def _uffink3_values(flat_tables: np.ndarray) -> np.ndarray:
    corr = _correlators(flat_tables, 3)
    first = (corr[:, 0b001] + corr[:, 0b010] + corr[:, 0b100]
             - corr[:, 0b111])
    second = (corr[:, 0b110] + corr[:, 0b101] + corr[:, 0b011]
              - corr[:, 0b000])
    return first ** 2 + second ** 2


def eval_uffink(b: Behavior) -> CriterionReport:
    """Quadratic correlator criterion.

    Two parties: E_I^2 + E_II^2 vs 1, identical in value to ic-multicopy.
    Three parties: (C_001 + C_010 + C_100 - C_111)^2 +
    (C_110 + C_101 + C_011 - C_000)^2 vs 16, maximized over the full
    relabeling orbit (party permutations, input flips, input-conditioned
    output flips; 3072 variants).
    """
    if b.parties == 2:
        e_one, e_two = biases(b)
        return _report("uffink-2", e_one ** 2 + e_two ** 2, 1.0,
                       {"E_I": e_one, "E_II": e_two})
    if b.parties == 3:
        values = _uffink3_values(_orbit_tables(b))
        canonical = float(_uffink3_values(b.table.ravel()[None, :])[0])
        best = int(values.argmax())
        return _report("uffink-3", float(values[best]), 16.0, {
            "canonical": canonical,
            "orbit_size": int(values.shape[0]),
            "argmax_variant": best,
        })
    raise ValueError(f"quadratic correlator criterion supports 2 or 3 "
                     f"parties, got {b.parties}")


def multicopy_orbit_max(b: Behavior) -> CriterionReport:
    """ic-multicopy maximized over the relabeling orbit (including which
    party acts as receiver, via party permutations).  Used for catalog
    classification, where class representatives carry arbitrary labelings."""
    n = b.parties
    n_in = 2 ** n
    w_one = np.zeros((n_in, n_in))
    w_two = np.zeros((n_in, n_in))
    for x in range(n_in):
        xs, x_n = x >> 1, x & 1
        target = 0 if x_n == 0 else bin(xs).count("1") & 1
        for a in range(n_in):
            hit = (bin(a).count("1") & 1) == target
            val = (1.0 if hit else -1.0) / 2 ** (n - 1)
            if x_n == 0:
                w_one[x, a] = val
            else:
                w_two[x, a] = val
    variants = _orbit_tables(b)
    e_one = variants @ w_one.ravel()
    e_two = variants @ w_two.ravel()
    values = e_one ** 2 + e_two ** 2
    best = int(values.argmax())
    return _report("ic-multicopy", float(values[best]), 1.0, {
        "orbit": True,
        "orbit_size": int(values.shape[0]),
        "E_I": float(e_one[best]),
        "E_II": float(e_two[best]),
    })


def eval_noisy_ic(b: Behavior, epsilon: float,
                  input_distribution: JointDistribution | None = None
                  ) -> CriterionReport:
    """Per-sender noisy-channel criterion.

    Each sender's message crosses one use of a binary symmetric channel.
    Sender k's guess-information terms are evaluated on the run in which
    channel k is noisy (the receiver decodes from M_k' and the other,
    clean, messages); the communication budget on the right is the sum of
    the realized channel informations I(M_k : M_k').  At epsilon = 0 this
    reduces exactly to the multipartite criterion.  At epsilon = 0.5 both
    sides vanish and the report is flagged indeterminate.
    """
    if not 0.0 <= epsilon <= 0.5:
        raise ValueError(f"epsilon must be in [0, 0.5], got {epsilon}")
    senders = list(range(1, b.parties))
    channel = Channel(epsilon)
    lhs = 0.0
    rhs = 0.0
    correction = 0.0
    per_sender = {}
    for k in senders:
        cfg = ProtocolConfig(parties=b.parties, channel=channel,
                             input_distribution=input_distribution)
        joint = single_copy_joint(b, cfg, noisy_senders=(k,))
        bits = _joint_bits(joint, k)
        terms = _multi_lhs_terms(joint, senders, bits, pick=[k])
        cap_k = mutual_information(joint, message_name(k),
                                   noisy_message_name(k))
        correction += _input_correlation_term(joint, senders, bits, pick=[k])
        lhs += sum(terms.values())
        rhs += cap_k
        per_sender[f"k={k}"] = {"terms": sum(terms.values()),
                                "channel_information": cap_k}
    details: dict[str, Any] = {"epsilon": epsilon,
                               "input_correlation": correction,
                               "per_sender": per_sender}
    if epsilon == 0.5:
        details["flag"] = "indeterminate-limit"
    return _report("ic-noisy", lhs, rhs + correction, details)


def evaluate(criterion_id: str, b: Behavior, *, depth: int | None = None,
             epsilon: float | None = None,
             input_distribution: JointDistribution | None = None
             ) -> CriterionReport:
    """Dispatch a criterion id against a behavior, building the task joint
    when the criterion needs one."""
    if criterion_id not in CRITERION_IDS:
        raise ValueError(f"unknown criterion {criterion_id!r}; "
                         f"known: {', '.join(CRITERION_IDS)}")
    if criterion_id in ("ic-bipartite", "ic-bipartite-strong"):
        if b.parties != 2:
            raise ValueError(f"{criterion_id} needs a 2-party behavior, "
                             f"got {b.parties} parties")
        cfg = ProtocolConfig(parties=2, input_distribution=input_distribution)
        joint = single_copy_joint(b, cfg)
        if criterion_id == "ic-bipartite":
            return eval_bipartite_ic(joint)
        return eval_stronger_bipartite(joint)
    if criterion_id == "ic-multi":
        cfg = ProtocolConfig(parties=b.parties,
                             input_distribution=input_distribution)
        return eval_multipartite_ic(single_copy_joint(b, cfg))
    if criterion_id == "ic-multicopy":
        return eval_multicopy(b)
    if criterion_id == "ic-success-bound":
        return eval_success_bound(b, 1 if depth is None else depth)
    if criterion_id == "uffink-2":
        if b.parties != 2:
            raise ValueError("uffink-2 needs a 2-party behavior")
        return eval_uffink(b)
    if criterion_id == "uffink-3":
        if b.parties != 3:
            raise ValueError("uffink-3 needs a 3-party behavior")
        return eval_uffink(b)
    if epsilon is None:
        raise ValueError("ic-noisy needs a channel epsilon")
    return eval_noisy_ic(b, epsilon, input_distribution)
