"""The multipartite XOR communication task built on a shared box.

Single copy: N-1 senders each hold two uniform bits X_1^k, X_2^k, input
x_k = X_1^k ⊕ X_2^k into the shared box, and send M_k = X_1^k ⊕ a_k.  The
receiver (party N) picks a choice J in {0, 1}, inputs x_N = J, and guesses
bit position i = J+1 of every sender at once:

    G_i = (⊕_k M_k) ⊕ c_i.

Concatenation: with 2^K bits per sender, messages are fed pairwise into a
depth-K binary tree of identical boxes; the receiver measures one box per
level (z_l at level l, root is level 1), and recovering the selected
subtree's message XOR at each step leaves a guess for bit position
1 + sum_l z_l 2^(K-l).

single_copy_joint returns the full joint distribution of the run.  The two
guesses G_1, G_2 live on one sample space by drawing the receiver's outcome
for each choice from p(c | a_senders, x_senders, x_N = choice), which
no-signaling makes well defined; any marginal involving a single G_i equals
the run distribution conditioned on J picking it, and those are the only
marginals the criteria read.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .behaviors import Behavior, index_to_tuple, tuple_to_index
from .entropy import Channel, JointDistribution, marginal

MAX_SIM_DEPTH = 3        # exact concatenation enumeration cap
MAX_SIM_PARTIES = 4
MAX_JOINT_VARS = 24      # dense single-copy joint capped at 2^24 atoms

CHOICE = "J"


def x_bit_name(k: int, i: int) -> str:
    """Bit i of sender k (both 1-based)."""
    return f"X{i}^{k}"


def sender_input_name(k: int) -> str:
    return f"x{k}"


def sender_output_name(k: int) -> str:
    return f"a{k}"


def receiver_output_name(i: int) -> str:
    """Receiver outcome under box input x_N = i-1."""
    return f"c{i}"


def message_name(k: int) -> str:
    return f"M{k}"


def noisy_message_name(k: int) -> str:
    return f"M{k}p"


def guess_name(i: int) -> str:
    return f"G{i}"


@dataclass(frozen=True)
class ProtocolConfig:
    """Task configuration for one behavior.

    bits_per_sender is fixed at 2 for a single copy; longer bit strings are
    reached through concatenation (bits_per_sender = 2^concat_depth).
    input_distribution defaults to independent uniform bits and, when given,
    must be a JointDistribution over exactly the X_i^k names.
    """

    parties: int
    bits_per_sender: int = 2
    concat_depth: int = 0
    channel: Channel | None = None
    input_distribution: JointDistribution | None = None

    def __post_init__(self) -> None:
        if self.parties < 2:
            raise ValueError(f"need at least 2 parties, got {self.parties}")
        if self.concat_depth < 0:
            raise ValueError("concat_depth must be >= 0")
        if self.concat_depth == 0:
            if self.bits_per_sender != 2:
                raise NotImplementedError(
                    "single-copy runs are defined for 2 bits per sender; "
                    "longer strings come from concatenation")
        elif self.bits_per_sender != 2 ** self.concat_depth:
            raise ValueError("concatenation at depth K encodes 2^K bits per sender")


def x_bit_names(parties: int, bits: int = 2) -> list[str]:
    return [x_bit_name(k, i) for k in range(1, parties) for i in range(1, bits + 1)]


def _split_tables(b: Behavior) -> tuple[np.ndarray, np.ndarray]:
    """(P_full[xs, v, as, c], P_send[xs, as]) with the receiver split off.

    The receiver is the last party, so its input/outcome bits are the least
    significant ones of the behavior's row/column indices.
    """
    n = b.parties
    full = b.table.reshape(2 ** (n - 1), 2, 2 ** (n - 1), 2)
    send = full[:, 0].sum(axis=-1)  # x_N marginal-independent once validated
    return full, send


def single_copy_joint(b: Behavior, cfg: ProtocolConfig | None = None, *,
                      noisy_senders: Sequence[int] | None = None) -> JointDistribution:
    """Exact joint of inputs, box data, messages, choice and guesses.

    Variables: X_i^k, x_k, a_k, c_1, c_2, M_k, (M_kp for senders behind the
    channel), J, G_1, G_2.  With a channel configured, noisy_senders selects
    which messages pass through it (default: all of them); the guesses are
    decoded from M_kp for those senders and from M_k for the rest.
    """
    if cfg is None:
        cfg = ProtocolConfig(parties=b.parties)
    if cfg.parties != b.parties:
        raise ValueError(f"config is for {cfg.parties} parties, behavior has {b.parties}")
    n_parties = b.parties
    senders = list(range(1, n_parties))

    if cfg.channel is None:
        if noisy_senders:
            raise ValueError("noisy_senders given without a channel")
        noisy: tuple[int, ...] = ()
    else:
        noisy = tuple(sorted(senders if noisy_senders is None else noisy_senders))
        if any(k not in senders for k in noisy):
            raise ValueError(f"noisy_senders must be senders 1..{n_parties - 1}")

    names = (x_bit_names(n_parties)
             + [sender_input_name(k) for k in senders]
             + [sender_output_name(k) for k in senders]
             + [receiver_output_name(1), receiver_output_name(2)]
             + [message_name(k) for k in senders]
             + [noisy_message_name(k) for k in noisy]
             + [CHOICE, guess_name(1), guess_name(2)])
    if len(names) > MAX_JOINT_VARS:
        raise ValueError(
            f"joint would need {len(names)} binary variables; dense cap is "
            f"{MAX_JOINT_VARS} (reduce parties or noisy senders)")

    full, send = _split_tables(b)
    ns = n_parties - 1

    w_inputs = _input_weights(cfg, n_parties)
    eps = cfg.channel.epsilon if cfg.channel is not None else 0.0
    flip_w = (1.0 - eps, eps)

    probs = np.zeros((2,) * len(names))
    half = 0.5  # uniform receiver choice
    for xbits in itertools.product((0, 1), repeat=2 * ns):
        w_x = w_inputs[xbits]
        if w_x == 0.0:
            continue
        first = xbits[0::2]
        second = xbits[1::2]
        xs_idx = tuple_to_index(tuple(f ^ s for f, s in zip(first, second)))
        xs_bits = index_to_tuple(xs_idx, ns)
        for as_idx in range(2 ** ns):
            p_send = send[xs_idx, as_idx]
            if p_send <= 0.0:
                continue
            as_bits = index_to_tuple(as_idx, ns)
            msgs = tuple(f ^ a for f, a in zip(first, as_bits))
            cond = full[xs_idx, :, as_idx, :] / p_send  # [choice, c]
            for c1, c2 in itertools.product((0, 1), repeat=2):
                w_c = cond[0, c1] * cond[1, c2]
                if w_c == 0.0:
                    continue
                base = w_x * p_send * w_c * half
                for flips in itertools.product((0, 1), repeat=len(noisy)):
                    w_f = base
                    for f in flips:
                        w_f *= flip_w[f]
                    if w_f == 0.0:
                        continue
                    noisy_msgs = {k: msgs[k - 1] ^ f for k, f in zip(noisy, flips)}
                    used = [noisy_msgs.get(k, msgs[k - 1]) for k in senders]
                    decode = reduce(lambda u, v: u ^ v, used, 0)
                    g1 = decode ^ c1
                    g2 = decode ^ c2
                    tail = (*(noisy_msgs[k] for k in noisy), 0, g1, g2)
                    idx = (*xbits, *xs_bits, *as_bits, c1, c2, *msgs, *tail)
                    probs[idx] += w_f
                    idx_j1 = (*idx[:-3], 1, g1, g2)
                    probs[idx_j1] += w_f
    return JointDistribution(tuple(names), probs)


def _input_weights(cfg: ProtocolConfig, parties: int) -> np.ndarray:
    ns = parties - 1
    shape = (2,) * (2 * ns)
    if cfg.input_distribution is None:
        return np.full(shape, 1.0 / 4 ** ns)
    want = x_bit_names(parties)
    dist = cfg.input_distribution
    if sorted(dist.names) != sorted(want):
        raise ValueError(f"input_distribution must cover exactly {want}")
    return marginal(dist, want).probs


@dataclass(frozen=True)
class SuccessProfile:
    """Per receiver-choice probability that G_i hits ⊕_k X_i^k."""

    probabilities: tuple[float, ...]

    def bias(self, i: int) -> float:
        return 2.0 * self.probabilities[i - 1] - 1.0


def success_profile(b: Behavior, cfg: ProtocolConfig | None = None) -> SuccessProfile:
    joint = single_copy_joint(b, cfg)
    parties = b.parties
    out = []
    for i in (1, 2):
        vars_i = [x_bit_name(k, i) for k in range(1, parties)] + [guess_name(i)]
        m = marginal(joint, vars_i)
        hit = 0.0
        for values, p in m.pmf_items():
            target = reduce(lambda u, v: u ^ v, values[:-1], 0)
            if values[-1] == target:
                hit += p
        out.append(hit)
    return SuccessProfile(tuple(out))


def biases(b: Behavior) -> tuple[float, float]:
    """(E_I, E_II): input-averaged biases of the box parity condition.

    P_I is the probability, uniform over sender inputs with x_N = 0, that
    ⊕_k a_k equals ⊕_{k<N} x_k x_N; P_II is the same at x_N = 1; the bias is
    E = 2P - 1.
    """
    full, _ = _split_tables(b)
    n_send = b.parties - 1
    p_hit = [0.0, 0.0]
    for xs in range(2 ** n_send):
        want = (0, bin(xs).count("1") & 1)  # parity target for x_N = 0, 1
        for as_idx in range(2 ** n_send):
            a_par = bin(as_idx).count("1") & 1
            for v in (0, 1):
                c = want[v] ^ a_par
                p_hit[v] += full[xs, v, as_idx, c]
    scale = 1.0 / 2 ** n_send
    return (float(2.0 * p_hit[0] * scale - 1.0),
            float(2.0 * p_hit[1] * scale - 1.0))


def q_parity(s: int, p: float, parity: str = "even") -> float:
    """Probability that s independent events of probability 1-p each leave an
    even (or odd) number of failures: Q = (1 ± (2p-1)^s) / 2."""
    if s < 0:
        raise ValueError("s must be >= 0")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if parity == "even":
        return 0.5 * (1.0 + (2.0 * p - 1.0) ** s)
    if parity == "odd":
        return 0.5 * (1.0 - (2.0 * p - 1.0) ** s)
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def concat_success_closed(e_one: float, e_two: float, depth: int, ones: int) -> float:
    """Success of the depth-K tree when the path uses `ones` z-bits equal 1:
    (1 + E_I^(K-r) E_II^r) / 2."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not 0 <= ones <= depth:
        raise ValueError(f"ones must be in [0, {depth}]")
    return 0.5 * (1.0 + e_one ** (depth - ones) * e_two ** ones)


def concat_success_simulated(b: Behavior, depth: int, z: Sequence[int]) -> float:
    """Exact success probability of the depth-K concatenated run for path z.

    Enumerates the tree bottom-up, carrying the exact joint distribution of
    each subtree's outgoing message vector (and, on the measured path, the
    receiver's running decode bit against the target).  Subtrees involve
    disjoint boxes and disjoint fresh input bits, so the product structure is
    exact; nothing here assumes anything about how box errors combine.
    """
    if b.parties > MAX_SIM_PARTIES:
        raise ValueError(f"simulation cap is {MAX_SIM_PARTIES} parties, got {b.parties}")
    if not 1 <= depth <= MAX_SIM_DEPTH:
        raise ValueError(f"depth must be in [1, {MAX_SIM_DEPTH}] for exact enumeration")
    zbits = tuple(int(v) & 1 for v in z)
    if len(zbits) != depth:
        raise ValueError(f"z must have {depth} bits, got {len(zbits)}")

    full, send = _split_tables(b)
    ns = b.parties - 1
    n_msgs = 2 ** ns
    u_bits = 1.0 / n_msgs  # one uniform sender-bit vector

    msg_cache: dict[int, np.ndarray] = {}

    def msg_dist(level: int) -> np.ndarray:
        """Distribution of the message vector leaving an unmeasured subtree."""
        if level in msg_cache:
            return msg_cache[level]
        out = np.zeros(n_msgs)
        if level == depth:
            for f_idx in range(n_msgs):
                for s_idx in range(n_msgs):
                    xs = f_idx ^ s_idx
                    w = u_bits * u_bits
                    for a_idx in range(n_msgs):
                        out[f_idx ^ a_idx] += w * send[xs, a_idx]
        else:
            child = msg_dist(level + 1)
            for m_left in range(n_msgs):
                wl = child[m_left]
                if wl == 0.0:
                    continue
                for m_right in range(n_msgs):
                    w = wl * child[m_right]
                    if w == 0.0:
                        continue
                    xs = m_left ^ m_right
                    for a_idx in range(n_msgs):
                        out[m_left ^ a_idx] += w * send[xs, a_idx]
        msg_cache[level] = out
        return out

    def path_dist(level: int, rest: tuple[int, ...]) -> np.ndarray:
        """Joint of (message vector, decode ⊕ target) for a measured subtree."""
        zeta = rest[0]
        out = np.zeros((n_msgs, 2))
        if level == depth:
            for f_idx in range(n_msgs):
                par_f = bin(f_idx).count("1") & 1
                for s_idx in range(n_msgs):
                    xs = f_idx ^ s_idx
                    w = u_bits * u_bits
                    target = par_f if zeta == 0 else bin(s_idx).count("1") & 1
                    for a_idx in range(n_msgs):
                        m_out = f_idx ^ a_idx
                        par_m = bin(m_out).count("1") & 1
                        for c in (0, 1):
                            p = full[xs, zeta, a_idx, c]
                            if p != 0.0:
                                out[m_out, par_m ^ c ^ target] += w * p
        else:
            sel = path_dist(level + 1, rest[1:])
            off = msg_dist(level + 1)
            for m_sel in range(n_msgs):
                par_sel = bin(m_sel).count("1") & 1
                for r_sel in (0, 1):
                    w1 = sel[m_sel, r_sel]
                    if w1 == 0.0:
                        continue
                    for m_off in range(n_msgs):
                        w2 = w1 * off[m_off]
                        if w2 == 0.0:
                            continue
                        m_left = m_sel if zeta == 0 else m_off
                        xs = m_sel ^ m_off
                        for a_idx in range(n_msgs):
                            m_out = m_left ^ a_idx
                            par_m = bin(m_out).count("1") & 1
                            for c in (0, 1):
                                p = full[xs, zeta, a_idx, c]
                                if p != 0.0:
                                    out[m_out, par_m ^ c ^ r_sel ^ par_sel] += w2 * p
        return out

    root = path_dist(1, zbits)
    return float(root[:, 0].sum())
