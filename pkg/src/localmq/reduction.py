"""Correlation-preserving embedding of a function into a higher
dimensional cube via a distance-(2k+1) linear code, plus simulators that
realize examples and k-local queries on the embedded function from
random examples of the base function alone.

The embedded function f_e equals f on codewords (message bits first,
parity appended) and is 0 everywhere else, where 0 is realized as a
persistent fair coin keyed by the point. Since codewords are 2k+1 apart,
no k-local query can connect two distinct codeword balls, which is what
makes the embedding simulable without membership queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._bits import popcount
from ._prf import coin_pm
from .errors import (
    CodeConstructionError,
    ContractViolation,
    EnumerationLimitError,
    LocalityError,
    SimulationError,
)
from .oracles import OracleSession
from .targets import PLUS_MINUS

# Shortened systematic BCH generators (length, message bits, distance,
# generator polynomial with bit i = coefficient of x^i).
_BCH_TABLE = [
    (15, 7, 5, 0o721),
    (15, 5, 7, 0o2467),
    (31, 21, 5, 0o3551),
    (31, 16, 7, 0o107657),
    (63, 51, 5, 0o12471),
    (63, 45, 7, 0o1701317),
]


def _poly_mod(value: int, g: int) -> int:
    gd = g.bit_length() - 1
    while value.bit_length() - 1 >= gd and value:
        value ^= g << (value.bit_length() - 1 - gd)
    return value


def ball_size(m: int, k: int) -> int:
    """Points within Hamming distance k of a fixed m-bit point."""
    return sum(math.comb(m, i) for i in range(k + 1))


@dataclass(frozen=True)
class LinearCode:
    """Systematic binary linear code: message bits occupy positions
    0..n-1 of each codeword, parity the rest. Decoding is brute-force
    nearest codeword, exact at desk scale."""

    n: int
    m: int
    k: int
    rows: tuple[int, ...]  # generator row per message bit

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ContractViolation("one generator row per message bit required")
        if self.n > 16:
            raise EnumerationLimitError("brute-force codes support n <= 16")

    @cached_property
    def codewords(self) -> np.ndarray:
        words = np.zeros(1, dtype=np.int64)
        for row in self.rows:
            words = np.concatenate([words, words ^ row])
        return words

    @cached_property
    def distance(self) -> int:
        weights = popcount(self.codewords[1:])
        return int(weights.min()) if weights.size else self.m

    def encode(self, message: int) -> int:
        out = 0
        for i, row in enumerate(self.rows):
            if message >> i & 1:
                out ^= row
        return out

    def encode_batch(self, messages: np.ndarray) -> np.ndarray:
        messages = np.asarray(messages, dtype=np.int64)
        out = np.zeros(messages.shape, dtype=np.int64)
        for i, row in enumerate(self.rows):
            out ^= row * ((messages >> i) & 1)
        return out

    def decode(self, word: int) -> int | None:
        """Message of the unique codeword within distance k, else None."""
        dists = popcount(self.codewords ^ word)
        best = int(np.argmin(dists))
        return best if int(dists[best]) <= self.k else None

    def min_distance_batch(self, words: np.ndarray) -> np.ndarray:
        words = np.asarray(words, dtype=np.int64)
        out = np.full(words.shape, self.m + 1, dtype=np.int64)
        cw = self.codewords
        chunk = max(1, (1 << 22) // max(1, words.size))
        for lo in range(0, cw.size, chunk):
            block = cw[lo : lo + chunk]
            d = popcount(words[:, None] ^ block[None, :]).min(axis=1)
            out = np.minimum(out, d)
        return out

    def pad(self, extra: int) -> "LinearCode":
        """Append `extra` constant-zero coordinates; distance unchanged."""
        return LinearCode(self.n, self.m + extra, self.k, self.rows)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "distance": self.distance,
            "generator_rows": [
                [row >> j & 1 for j in range(self.m)] for row in self.rows
            ],
        }


def _hamming_rows(n: int) -> tuple[int, list[int]]:
    p = 1
    while (1 << p) < n + p + 1:
        p += 1
    data_cols = [v for v in range(1, 1 << p) if v & (v - 1)]  # weight >= 2
    rows = [(1 << i) | (data_cols[i] << n) for i in range(n)]
    return n + p, rows


def _bch_rows(n: int, k: int) -> tuple[int, list[int]] | None:
    for length, msg_bits, dist, g in _BCH_TABLE:
        if msg_bits >= n and dist >= 2 * k + 1:
            deg = g.bit_length() - 1
            rows = [
                (1 << i) | (_poly_mod((1 << i) << deg, g) << n) for i in range(n)
            ]
            return n + deg, rows
    return None


def build_code(n: int, k: int, slack: int = 8, rng=None) -> LinearCode:
    """Binary linear code with distance >= 2k+1 within the length budget
    m <= n + k*ceil(log2 n) + slack.

    Prefers the identity code (k=0), shortened Hamming (k=1), and
    shortened BCH generators (k=2,3); falls back to random systematic
    codes filtered by exact distance. The returned distance is always
    verified exhaustively.
    """
    if n < 1 or k < 0:
        raise ContractViolation("need n >= 1, k >= 0")
    if n > 16 or k > 3:
        raise ContractViolation("desk scale supports n <= 16, k <= 3")
    budget = n + k * math.ceil(math.log2(max(n, 2))) + slack
    if k == 0:
        return LinearCode(n, n, 0, tuple(1 << i for i in range(n)))
    candidates = []
    if k == 1:
        m, rows = _hamming_rows(n)
        candidates.append((m, rows))
    bch = _bch_rows(n, k)
    if bch is not None:
        candidates.append(bch)
    for m, rows in sorted(candidates):
        if m > budget:
            continue
        code = LinearCode(n, m, k, tuple(rows))
        if code.distance >= 2 * k + 1:
            return code
    # random systematic fallback
    rng = np.random.default_rng(0xC0DE) if rng is None else rng
    for extra in range(1, budget - n + 1):
        for _ in range(200):
            rows = [
                (1 << i) | (int(rng.integers(0, 1 << extra)) << n) for i in range(n)
            ]
            code = LinearCode(n, n + extra, k, tuple(rows))
            if code.distance >= 2 * k + 1:
                return code
    raise CodeConstructionError(
        f"no distance-{2 * k + 1} code for n={n} within m <= {budget}"
    )


@dataclass(frozen=True)
class EmbeddedFunction:
    """f_e over m bits: f on codewords, a persistent fair coin elsewhere."""

    base: object  # +-1 valued target over n bits
    code: LinearCode
    coin_seed: int = 0

    def __post_init__(self):
        if self.base.n != self.code.n:
            raise ContractViolation("target dimension != code message length")
        if getattr(self.base, "domain", PLUS_MINUS) != PLUS_MINUS:
            raise ContractViolation("embedding is defined for +-1 targets")

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def m(self) -> int:
        return self.code.m

    @property
    def beta(self) -> float:
        """Mass of Z, the union of radius-k balls around codewords."""
        return 2.0 ** (self.n - self.m) * ball_size(self.m, self.code.k)

    def value(self, z: int) -> float:
        """Exact f_e value in {-1, 0, +1}."""
        msg = self.code.decode(z)
        if msg is not None and self.code.encode(msg) == z:
            return float(self.base.value_at(msg))
        return 0.0

    def label(self, z: int) -> float:
        v = self.value(z)
        return v if v != 0.0 else float(coin_pm(self.coin_seed, np.asarray([z]))[0])

    def label_batch(self, words: np.ndarray) -> np.ndarray:
        words = np.asarray(words, dtype=np.int64)
        out = coin_pm(self.coin_seed, words)
        for j, z in enumerate(words.tolist()):
            v = self.value(z)
            if v != 0.0:
                out[j] = v
        return out


def embed(base, k: int, coin_seed: int = 0, slack: int = 8) -> EmbeddedFunction:
    """Build the code, pad until the rejection guard beta <= 2/3 holds
    (appending constant-zero coordinates), and wrap the target."""
    code = build_code(base.n, k, slack)
    if k >= 1:
        while 2.0 ** (base.n - code.m) * ball_size(code.m, k) > 2.0 / 3.0:
            code = code.pad(1)
    return EmbeddedFunction(base, code, coin_seed)


class ReductionSimulator:
    """Simulates EX(f_e, U_m) and k-local MQ(f_e) from EX(f, U_n) alone.

    Example simulation follows the three-step recipe: with probability
    beta place a fresh base example at a uniform point of the radius-k
    ball around its codeword (coin label unless exactly on the
    codeword); otherwise rejection-sample the complement of Z through
    decode failures. Queries are answered from the recorded ball
    contexts and persistent coins, never from a base membership oracle.
    """

    def __init__(self, embedded: EmbeddedFunction, base_session: OracleSession, seed: int = 0):
        if base_session.n != embedded.n or base_session.domain != PLUS_MINUS:
            raise ContractViolation("base session does not match the embedding")
        self.embedded = embedded
        self.base_session = base_session
        self.rng = np.random.default_rng([seed & 0x7FFFFFFF, 0xE4B])
        self._drawn_masks: list[int] = []
        self._drawn_labels: list[float] = []
        # context per example: (codeword, base_label) for ball examples, None off Z
        self._context: list[tuple[int, float] | None] = []
        self.mq_count = 0
        self.max_locality_used = 0
        self.try_histogram: dict[int, int] = {}

    @cached_property
    def _ball_patterns(self) -> np.ndarray:
        m, k = self.embedded.m, self.embedded.code.k
        pats = [0]
        frontier = [0]
        for _ in range(k):
            nxt = set()
            for pat in frontier:
                for j in range(m):
                    cand = pat | (1 << j)
                    if cand != pat:
                        nxt.add(cand)
            frontier = sorted(nxt - set(pats))
            pats.extend(frontier)
        return np.asarray(sorted(set(pats)), dtype=np.int64)

    @property
    def ex_count(self) -> int:
        return len(self._drawn_masks)

    def draw_batch(self, count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        emb = self.embedded
        beta = emb.beta
        heads = self.rng.random(count) < beta
        n_heads = int(heads.sum())
        out_masks = np.zeros(count, dtype=np.int64)
        out_labels = np.zeros(count, dtype=np.float64)
        contexts: list = [None] * count
        head_pos = np.nonzero(heads)[0]
        if n_heads:
            _, base_masks, base_labels = self.base_session.draw_batch(n_heads)
            words = emb.code.encode_batch(base_masks)
            pats = self._ball_patterns[
                self.rng.integers(0, self._ball_patterns.size, size=n_heads)
            ]
            z = words ^ pats
            exact = pats == 0
            labels = np.where(exact, base_labels, coin_pm(emb.coin_seed, z))
            out_masks[head_pos] = z
            out_labels[head_pos] = labels
            for j, pos in enumerate(head_pos.tolist()):
                contexts[pos] = (int(words[j]), float(base_labels[j]))
        tail_pos = np.nonzero(~heads)[0]
        need = tail_pos.size
        if need:
            got = []
            expected_tries = 1.0 / max(1.0 - beta, 1e-9)
            max_rounds = math.ceil(64 * expected_tries)
            rounds = 0
            while len(got) < need:
                rounds += 1
                if rounds > max_rounds:
                    raise SimulationError(
                        f"rejection sampling exceeded {max_rounds} rounds"
                    )
                batch = self.rng.integers(0, 1 << emb.m, size=need, dtype=np.int64)
                far = emb.code.min_distance_batch(batch) > emb.code.k
                for z in batch[far].tolist():
                    got.append(z)
                    self.try_histogram[rounds] = self.try_histogram.get(rounds, 0) + 1
                    if len(got) == need:
                        break
            z = np.asarray(got[:need], dtype=np.int64)
            out_masks[tail_pos] = z
            out_labels[tail_pos] = coin_pm(emb.coin_seed, z)
        lo = len(self._drawn_masks)
        self._drawn_masks.extend(out_masks.tolist())
        self._drawn_labels.extend(out_labels.tolist())
        self._context.extend(contexts)
        return np.arange(lo, lo + count), out_masks, out_labels

    def draw_example(self) -> tuple[int, float]:
        _, masks, labels = self.draw_batch(1)
        return int(masks[0]), float(labels[0])

    def local_query(self, query: int, anchor: int) -> float:
        """k-local query against a previously simulated example."""
        if not 0 <= anchor < len(self._drawn_masks):
            raise ContractViolation(f"anchor index {anchor} out of range")
        k = self.embedded.code.k
        dist = int(popcount(query ^ self._drawn_masks[anchor]))
        if dist > k:
            raise LocalityError(dist, k, anchor)
        self.mq_count += 1
        self.max_locality_used = max(self.max_locality_used, dist)
        ctx = self._context[anchor]
        if ctx is not None and query == ctx[0]:
            return ctx[1]
        return float(coin_pm(self.embedded.coin_seed, np.asarray([query]))[0])


def simulate_example(embedded: EmbeddedFunction, base_session: OracleSession, rng_seed: int = 0):
    """One-shot convenience wrapper; prefer ReductionSimulator for runs."""
    sim = ReductionSimulator(embedded, base_session, rng_seed)
    return sim.draw_example()


def simulate_local_mq(sim: ReductionSimulator, query: int, anchor: int) -> float:
    """Answer a k-local query against a previously simulated example."""
    return sim.local_query(query, anchor)


def correlation_check(f, g, embedded: EmbeddedFunction) -> tuple[float, float]:
    """Exact check of the correlation identity.

    Returns (E_{U_m}[f_e(z) g'(z)], 2^{n-m} E_{U_n}[f(x) g(x)]) where
    g'(z) applies g to the message bits of z. Both sides enumerated.
    """
    n, m = embedded.n, embedded.m
    if m > 22:
        raise EnumerationLimitError(f"m={m} too large for exact correlation")
    msg_mask = (1 << n) - 1
    code = embedded.code
    lookup = {int(code.encode(msg)): msg for msg in range(1 << n)}
    acc = []
    for z in range(1 << m):
        msg = lookup.get(z)
        if msg is not None:
            acc.append(float(f.value_at(msg)) * float(g.value_at(z & msg_mask)))
    lhs = math.fsum(acc) / (1 << m)
    rhs = 2.0 ** (n - m) * math.fsum(
        float(f.value_at(x)) * float(g.value_at(x)) for x in range(1 << n)
    ) / (1 << n)
    return lhs, rhs


def reduction_report(embedded: EmbeddedFunction, sim: ReductionSimulator) -> dict:
    code = embedded.code
    return {
        "n": embedded.n,
        "m": embedded.m,
        "k": code.k,
        "distance": code.distance,
        "beta": embedded.beta,
        "ball_size": ball_size(embedded.m, code.k),
        "tries_histogram": dict(sorted(sim.try_histogram.items())),
        "base_ex_count": sim.base_session.ex_count,
        "base_mq_count": sim.base_session.mq_count,
        "simulated_ex_count": sim.ex_count,
        "simulated_mq_count": sim.mq_count,
    }
