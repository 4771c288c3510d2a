"""Separation demonstrations built on a pseudorandom function family.

Two target families over {0,1}-style bits (encoded as the usual masks,
labels in +-1):

* The (n+1)-bit family hides a secret bit of s in the XOR of the two
  labels that differ only in the first coordinate: flipping one bit of a
  natural example reveals s_i for the partition block A_i containing the
  suffix. One-local queries therefore recover the whole secret, while
  examples alone look like coin flips.
* The n-bit primed family plants the secret at the weight-one points
  e^1..e^n, which sit at distance Omega(n) from typical samples: full
  membership queries read the secret directly, any o(n)-local budget
  cannot reach it.

The PRF is a keyed cryptographic hash truncated to one bit, isolated
behind one interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._prf import crypto_bit
from .errors import ContractViolation
from .targets import PLUS_MINUS

VARIANT_G = "g"
VARIANT_GPRIME = "gprime"


def _suffix_rank(mask: int, n: int) -> int:
    """Lexicographic rank of an n-bit string with variable 0 leftmost."""
    rank = 0
    for i in range(n):
        rank = (rank << 1) | (mask >> i & 1)
    return rank


def partition_block(mask: int, n: int) -> int:
    """1-based block index: ranks split into n equal integer ranges."""
    return (_suffix_rank(mask, n) * n >> n) + 1


@dataclass(frozen=True)
class PrfTarget:
    """Keyed-PRF-based target; variant 'g' lives on n+1 bits, 'gprime' on n."""

    secret_n: int
    secret: int
    variant: str = VARIANT_G
    key_seed: int = 0
    domain: str = PLUS_MINUS

    def __post_init__(self):
        if self.variant not in (VARIANT_G, VARIANT_GPRIME):
            raise ContractViolation(f"unknown variant {self.variant!r}")
        if not 1 <= self.secret_n <= 24:
            raise ContractViolation("secret length outside [1, 24]")
        if not 0 <= self.secret < (1 << self.secret_n):
            raise ContractViolation("secret out of range")

    @property
    def n(self) -> int:
        return self.secret_n + 1 if self.variant == VARIANT_G else self.secret_n

    @cached_property
    def _key(self) -> bytes:
        payload = (self.key_seed & (2**64 - 1)).to_bytes(8, "little")
        return payload + self.secret.to_bytes(4, "little")

    def _prf(self, mask: int) -> int:
        return crypto_bit(self._key, mask)

    def _bit_at(self, bits: int) -> int:
        ns = self.secret_n
        if self.variant == VARIANT_GPRIME:
            if bits and bits & (bits - 1) == 0:  # weight-one point e^i
                i = bits.bit_length()  # 1-based
                return self.secret >> (i - 1) & 1
            return self._prf(bits)
        suffix = bits >> 1
        out = self._prf(suffix)
        if bits & 1:
            i = partition_block(suffix, ns)
            out ^= self.secret >> (i - 1) & 1
        return out

    def value_at(self, bits: int) -> float:
        return 2.0 * self._bit_at(bits) - 1.0

    def value_batch(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        return np.asarray([self.value_at(int(b)) for b in masks.ravel()]).reshape(
            masks.shape
        )


def learn_g_onelocal(session, budget: int, require_full: bool = True) -> dict:
    """Recover the secret of a 'g' target with one 1-local query per
    natural example.

    Each example (x1 x_suffix, label) is paired with the query flipping
    the first bit; the XOR of the two {0,1} labels is s_i for the block
    of the suffix. Budget examples are drawn; if some block is never hit
    the run reports a coverage failure (retryable, coupon-collector
    probability).
    """
    n_total = session.n
    ns = n_total - 1
    from .targets import Point

    seen: dict[int, int] = {}
    for j in range(budget):
        idx, masks, labels = session.draw_batch(1)
        bits = int(masks[0])
        other = session.local_query(
            Point(n_total, bits ^ 1, session.domain), int(idx[0])
        )
        b0 = (1.0 + labels[0]) / 2.0
        b1 = (1.0 + other) / 2.0
        block = partition_block(bits >> 1, ns)
        seen[block] = int(b0) ^ int(b1)
        if len(seen) == ns:
            break
    covered = len(seen) == ns
    if require_full and not covered:
        missing = [i for i in range(1, ns + 1) if i not in seen]
        return {"recovered": None, "covered": False, "missing_blocks": missing,
                "examples_used": session.ex_count}
    secret = 0
    for block, bit in seen.items():
        secret |= bit << (block - 1)
    return {
        "recovered": secret,
        "covered": covered,
        "examples_used": session.ex_count,
        "queries_used": session.mq_count,
    }


def pac_baseline(session, train: int, test: int, r_probe: int = 0, rng_seed: int = 0) -> dict:
    """Best-of-simple-hypotheses baseline trained on examples alone.

    Candidates: the two constants and every literal x_i / not-x_i. If
    r_probe > 0 the training set is augmented with random r_probe-flip
    local queries (which, against a pseudorandom target, help nothing).
    Reports the held-out error of the training winner.
    """
    from .targets import Point

    rng = np.random.default_rng([rng_seed & 0x7FFFFFFF, 0xBA5E])
    _, masks, labels = session.draw_batch(train)
    masks = masks.tolist()
    labels = labels.tolist()
    if r_probe > 0:
        idxs, amasks, _ = session.draw_batch(train)
        for i, base in zip(idxs.tolist(), amasks.tolist()):
            flips = rng.choice(session.n, size=r_probe, replace=False)
            q = base
            for f in flips:
                q ^= 1 << int(f)
            y = session.local_query(Point(session.n, q, session.domain), i)
            masks.append(q)
            labels.append(y)
    masks_arr = np.asarray(masks, dtype=np.int64)
    labels_arr = np.asarray(labels)

    def candidates():
        yield "const+1", np.ones(masks_arr.shape)
        yield "const-1", -np.ones(masks_arr.shape)
        for i in range(session.n):
            lit = 2.0 * ((masks_arr >> i) & 1) - 1.0
            yield f"x{i}", lit
            yield f"!x{i}", -lit

    best_name, best_err = None, math.inf
    for name, preds in candidates():
        err = float(np.mean(preds != labels_arr))
        if err < best_err:
            best_name, best_err = name, err
    _, te_masks, te_labels = session.draw_batch(test)
    if best_name == "const+1":
        te_preds = np.ones(te_masks.shape)
    elif best_name == "const-1":
        te_preds = -np.ones(te_masks.shape)
    else:
        i = int(best_name.lstrip("!x"))
        lit = 2.0 * ((te_masks >> i) & 1) - 1.0
        te_preds = -lit if best_name.startswith("!") else lit
    return {
        "winner": best_name,
        "train_error": best_err,
        "holdout_error": float(np.mean(te_preds != te_labels)),
        "train_size": len(masks),
        "test_size": test,
    }


def prf_quality(target: PrfTarget, samples: int = 100_000) -> dict:
    """Monobit and lag-one serial-correlation gate for the PRF bit."""
    limit = min(samples, 1 << target.n)
    bits = np.asarray([target._bit_at(x) for x in range(limit)], dtype=np.float64)
    mean = float(bits.mean())
    x = bits - mean
    denom = float(np.sum(x * x))
    serial = float(np.sum(x[:-1] * x[1:]) / denom) if denom > 0 else 0.0
    sigma = 0.5 / math.sqrt(limit)
    return {
        "samples": int(limit),
        "bit_mean": mean,
        "monobit_pass": abs(mean - 0.5) < 4 * sigma,
        "serial_correlation": serial,
        "serial_pass": abs(serial) < 4.5 / math.sqrt(limit),
    }
