"""The EX/MQ gateway.

An OracleSession is the only path from a learner to target labels. It
hands out natural examples drawn from the distribution, answers
membership queries that stay within Hamming distance r of a previously
drawn example, applies optional persistent label noise, and keeps an
audit trail (full per-call records, or counters only for large runs).

The caller names the anchor example for every query, which makes the
locality check O(n) per query; every algorithm here derives its queries
from one specific natural example, so the anchor is always known.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import IO

import numpy as np

from ._bits import mask_to_bitstring, popcount
from .errors import ContractViolation, LocalityError
from .targets import Point, TargetFunction
from .distributions import Distribution

AUDIT_FULL = "full"
AUDIT_COUNTS = "counts"


@dataclass
class AuditSummary:
    ex_count: int
    mq_count: int
    max_locality_used: int
    distinct_mq_points: int | None
    violations: int

    def to_json(self) -> dict:
        return asdict(self)


class OracleSession:
    """Stateful gateway enforcing the r-locality contract.

    Natural examples are stored in growing arrays; `drawn(i)` returns the
    i-th example as a Point. Labels are deterministic functions of the
    query point within one session (persistent noise), so repeated
    queries agree.
    """

    def __init__(
        self,
        target: TargetFunction,
        dist: Distribution,
        r: int,
        seed: int = 0,
        noise=None,
        audit_mode: str = AUDIT_FULL,
        track_distinct: bool = True,
    ):
        if r < 0:
            raise ContractViolation("locality r must be nonnegative")
        if dist.n != target.n or dist.domain != target.domain:
            raise ContractViolation("distribution does not match target dimension/domain")
        if audit_mode not in (AUDIT_FULL, AUDIT_COUNTS):
            raise ContractViolation(f"unknown audit mode {audit_mode!r}")
        self._target = target
        self.dist = dist
        self.r = int(r)
        self.n = target.n
        self.domain = target.domain
        self.noise = noise
        self.seed = int(seed)
        self._rng = np.random.default_rng([int(seed) & 0x7FFFFFFF, 0x0AC1E])
        self.audit_mode = audit_mode
        self.records: list[dict] = []
        self._masks = np.zeros(256, dtype=np.int64)
        self._labels = np.zeros(256, dtype=np.float64)
        self.ex_count = 0
        self.mq_count = 0
        self.max_locality_used = 0
        self.violations = 0
        self._distinct: set[int] | None = set() if track_distinct else None
        self._seq = 0

    # ------------------------------------------------------------- labels

    def _labels_for(self, masks: np.ndarray) -> np.ndarray:
        clean = self._target.value_batch(masks)
        if self.noise is not None:
            clean = clean * self.noise.zeta_batch(masks)
        return clean

    # ------------------------------------------------------------- examples

    def _reserve(self, count: int) -> None:
        need = self.ex_count + count
        if need > self._masks.size:
            cap = max(need, 2 * self._masks.size)
            grown_m = np.zeros(cap, dtype=np.int64)
            grown_m[: self.ex_count] = self._masks[: self.ex_count]
            grown_l = np.zeros(cap, dtype=np.float64)
            grown_l[: self.ex_count] = self._labels[: self.ex_count]
            self._masks, self._labels = grown_m, grown_l

    def draw_batch(self, count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Draw `count` natural examples; returns (indices, masks, labels)."""
        if count < 1:
            raise ContractViolation("draw count must be positive")
        masks = self.dist.sample_batch(self._rng, count)
        labels = self._labels_for(masks)
        self._reserve(count)
        lo = self.ex_count
        self._masks[lo : lo + count] = masks
        self._labels[lo : lo + count] = labels
        self.ex_count += count
        if self.audit_mode == AUDIT_FULL:
            for m, y in zip(masks.tolist(), labels.tolist()):
                self._record("ex", m, None, 0, y)
        else:
            self._seq += count
        return np.arange(lo, lo + count), masks, labels

    def draw_example(self) -> tuple[Point, float]:
        idx, masks, labels = self.draw_batch(1)
        return Point(self.n, int(masks[0]), self.domain), float(labels[0])

    def drawn(self, index: int) -> tuple[Point, float]:
        if not 0 <= index < self.ex_count:
            raise ContractViolation(f"anchor index {index} out of range")
        return (
            Point(self.n, int(self._masks[index]), self.domain),
            float(self._labels[index]),
        )

    def anchor_mask(self, index: int) -> int:
        if not 0 <= index < self.ex_count:
            raise ContractViolation(f"anchor index {index} out of range")
        return int(self._masks[index])

    def anchor_masks(self, indices: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.ex_count):
            raise ContractViolation("anchor index out of range")
        return self._masks[indices]

    # ------------------------------------------------------------- queries

    def local_query(self, query: Point, anchor: int) -> float:
        """Answer one r-local membership query anchored at a drawn example."""
        if query.n != self.n or query.domain != self.domain:
            raise ContractViolation("query point does not match session dimension/domain")
        anchor_bits = self.anchor_mask(anchor)
        dist = int(popcount(query.bits ^ anchor_bits))
        if dist > self.r:
            self.violations += 1
            if self.audit_mode == AUDIT_FULL:
                self._record("mq_violation", query.bits, anchor, dist, float("nan"))
            raise LocalityError(dist, self.r, anchor)
        label = float(self._labels_for(np.asarray([query.bits]))[0])
        self.mq_count += 1
        self.max_locality_used = max(self.max_locality_used, dist)
        if self._distinct is not None:
            self._distinct.add(query.bits)
        if self.audit_mode == AUDIT_FULL:
            self._record("mq", query.bits, anchor, dist, label)
        else:
            self._seq += 1
        return label

    def local_query_matrix(
        self, queries: np.ndarray, anchors: np.ndarray
    ) -> np.ndarray:
        """Vectorized queries: row i of `queries` is anchored at the drawn
        example anchors[i]. Same contract as local_query, checked for the
        whole batch before any label is released."""
        queries = np.asarray(queries, dtype=np.int64)
        if queries.ndim == 1:
            queries = queries[None, :]
        anchors = np.asarray(anchors, dtype=np.int64)
        anchor_bits = self.anchor_masks(anchors)
        dists = popcount(queries ^ anchor_bits[:, None])
        worst = int(dists.max()) if dists.size else 0
        if worst > self.r:
            self.violations += 1
            bad = np.argwhere(dists > self.r)[0]
            if self.audit_mode == AUDIT_FULL:
                self._record(
                    "mq_violation",
                    int(queries[bad[0], bad[1]]),
                    int(anchors[bad[0]]),
                    worst,
                    float("nan"),
                )
            raise LocalityError(worst, self.r, int(anchors[bad[0]]))
        labels = self._labels_for(queries.ravel()).reshape(queries.shape)
        self.mq_count += queries.size
        self.max_locality_used = max(self.max_locality_used, worst)
        if self._distinct is not None:
            self._distinct.update(queries.ravel().tolist())
        if self.audit_mode == AUDIT_FULL:
            flat_q = queries.ravel().tolist()
            flat_d = dists.ravel().tolist()
            flat_l = labels.ravel().tolist()
            reps = np.repeat(anchors, queries.shape[1]).tolist()
            for q, a, d, y in zip(flat_q, reps, flat_d, flat_l):
                self._record("mq", q, a, d, y)
        else:
            self._seq += queries.size
        return labels

    # ------------------------------------------------------------- audit

    def _record(self, op: str, bits: int, anchor: int | None, dist: int, resp: float):
        rec = {
            "op": op,
            "point": mask_to_bitstring(int(bits), self.n),
            "anchor": anchor,
            "dist": int(dist),
            "resp": resp,
            "seq": self._seq,
        }
        if self.noise is not None:
            rec["noisy"] = True
        self.records.append(rec)
        self._seq += 1

    def audit_report(self) -> AuditSummary:
        return AuditSummary(
            ex_count=self.ex_count,
            mq_count=self.mq_count,
            max_locality_used=self.max_locality_used,
            distinct_mq_points=len(self._distinct) if self._distinct is not None else None,
            violations=self.violations,
        )

    def write_audit_jsonl(self, fh: IO[str]) -> int:
        """Dump the per-call audit records; returns the record count."""
        if self.audit_mode != AUDIT_FULL:
            raise ContractViolation("session was not recording full audit")
        for rec in self.records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
        return len(self.records)


def audit_report(session: OracleSession) -> AuditSummary:
    return session.audit_report()


def draw_example(session: OracleSession) -> tuple[Point, float]:
    return session.draw_example()


def local_query(session: OracleSession, query: Point, anchor: int) -> float:
    return session.local_query(query, anchor)
