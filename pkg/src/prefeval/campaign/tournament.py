"""Single-elimination tournaments for dedicated assessors.

The bracket finds the best candidate in |C| - 1 comparisons.  Each further
rank re-runs only the candidates that lost directly to the winner just
extracted, replaying at most one comparison per bracket level, so the whole
top-k costs at most |C| + (k - 1) * ceil(log2 |C|) judgments.

The session is interactive: callers alternate ``next_pair`` and ``report``.
``next_pair`` is deterministic given the seed and the judgments so far,
which makes a session resumable by replaying its ledger records.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from prefeval.ideal import TopKResult

# slot states: a doc id, _BYE for an empty leaf, or _PENDING awaiting a judgment
_BYE = None
_PENDING = "\x00pending"


def _ceil_log2(n: int) -> int:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return (n - 1).bit_length()


def estimate_tournament_cost(pool_sizes: Iterable[int], k: int) -> int:
    """Upper bound on judgments to extract a top-k from each pool.

    Uses |C| + (k - 1) * ceil(log2 |C|) per pool (not tight); empty pools
    cost nothing.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    total = 0
    for size in pool_sizes:
        if size < 0:
            raise ValueError(f"pool size must be >= 0, got {size}")
        if size == 0:
            continue
        total += size + (k - 1) * _ceil_log2(size)
    return total


class TournamentSession:
    """Interactive single-elimination selection of a topic's top-k.

    The bracket seeding is uniformly random given ``seed``; byes created by
    a non-power-of-two pool sit at the highest bracket positions.  Reporting
    a pair other than the currently issued one is an error.
    """

    def __init__(self, topic_id: str, candidates: Iterable[str], k: int, seed: int | str = 0):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.topic_id = topic_id
        self.k = k
        order = sorted(set(candidates))
        rng = random.Random(f"{seed}:{topic_id}:bracket")
        rng.shuffle(order)
        self._n = len(order)
        size = 1
        while size < max(self._n, 1):
            size *= 2
        self._size = size
        # Heap layout: internal nodes 0..size-2, leaves size-1..2*size-2.
        self._slots: list[str | None] = [_PENDING] * (2 * size - 1)
        byes = size - self._n
        leaf_docs: list[str | None] = []
        for i in range(byes):
            leaf_docs.extend([order[i] if i < len(order) else _BYE, _BYE])
        leaf_docs.extend(order[byes:])
        leaf_docs.extend([_BYE] * (size - len(leaf_docs)))
        self._leaf_of: dict[str, int] = {}
        for i, doc in enumerate(leaf_docs[:size]):
            self._slots[size - 1 + i] = doc
            if doc is not _BYE:
                self._leaf_of[doc] = size - 1 + i
        for node in range(size - 2, -1, -1):
            self._resolve(node)
        self.ranks: list[str] = []
        self.judgments_used = 0
        self._extract_ready()

    # -- bracket bookkeeping ------------------------------------------------

    def _children(self, node: int) -> tuple[int, int]:
        return 2 * node + 1, 2 * node + 2

    def _resolve(self, node: int) -> None:
        """Recompute one internal node from its children."""
        left, right = self._children(node)
        a, b = self._slots[left], self._slots[right]
        if a is _PENDING or b is _PENDING:
            self._slots[node] = _PENDING
        elif a is _BYE:
            self._slots[node] = b
        elif b is _BYE:
            self._slots[node] = a
        else:
            self._slots[node] = _PENDING  # two live docs: needs a judgment

    def _pending_node(self) -> int | None:
        """Deepest unresolved node whose children are two live docs."""
        for node in range(self._size - 2, -1, -1):
            if self._slots[node] is not _PENDING:
                continue
            left, right = self._children(node)
            a, b = self._slots[left], self._slots[right]
            if a is not _PENDING and b is not _PENDING and a is not _BYE and b is not _BYE:
                return node
        return None

    def _extract_ready(self) -> None:
        """Pull winners off the bracket while the root is decided."""
        while len(self.ranks) < min(self.k, self._n):
            root = self._slots[0]
            if root is _PENDING or root is _BYE:
                return
            self.ranks.append(root)
            leaf = self._leaf_of[root]
            self._slots[leaf] = _BYE
            node = leaf
            while node != 0:
                node = (node - 1) // 2
                self._resolve(node)

    # -- public interface ----------------------------------------------------

    @property
    def is_complete(self) -> bool:
        return len(self.ranks) >= min(self.k, self._n)

    def next_pair(self) -> tuple[str, str] | None:
        """The pair that must be judged next, or None when complete."""
        if self.is_complete:
            return None
        node = self._pending_node()
        if node is None:  # pragma: no cover - extraction always drains these
            return None
        left, right = self._children(node)
        return self._slots[left], self._slots[right]

    def report(self, doc_a: str, doc_b: str, winner: str) -> None:
        """Record the winner of the currently issued pair."""
        if winner not in (doc_a, doc_b):
            raise ValueError(f"winner {winner!r} is not in pair ({doc_a!r}, {doc_b!r})")
        issued = self.next_pair()
        if issued is None:
            raise ValueError(f"topic {self.topic_id}: no pair is awaiting judgment")
        if {doc_a, doc_b} != set(issued):
            raise ValueError(
                f"topic {self.topic_id}: pair ({doc_a!r}, {doc_b!r}) was not issued; "
                f"expected ({issued[0]!r}, {issued[1]!r})"
            )
        node = self._pending_node()
        assert node is not None
        self._slots[node] = winner
        self.judgments_used += 1
        parent = node
        while parent != 0:
            parent = (parent - 1) // 2
            self._resolve(parent)
        self._extract_ready()

    def replay(self, winners: Iterable[tuple[str, str, str]]) -> None:
        """Re-apply (doc_a, doc_b, winner) records in ledger order."""
        for doc_a, doc_b, winner in winners:
            self.report(doc_a, doc_b, winner)

    def result(self) -> TopKResult:
        """Final ranking as singleton groups; errors while incomplete."""
        if not self.is_complete:
            raise ValueError(
                f"topic {self.topic_id}: tournament still needs judgments "
                f"({len(self.ranks)} of {min(self.k, self._n)} ranks decided)"
            )
        groups = tuple(frozenset([doc]) for doc in self.ranks)
        return TopKResult(self.topic_id, groups, self.k, len(self.ranks))
