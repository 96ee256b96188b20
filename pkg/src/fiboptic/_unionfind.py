"""Union-find with path halving and union by size."""

from __future__ import annotations


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def component_count(self) -> int:
        return sum(1 for i in range(len(self.parent)) if self.find(i) == i)

    def component_ids(self) -> list[int]:
        """Component id per element, numbered by first occurrence."""
        ids: dict[int, int] = {}
        out = []
        for i in range(len(self.parent)):
            root = self.find(i)
            if root not in ids:
                ids[root] = len(ids)
            out.append(ids[root])
        return out
