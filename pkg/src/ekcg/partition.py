"""Domain decomposition into t disjoint subdomains and the column-splitting operator.

A Partition carries t disjoint index sets covering {0..n-1}.  Its split()
method scatters a vector into an n-by-t block with one column per subdomain
(the vector restricted to that subdomain, zero elsewhere); the columns sum
back to the vector exactly since entries are copied, never combined.
"""

import numpy as np

__all__ = ["Partition", "contiguous_partition", "read_partition", "write_partition"]


class Partition:
    """t disjoint, nonempty subdomains covering all n indices.

    Immutable after construction.  Subdomain index sets are stored sorted.
    """

    __slots__ = ("n", "subdomains", "_owner")

    def __init__(self, n, subdomains):
        self.n = int(n)
        self.subdomains = [np.sort(np.asarray(s, dtype=np.int64)) for s in subdomains]
        owner = np.full(self.n, -1, dtype=np.int64)
        total = 0
        for j, idx in enumerate(self.subdomains):
            if idx.size == 0:
                raise ValueError(f"subdomain {j + 1} is empty")
            if idx.min() < 0 or idx.max() >= self.n:
                raise ValueError(f"subdomain {j + 1} has out-of-range indices")
            if np.any(owner[idx] != -1):
                raise ValueError(f"subdomain {j + 1} overlaps another subdomain")
            owner[idx] = j
            total += idx.size
        if total != self.n or np.any(owner < 0):
            raise ValueError("subdomains do not cover the full index set")
        self._owner = owner

    @property
    def t(self):
        return len(self.subdomains)

    def owner(self):
        """Array mapping each index to its 0-based subdomain id."""
        return self._owner

    def split(self, v):
        """Scatter v into an n-by-t block, one subdomain per column."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}, got shape {v.shape}")
        out = np.zeros((self.n, self.t))
        out[np.arange(self.n), self._owner] = v
        return out

    def halve(self):
        """Merge consecutive subdomain pairs, yielding t/2 subdomains."""
        if self.t % 2 != 0 or self.t < 2:
            raise ValueError(f"halving requires an even subdomain count, got t={self.t}")
        merged = [
            np.concatenate((self.subdomains[2 * i], self.subdomains[2 * i + 1]))
            for i in range(self.t // 2)
        ]
        return Partition(self.n, merged)

    def __repr__(self):
        return f"Partition(n={self.n}, t={self.t})"


def contiguous_partition(n, t):
    """Consecutive index ranges; the first n mod t subdomains get one extra index."""
    n, t = int(n), int(t)
    if t < 1 or t > n:
        raise ValueError(f"need 1 <= t <= n, got t={t}, n={n}")
    base, extra = divmod(n, t)
    sizes = [base + 1] * extra + [base] * (t - extra)
    bounds = np.cumsum([0] + sizes)
    return Partition(n, [np.arange(bounds[j], bounds[j + 1]) for j in range(t)])


def read_partition(source):
    """Parse the partition file format: "n t" then one 1-based subdomain id per index.

    Lines starting with '#' (or trailing '#' comments) are ignored.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    tokens = []
    for line in lines:
        body = line.split("#", 1)[0].strip()
        if body:
            tokens.extend(body.split())
    if len(tokens) < 2:
        raise ValueError("partition file must start with 'n t'")
    n, t = int(tokens[0]), int(tokens[1])
    ids = tokens[2:]
    if len(ids) != n:
        raise ValueError(f"expected {n} subdomain ids, found {len(ids)}")
    assign = np.array([int(s) for s in ids], dtype=np.int64)
    if np.any(assign < 1) or np.any(assign > t):
        raise ValueError(f"subdomain ids must lie in 1..{t}")
    subdomains = [np.flatnonzero(assign == j + 1) for j in range(t)]
    return Partition(n, subdomains)


def write_partition(partition, sink):
    """Write the ASCII partition file (1-based subdomain ids)."""
    lines = [f"{partition.n} {partition.t}"]
    lines.extend(str(j + 1) for j in partition.owner())
    text = "\n".join(lines) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
