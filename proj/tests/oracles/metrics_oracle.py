"""Reference values for clustering metrics, padding and a small CPM optimum.

Uses scikit-learn, numpy.pad and plain enumeration; none of it shares code
with the C++ implementation.
"""
import itertools

import numpy as np
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score

A = [0, 0, 1, 1, 1, 2, 2, 0, 3, 3, 3, 3]
B = [0, 1, 1, 1, 2, 2, 2, 0, 3, 3, 0, 3]


def set_partitions(n):
    def rec(i, labels, k):
        if i == n:
            yield list(labels)
            return
        for c in range(k + 1):
            labels.append(c)
            yield from rec(i + 1, labels, max(k, c + 1))
            labels.pop()
    yield from rec(0, [], 0)


def cpm(edges, labels, gamma):
    q = sum(w for i, j, w in edges if labels[i] == labels[j])
    for c in set(labels):
        n = labels.count(c)
        q -= gamma * n * (n - 1) / 2
    return q


if __name__ == "__main__":
    print("ARI", repr(adjusted_rand_score(A, B)))
    print("NMI", repr(normalized_mutual_info_score(A, B, average_method="arithmetic")))
    fg = [i for i in range(len(A)) if A[i] > 0 and B[i] > 0]
    print("fg NMI", repr(normalized_mutual_info_score([A[i] for i in fg], [B[i] for i in fg])))
    img = np.array([[0, 1, 2], [3, 4, 5]], float)
    print("reflect", np.pad(img, ((1, 2), (4, 4)), mode="reflect").astype(int).tolist())
    edges = [(0, 1, 1.0), (0, 2, 0.8), (1, 2, 0.9), (3, 4, 1.0), (3, 5, 0.7), (4, 5, 0.6), (2, 3, 0.2)]
    for gamma in (0.05, 0.5, 0.95):
        best = max(set_partitions(6), key=lambda l: cpm(edges, l, gamma))
        print("cpm gamma", gamma, repr(cpm(edges, best, gamma)), best)
