"""Shared generators for the test suite."""

import numpy as np

from qrstab import ratio
from qrstab.ratio import CornerSpec


def random_ratio(net, rng):
    """Random admissible weights: a Dirichlet split of each station's budget."""
    d = np.zeros(net.classes)
    m = net.mean_service
    for j in range(net.stations):
        cls = net.constituency(j)
        d[cls] = rng.dirichlet(np.ones(len(cls))) / m[cls]
    return d


def neighbor_pair(net, rng):
    """Two random ratio vectors that differ only at one random station."""
    d1 = random_ratio(net, rng)
    d2 = d1.copy()
    j = int(rng.integers(net.stations))
    cls = net.constituency(j)
    d2[cls] = rng.dirichlet(np.ones(len(cls))) / net.mean_service[cls]
    return d1, d2, j


def corner(net, high):
    return ratio.static_priority(net, CornerSpec.from_high(net, high))
