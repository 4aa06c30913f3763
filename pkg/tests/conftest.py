"""Shared fixtures.

Orbit enumeration for the big formats is the expensive part of the
suite, so completed atlases are cached once per session and reused by
every test that asks for the same format.
"""

import pytest

from f2orbits.orbits import enumerate_orbits, merge_large_orbits
from f2orbits.ranks import large_orbit_ranks, propagate_ranks, rank_distribution
from f2orbits.report import summarize
from f2orbits.tensor import parse_shape


class Engine:
    def __init__(self):
        self._atlas = {}
        self._ranks = {}
        self._large = {}

    def shape(self, fmt):
        return parse_shape(fmt)

    def atlas(self, fmt):
        if fmt not in self._atlas:
            self._atlas[fmt] = enumerate_orbits(parse_shape(fmt))
        return self._atlas[fmt]

    def ranks(self, fmt, strategy="auto"):
        key = (fmt, strategy)
        if key not in self._ranks:
            self._ranks[key] = propagate_ranks(
                parse_shape(fmt), self.atlas(fmt), strategy=strategy)
        return self._ranks[key]

    def large(self, fmt):
        if fmt not in self._large:
            self._large[fmt] = merge_large_orbits(parse_shape(fmt), self.atlas(fmt))
        return self._large[fmt]

    def rows(self, fmt, flavor="small"):
        large = self.large(fmt) if flavor == "large" else None
        return summarize(parse_shape(fmt), self.atlas(fmt), self.ranks(fmt),
                         flavor=flavor, large=large)

    def distribution(self, fmt, flavor="small"):
        large = self.large(fmt) if flavor == "large" else None
        return rank_distribution(self.atlas(fmt), self.ranks(fmt), large=large)

    def large_ranks(self, fmt):
        return large_orbit_ranks(self.large(fmt), self.ranks(fmt))


@pytest.fixture(scope="session")
def engine():
    return Engine()
