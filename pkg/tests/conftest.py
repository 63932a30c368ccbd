"""Shared fixtures: generated matrices are cached per session."""

from __future__ import annotations

import pytest

from trljsym import gen_random_hjs, random_tek_operator


@pytest.fixture(scope="session")
def planted_cache():
    """Factory returning (and memoizing) planted matrices by (n_half, seed)."""
    cache = {}

    def get(n_half, seed):
        key = (n_half, seed)
        if key not in cache:
            cache[key] = gen_random_hjs(n_half, seed)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def tek_cache():
    """Factory returning (and memoizing) (A, J, D) triples by (d, kappa, seed)."""
    cache = {}

    def get(d, seed, kappa=0.19):
        key = (d, kappa, seed)
        if key not in cache:
            cache[key] = random_tek_operator(d=d, kappa=kappa, seed=seed)
        return cache[key]

    return get
