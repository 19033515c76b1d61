"""Cached constructions shared across test modules."""

from functools import lru_cache

from holodisc.constructor import construct, family_from_name


@lru_cache(maxsize=None)
def built(name, gamma, theta=None, **extra):
    params = {} if name == "heterogeneous" else {"theta": theta}
    orders = {"gamma": gamma, **extra}
    return construct(family_from_name(name, **params), orders)
