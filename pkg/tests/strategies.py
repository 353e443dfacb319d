"""Shared hypothesis strategies."""

import numpy as np
from hypothesis import strategies as st

from latmult.lattice import GridFunction, LatticeBox


def boxes(d=None, rmax=4):
    dims = st.integers(1, 3) if d is None else st.just(d)
    return dims.flatmap(
        lambda k: st.tuples(
            st.lists(st.integers(-5, 5), min_size=k, max_size=k),
            st.lists(st.integers(0, rmax), min_size=k, max_size=k),
        ).map(lambda cr: LatticeBox(tuple(c - r for c, r in zip(*cr)), tuple(c + r for c, r in zip(*cr))))
    )


def functions(d=None, rmax=4):
    return st.tuples(boxes(d, rmax), st.integers(0, 2**31)).map(
        lambda bs: GridFunction.random(bs[0], np.random.default_rng(bs[1]))
    )
