import numpy as np
from hypothesis import strategies as st

from liegeo.catalog import standard_algebras
from liegeo.metric import InnerProduct, random_inner_product

CATALOG = standard_algebras()
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rng_for(seed):
    return np.random.default_rng(seed)


def random_orthogonal(n, rng):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def metric_for(n, seed):
    return random_inner_product(n, rng_for(seed))


def identity(n):
    return InnerProduct.identity(n)
