"""Index tables for dense truncated multivariate Taylor (jet) arithmetic.

A jet of order ``K`` in ``v`` variables stores one coefficient per monomial
of total degree <= K.  Monomials are enumerated in *graded lexicographic*
order: primarily by total degree, then by plain tuple comparison of the
exponent vectors.  Because the ordering is graded, the coefficient vector of
an order-``r`` jet (r < K) is exactly the first ``size(v, r)`` entries of an
order-``K`` coefficient vector, which makes truncation a slice.

Multiplication tables list the coefficient index pairs contributing to each
output index.  They are split into a "diagonal" part (square terms
``a_p * b_p``) and an unordered off-diagonal part; convolution accumulates
``a_p*b_q + a_q*b_p`` per unordered pair.  Pairing the two mirror products
before accumulation makes jet multiplication bitwise commutative, and
sorting entries by (output index, first index) makes the result for degrees
<= K-1 bit-identical whether the product is computed at order K or K-1.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = ["jet_size", "JetTables", "get_tables"]


@lru_cache(maxsize=None)
def jet_size(nvars: int, order: int) -> int:
    """Number of monomials of total degree <= order in nvars variables."""
    return math.comb(nvars + order, order)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class MulTable:
    """Pair lists for one truncation order.

    Attributes
    ----------
    diag_src, diag_out : int32 arrays, square terms (p, target)
    off_p, off_q, off_c : int32 arrays, unordered pairs p < q with target c,
        sorted by (c, p)
    """

    __slots__ = ("order", "diag_src", "diag_out", "off_p", "off_q", "off_c")

    def __init__(self, order, diag_src, diag_out, off_p, off_q, off_c):
        self.order = order
        self.diag_src = diag_src
        self.diag_out = diag_out
        self.off_p = off_p
        self.off_q = off_q
        self.off_c = off_c


class JetTables:
    """Shared tables for all jets in ``nvars`` variables up to ``order``."""

    def __init__(self, nvars: int, order: int):
        if nvars < 1 or order < 0:
            raise ValueError(f"invalid jet table shape nvars={nvars} order={order}")
        self.nvars = nvars
        self.order = order
        self.size = jet_size(nvars, order)

        exps = []
        for deg in range(order + 1):
            block = sorted(_compositions(deg, nvars))
            exps.extend(block)
        self.exps = np.array(exps, dtype=np.int64).reshape(self.size, nvars)
        self.degrees = self.exps.sum(axis=1)
        self.index = {tuple(int(e) for e in row): i for i, row in enumerate(self.exps)}

        # Mixed-radix keys: exponents of retained monomials never exceed
        # `order` per slot, so radix order+1 encodes each tuple uniquely and
        # key(a) + key(b) == key(a + b) without carries.
        radix = order + 2
        self._strides = radix ** np.arange(nvars, dtype=np.int64)
        self._keys = self.exps @ self._strides
        self._key_sorter = np.argsort(self._keys, kind="stable")
        self._sorted_keys = self._keys[self._key_sorter]

        self._mul_tables: dict[int, MulTable] = {}
        self._lin_tables: dict[int, tuple] = {}
        self._sq_tables: dict[int, tuple] = {}
        self._deriv_maps: dict[tuple, tuple] = {}
        self._fact = np.array([math.factorial(i) for i in range(order + 2)], dtype=np.int64)

    # -- lookups ----------------------------------------------------------

    def size_at(self, order: int) -> int:
        return jet_size(self.nvars, order)

    def index_of(self, alpha) -> int:
        return self.index[tuple(int(a) for a in alpha)]

    def _lookup_keys(self, keys: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self._sorted_keys, keys)
        return self._key_sorter[pos]

    # -- multiplication ---------------------------------------------------

    def mul_table(self, order: int) -> MulTable:
        """Symmetric pair table for products truncated at ``order``."""
        tab = self._mul_tables.get(order)
        if tab is not None:
            return tab
        m = self.size_at(order)
        deg = self.degrees[:m]
        keys = self._keys[:m]
        ps, qs = [], []
        for p in range(m):
            dmax = order - deg[p]
            hi = np.searchsorted(deg, dmax, side="right")
            lo = p
            if hi > lo:
                qs.append(np.arange(lo, hi, dtype=np.int64))
                ps.append(np.full(hi - lo, p, dtype=np.int64))
        p_all = np.concatenate(ps) if ps else np.zeros(0, dtype=np.int64)
        q_all = np.concatenate(qs) if qs else np.zeros(0, dtype=np.int64)
        c_all = self._lookup_keys(keys[p_all] + keys[q_all])
        order_ix = np.lexsort((p_all, c_all))
        p_all, q_all, c_all = p_all[order_ix], q_all[order_ix], c_all[order_ix]
        diag = p_all == q_all
        tab = MulTable(
            order,
            p_all[diag].astype(np.int32),
            c_all[diag].astype(np.int32),
            p_all[~diag].astype(np.int32),
            q_all[~diag].astype(np.int32),
            c_all[~diag].astype(np.int32),
        )
        self._mul_tables[order] = tab
        return tab

    def lin_table(self, order: int):
        """Ordered pair table (ia, ib, ic) with deg(ib) >= 1, for the
        degree-by-degree division solve; sorted by (ic, ia)."""
        tab = self._lin_tables.get(order)
        if tab is not None:
            return tab
        m = self.size_at(order)
        deg = self.degrees[:m]
        keys = self._keys[:m]
        ia, ib = [], []
        for b in range(1, m):
            dmax = order - deg[b]
            hi = np.searchsorted(deg, dmax, side="right")
            ib.append(np.full(hi, b, dtype=np.int64))
            ia.append(np.arange(hi, dtype=np.int64))
        a_all = np.concatenate(ia) if ia else np.zeros(0, dtype=np.int64)
        b_all = np.concatenate(ib) if ib else np.zeros(0, dtype=np.int64)
        c_all = self._lookup_keys(keys[a_all] + keys[b_all])
        order_ix = np.lexsort((a_all, c_all))
        a_all, b_all, c_all = a_all[order_ix], b_all[order_ix], c_all[order_ix]
        out_deg = deg[c_all]
        starts = np.searchsorted(out_deg, np.arange(order + 2))
        tab = (a_all.astype(np.int32), b_all.astype(np.int32), c_all.astype(np.int32), starts)
        self._lin_tables[order] = tab
        return tab

    def sq_table(self, order: int):
        """Symmetric pair table restricted to deg >= 1 on both factors,
        grouped by output degree (for the square-root solve)."""
        tab = self._sq_tables.get(order)
        if tab is not None:
            return tab
        full = self.mul_table(order)
        deg = self.degrees
        dmask = deg[full.diag_src] >= 1
        omask = deg[full.off_p] >= 1
        d_src, d_out = full.diag_src[dmask], full.diag_out[dmask]
        o_p, o_q, o_c = full.off_p[omask], full.off_q[omask], full.off_c[omask]
        d_starts = np.searchsorted(deg[d_out], np.arange(order + 2))
        o_starts = np.searchsorted(deg[o_c], np.arange(order + 2))
        tab = (d_src, d_out, d_starts, o_p, o_q, o_c, o_starts)
        self._sq_tables[order] = tab
        return tab

    # -- derivatives ------------------------------------------------------

    def deriv_map(self, order: int, mu) -> tuple:
        """Gather map for the multi-derivative d^mu of an order-``order`` jet.

        Returns (src_idx, mult) with the result an order-(order-|mu|) jet:
        out[i] = in[src_idx[i]] * mult[i].  The integer multiplier
        prod_v (alpha_v + mu_v)! / alpha_v! depends only on the unordered
        multiset mu, so mixed partials are symmetric bit-for-bit.
        """
        mu = tuple(int(m) for m in mu)
        key = (order, mu)
        cached = self._deriv_maps.get(key)
        if cached is not None:
            return cached
        dmu = sum(mu)
        if dmu > order:
            raise ValueError(f"derivative order {dmu} exceeds jet order {order}")
        m_out = self.size_at(order - dmu)
        alpha = self.exps[:m_out]
        target = alpha + np.asarray(mu, dtype=np.int64)
        src = self._lookup_keys(target @ self._strides).astype(np.int32)
        mult = np.ones(m_out, dtype=np.int64)
        for v, mv in enumerate(mu):
            if mv:
                mult *= self._fact[alpha[:, v] + mv] // self._fact[alpha[:, v]]
        cached = (src, mult.astype(np.float64))
        self._deriv_maps[key] = cached
        return cached


@lru_cache(maxsize=None)
def get_tables(nvars: int, order: int) -> JetTables:
    return JetTables(nvars, order)
