"""Symmetric tensors, contractions and the product-moment identity.

Tensors are stored canonically: one coefficient per sorted index tuple,
equal to the dense entry at every permutation of that tuple.  Inner
products therefore carry multinomial weights.  Values are either exact
(ExactComplex, restricted to real for SymTensor) or floating point; all
operations preserve exactness when inputs are exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from .exact import EC, ExactComplex, ZERO

IndexTuple = Tuple[int, ...]
Value = Union[int, Fraction, float, complex, ExactComplex]


def multiplicity_factor(t: IndexTuple) -> int:
    """Number of distinct arrangements of the multiset t: p! / prod(mult!)."""
    out = math.factorial(len(t))
    run = 1
    for a, b in zip(t, t[1:]):
        run = run + 1 if a == b else 1
        if run > 1:
            out //= run
    return out


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction, ExactComplex))


def _exact(v) -> ExactComplex:
    return ExactComplex.coerce(v)


def _as_float(v):
    if isinstance(v, ExactComplex):
        z = v.to_complex()
        return z.real if z.imag == 0 else z
    if isinstance(v, Fraction):
        return float(v)
    return v


def _values_exact(values: Iterable) -> bool:
    return all(_is_exact(v) for v in values)


class SymTensor:
    """Fully symmetric order-p tensor over R^dim in canonical sorted storage."""

    __slots__ = ("order", "dim", "data")

    def __init__(self, order: int, dim: int,
                 data: Mapping[IndexTuple, Value] | None = None):
        if order < 0 or dim < 1:
            raise ValueError("need order >= 0 and dim >= 1")
        self.order = int(order)
        self.dim = int(dim)
        store: Dict[IndexTuple, Value] = {}
        if data:
            for key, val in data.items():
                t = tuple(int(i) for i in key)
                if len(t) != self.order:
                    raise ValueError(f"tuple {t} has wrong length")
                if any(not 0 <= i < self.dim for i in t):
                    raise ValueError(f"index out of range in {t}")
                if tuple(sorted(t)) != t:
                    raise ValueError(f"tuple {t} is not sorted")
                if _is_exact(val):
                    v = _exact(val)
                    if not v.is_real():
                        raise ValueError("SymTensor values must be real")
                    if not v.is_zero():
                        store[t] = v
                elif val != 0:
                    store[t] = float(val)
        self.data = store

    # -- constructors ------------------------------------------------------

    @classmethod
    def basis_product(cls, dim: int, indices: Sequence[int]) -> "SymTensor":
        """symm(e_{i1} x ... x e_{ip}) for the given (not necessarily sorted) indices."""
        return symmetrize({tuple(indices): 1}, len(indices), dim)

    @classmethod
    def vector_power(cls, vec: Sequence[Value], order: int) -> "SymTensor":
        """h^(x p): dense entry prod_k h[i_k] (already symmetric)."""
        dim = len(vec)
        exact = _values_exact(vec)
        vals = [(_exact(v) if exact else float(v)) for v in vec]
        data = {}
        for t in combinations_with_replacement(range(dim), order):
            prod = _exact(1) if exact else 1.0
            for i in t:
                prod = prod * vals[i]
            data[t] = prod
        return cls(order, dim, data)

    # -- access ---------------------------------------------------------------

    def entry(self, t: IndexTuple):
        """Dense entry at an arbitrary (unsorted) index tuple."""
        return self.data.get(tuple(sorted(t)), 0)

    def dense_items(self):
        """Yield (arrangement, value) over every distinct arrangement of each key."""
        from itertools import permutations

        for key, val in self.data.items():
            for arr in set(permutations(key)):
                yield arr, val

    def is_exact(self) -> bool:
        return _values_exact(self.data.values())

    def __eq__(self, other):
        if not isinstance(other, SymTensor):
            return NotImplemented
        return (self.order, self.dim, self.data) == (other.order, other.dim, other.data)

    def __hash__(self):
        return hash((self.order, self.dim, frozenset(self.data.items())))

    def float_copy(self) -> "SymTensor":
        return SymTensor(self.order, self.dim,
                         {t: _as_float(v) for t, v in self.data.items()})

    def __add__(self, other: "SymTensor") -> "SymTensor":
        if (other.order, other.dim) != (self.order, self.dim):
            raise ValueError("shape mismatch")
        out = dict(self.data)
        for t, v in other.data.items():
            cur = out.get(t)
            s = v if cur is None else _add_values(cur, v)
            if _value_is_zero(s):
                out.pop(t, None)
            else:
                out[t] = s
        return SymTensor(self.order, self.dim, out)

    def __rmul__(self, scalar):
        if _is_exact(scalar) and self.is_exact():
            c = _exact(scalar)
            return SymTensor(self.order, self.dim,
                             {t: c * v for t, v in self.data.items()})
        c = float(scalar)
        return SymTensor(self.order, self.dim,
                         {t: c * _as_float(v) for t, v in self.data.items()})

    __mul__ = __rmul__

    def norm_sq(self):
        return inner(self, self)

    def __repr__(self):
        return f"SymTensor(order={self.order}, dim={self.dim}, nnz={len(self.data)})"


def _add_values(a, b):
    if _is_exact(a) and _is_exact(b):
        return _exact(a) + _exact(b)
    return _as_float(a) + _as_float(b)


def _value_is_zero(v) -> bool:
    if isinstance(v, ExactComplex):
        return v.is_zero()
    return v == 0


def symmetrize(raw: Mapping[IndexTuple, Value], order: int, dim: int) -> SymTensor:
    """Average a raw dense coefficient map over all slot permutations.

    Unlisted positions are zero.  Idempotent on tensors that are already
    symmetric (feeding back the canonical entries at their sorted keys).
    """
    exact = _values_exact(raw.values())
    acc: Dict[IndexTuple, Value] = {}
    for key, val in raw.items():
        t = tuple(int(i) for i in key)
        if len(t) != order:
            raise ValueError(f"tuple {t} has wrong length")
        if any(not 0 <= i < dim for i in t):
            raise ValueError(f"index {t} out of range for dim {dim}")
        st = tuple(sorted(t))
        v = _exact(val) if exact else float(val)
        acc[st] = _add_values(acc[st], v) if st in acc else v
    # each sorted key now holds the sum over listed arrangements; the
    # symmetrized dense entry is that sum divided by the arrangement count
    data: Dict[IndexTuple, Value] = {}
    for st, v in acc.items():
        w = Fraction(1, multiplicity_factor(st))
        data[st] = _exact(w) * v if exact else float(w) * _as_float(v)
    return SymTensor(order, dim, data)


def inner(f: SymTensor, g: SymTensor):
    """Full-tuple inner product: sum over all index tuples of f * g."""
    if (f.order, f.dim) != (g.order, g.dim):
        raise ValueError("shape mismatch")
    exact = f.is_exact() and g.is_exact()
    small, big = (f, g) if len(f.data) <= len(g.data) else (g, f)
    total = ZERO if exact else 0.0
    for t, v in small.data.items():
        w = big.data.get(t)
        if w is None:
            continue
        m = multiplicity_factor(t)
        if exact:
            total = total + EC(m) * _exact(v) * _exact(w)
        else:
            total = total + m * _as_float(v) * _as_float(w)
    return total


# -- contractions -----------------------------------------------------------------


class BlockTensor:
    """Tensor symmetric within two index blocks (the raw contraction shape)."""

    __slots__ = ("orders", "dim", "data")

    def __init__(self, orders: Tuple[int, int], dim: int,
                 data: Mapping[Tuple[IndexTuple, IndexTuple], Value] | None = None):
        self.orders = (int(orders[0]), int(orders[1]))
        self.dim = int(dim)
        store: Dict[Tuple[IndexTuple, IndexTuple], Value] = {}
        if data:
            for (t1, t2), val in data.items():
                t1, t2 = tuple(t1), tuple(t2)
                if len(t1) != self.orders[0] or len(t2) != self.orders[1]:
                    raise ValueError("block tuple of wrong length")
                if not _value_is_zero(val):
                    store[(t1, t2)] = val
        self.data = store

    def norm_sq(self):
        exact = _values_exact(self.data.values())
        total = ZERO if exact else 0.0
        for (t1, t2), v in self.data.items():
            m = multiplicity_factor(t1) * multiplicity_factor(t2)
            if exact:
                total = total + EC(m) * _exact(v) * _exact(v)
            else:
                x = _as_float(v)
                total = total + m * x * x
        return total

    def scalar(self):
        """Value of an order-(0,0) block tensor."""
        if self.orders != (0, 0):
            raise ValueError("not a scalar tensor")
        return self.data.get(((), ()), 0)

    def __repr__(self):
        return f"BlockTensor(orders={self.orders}, dim={self.dim}, nnz={len(self.data)})"


def _splits(t: IndexTuple, r: int):
    """Distinct multiset splits of sorted tuple t into (kept, contracted of size r)."""
    seen = set()
    pos = range(len(t))
    for keep_pos in combinations(pos, len(t) - r):
        kept = tuple(t[i] for i in keep_pos)
        rest = tuple(t[i] for i in pos if i not in keep_pos)
        key = (kept, rest)
        if key not in seen:
            seen.add(key)
            yield kept, rest


def contract(u: SymTensor, v: SymTensor, r: int) -> BlockTensor:
    """r-th contraction u (x)_r v: sum r shared slots over the dimension.

    r = order gives the scalar inner product; r = 0 the outer product.
    The result is symmetric within its two blocks but not across them;
    use :func:`contract_sym` for the symmetrized variant.
    """
    if (u.order, u.dim) != (v.order, v.dim):
        raise ValueError("shape mismatch")
    q = u.order
    if not 0 <= r <= q:
        raise ValueError(f"contraction order {r} outside 0..{q}")
    exact = u.is_exact() and v.is_exact()

    def split_map(t: SymTensor):
        out: Dict[IndexTuple, List[Tuple[IndexTuple, Value]]] = {}
        for key, val in t.data.items():
            for kept, shared in _splits(key, r):
                out.setdefault(shared, []).append((kept, val))
        return out

    left = split_map(u)
    right = split_map(v)
    data: Dict[Tuple[IndexTuple, IndexTuple], Value] = {}
    for shared, lefts in left.items():
        rights = right.get(shared)
        if rights is None:
            continue
        # number of ordered r-sequences realizing the shared multiset
        w = multiplicity_factor(shared)
        for kept_l, val_l in lefts:
            for kept_r, val_r in rights:
                key = (kept_l, kept_r)
                if exact:
                    inc = EC(w) * _exact(val_l) * _exact(val_r)
                    cur = data.get(key, ZERO) + inc
                    if cur.is_zero():
                        data.pop(key, None)
                    else:
                        data[key] = cur
                else:
                    inc = w * _as_float(val_l) * _as_float(val_r)
                    cur = data.get(key, 0.0) + inc
                    if cur == 0:
                        data.pop(key, None)
                    else:
                        data[key] = cur
    return BlockTensor((q - r, q - r), u.dim, data)


def contract_sym(u: SymTensor, v: SymTensor, r: int) -> SymTensor:
    """Symmetrization of the r-th contraction over all 2(q - r) slots."""
    block = contract(u, v, r)
    p1, p2 = block.orders
    order = p1 + p2
    exact = _values_exact(block.data.values())
    acc: Dict[IndexTuple, Value] = {}
    for (t1, t2), val in block.data.items():
        full = tuple(sorted(t1 + t2))
        # sum of dense entries over distinct arrangements of `full` equals
        # sum over multiset splits weighted by per-block arrangement counts;
        # here we accumulate this entry's contribution to that sum
        w = multiplicity_factor(t1) * multiplicity_factor(t2)
        inc = EC(w) * _exact(val) if exact else w * _as_float(val)
        acc[full] = _add_values(acc[full], inc) if full in acc else inc
    data: Dict[IndexTuple, Value] = {}
    for full, v_sum in acc.items():
        w = Fraction(1, multiplicity_factor(full))
        data[full] = _exact(w) * v_sum if exact else float(w) * _as_float(v_sum)
    return SymTensor(order, u.dim, data)


def product_moment(u: SymTensor, v: SymTensor):
    """E[U^2 V^2] for U, V the order-q integrals of u, v.

    Closed form: 2 (E[UV])^2 + E[U^2] E[V^2]
    + sum_{r=1}^{q-1} C(q,r)^2 [ (q!)^2 |u (x)_r v|^2
                                 + (r!)^2 C(q,r)^2 (2q-2r)! |u (x~)_r v|^2 ]
    with E[UV] = q! <u, v>.
    """
    if (u.order, u.dim) != (v.order, v.dim):
        raise ValueError("shape mismatch")
    q = u.order
    if q < 1:
        raise ValueError("order must be >= 1")
    qf = math.factorial(q)
    exact = u.is_exact() and v.is_exact()
    euv = EC(qf) * inner(u, v) if exact else qf * inner(u, v)
    eu2 = EC(qf) * inner(u, u) if exact else qf * inner(u, u)
    ev2 = EC(qf) * inner(v, v) if exact else qf * inner(v, v)
    total = 2 * euv * euv + eu2 * ev2
    for r in range(1, q):
        raw = contract(u, v, r).norm_sq()
        sym = contract_sym(u, v, r).norm_sq()
        c = math.comb(q, r)
        rf = math.factorial(r)
        w1 = c * c * qf * qf
        w2 = c ** 4 * rf * rf * math.factorial(2 * q - 2 * r)
        if exact:
            total = total + EC(w1) * raw + EC(w2) * sym
        else:
            total = total + w1 * raw + w2 * sym
    return total


# -- complex kernels ---------------------------------------------------------------


class ComplexKernel:
    """Element of the (m, n) bidegree kernel space over C^dim.

    Coefficients are indexed by a pair (sorted m-tuple, sorted n-tuple) in
    the basis e_{i1} x ... x conj(e_{j1}) x ...; the kernel is symmetric
    separately within each block.
    """

    __slots__ = ("m", "n", "dim", "data")

    def __init__(self, m: int, n: int, dim: int,
                 data: Mapping[Tuple[IndexTuple, IndexTuple], Value] | None = None):
        if m < 0 or n < 0 or dim < 1:
            raise ValueError("need m, n >= 0 and dim >= 1")
        self.m, self.n, self.dim = int(m), int(n), int(dim)
        store: Dict[Tuple[IndexTuple, IndexTuple], Value] = {}
        if data:
            for (ta, tb), val in data.items():
                ta, tb = tuple(int(i) for i in ta), tuple(int(i) for i in tb)
                if len(ta) != self.m or len(tb) != self.n:
                    raise ValueError("kernel tuple of wrong length")
                if tuple(sorted(ta)) != ta or tuple(sorted(tb)) != tb:
                    raise ValueError("kernel tuples must be sorted")
                if any(not 0 <= i < self.dim for i in ta + tb):
                    raise ValueError("index out of range")
                if _is_exact(val):
                    v = _exact(val)
                    if not v.is_zero():
                        store[(ta, tb)] = v
                elif val != 0:
                    store[(ta, tb)] = complex(val)
        self.data = store

    @classmethod
    def rank_one(cls, h: Sequence[Value], m: int, n: int) -> "ComplexKernel":
        """h^(x m) (x) conj(h)^(x n) for a coefficient vector h."""
        dim = len(h)
        exact = _values_exact(h)
        vals = [(_exact(x) if exact else complex(x)) for x in h]
        conj = [(v.conjugate() if exact else v.conjugate()) for v in vals]
        data = {}
        for ta in combinations_with_replacement(range(dim), m):
            pa = _exact(1) if exact else 1 + 0j
            for i in ta:
                pa = pa * vals[i]
            for tb in combinations_with_replacement(range(dim), n):
                pb = pa
                for j in tb:
                    pb = pb * conj[j]
                data[(ta, tb)] = pb
        return cls(m, n, dim, data)

    def is_exact(self) -> bool:
        return _values_exact(self.data.values())

    def conjugate_kernel(self) -> "ComplexKernel":
        """Kernel psi with conj of this kernel's integral = integral of psi.

        Swap the two blocks and conjugate coefficients; the result has
        bidegree (n, m).
        """
        exact = self.is_exact()
        data = {}
        for (ta, tb), val in self.data.items():
            data[(tb, ta)] = _exact(val).conjugate() if exact else complex(val).conjugate()
        return ComplexKernel(self.n, self.m, self.dim, data)

    def norm_sq(self):
        """Squared norm in the full (m+n)-fold tensor power, multinomial weights."""
        exact = self.is_exact()
        total = ZERO if exact else 0.0
        for (ta, tb), v in self.data.items():
            w = multiplicity_factor(ta) * multiplicity_factor(tb)
            if exact:
                ve = _exact(v)
                total = total + EC(w) * ve * ve.conjugate()
            else:
                total = total + w * abs(complex(v)) ** 2
        return total

    def __rmul__(self, scalar):
        if _is_exact(scalar) and self.is_exact():
            c = _exact(scalar)
            return ComplexKernel(self.m, self.n, self.dim,
                                 {k: c * v for k, v in self.data.items()})
        c = complex(scalar)
        return ComplexKernel(self.m, self.n, self.dim,
                             {k: c * (v.to_complex() if isinstance(v, ExactComplex) else v)
                              for k, v in self.data.items()})

    __mul__ = __rmul__

    def __repr__(self):
        return (f"ComplexKernel(m={self.m}, n={self.n}, dim={self.dim}, "
                f"nnz={len(self.data)})")


def kernel_inner(f: ComplexKernel, g: ComplexKernel):
    """Hermitian inner product <f, g>, conjugate-linear in g."""
    if (f.m, f.n, f.dim) != (g.m, g.n, g.dim):
        raise ValueError("shape mismatch")
    exact = f.is_exact() and g.is_exact()
    total = ZERO if exact else 0.0
    for key, v in f.data.items():
        w = g.data.get(key)
        if w is None:
            continue
        mult = multiplicity_factor(key[0]) * multiplicity_factor(key[1])
        if exact:
            total = total + EC(mult) * _exact(v) * _exact(w).conjugate()
        else:
            va = v.to_complex() if isinstance(v, ExactComplex) else complex(v)
            wa = w.to_complex() if isinstance(w, ExactComplex) else complex(w)
            total = total + mult * va * wa.conjugate()
    return total


# -- serialization -----------------------------------------------------------------


def _value_str(v) -> str:
    if isinstance(v, ExactComplex):
        if not v.is_rational():
            return repr(_as_float(v))
        f = v.as_fraction()
        return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    return repr(v)


def _parse_value(s: str):
    if "/" in s:
        return Fraction(s)
    try:
        return int(s)
    except ValueError:
        return float(s)


def dump_sym_tensor(t: SymTensor) -> str:
    lines = [f"{t.order} {t.dim}"]
    for key in sorted(t.data):
        lines.append(" ".join(str(i) for i in key) + " " + _value_str(t.data[key]))
    return "\n".join(lines) + "\n"


def load_sym_tensor(text: str) -> SymTensor:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty tensor text")
    order, dim = (int(x) for x in lines[0].split())
    data = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != order + 1:
            raise ValueError(f"bad tensor line: {ln!r}")
        key = tuple(int(x) for x in parts[:order])
        data[key] = _parse_value(parts[order])
    return SymTensor(order, dim, data)


def dump_kernel(k: ComplexKernel) -> str:
    lines = [f"{k.m} {k.n} {k.dim}"]
    for (ta, tb) in sorted(k.data):
        v = k.data[(ta, tb)]
        if isinstance(v, ExactComplex):
            re, im = v.real(), (v * EC(0, -1)).real()
            re_s, im_s = _value_str(re), _value_str(im)
        else:
            re_s, im_s = repr(complex(v).real), repr(complex(v).imag)
        idx = " ".join(str(i) for i in ta + tb)
        lines.append((idx + " " if idx else "") + f"{re_s} {im_s}")
    return "\n".join(lines) + "\n"


def load_kernel(text: str) -> ComplexKernel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty kernel text")
    m, n, dim = (int(x) for x in lines[0].split())
    data = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != m + n + 2:
            raise ValueError(f"bad kernel line: {ln!r}")
        ta = tuple(int(x) for x in parts[:m])
        tb = tuple(int(x) for x in parts[m:m + n])
        re, im = _parse_value(parts[-2]), _parse_value(parts[-1])
        if isinstance(re, float) or isinstance(im, float):
            data[(ta, tb)] = complex(re, im)
        else:
            data[(ta, tb)] = ExactComplex(Fraction(re), Fraction(im))
    return ComplexKernel(m, n, dim, data)
