"""Finite-dimensional Gaussian chaos: sampling, evaluation, decomposition.

A draw of the underlying randomness is a pair of i.i.d. standard normal
vectors (xi, eta) of length D.  Real integrands are symmetric tensors over
the 2D coordinates (xi first, then eta); complex integrands are bidegree
(m, n) kernels over the D complex coordinates zeta_k = xi_k + i eta_k.

Evaluation rules (validated against the Wick oracle, never trusted bare):

    real:     I_p(f)     = sum_t (p!/t!) f[t] prod_k H_{t_k}(w_k)
    complex:  I_{m,n}(f) = sum_(a,b) (m!/a!)(n!/b!) f[a,b]
                            prod_k 2^(-(a_k+b_k)/2) J_{a_k,b_k}(zeta_k)

Sampling is counter-based (Philox keyed by the seed, counter derived from
the sample index), so batches are reproducible and independent of how work
is chunked across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np
from scipy.special import ndtri

from .convert import conversion_tables
from .exact import EC, ExactComplex, ZERO, half_power
from .hermite import BiPoly, complex_hermite, hermite_coeffs
from .tensor import ComplexKernel, SymTensor, multiplicity_factor
from .wick import GaussianFamily, GaussPoly, expect

ChaosElementT = Union[SymTensor, ComplexKernel]


# -- sampling ---------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianSample:
    """One draw of the D-dimensional process pair: xi for X, eta for Y."""

    xi: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        if self.xi.shape != self.eta.shape:
            raise ValueError("xi and eta must have equal length")

    @property
    def dim(self) -> int:
        return self.xi.shape[0]

    @property
    def zeta(self) -> np.ndarray:
        return self.xi + 1j * self.eta


class SampleBatch:
    """N samples held as (N, D) arrays, indexable into GaussianSample views."""

    __slots__ = ("xi", "eta")

    def __init__(self, xi: np.ndarray, eta: np.ndarray):
        if xi.shape != eta.shape or xi.ndim != 2:
            raise ValueError("xi and eta must be equal (N, D) arrays")
        self.xi = xi
        self.eta = eta

    @property
    def dim(self) -> int:
        return self.xi.shape[1]

    @property
    def zeta(self) -> np.ndarray:
        return self.xi + 1j * self.eta

    def __len__(self) -> int:
        return self.xi.shape[0]

    def __getitem__(self, i: int) -> GaussianSample:
        return GaussianSample(self.xi[i], self.eta[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def sample_batch(D: int, N: int, seed: int, start: int = 0) -> SampleBatch:
    """Samples ``start .. start + N - 1`` of the stream keyed by ``seed``.

    The generator is counter-based: sample i always consumes the same
    Philox blocks no matter how the index range is chunked, so
    ``sample_batch(D, N, s)`` equals the concatenation of any partition of
    the range.  Normals come from the inverse normal CDF applied to
    53-bit uniforms.
    """
    if D < 1 or N < 1 or start < 0:
        raise ValueError("need D >= 1, N >= 1, start >= 0")
    per_sample = 2 * D
    blocks = (per_sample + 3) // 4  # Philox yields 4 uint64 words per block
    bg = np.random.Philox(key=int(seed) & ((1 << 128) - 1), counter=start * blocks)
    raw = bg.random_raw(4 * blocks * N).reshape(N, 4 * blocks)[:, :per_sample]
    u = (raw >> np.uint64(11)) * (2.0 ** -53) + 2.0 ** -54
    normals = ndtri(u)
    return SampleBatch(normals[:, :D], normals[:, D:])


def _as_batch(s) -> Tuple[SampleBatch, bool]:
    if isinstance(s, SampleBatch):
        return s, False
    if isinstance(s, GaussianSample):
        return SampleBatch(s.xi[None, :], s.eta[None, :]), True
    raise TypeError("expected a GaussianSample or SampleBatch")


# -- pathwise evaluation -------------------------------------------------------------


class _HermiteCache:
    """Per-coordinate probabilists' Hermite values He_j(w), grown on demand."""

    def __init__(self, w: np.ndarray):
        self.w = w
        self.tables: Dict[int, List[np.ndarray]] = {}

    def value(self, coord: int, degree: int) -> np.ndarray:
        tab = self.tables.setdefault(coord, [np.ones_like(self.w[:, coord])])
        x = self.w[:, coord]
        while len(tab) <= degree:
            j = len(tab) - 1
            if j == 0:
                tab.append(x.copy())
            else:
                tab.append(x * tab[j] - j * tab[j - 1])
        return tab[degree]


def eval_real(f: SymTensor, s):
    """Pathwise value of the order-p integral of a symmetric tensor.

    The tensor lives over 2D coordinates: slots 0..D-1 are xi, D..2D-1 eta.
    """
    batch, single = _as_batch(s)
    if f.dim != 2 * batch.dim:
        raise ValueError(f"tensor dim {f.dim} != 2 x sample dim {batch.dim}")
    w = np.hstack([batch.xi, batch.eta])
    cache = _HermiteCache(w)
    out = np.zeros(len(batch))
    for key, val in f.data.items():
        term = np.full(len(batch), float(multiplicity_factor(key)))
        coord = None
        run = 0
        for i in list(key) + [None]:
            if i == coord:
                run += 1
                continue
            if coord is not None:
                term = term * cache.value(coord, run)
            coord, run = i, 1
        v = val.to_complex().real if isinstance(val, ExactComplex) else float(val)
        out += v * term
    return float(out[0]) if single else out


@lru_cache(maxsize=None)
def _j_poly(a: int, b: int) -> BiPoly:
    return complex_hermite(a, b)


def eval_complex(phi: ComplexKernel, s):
    """Pathwise value of the bidegree-(m, n) integral of a complex kernel."""
    batch, single = _as_batch(s)
    if phi.dim != batch.dim:
        raise ValueError(f"kernel dim {phi.dim} != sample dim {batch.dim}")
    zeta = batch.zeta
    scale = 2.0 ** (-(phi.m + phi.n) / 2)
    jcache: Dict[Tuple[int, int, int], np.ndarray] = {}

    def jval(coord: int, a: int, b: int) -> np.ndarray:
        key = (coord, a, b)
        got = jcache.get(key)
        if got is None:
            got = jcache[key] = _j_poly(a, b)(zeta[:, coord])
        return got

    out = np.zeros(len(batch), dtype=np.complex128)
    for (ta, tb), val in phi.data.items():
        mult = multiplicity_factor(ta) * multiplicity_factor(tb)
        a_counts: Dict[int, int] = {}
        for i in ta:
            a_counts[i] = a_counts.get(i, 0) + 1
        b_counts: Dict[int, int] = {}
        for j in tb:
            b_counts[j] = b_counts.get(j, 0) + 1
        term = np.ones(len(batch), dtype=np.complex128)
        for k in sorted(set(a_counts) | set(b_counts)):
            term = term * jval(k, a_counts.get(k, 0), b_counts.get(k, 0))
        v = val.to_complex() if isinstance(val, ExactComplex) else complex(val)
        out += (mult * scale) * v * term
    return complex(out[0]) if single else out


# -- real-pair decomposition ----------------------------------------------------------


@lru_cache(maxsize=None)
def _c2r_table(degree: int):
    return conversion_tables(degree)[0]


def decompose(phi: ComplexKernel) -> Tuple[SymTensor, SymTensor]:
    """Real tensors (u, v) with I_{m,n}(phi) = I_{m+n}(u) + i I_{m+n}(v) pathwise.

    Pipeline: expand the kernel in the complex product basis, rewrite each
    per-coordinate complex Hermite factor in the real Hermite-product basis
    (exact conversion table), distribute across coordinates, and read the
    resulting real Fourier-Hermite coefficients back as a tensor over the
    2D coordinates.  Exact kernels give exact tensors (coefficients may
    carry a factor sqrt(2) when m + n is odd).

    When m != n the two tensors are exactly orthogonal with equal norms.
    """
    if not phi.is_exact():
        raise ValueError("decompose needs an exact kernel")
    D = phi.dim
    P = phi.m + phi.n
    beta: Dict[Tuple[int, ...], ExactComplex] = {}
    for (ta, tb), val in phi.data.items():
        a_counts: Dict[int, int] = {}
        for i in ta:
            a_counts[i] = a_counts.get(i, 0) + 1
        b_counts: Dict[int, int] = {}
        for j in tb:
            b_counts[j] = b_counts.get(j, 0) + 1
        support = sorted(set(a_counts) | set(b_counts))
        base = EC(multiplicity_factor(ta) * multiplicity_factor(tb)) \
            * ExactComplex.coerce(val) * half_power(P)
        combos: List[Tuple[Dict[int, Tuple[int, int]], ExactComplex]] = [({}, base)]
        for k in support:
            a = a_counts.get(k, 0)
            b = b_counts.get(k, 0)
            l = a + b
            table = _c2r_table(l)
            new_combos = []
            for assign, cf in combos:
                for j in range(l + 1):
                    cj = table.coefficient(a, j)
                    if cj.is_zero():
                        continue
                    nxt = dict(assign)
                    nxt[k] = (j, l - j)
                    new_combos.append((nxt, cf * cj))
            combos = new_combos
        for assign, cf in combos:
            mvec = [0] * (2 * D)
            for k, (j, lj) in assign.items():
                mvec[k] = j
                mvec[D + k] = lj
            key = tuple(mvec)
            cur = beta.get(key, ZERO) + cf
            if cur.is_zero():
                beta.pop(key, None)
            else:
                beta[key] = cur
    u_data: Dict[Tuple[int, ...], ExactComplex] = {}
    v_data: Dict[Tuple[int, ...], ExactComplex] = {}
    for mvec, cf in beta.items():
        t = tuple(i for i, m in enumerate(mvec) for _ in range(m))
        w = EC(Fraction(1, multiplicity_factor(t)))
        scaled = cf * w
        re, im = scaled.real(), scaled.imag()
        if not re.is_zero():
            u_data[t] = re
        if not im.is_zero():
            v_data[t] = im
    return (SymTensor(P, 2 * D, u_data), SymTensor(P, 2 * D, v_data))


# -- exact moments ------------------------------------------------------------------


def real_element_poly(f: SymTensor) -> GaussPoly:
    """The order-p integral of f as an exact polynomial in f.dim coordinates."""
    if not f.is_exact():
        raise ValueError("exact path needs exact tensor values")
    dim = f.dim
    out = GaussPoly(dim)
    for key, val in f.data.items():
        term = GaussPoly.constant(dim, EC(multiplicity_factor(key)) * ExactComplex.coerce(val))
        coord = None
        run = 0
        for i in list(key) + [None]:
            if i == coord:
                run += 1
                continue
            if coord is not None:
                term = term * _hermite_gauss_poly(dim, coord, run)
            coord, run = i, 1
        out = out + term
    return out


def _hermite_gauss_poly(dim: int, coord: int, degree: int) -> GaussPoly:
    terms = {}
    for k, c in enumerate(hermite_coeffs(degree)):
        if c:
            exps = [0] * dim
            exps[coord] = k
            terms[tuple(exps)] = c
    return GaussPoly(dim, terms)


def complex_element_poly(phi: ComplexKernel) -> GaussPoly:
    """The bidegree-(m, n) integral of phi as an exact polynomial over 2D coords."""
    if not phi.is_exact():
        raise ValueError("exact path needs exact kernel values")
    D = phi.dim
    dim = 2 * D
    out = GaussPoly(dim)
    scale = half_power(phi.m + phi.n)
    for (ta, tb), val in phi.data.items():
        a_counts: Dict[int, int] = {}
        for i in ta:
            a_counts[i] = a_counts.get(i, 0) + 1
        b_counts: Dict[int, int] = {}
        for j in tb:
            b_counts[j] = b_counts.get(j, 0) + 1
        coeff = EC(multiplicity_factor(ta) * multiplicity_factor(tb)) \
            * ExactComplex.coerce(val) * scale
        term = GaussPoly.constant(dim, coeff)
        for k in sorted(set(a_counts) | set(b_counts)):
            p = _j_poly(a_counts.get(k, 0), b_counts.get(k, 0))
            sub = {}
            for (i, j), c in p.to_xy().items():
                exps = [0] * dim
                exps[k] = i
                exps[D + k] = j
                key = tuple(exps)
                sub[key] = sub.get(key, ZERO) + c
            term = term * GaussPoly(dim, sub)
        out = out + term
    return out


def element_poly(elem: ChaosElementT, conj: bool = False) -> GaussPoly:
    if isinstance(elem, SymTensor):
        poly = real_element_poly(elem)
    elif isinstance(elem, ComplexKernel):
        poly = complex_element_poly(elem)
    else:
        raise TypeError(f"not a chaos element: {type(elem).__name__}")
    return poly.conj() if conj else poly


def _top_degree(elem: ChaosElementT) -> int:
    if isinstance(elem, SymTensor):
        return elem.order
    return elem.m + elem.n


WICK_DEGREE_BUDGET = 16


def exact_moment(factors: Iterable, budget: int = WICK_DEGREE_BUDGET) -> ExactComplex:
    """Exact expectation of a product of chaos elements and conjugates.

    Each factor is a SymTensor, a ComplexKernel, or an (element, conj: bool)
    pair.  The total Gaussian degree of the product must not exceed the
    Wick budget (default 16).
    """
    normalized: List[Tuple[ChaosElementT, bool]] = []
    for f in factors:
        if isinstance(f, tuple):
            elem, conj = f
            normalized.append((elem, bool(conj)))
        else:
            normalized.append((f, False))
    if not normalized:
        raise ValueError("need at least one factor")
    total_degree = sum(_top_degree(e) for e, _ in normalized)
    if total_degree > budget:
        raise ValueError(
            f"total Gaussian degree {total_degree} exceeds the budget {budget}")
    polys = [element_poly(e, conj) for e, conj in normalized]
    dims = {p.dim for p in polys}
    if len(dims) != 1:
        raise ValueError(f"factors live over different coordinate counts: {dims}")
    # balanced multiplication keeps intermediate term counts small
    polys.sort(key=lambda p: len(p.terms()))
    while len(polys) > 1:
        polys.sort(key=lambda p: len(p.terms()))
        a = polys.pop(0)
        b = polys.pop(0)
        polys.append(a * b)
    product = polys[0]
    fam = GaussianFamily.standard(product.dim)
    return expect(fam, product)
