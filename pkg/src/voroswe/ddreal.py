"""Vectorized double-double arithmetic on numpy arrays.

A double-double number is an unevaluated sum hi + lo of two float64 with
|lo| <= 0.5 ulp(hi), giving ~31 significant decimal digits.  All kernels in
this package are generic over the scalar type: plain float64 ndarrays or the
`DD` pairs defined here.  Error-free transformations use Dekker splitting
(numpy has no fma ufunc).
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLITTER * a
    big = c - a
    hi = c - big
    return hi, a - hi


def two_sum(a, b):
    """s + err == a + b exactly."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    """Requires |a| >= |b|; s + err == a + b exactly."""
    s = a + b
    err = b - (s - a)
    return s, err


def two_prod(a, b):
    """p + err == a * b exactly."""
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


class DD:
    """Array of double-double values, stored as parallel (hi, lo) float64 arrays."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        self.hi = np.asarray(hi, dtype=np.float64)
        if lo is None:
            self.lo = np.zeros_like(self.hi)
        else:
            self.lo = np.asarray(lo, dtype=np.float64)

    # -- container plumbing -------------------------------------------------
    @property
    def shape(self):
        return self.hi.shape

    @property
    def ndim(self):
        return self.hi.ndim

    @property
    def size(self):
        return self.hi.size

    def __len__(self):
        return len(self.hi)

    def __getitem__(self, idx):
        return DD(self.hi[idx], self.lo[idx])

    def __setitem__(self, idx, value):
        value = asdd(value)
        self.hi[idx] = value.hi
        self.lo[idx] = value.lo

    def copy(self):
        return DD(self.hi.copy(), self.lo.copy())

    def reshape(self, *shape):
        return DD(self.hi.reshape(*shape), self.lo.reshape(*shape))

    def ravel(self):
        return DD(self.hi.ravel(), self.lo.ravel())

    def astype_float(self):
        return self.hi + self.lo

    def __repr__(self):
        return f"DD(hi={self.hi!r}, lo={self.lo!r})"

    # -- arithmetic ----------------------------------------------------------
    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __add__(self, other):
        if isinstance(other, DD):
            s, e = two_sum(self.hi, other.hi)
            t, f = two_sum(self.lo, other.lo)
            e = e + t
            s, e = quick_two_sum(s, e)
            e = e + f
            return DD(*quick_two_sum(s, e))
        s, e = two_sum(self.hi, other)
        e = e + self.lo
        return DD(*quick_two_sum(s, e))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DD):
            return self.__add__(DD(-other.hi, -other.lo))
        return self.__add__(-np.asarray(other, dtype=np.float64))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, DD):
            p, e = two_prod(self.hi, other.hi)
            e = e + (self.hi * other.lo + self.lo * other.hi)
            return DD(*quick_two_sum(p, e))
        p, e = two_prod(self.hi, other)
        e = e + self.lo * other
        return DD(*quick_two_sum(p, e))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = asdd(other)
        q1 = self.hi / other.hi
        r = self - other * q1
        q2 = r.hi / other.hi
        r = r - other * q2
        q3 = r.hi / other.hi
        return (DD(q1) + q2) + q3

    def __rtruediv__(self, other):
        return asdd(other).__truediv__(self)

    def __abs__(self):
        neg = self.hi < 0
        return DD(np.where(neg, -self.hi, self.hi), np.where(neg, -self.lo, self.lo))

    # -- comparisons (hi first, lo as tiebreak) -------------------------------
    def __lt__(self, other):
        other = asdd(other)
        return (self.hi < other.hi) | ((self.hi == other.hi) & (self.lo < other.lo))

    def __gt__(self, other):
        other = asdd(other)
        return (self.hi > other.hi) | ((self.hi == other.hi) & (self.lo > other.lo))

    def __le__(self, other):
        return ~self.__gt__(other)

    def __ge__(self, other):
        return ~self.__lt__(other)


def asdd(x):
    if isinstance(x, DD):
        return x
    return DD(np.asarray(x, dtype=np.float64))


def is_dd(x):
    return isinstance(x, DD)


def tofloat(x):
    """Collapse to plain float64 (exact rounding of hi + lo)."""
    if isinstance(x, DD):
        return x.hi + x.lo
    return np.asarray(x, dtype=np.float64)


def zeros(shape, dd=False):
    if dd:
        return DD(np.zeros(shape), np.zeros(shape))
    return np.zeros(shape)


def zeros_like(x):
    if isinstance(x, DD):
        return DD(np.zeros_like(x.hi), np.zeros_like(x.lo))
    return np.zeros_like(x)


def where(cond, a, b):
    if isinstance(a, DD) or isinstance(b, DD):
        a, b = asdd(a), asdd(b)
        ah, bh = np.broadcast_arrays(a.hi, b.hi)
        al, bl = np.broadcast_arrays(a.lo, b.lo)
        return DD(np.where(cond, ah, bh), np.where(cond, al, bl))
    return np.where(cond, a, b)


def sqrt(x):
    """Elementwise square root (Karp/Newton refinement for DD)."""
    if not isinstance(x, DD):
        return np.sqrt(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = 1.0 / np.sqrt(x.hi)
    y = x.hi * r
    y_dd = DD(y)
    corr = (x - y_dd * y_dd).hi * (r * 0.5)
    out = y_dd + corr
    # exact zeros stay zero instead of propagating the 1/0 above
    zero = x.hi == 0.0
    if np.any(zero):
        out = where(zero, DD(np.zeros_like(x.hi)), out)
    return out


def powi(x, n):
    """Integer power by repeated multiplication (n >= 1)."""
    out = x
    for _ in range(n - 1):
        out = out * x
    return out


def tree_sum(x):
    """Deterministic pairwise sum of a flat array; returns a scalar-shaped value."""
    if not isinstance(x, DD):
        x = np.asarray(x, dtype=np.float64).ravel()
        return _tree_sum_f64(x)
    hi, lo = x.hi.ravel().copy(), x.lo.ravel().copy()
    cur = DD(hi, lo)
    n = cur.size
    while n > 1:
        m = n // 2
        head = cur[: 2 * m]
        folded = head[0::2] + head[1::2]
        if n % 2:
            tail = cur[n - 1 : n]
            folded = DD(
                np.concatenate([folded.hi, tail.hi]),
                np.concatenate([folded.lo, tail.lo]),
            )
        cur = folded
        n = cur.size
    return cur[0]


def _tree_sum_f64(x):
    n = x.size
    while n > 1:
        m = n // 2
        y = x[0 : 2 * m : 2] + x[1 : 2 * m : 2]
        if n % 2:
            y = np.concatenate([y, x[n - 1 : n]])
        x = y
        n = x.size
    return x[0] if n == 1 else 0.0


def sum_axis(x, axis=-1):
    """Deterministic pairwise sum along one axis (small axes: sequential fold)."""
    if not isinstance(x, DD):
        return _pairwise_f64(np.asarray(x), axis)
    if axis != -1 and axis != x.ndim - 1:
        raise ValueError("sum_axis supports the last axis only")
    n = x.shape[-1]
    out = x[..., 0]
    for j in range(1, n):
        out = out + x[..., j]
    return out


def _pairwise_f64(x, axis):
    return np.add.reduce(x, axis=axis)


def dot(a, b):
    """Inner product of flat vectors, deterministic."""
    if isinstance(a, DD) or isinstance(b, DD):
        return tree_sum(asdd(a) * asdd(b))
    return _tree_sum_f64(np.asarray(a).ravel() * np.asarray(b).ravel())


def norm2(x):
    return sqrt(dot(x, x))


def concat(parts):
    if any(isinstance(p, DD) for p in parts):
        parts = [asdd(p) for p in parts]
        return DD(
            np.concatenate([p.hi for p in parts]),
            np.concatenate([p.lo for p in parts]),
        )
    return np.concatenate(parts)


def stack_last(parts):
    """Stack along a new trailing axis."""
    if any(isinstance(p, DD) for p in parts):
        parts = [asdd(p) for p in parts]
        return DD(
            np.stack([p.hi for p in parts], axis=-1),
            np.stack([p.lo for p in parts], axis=-1),
        )
    return np.stack(parts, axis=-1)


def max_abs(x):
    """max |x| as a plain float (hi-level accuracy is enough for diagnostics)."""
    if isinstance(x, DD):
        return float(np.max(np.abs(x.hi + x.lo))) if x.size else 0.0
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def isfinite_all(x):
    if isinstance(x, DD):
        return bool(np.all(np.isfinite(x.hi)) and np.all(np.isfinite(x.lo)))
    return bool(np.all(np.isfinite(x)))


# -- batched small contractions with float64 coefficient tables ---------------

def bmatvec(A, x):
    """Batched matvec: A (..., k, l) float64, x (..., l) float64 or DD -> (..., k).

    The float64 path uses einsum; the DD path loops over the small trailing
    dims with error-free products so the result is DD-accurate.
    """
    if not isinstance(x, DD):
        return np.einsum("...kl,...l->...k", A, x)
    k, l = A.shape[-2], A.shape[-1]
    out_hi = np.zeros(np.broadcast_shapes(A.shape[:-2], x.shape[:-1]) + (k,))
    out = DD(out_hi)
    for kk in range(k):
        acc = _f64_times_dd(A[..., kk, 0], x[..., 0])
        for ll in range(1, l):
            acc = acc + _f64_times_dd(A[..., kk, ll], x[..., ll])
        out.hi[..., kk] = acc.hi
        out.lo[..., kk] = acc.lo
    return out


def _f64_times_dd(f, x):
    p, e = two_prod(f, x.hi)
    e = e + f * x.lo
    return DD(*quick_two_sum(p, e))


def f64_times(f, x):
    """f float64 array/scalar times x (float64 or DD), exact in DD mode."""
    if isinstance(x, DD):
        return _f64_times_dd(np.asarray(f, dtype=np.float64), x)
    return f * x


def contract_Gq(G, eta):
    """G (p, k, r, c) float64 times eta (p, r) -> (p, k, c)."""
    if not isinstance(eta, DD):
        return np.einsum("pkrc,pr->pkc", G, eta)
    p, k, r, c = G.shape
    out = DD(np.zeros((p, k, c)))
    for kk in range(k):
        for cc in range(c):
            acc = _f64_times_dd(G[:, kk, 0, cc], eta[:, 0])
            for rr in range(1, r):
                acc = acc + _f64_times_dd(G[:, kk, rr, cc], eta[:, rr])
            out.hi[:, kk, cc] = acc.hi
            out.lo[:, kk, cc] = acc.lo
    return out


def contract_Dq(D, q):
    """D (p, k, l, c) float64 times q (p, l, c) -> (p, k)."""
    if not isinstance(q, DD):
        return np.einsum("pklc,plc->pk", D, q)
    p, k, l, c = D.shape
    out = DD(np.zeros((p, k)))
    for kk in range(k):
        acc = None
        for ll in range(l):
            for cc in range(c):
                term = _f64_times_dd(D[:, kk, ll, cc], q[:, ll, cc])
                acc = term if acc is None else acc + term
        out.hi[:, kk] = acc.hi
        out.lo[:, kk] = acc.lo
    return out


def gather_sum(x, idx, mask):
    """Padded gather-sum: sum x[idx[i, j]] over valid j for each row i.

    idx (n, kmax) int; mask (n, kmax) bool; x (m, ...) float64 or DD.
    Deterministic accumulation order (j ascending).
    """
    kmax = idx.shape[1]
    if not isinstance(x, DD):
        vals = x[idx]
        vals = vals * mask.reshape(mask.shape + (1,) * (x.ndim - 1))
        return np.add.reduce(vals, axis=1)
    fmask = mask.astype(np.float64).reshape(mask.shape + (1,) * (x.ndim - 1))
    acc = None
    for j in range(kmax):
        term = DD(x.hi[idx[:, j]] * fmask[:, j], x.lo[idx[:, j]] * fmask[:, j])
        acc = term if acc is None else acc + term
    return acc
