"""Batched adaptive Gauss-Kronrod quadrature.

Many independent one-dimensional integrals (one per "owner") are refined
together so that every integrand call is a single vectorized numpy
evaluation over all active nodes.  The local rule is the 21-point Kronrod
extension of 10-point Gauss-Legendre with the QUADPACK error heuristic.
"""

from __future__ import annotations

import numpy as np

from casimir_graphene.core import QuadratureError

# Kronrod abscissae on [0, 1]; odd positions are the Gauss points
_XK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

NODES = np.concatenate([-_XK[:-1], [0.0], _XK[:-1][::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], [_WK[-1]], _WK[:-1][::-1]])
GAUSS_WEIGHTS = np.zeros(21)
GAUSS_WEIGHTS[1:10:2] = _WG
GAUSS_WEIGHTS[11:20:2] = _WG[::-1]

_EPS = np.finfo(float).eps
#: intervals evaluated per integrand call, bounds the size of temporaries
CHUNK = 4096


def _apply_rule(func, lo, hi, owner, ncomp):
    if lo.size > CHUNK:
        parts = [_apply_rule(func, lo[i:i + CHUNK], hi[i:i + CHUNK], owner[i:i + CHUNK], ncomp)
                 for i in range(0, lo.size, CHUNK)]
        return tuple(np.concatenate([p[j] for p in parts], axis=1) for j in range(3))
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * NODES[None, :]
    own = np.repeat(owner, NODES.size)
    fx = np.asarray(func(x.ravel(), own), dtype=float).reshape(ncomp, lo.size, NODES.size)
    kron = (fx @ KRONROD_WEIGHTS) * half
    gauss = (fx @ GAUSS_WEIGHTS) * half
    absval = (np.abs(fx) @ KRONROD_WEIGHTS) * np.abs(half)
    mean = kron / np.where(half != 0, 2.0 * half, 1.0)
    resasc = (np.abs(fx - mean[..., None]) @ KRONROD_WEIGHTS) * np.abs(half)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    err = np.maximum(err, 50.0 * _EPS * absval)
    return kron, err, absval


def integrate(func, lo, hi, owner, n_owners, *, ncomp=1, rtol=1e-10, atol=0.0,
              max_rounds=60, strict=True, stats=None, max_intervals=1_000_000):
    """Integrate ``func`` over a union of intervals per owner.

    Parameters
    ----------
    func : callable
        ``func(x, owner)`` with 1-D arrays of nodes and their owner index,
        returning an array of shape ``(ncomp, x.size)``.
    lo, hi : array_like
        Interval endpoints.  Several intervals may share an owner; their
        contributions are added.
    owner : array_like of int
        Owner index of each interval, in ``range(n_owners)``.
    rtol : float
        Relative tolerance against the integral of ``|f|`` of each owner,
        which stays meaningful for sign-changing integrands.
    strict : bool
        Raise :class:`QuadratureError` when ``max_rounds`` is exhausted;
        otherwise return the best estimate.
    max_intervals : int
        Refinement stops once this many intervals are live, which bounds
        memory for integrands that never settle.
    stats : dict, optional
        Receives ``"intervals"``, the final number of intervals.

    Returns
    -------
    value, error : ndarray
        Arrays of shape ``(ncomp, n_owners)``.
    """
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    owner = np.asarray(owner, dtype=np.intp).ravel()

    st_lo = np.empty(0)
    st_hi = np.empty(0)
    st_own = np.empty(0, dtype=np.intp)
    st_val = np.empty((ncomp, 0))
    st_err = np.empty((ncomp, 0))
    st_abs = np.empty((ncomp, 0))

    pend_lo, pend_hi, pend_own = lo, hi, owner
    for _ in range(max_rounds):
        if pend_lo.size:
            v, e, a = _apply_rule(func, pend_lo, pend_hi, pend_own, ncomp)
            st_lo = np.concatenate([st_lo, pend_lo])
            st_hi = np.concatenate([st_hi, pend_hi])
            st_own = np.concatenate([st_own, pend_own])
            st_val = np.concatenate([st_val, v], axis=1)
            st_err = np.concatenate([st_err, e], axis=1)
            st_abs = np.concatenate([st_abs, a], axis=1)

        val = np.stack([np.bincount(st_own, st_val[c], n_owners) for c in range(ncomp)])
        err = np.stack([np.bincount(st_own, st_err[c], n_owners) for c in range(ncomp)])
        ab = np.stack([np.bincount(st_own, st_abs[c], n_owners) for c in range(ncomp)])
        tol = rtol * ab + atol
        bad_owner = np.any(err > tol, axis=0)
        if stats is not None:
            stats["intervals"] = int(st_own.size)
        if not bad_owner.any():
            return val, err

        count = np.bincount(st_own, minlength=n_owners)
        share = tol[:, st_own] / count[st_own]
        split = bad_owner[st_own] & np.any(st_err > share, axis=0)
        # intervals already at the resolution limit cannot be refined
        width = st_hi - st_lo
        split &= np.abs(width) > 64 * _EPS * np.maximum(np.abs(st_lo), np.abs(st_hi))
        if not split.any() or st_own.size + split.sum() > max_intervals:
            break
        mid = 0.5 * (st_lo[split] + st_hi[split])
        pend_lo = np.concatenate([st_lo[split], mid])
        pend_hi = np.concatenate([mid, st_hi[split]])
        pend_own = np.concatenate([st_own[split], st_own[split]])
        keep = ~split
        st_lo, st_hi, st_own = st_lo[keep], st_hi[keep], st_own[keep]
        st_val, st_err, st_abs = st_val[:, keep], st_err[:, keep], st_abs[:, keep]

    with np.errstate(divide="ignore", invalid="ignore"):
        resid = np.where(ab > 0, err / ab, 0.0)
    worst = float(np.nanmax(resid))
    if worst <= rtol or not strict:
        return val, err
    raise QuadratureError("adaptive quadrature did not converge", worst)
