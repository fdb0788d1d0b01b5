"""RBM wavefunctions for spin-1 chains and their tensor-network form.

Three ansatz families live here:

* the spin-1/2 RBM used as the unary-encoding baseline,
* the generalized spin-1 RBM with quadratic visible bias A and quadratic
  interaction weights W,
* the coupling-matrix network: one 2x3 complex matrix per hidden-visible
  edge, whose per-hidden-unit correlator is the sum of the two row products.

Sign conventions (frozen): the spin-1/2 joint weight is exp(-E) with
E = -sum a v - sum b h - sum w h v; the spin-1 joint weight is exp(+E) with
E = sum a v + sum A v^2 + sum b h + sum w h v + sum W h v^2. Both trace out
to the same product-of-cosh amplitude form used below.

The flat parameter ordering is frozen for optimizer and file use:
spin-1 -> (a, A, b, w row-major, W row-major); spin-1/2 -> (a, b, w row-major).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .hilbert import VISIBLE_VALUES, Basis

# Unary one-hot cell patterns, rows indexed by local state, columns by cell
# position: state 0 -> (+1,+1,-1), state 1 -> (+1,-1,+1), state 2 -> (-1,+1,+1).
UNARY_PATTERNS = np.array([[1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]])

# Distinguished log-amplitude of an exactly-zero amplitude.
ZERO_LOG_AMP = complex(-np.inf, 0.0)


class CacheError(ValueError):
    """Hidden-activation cache does not match the configuration it claims."""


def values_to_indices(v: np.ndarray) -> np.ndarray:
    """Visible values (+1, 0, -1) -> local-state indices (0, 1, 2)."""
    v = np.asarray(v)
    idx = np.rint(1.0 - v).astype(np.int8)
    if idx.min(initial=0) < 0 or idx.max(initial=0) > 2:
        raise ValueError("visible values must be in {+1, 0, -1}")
    return idx


def log2cosh(z: np.ndarray) -> np.ndarray:
    """Overflow-safe log(2 cosh z) for complex z (imaginary part mod 2pi)."""
    z = np.asarray(z, dtype=np.complex128)
    zs = np.where(z.real >= 0, z, -z)
    return zs + np.log(1.0 + np.exp(-2.0 * zs))


def log2cosh_abs(z: np.ndarray) -> np.ndarray:
    """log|2 cosh z| via real transcendentals only (sampler hot path).

    |2 cosh(x+iy)|^2 = e^{2|x|} (1 + e^{-4|x|} + 2 e^{-2|x|} cos 2y).
    """
    x = np.abs(z.real)
    e = np.exp(-2.0 * x)
    arg = np.maximum(e * (e + 2.0 * np.cos(2.0 * z.imag)), -1.0)
    return x + 0.5 * np.log1p(arg)


# ---------------------------------------------------------------------------
# parameter containers


@dataclass
class Spin1RbmParams:
    """Generalized spin-1 RBM parameters Lambda = {a, A, b, w, W}."""

    a: np.ndarray  # (N,) linear visible bias
    A: np.ndarray  # (N,) quadratic visible bias
    b: np.ndarray  # (M,) hidden bias
    w: np.ndarray  # (M, N) linear weights
    W: np.ndarray  # (M, N) quadratic weights

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.complex128)
        self.A = np.asarray(self.A, dtype=np.complex128)
        self.b = np.asarray(self.b, dtype=np.complex128)
        n, m = self.a.shape[0], self.b.shape[0]
        self.w = np.asarray(self.w, dtype=np.complex128).reshape(m, n)
        self.W = np.asarray(self.W, dtype=np.complex128).reshape(m, n)
        if self.A.shape != (n,):
            raise ValueError("a and A must have equal length")
        for arr in (self.a, self.A, self.b, self.w, self.W):
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters must be finite")

    @property
    def n_sites(self) -> int:
        return self.a.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.b.shape[0]

    @property
    def n_params(self) -> int:
        return param_counts("spin1", self.n_sites, self.n_hidden)

    def copy(self) -> "Spin1RbmParams":
        return Spin1RbmParams(self.a.copy(), self.A.copy(), self.b.copy(),
                              self.w.copy(), self.W.copy())


@dataclass
class Spin12RbmParams:
    """Spin-1/2 RBM parameters lambda = {a, b, w} on Nv visible units."""

    a: np.ndarray  # (Nv,)
    b: np.ndarray  # (M,)
    w: np.ndarray  # (M, Nv)

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.complex128)
        self.b = np.asarray(self.b, dtype=np.complex128)
        self.w = np.asarray(self.w, dtype=np.complex128).reshape(self.b.shape[0],
                                                                 self.a.shape[0])
        for arr in (self.a, self.b, self.w):
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters must be finite")

    @property
    def n_visible(self) -> int:
        return self.a.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.b.shape[0]

    @property
    def n_params(self) -> int:
        return self.n_visible + self.n_hidden + self.n_visible * self.n_hidden

    def copy(self) -> "Spin12RbmParams":
        return Spin12RbmParams(self.a.copy(), self.b.copy(), self.w.copy())


def _ones_site_bias(n_sites: int) -> np.ndarray:
    return np.ones((n_sites, 3), dtype=np.complex128)


@dataclass
class CouplingNet:
    """Tensor-network form: M x N grid of 2x3 coupling matrices.

    ``mats[i, j]`` couples hidden unit i to site j; rows are indexed by
    h = +1, -1 and columns by the visible value (+1, 0, -1), i.e. by
    local-state index. ``site_bias[j, s]`` is a per-site diagonal factor.
    """

    mats: np.ndarray  # (M, N, 2, 3) complex
    site_bias: np.ndarray = field(default=None)  # (N, 3) complex

    def __post_init__(self):
        self.mats = np.asarray(self.mats, dtype=np.complex128)
        if self.mats.ndim != 4 or self.mats.shape[2:] != (2, 3):
            raise ValueError("mats must have shape (M, N, 2, 3)")
        if self.site_bias is None:
            self.site_bias = _ones_site_bias(self.mats.shape[1])
        self.site_bias = np.asarray(self.site_bias, dtype=np.complex128)
        if self.site_bias.shape != (self.mats.shape[1], 3):
            raise ValueError("site_bias must have shape (N, 3)")
        if not (np.all(np.isfinite(self.mats)) and np.all(np.isfinite(self.site_bias))):
            raise ValueError("coupling matrices must be finite")

    @property
    def n_sites(self) -> int:
        return self.mats.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.mats.shape[0]


@dataclass
class HiddenActivations:
    """Cached theta_i = b_i + sum_j w_ij v_j + sum_j W_ij v_j^2 for one config."""

    theta: np.ndarray
    linear: complex  # sum_j (a_j v_j + A_j v_j^2)
    v: np.ndarray  # configuration the cache was computed from


# ---------------------------------------------------------------------------
# spin-1 RBM amplitudes and derivatives


def hidden_activations(params: Spin1RbmParams, v: np.ndarray) -> HiddenActivations:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (params.n_sites,):
        raise ValueError("visible vector length mismatch")
    v2 = v * v
    theta = params.b + params.w @ v + params.W @ v2
    linear = complex(params.a @ v + params.A @ v2)
    return HiddenActivations(theta=theta, linear=linear, v=v.copy())


def log_amplitude_spin1(params: Spin1RbmParams, v: np.ndarray) -> complex:
    """log Psi = sum_j (a_j v_j + A_j v_j^2) + sum_i log 2cosh(theta_i)."""
    cache = hidden_activations(params, v)
    return cache.linear + complex(log2cosh(cache.theta).sum())


def spin1_log_amps(params: Spin1RbmParams, vmat: np.ndarray) -> np.ndarray:
    """Batch version of :func:`log_amplitude_spin1` over rows of (B, N) values."""
    vmat = np.asarray(vmat, dtype=np.float64)
    v2 = vmat * vmat
    theta = vmat @ params.w.T + v2 @ params.W.T + params.b
    return vmat @ params.a + v2 @ params.A + log2cosh(theta).sum(axis=1)


def log_amplitude_ratio_spin1(params: Spin1RbmParams, cache: HiddenActivations,
                              old_v: np.ndarray,
                              changes: list[tuple[int, float]]):
    """Incremental log-amplitude ratio for a few changed sites.

    Returns ``(log_ratio, new_cache)``; the ratio's imaginary part is defined
    modulo 2pi (exponentiate before comparing). Cost O(M * #changes).
    """
    old_v = np.asarray(old_v, dtype=np.float64)
    if not np.array_equal(cache.v, old_v):
        raise CacheError("hidden-activation cache does not match old_v")
    if not changes:
        return 0.0 + 0.0j, cache
    theta = cache.theta.copy()
    linear = cache.linear
    new_v = cache.v.copy()
    for site, value in changes:
        dv = value - new_v[site]
        dv2 = value * value - new_v[site] * new_v[site]
        theta = theta + params.w[:, site] * dv + params.W[:, site] * dv2
        linear = linear + params.a[site] * dv + params.A[site] * dv2
        new_v[site] = value
    ratio = (linear - cache.linear) + complex(
        (log2cosh(theta) - log2cosh(cache.theta)).sum())
    return ratio, HiddenActivations(theta=theta, linear=linear, v=new_v)


def log_derivatives_spin1(params: Spin1RbmParams, v: np.ndarray) -> np.ndarray:
    """d(log Psi)/d(params) in the frozen (a, A, b, w, W) ordering."""
    v = np.asarray(v, dtype=np.float64)
    cache = hidden_activations(params, v)
    t = np.tanh(cache.theta)
    v2 = v * v
    return np.concatenate([
        v.astype(np.complex128), v2.astype(np.complex128), t,
        np.outer(t, v).ravel(), np.outer(t, v2).ravel(),
    ])


def spin1_log_derivs(params: Spin1RbmParams, vmat: np.ndarray) -> np.ndarray:
    """Batch log-derivative matrix, shape (B, 2MN + 2N + M)."""
    vmat = np.asarray(vmat, dtype=np.float64)
    v2 = vmat * vmat
    theta = vmat @ params.w.T + v2 @ params.W.T + params.b
    t = np.tanh(theta)
    b = vmat.shape[0]
    return np.concatenate([
        vmat.astype(np.complex128), v2.astype(np.complex128), t,
        (t[:, :, None] * vmat[:, None, :]).reshape(b, -1),
        (t[:, :, None] * v2[:, None, :]).reshape(b, -1),
    ], axis=1)


def product_state_params(coeffs) -> Spin1RbmParams:
    """Hidden-unit-free parameters for a product state with nonzero coefficients.

    ``coeffs`` is a sequence of N triples (c_+, c_0, c_-). The resulting M = 0
    RBM satisfies exp(log_amplitude(v)) = prod_j c_{S_j} / prod_j c_0, i.e. the
    product-state amplitudes up to the single global constant prod_j c_0.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 2 or c.shape[1] != 3:
        raise ValueError("coeffs must be N triples (c_+, c_0, c_-)")
    if np.any(c == 0):
        raise ValueError("zero coefficient: use a coupling-net site bias "
                         "(or softened values) for states with exact zeros")
    # Linear bias carries the odd combination c_+/c_-, quadratic bias the even
    # one sqrt(c_+ c_-)/c_0; solving e^{a v + A v^2} prop c_v per site.
    a = 0.5 * (np.log(c[:, 0]) - np.log(c[:, 2]))
    A = 0.5 * (np.log(c[:, 0]) + np.log(c[:, 2])) - np.log(c[:, 1])
    m0 = np.zeros((0, c.shape[0]), dtype=np.complex128)
    return Spin1RbmParams(a=a, A=A, b=np.zeros(0, dtype=np.complex128), w=m0, W=m0)


# ---------------------------------------------------------------------------
# spin-1/2 RBM (unary baseline)


def log_amplitude_spin12(params: Spin12RbmParams, v: np.ndarray) -> complex:
    """log Psi = sum_j a_j v_j + sum_i log 2cosh(b_i + sum_j w_ij v_j)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (params.n_visible,):
        raise ValueError("visible vector length mismatch")
    if not np.all(np.abs(v) == 1.0):
        raise ValueError("spin-1/2 visible values must be +1 or -1")
    theta = params.b + params.w @ v
    return complex(params.a @ v + log2cosh(theta).sum())


def spin12_log_amps(params: Spin12RbmParams, vmat: np.ndarray) -> np.ndarray:
    vmat = np.asarray(vmat, dtype=np.float64)
    theta = vmat @ params.w.T + params.b
    return vmat @ params.a + log2cosh(theta).sum(axis=1)


def spin12_log_derivs(params: Spin12RbmParams, vmat: np.ndarray) -> np.ndarray:
    """Batch log-derivative matrix in the frozen (a, b, w) ordering."""
    vmat = np.asarray(vmat, dtype=np.float64)
    theta = vmat @ params.w.T + params.b
    t = np.tanh(theta)
    b = vmat.shape[0]
    return np.concatenate([
        vmat.astype(np.complex128), t,
        (t[:, :, None] * vmat[:, None, :]).reshape(b, -1),
    ], axis=1)


def unary_encode(sites) -> np.ndarray:
    """One-hot encode local states into +-1 cells of three spin-1/2 units.

    Accepts a single index vector (N,) or a batch (B, N); cells occupy
    consecutive triples, one -1 per cell.
    """
    idx = np.asarray(sites, dtype=np.int64)
    out = UNARY_PATTERNS[idx]
    return out.reshape(*idx.shape[:-1], idx.shape[-1] * 3)


# ---------------------------------------------------------------------------
# coupling-matrix network


def correlator(net: CouplingNet, unit: int, v: np.ndarray) -> complex:
    """Correlator of one hidden unit: sum over h of the row product."""
    idx = values_to_indices(v)
    if idx.shape != (net.n_sites,):
        raise ValueError("visible vector length mismatch")
    rows = net.mats[unit, np.arange(net.n_sites), :, idx]  # (N, 2)
    prod = rows.prod(axis=0)
    return complex(prod[0] + prod[1])


def net_row_products(net: CouplingNet, idx_matrix: np.ndarray):
    """Zero-aware row products for a batch of configurations.

    Returns ``(zeros, prods)`` of shape (B, M, 2): ``zeros`` counts exactly-zero
    factors per row and ``prods`` multiplies the nonzero ones, so the row
    product is 0 where ``zeros > 0`` and ``prods`` elsewhere.
    """
    idx_matrix = np.asarray(idx_matrix, dtype=np.int64)
    factors = np.take_along_axis(
        net.mats[None], idx_matrix[:, None, :, None, None], axis=4)[..., 0]
    zmask = factors == 0
    zeros = zmask.sum(axis=2)
    prods = np.where(zmask, 1.0, factors).prod(axis=2)
    return zeros, prods


def net_correlators(net: CouplingNet, idx_matrix: np.ndarray) -> np.ndarray:
    """All hidden-unit correlators for a batch, shape (B, M)."""
    zeros, prods = net_row_products(net, idx_matrix)
    return np.where(zeros > 0, 0.0, prods).sum(axis=2)


def net_log_amps(net: CouplingNet, idx_matrix: np.ndarray) -> np.ndarray:
    """Batch net log-amplitudes; exactly-zero amplitudes get real part -inf."""
    idx_matrix = np.asarray(idx_matrix, dtype=np.int64)
    ups = net_correlators(net, idx_matrix)
    sb = net.site_bias[np.arange(net.n_sites)[None, :], idx_matrix]
    dead = (ups == 0).any(axis=1) | (sb == 0).any(axis=1)
    out = np.where(dead[:, None], 1.0, ups)
    sbv = np.where(dead[:, None], 1.0, sb)
    res = np.log(out).sum(axis=1) + np.log(sbv).sum(axis=1)
    res[dead] = ZERO_LOG_AMP
    return res


def net_log_amplitude(net: CouplingNet, v: np.ndarray) -> complex:
    """Net log-amplitude; returns ``ZERO_LOG_AMP`` when any correlator vanishes."""
    idx = values_to_indices(np.asarray(v).reshape(1, -1))
    return complex(net_log_amps(net, idx)[0])


# ---------------------------------------------------------------------------
# conversions


def soften_net(net: CouplingNet, softening: float) -> CouplingNet:
    """Replace exactly-zero elements by e^{-S}; nonzero elements untouched."""
    if softening <= 0:
        raise ValueError("softening must be positive")
    eps = np.exp(-softening)
    mats = np.where(net.mats == 0, eps, net.mats)
    sb = np.where(net.site_bias == 0, eps, net.site_bias)
    return CouplingNet(mats=mats, site_bias=sb)


def couplings_to_rbm(net: CouplingNet, softening: float = 10.0):
    """Boltzmann-parameterize a net into spin-1 RBM form.

    Exact zeros are softened first. Returns ``(params, log_const)`` such that
    exp(log_const) * Psi_RBM equals the (softened) net amplitudes exactly;
    complex logs are taken on the principal branch, so log-domain equality is
    up to the 2pi-periodic imaginary part (exponentiate before comparing).
    """
    net = soften_net(net, softening)
    m, n = net.n_hidden, net.n_sites
    L = np.log(net.mats)  # (M, N, 2, 3)
    at = 0.25 * (L[:, :, 0, 0] + L[:, :, 1, 0] - L[:, :, 0, 2] - L[:, :, 1, 2])
    bt = 0.5 * (L[:, :, 0, 1] - L[:, :, 1, 1])
    ct = 0.5 * (L[:, :, 0, 1] + L[:, :, 1, 1])
    w = 0.25 * (L[:, :, 0, 0] - L[:, :, 1, 0] - L[:, :, 0, 2] + L[:, :, 1, 2])
    W = 0.25 * (L[:, :, 0, 0] - L[:, :, 1, 0] - 2 * L[:, :, 0, 1]
                + 2 * L[:, :, 1, 1] + L[:, :, 0, 2] - L[:, :, 1, 2])
    At = 0.25 * (L[:, :, 0, 0] + L[:, :, 1, 0] - 2 * L[:, :, 0, 1]
                 - 2 * L[:, :, 1, 1] + L[:, :, 0, 2] + L[:, :, 1, 2])
    a = at.sum(axis=0)
    A = At.sum(axis=0)
    b = bt.sum(axis=1)
    const = complex(ct.sum())
    ls = np.log(net.site_bias)  # (N, 3)
    a = a + 0.5 * (ls[:, 0] - ls[:, 2])
    A = A + 0.5 * (ls[:, 0] + ls[:, 2]) - ls[:, 1]
    const += complex(ls[:, 1].sum())
    return Spin1RbmParams(a=a, A=A, b=b, w=w, W=W), const


def rbm_to_couplings(params: Spin1RbmParams) -> CouplingNet:
    """Decompose a spin-1 RBM into coupling matrices (exact, no constant).

    Biases are split uniformly (b_i/N per site, a_j/M and A_j/M per hidden
    unit); any split is gauge-equivalent. M = 0 yields a pure site-bias net.
    """
    n, m = params.n_sites, params.n_hidden
    vals = VISIBLE_VALUES[None, :]  # (1, 3)
    if m == 0:
        sb = np.exp(params.a[:, None] * vals + params.A[:, None] * vals**2)
        return CouplingNet(mats=np.zeros((0, n, 2, 3), dtype=np.complex128),
                           site_bias=sb)
    h = np.array([1.0, -1.0])
    expo = (params.b[:, None] / n)[:, :, None, None] * h[None, None, :, None] \
        + params.w[:, :, None, None] * h[None, None, :, None] * vals[None, :, None, :] \
        + params.W[:, :, None, None] * h[None, None, :, None] * (vals**2)[None, :, None, :] \
        + (params.a[None, :] / m)[:, :, None, None] * vals[None, :, None, :] \
        + (params.A[None, :] / m)[:, :, None, None] * (vals**2)[None, :, None, :]
    return CouplingNet(mats=np.exp(expo))


def project_unary(params: Spin12RbmParams) -> CouplingNet:
    """Contract a unary-encoded spin-1/2 RBM into a spin-1 coupling net.

    The resulting net's amplitudes equal the spin-1/2 RBM amplitudes evaluated
    on the encoded configurations, exactly. Interaction weights within cell j
    become the 2x3 matrix exp(h * sum_p w_{i,p} u_p(v)); the hidden bias scales
    the rows of site 1's matrix by e^{b_i h}; visible biases become site biases
    exp(sum_p a_p u_p(v)).
    """
    nv = params.n_visible
    if nv % 3 != 0:
        raise ValueError("unary projection needs a multiple of 3 visible units")
    n, m = nv // 3, params.n_hidden
    w = params.w.reshape(m, n, 3)
    h = np.array([1.0, -1.0])
    # cellsum[i, j, v] = sum_p w[i, j, p] * U[v, p]
    cellsum = np.einsum("ijp,vp->ijv", w, UNARY_PATTERNS)
    mats = np.exp(h[None, None, :, None] * cellsum[:, :, None, :])
    mats[:, 0] *= np.exp(params.b[:, None] * h[None, :])[:, :, None]
    sb = np.exp(params.a.reshape(n, 3) @ UNARY_PATTERNS.T)
    return CouplingNet(mats=mats, site_bias=sb)


def param_counts(kind: str, n_sites: int, n_hidden: int) -> int:
    """Complex-parameter count: spin1 -> 2MN + 2N + M; unary -> M + 3N + 3NM."""
    if n_sites < 0 or n_hidden < 0:
        raise ValueError("N and M must be nonnegative")
    if kind == "spin1":
        return 2 * n_hidden * n_sites + 2 * n_sites + n_hidden
    if kind == "unary":
        return n_hidden + 3 * n_sites + 3 * n_sites * n_hidden
    raise ValueError(f"unknown ansatz kind: {kind}")


# ---------------------------------------------------------------------------
# flat parameter vectors (frozen ordering) and files


def pack_spin1(params: Spin1RbmParams) -> np.ndarray:
    return np.concatenate([params.a, params.A, params.b,
                           params.w.ravel(), params.W.ravel()])


def unpack_spin1(vec: np.ndarray, n_sites: int, n_hidden: int) -> Spin1RbmParams:
    n, m = n_sites, n_hidden
    if vec.shape != (param_counts("spin1", n, m),):
        raise ValueError("parameter vector length mismatch")
    a, A, b = vec[:n], vec[n:2 * n], vec[2 * n:2 * n + m]
    w = vec[2 * n + m:2 * n + m + m * n].reshape(m, n)
    W = vec[2 * n + m + m * n:].reshape(m, n)
    return Spin1RbmParams(a=a.copy(), A=A.copy(), b=b.copy(), w=w.copy(), W=W.copy())


def pack_spin12(params: Spin12RbmParams) -> np.ndarray:
    return np.concatenate([params.a, params.b, params.w.ravel()])


def unpack_spin12(vec: np.ndarray, n_visible: int, n_hidden: int) -> Spin12RbmParams:
    nv, m = n_visible, n_hidden
    if vec.shape != (nv + m + m * nv,):
        raise ValueError("parameter vector length mismatch")
    return Spin12RbmParams(a=vec[:nv].copy(), b=vec[nv:nv + m].copy(),
                           w=vec[nv + m:].reshape(m, nv).copy())


def _pairs(arr: np.ndarray) -> list:
    flat = np.asarray(arr, dtype=np.complex128).ravel()
    return [[float(z.real), float(z.imag)] for z in flat]


def _unpairs(pairs, shape) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)


def save_params(path, obj, basis: Basis) -> None:
    """Write a parameter file (JSON text, frozen array ordering)."""
    if isinstance(obj, Spin1RbmParams):
        doc = {"version": 1, "kind": "spin1", "N": obj.n_sites, "M": obj.n_hidden,
               "basis": basis.value, "a": _pairs(obj.a), "A": _pairs(obj.A),
               "b": _pairs(obj.b), "w": _pairs(obj.w), "W": _pairs(obj.W)}
    elif isinstance(obj, Spin12RbmParams):
        if obj.n_visible % 3 != 0:
            raise ValueError("unary spin-1/2 parameter files need Nv = 3N")
        doc = {"version": 1, "kind": "spin12", "N": obj.n_visible // 3,
               "M": obj.n_hidden, "basis": basis.value, "a": _pairs(obj.a),
               "b": _pairs(obj.b), "w": _pairs(obj.w)}
    elif isinstance(obj, CouplingNet):
        doc = {"version": 1, "kind": "net", "N": obj.n_sites, "M": obj.n_hidden,
               "basis": basis.value, "mats": _pairs(obj.mats),
               "site_bias": _pairs(obj.site_bias)}
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_params(path):
    """Read a parameter file; returns ``(object, Basis)``."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != 1:
        raise ValueError(f"unsupported parameter-file version: {doc.get('version')}")
    n, m = doc["N"], doc["M"]
    basis = Basis(doc["basis"])
    kind = doc["kind"]
    if kind == "spin1":
        obj = Spin1RbmParams(a=_unpairs(doc["a"], (n,)), A=_unpairs(doc["A"], (n,)),
                             b=_unpairs(doc["b"], (m,)), w=_unpairs(doc["w"], (m, n)),
                             W=_unpairs(doc["W"], (m, n)))
    elif kind == "spin12":
        obj = Spin12RbmParams(a=_unpairs(doc["a"], (3 * n,)),
                              b=_unpairs(doc["b"], (m,)),
                              w=_unpairs(doc["w"], (m, 3 * n)))
    elif kind == "net":
        obj = CouplingNet(mats=_unpairs(doc["mats"], (m, n, 2, 3)),
                          site_bias=_unpairs(doc["site_bias"], (n, 3)))
    else:
        raise ValueError(f"unknown parameter kind: {kind}")
    return obj, basis
