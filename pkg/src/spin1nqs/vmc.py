"""Sector-restricted Metropolis sampling, local energies, stochastic
reconfiguration, and the sequential hidden-unit-growth driver.

Chains advance in lock step as rows of (n_chains, N) arrays under a single
generator, so a batch is reproducible given (seed, config) independent of any
threading. Retained samples are laid out chain-major.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse.linalg as spla

from . import ansatz as az
from .hilbert import (VISIBLE_VALUES, Basis, ParityXYZ, Sector, SpinConfig,
                      TotalSz, encode_configs, sector_mask, sector_matrix,
                      validate_sector)
from .model import BondHamiltonian

DIRECT_SOLVE_LIMIT = 2000
MEMO_SECTOR_LIMIT = 200_000
REFRESH_INTERVAL = 50_000  # proposals between exact cache rebuilds


@dataclass
class SamplerConfig:
    """Markov-chain settings. ``decorrelation``/``burn_in`` count single
    proposed moves per chain; ``None`` resolves to N and 100*N respectively."""

    n_samp: int = 8000
    decorrelation: Optional[int] = None
    burn_in: Optional[int] = None
    rng_seed: int = 0
    move_mix: tuple[float, float] = (0.5, 0.5)  # (exchange, pair-type move)
    n_chains: int = 20

    def __post_init__(self):
        if self.n_samp < 1:
            raise ValueError("n_samp must be >= 1")
        if self.decorrelation is not None and self.decorrelation < 1:
            raise ValueError("decorrelation must be >= 1")
        if min(self.move_mix) < 0 or sum(self.move_mix) <= 0:
            raise ValueError("move_mix weights must be nonnegative, not all zero")


@dataclass
class SrConfig:
    """Stochastic-reconfiguration settings.

    ``step_cap`` bounds the quantum step length sqrt(Re dp^H S dp) per update;
    oversized increments are rescaled. This keeps noisy early steps from
    collapsing the sampled distribution (persistent chains stay near
    equilibrium); set to None to disable.
    """

    learning_rate: float = 0.02
    diag_shift: float = 1e-3
    diag_shift_floor: float = 1e-5
    solver: str = "auto"  # auto | direct | cg
    cg_tol: float = 1e-10
    max_steps: int = 200
    step_cap: Optional[float] = 0.1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.diag_shift < 0:
            raise ValueError("diag_shift must be nonnegative")
        if self.solver not in ("auto", "direct", "cg"):
            raise ValueError("solver must be auto, direct or cg")
        if self.step_cap is not None and self.step_cap <= 0:
            raise ValueError("step_cap must be positive (or None)")


@dataclass
class SampleBatch:
    """Markov-chain output; retained configurations are chain-major."""

    basis: Basis
    sector: Sector
    configs: np.ndarray  # (n_samp, N) int8
    log_derivs: Optional[np.ndarray]  # (n_samp, n_params) or None
    local_energies: np.ndarray  # (n_samp,) complex
    acceptance_rate: float
    n_chains: int

    @property
    def n_samp(self) -> int:
        return self.configs.shape[0]

    def chain_energies(self) -> np.ndarray:
        """Per-chain mean local energies (chains are independent)."""
        return self.local_energies.reshape(self.n_chains, -1).mean(axis=1)

    def energy_mean(self) -> float:
        return float(self.local_energies.mean().real)

    def energy_std_of_mean(self) -> float:
        """Standard error of the batch energy from independent chain means."""
        ce = self.chain_energies().real
        if ce.size < 2:
            return float("nan")
        return float(ce.std(ddof=1) / np.sqrt(ce.size))


# ---------------------------------------------------------------------------
# ansatz adapters


class VmcAnsatz:
    """Sampling interface: batch log-amplitudes plus incremental move ratios.

    ``propose_ratio`` returns the REAL part log|Psi'/Psi| only (all the
    Metropolis rule needs); -inf marks zero-amplitude proposals. The generic
    implementation recomputes amplitudes; the RBM and net subclasses keep
    per-chain caches updated in O(M * changed sites).
    """

    basis: Basis
    n_sites: int
    n_params: int = 0

    def log_amps(self, configs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_derivs(self, configs: np.ndarray) -> Optional[np.ndarray]:
        return None

    def with_increment(self, increment: np.ndarray) -> "VmcAnsatz":
        raise NotImplementedError(f"{type(self).__name__} is not optimizable")

    # -- incremental chain interface ------------------------------------
    def chain_init(self, configs: np.ndarray) -> dict:
        return {"logabs": self.log_amps(configs).real}

    def propose_ratio(self, cache, configs, p1, n1, p2, n2):
        rows = np.arange(configs.shape[0])
        cand = configs.copy()
        cand[rows, p1] = n1
        cand[rows, p2] = n2
        la = self.log_amps(cand).real
        return np.where(np.isinf(la), -np.inf, la - cache["logabs"]), \
            {"logabs": la}

    def commit(self, cache, accept, delta):
        cache["logabs"][accept] = delta["logabs"][accept]


class Spin1VmcAnsatz(VmcAnsatz):
    """Generalized spin-1 RBM adapter."""

    def __init__(self, params: az.Spin1RbmParams, basis: Basis):
        self.params = params
        self.basis = basis
        self.n_sites = params.n_sites
        self.n_params = params.n_params

    def log_amps(self, configs):
        return az.spin1_log_amps(self.params, VISIBLE_VALUES[configs])

    def log_derivs(self, configs):
        return az.spin1_log_derivs(self.params, VISIBLE_VALUES[configs])

    def with_increment(self, increment):
        vec = az.pack_spin1(self.params) + increment
        return Spin1VmcAnsatz(
            az.unpack_spin1(vec, self.params.n_sites, self.params.n_hidden),
            self.basis)

    def chain_init(self, configs):
        v = VISIBLE_VALUES[configs]
        v2 = v * v
        p = self.params
        theta = v @ p.w.T + v2 @ p.W.T + p.b
        return {"theta": theta, "linre": (v @ p.a + v2 @ p.A).real,
                "lc": az.log2cosh_abs(theta).sum(axis=1)}

    def _deltas(self, configs, p1, n1, p2, n2):
        rows = np.arange(configs.shape[0])
        p = self.params
        dtheta = np.zeros((configs.shape[0], p.n_hidden), dtype=np.complex128)
        dlin = np.zeros(configs.shape[0], dtype=np.complex128)
        for pos, new in ((p1, n1), (p2, n2)):
            vo = VISIBLE_VALUES[configs[rows, pos]]
            vn = VISIBLE_VALUES[new]
            dv, dv2 = vn - vo, vn * vn - vo * vo
            dtheta += p.w.T[pos] * dv[:, None] + p.W.T[pos] * dv2[:, None]
            dlin += p.a[pos] * dv + p.A[pos] * dv2
        return dtheta, dlin

    def propose_ratio(self, cache, configs, p1, n1, p2, n2):
        dtheta, dlin = self._deltas(configs, p1, n1, p2, n2)
        theta_new = cache["theta"] + dtheta
        lc_new = az.log2cosh_abs(theta_new).sum(axis=1)
        return dlin.real + lc_new - cache["lc"], \
            {"theta": theta_new, "linre": cache["linre"] + dlin.real, "lc": lc_new}

    def commit(self, cache, accept, delta):
        for key in ("theta", "linre", "lc"):
            cache[key][accept] = delta[key][accept]


class UnaryVmcAnsatz(VmcAnsatz):
    """Spin-1/2 RBM on the unary encoding, sampled over spin-1 configs."""

    def __init__(self, params: az.Spin12RbmParams, basis: Basis):
        if params.n_visible % 3 != 0:
            raise ValueError("unary ansatz needs Nv = 3N")
        self.params = params
        self.basis = basis
        self.n_sites = params.n_visible // 3
        self.n_params = params.n_params

    def log_amps(self, configs):
        return az.spin12_log_amps(self.params, az.unary_encode(configs))

    def log_derivs(self, configs):
        return az.spin12_log_derivs(self.params, az.unary_encode(configs))

    def with_increment(self, increment):
        vec = az.pack_spin12(self.params) + increment
        return UnaryVmcAnsatz(
            az.unpack_spin12(vec, self.params.n_visible, self.params.n_hidden),
            self.basis)

    def chain_init(self, configs):
        u = az.unary_encode(configs)
        p = self.params
        theta = u @ p.w.T + p.b
        return {"theta": theta, "linre": (u @ p.a).real,
                "lc": az.log2cosh_abs(theta).sum(axis=1)}

    def propose_ratio(self, cache, configs, p1, n1, p2, n2):
        rows = np.arange(configs.shape[0])
        p = self.params
        w3 = p.w.reshape(p.n_hidden, self.n_sites, 3)
        a3 = p.a.reshape(self.n_sites, 3)
        dtheta = np.zeros((configs.shape[0], p.n_hidden), dtype=np.complex128)
        dlin = np.zeros(configs.shape[0], dtype=np.complex128)
        for pos, new in ((p1, n1), (p2, n2)):
            du = az.UNARY_PATTERNS[new] - az.UNARY_PATTERNS[configs[rows, pos]]
            dtheta += np.einsum("cmp,cp->cm", w3.transpose(1, 0, 2)[pos], du)
            dlin += np.einsum("cp,cp->c", a3[pos], du)
        theta_new = cache["theta"] + dtheta
        lc_new = az.log2cosh_abs(theta_new).sum(axis=1)
        return dlin.real + lc_new - cache["lc"], \
            {"theta": theta_new, "linre": cache["linre"] + dlin.real, "lc": lc_new}

    def commit(self, cache, accept, delta):
        for key in ("theta", "linre", "lc"):
            cache[key][accept] = delta[key][accept]


class NetVmcAnsatz(VmcAnsatz):
    """Coupling-net adapter (sampling only, no derivatives).

    Per-chain caches keep each hidden unit's two row products factored as
    (zero count, product of nonzero factors), so exact zeros move in and out
    of rows without dividing by zero.
    """

    def __init__(self, net: az.CouplingNet, basis: Basis):
        self.net = net
        self.basis = basis
        self.n_sites = net.n_sites
        self.n_params = 0

    def log_amps(self, configs):
        return az.net_log_amps(self.net, configs)

    def chain_init(self, configs):
        zeros, prods = az.net_row_products(self.net, configs)
        return {"zeros": zeros.astype(np.int16), "prods": prods}

    def _gather(self, pos, states):
        # factors[c, i, h] = mats[i, pos[c], h, states[c]]
        g = self.net.mats.transpose(1, 0, 2, 3)[pos]  # (C, M, 2, 3)
        return np.take_along_axis(
            g, states[:, None, None, None].astype(np.int64), axis=3)[..., 0]

    def propose_ratio(self, cache, configs, p1, n1, p2, n2):
        rows = np.arange(configs.shape[0])
        zeros = cache["zeros"].copy()
        prods = cache["prods"].copy()
        dsb = np.zeros(configs.shape[0])
        for pos, new in ((p1, n1), (p2, n2)):
            old = configs[rows, pos]
            fold = self._gather(pos, old)
            fnew = self._gather(pos, new)
            zeros += (fnew == 0).astype(np.int16) - (fold == 0).astype(np.int16)
            prods = prods * np.where(fnew == 0, 1.0, fnew) \
                / np.where(fold == 0, 1.0, fold)
            sb_old = np.abs(self.net.site_bias[pos, old])
            sb_new = np.abs(self.net.site_bias[pos, new])
            with np.errstate(divide="ignore"):
                dsb += np.log(sb_new) - np.log(np.where(sb_old == 0, 1.0, sb_old))
        absups_new = np.abs(np.where(zeros > 0, 0.0, prods).sum(axis=2))
        absups_old = np.abs(np.where(cache["zeros"] > 0, 0.0,
                                     cache["prods"]).sum(axis=2))
        dead = (absups_new == 0).any(axis=1) | np.isinf(dsb)
        safe_new = np.where(dead[:, None], 1.0, absups_new)
        with np.errstate(invalid="ignore"):
            ratio = np.where(
                dead, -np.inf,
                np.log(safe_new).sum(axis=1) - np.log(absups_old).sum(axis=1) + dsb)
        return ratio, {"zeros": zeros, "prods": prods}

    def commit(self, cache, accept, delta):
        for key in ("zeros", "prods"):
            cache[key][accept] = delta[key][accept]


class DenseVmcAnsatz(VmcAnsatz):
    """Amplitude-table wrapper (exact states in tests and oracles)."""

    def __init__(self, state):
        self.state = state
        self.basis = state.basis
        self.n_sites = state.n_sites
        self._codes = encode_configs(state.configs)
        order = np.argsort(self._codes)
        self._codes = self._codes[order]
        self._amps = state.amps[order]

    def log_amps(self, configs):
        codes = encode_configs(configs)
        j = np.searchsorted(self._codes, codes)
        if np.any(j >= self._codes.size) or np.any(self._codes[np.minimum(j, self._codes.size - 1)] != codes):
            raise ValueError("configuration outside the tabulated sector")
        amps = self._amps[j]
        out = np.full(codes.shape, az.ZERO_LOG_AMP, dtype=np.complex128)
        nz = amps != 0
        out[nz] = np.log(amps[nz])
        return out


def as_vmc_ansatz(obj, basis: Basis) -> VmcAnsatz:
    """Wrap parameter containers (or pass adapters through) for sampling."""
    if isinstance(obj, VmcAnsatz):
        return obj
    if basis is None:
        raise TypeError("a basis is required to sample a bare parameter container")
    if isinstance(obj, az.Spin1RbmParams):
        return Spin1VmcAnsatz(obj, basis)
    if isinstance(obj, az.Spin12RbmParams):
        return UnaryVmcAnsatz(obj, basis)
    if isinstance(obj, az.CouplingNet):
        return NetVmcAnsatz(obj, basis)
    raise TypeError(f"cannot sample {type(obj).__name__}")


# ---------------------------------------------------------------------------
# sector moves


def _propose_batch(configs, basis: Basis, sector: Sector, rng, pair_prob: float):
    """Symmetric in-sector proposals for every chain.

    Returns (p1, n1, p2, n2): two site positions per chain with their proposed
    new states (identity proposals leave both unchanged). Move types:
    exchange of the ordered pair, the Sz pair move (up,down) <-> (0,0), the
    xyz pair-retype (s,s) -> (s',s'), or an unrestricted single-site retype
    when no sector applies. Each is an involution family on ordered site
    pairs, so forward and reverse proposal probabilities coincide.
    """
    c, n = configs.shape
    rows = np.arange(c)
    kind_pair = rng.random(c) < pair_prob
    p1 = rng.integers(0, n, c)
    p2 = rng.integers(0, n - 1, c)
    p2 = p2 + (p2 >= p1)
    coin = rng.integers(0, 2, c)
    s1 = configs[rows, p1]
    s2 = configs[rows, p2]
    n1, n2 = s1.copy(), s2.copy()
    ex = ~kind_pair
    n1[ex], n2[ex] = s2[ex], s1[ex]
    if sector is None:
        n1[kind_pair] = ((s1 + 1 + coin) % 3)[kind_pair]
        n2[kind_pair] = s2[kind_pair]
    elif isinstance(sector, TotalSz):
        up_dn = kind_pair & (s1 == 0) & (s2 == 2)
        zeros = kind_pair & (s1 == 1) & (s2 == 1)
        n1[up_dn], n2[up_dn] = 1, 1
        n1[zeros], n2[zeros] = 0, 2
    elif isinstance(sector, ParityXYZ):
        retype = kind_pair & (s1 == s2)
        t = (s1 + 1 + coin) % 3
        n1[retype], n2[retype] = t[retype], t[retype]
    else:
        raise TypeError(f"unknown sector kind: {sector!r}")
    return p1, n1.astype(np.int8), p2, n2.astype(np.int8)


def propose_move(config: SpinConfig, sector: Sector, rng,
                 move_mix=(0.5, 0.5)) -> SpinConfig:
    """One symmetric in-sector proposal (identity when no move applies)."""
    validate_sector(len(config), config.basis, sector)
    configs = np.asarray(config.sites, dtype=np.int8)[None, :]
    pair_prob = move_mix[1] / (move_mix[0] + move_mix[1])
    p1, n1, p2, n2 = _propose_batch(configs, config.basis, sector, rng, pair_prob)
    new = configs[0].copy()
    new[p1[0]] = n1[0]
    new[p2[0]] = n2[0]
    return SpinConfig(tuple(int(s) for s in new), config.basis)


def random_sector_configs(n_chains: int, n_sites: int, basis: Basis,
                          sector: Sector, rng) -> np.ndarray:
    """Uniformly shuffled configurations with the requested quantum numbers."""
    validate_sector(n_sites, basis, sector)
    out = np.empty((n_chains, n_sites), dtype=np.int8)
    triples = []
    if sector is None:
        return rng.integers(0, 3, (n_chains, n_sites)).astype(np.int8)
    if isinstance(sector, TotalSz):
        for n_up in range(n_sites + 1):
            n_dn = n_up - sector.target
            n_zero = n_sites - n_up - n_dn
            if 0 <= n_dn and 0 <= n_zero:
                triples.append((n_up, n_zero, n_dn))
    else:
        for n_x in range(sector.px, n_sites + 1, 2):
            for n_y in range(sector.py, n_sites - n_x + 1, 2):
                n_z = n_sites - n_x - n_y
                if n_z >= 0 and n_z % 2 == sector.pz:
                    triples.append((n_x, n_y, n_z))
    if not triples:
        raise ValueError("sector is empty for this site count")
    picks = rng.integers(0, len(triples), n_chains)
    for i, pick in enumerate(picks):
        counts = triples[pick]
        row = np.repeat(np.arange(3, dtype=np.int8), counts)
        out[i] = rng.permutation(row)
    return out


# ---------------------------------------------------------------------------
# sampling and local energies


def _start_chains(vans: VmcAnsatz, sector: Sector, n_chains: int, rng,
                  attempts: int = 500) -> np.ndarray:
    configs = random_sector_configs(n_chains, vans.n_sites, vans.basis, sector, rng)
    for _ in range(attempts):
        dead = np.isinf(vans.log_amps(configs).real)
        if not dead.any():
            return configs
        configs[dead] = random_sector_configs(
            int(dead.sum()), vans.n_sites, vans.basis, sector, rng)
    raise RuntimeError("could not find nonzero-amplitude start configurations "
                       "(sector/ansatz mismatch?)")


def metropolis_sample(ansatz_obj, sector: Sector, ham: Optional[BondHamiltonian],
                      cfg: SamplerConfig, *, basis: Optional[Basis] = None,
                      rng=None, initial: Optional[np.ndarray] = None,
                      compute_derivs: bool = True,
                      eloc_table=None) -> tuple[SampleBatch, np.ndarray]:
    """Sector-restricted Metropolis-Hastings sampling of |Psi|^2.

    Proposals use symmetric in-sector moves; acceptance is min[1, |ratio|^2]
    on amplitude ratios only (normalization never computed); zero-amplitude
    proposals are always rejected, and identity proposals count as accepted
    no-ops in the acceptance rate. Returns ``(batch, final_configs)`` so
    chains can persist across optimization steps; ``initial`` chains skip the
    burn-in.
    """
    vans = as_vmc_ansatz(ansatz_obj, basis)
    validate_sector(vans.n_sites, vans.basis, sector)
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed))
    decorr = cfg.decorrelation if cfg.decorrelation is not None else vans.n_sites
    pair_prob = cfg.move_mix[1] / (cfg.move_mix[0] + cfg.move_mix[1])
    if initial is None:
        configs = _start_chains(vans, sector, cfg.n_chains, rng)
        burn = cfg.burn_in if cfg.burn_in is not None else 100 * vans.n_sites
    else:
        configs = np.array(initial, dtype=np.int8)
        burn = 0
    c = configs.shape[0]
    rows = np.arange(c)
    cache = vans.chain_init(configs)
    retain_steps = -(-cfg.n_samp // c)  # ceil
    kept = np.empty((retain_steps, c, vans.n_sites), dtype=np.int8)
    accepted = 0
    total = 0
    since_refresh = 0

    def advance(n_moves):
        nonlocal accepted, total, since_refresh, cache
        for _ in range(n_moves):
            p1, n1, p2, n2 = _propose_batch(configs, vans.basis, sector, rng,
                                            pair_prob)
            ratio, delta = vans.propose_ratio(cache, configs, p1, n1, p2, n2)
            acc = np.log(rng.random(c)) < 2.0 * ratio.real
            vans.commit(cache, acc, delta)
            configs[rows[acc], p1[acc]] = n1[acc]
            configs[rows[acc], p2[acc]] = n2[acc]
            accepted += int(acc.sum())
            total += c
            since_refresh += 1
            if since_refresh >= REFRESH_INTERVAL:
                cache = vans.chain_init(configs)
                since_refresh = 0

    advance(burn)
    for step in range(retain_steps):
        advance(decorr)
        kept[step] = configs
    samples = kept.transpose(1, 0, 2).reshape(-1, vans.n_sites)  # chain-major
    if eloc_table is not None:
        codes, table = eloc_table
        j = np.searchsorted(codes, encode_configs(samples))
        eloc = table[j]
    elif ham is not None:
        eloc = local_energies(vans, ham, samples)
    else:
        eloc = np.zeros(samples.shape[0], dtype=np.complex128)
    derivs = vans.log_derivs(samples) if (compute_derivs and vans.n_params) else None
    batch = SampleBatch(basis=vans.basis, sector=sector, configs=samples,
                        log_derivs=derivs, local_energies=eloc,
                        acceptance_rate=accepted / max(total, 1), n_chains=c)
    return batch, configs.copy()


def local_energies(ansatz_obj, ham: BondHamiltonian, configs: np.ndarray,
                   *, basis: Optional[Basis] = None,
                   chunk: int = 16384) -> np.ndarray:
    """Batch local estimator sum_{S'} (Psi(S')/Psi(S)) <S|H|S'>.

    Duplicate sampled configurations are evaluated once.
    """
    vans = as_vmc_ansatz(ansatz_obj, basis)
    configs = np.asarray(configs, dtype=np.int8)
    codes = encode_configs(configs)
    ucodes, inv = np.unique(codes, return_inverse=True)
    first = np.zeros(ucodes.size, dtype=np.int64)
    first[inv] = np.arange(configs.shape[0])
    uconf = configs[first]
    out = np.empty(ucodes.size, dtype=np.complex128)
    for lo in range(0, uconf.shape[0], chunk):
        out[lo:lo + chunk] = _local_energies_block(vans, ham, uconf[lo:lo + chunk])
    return out[inv]


def _local_energies_block(vans: VmcAnsatz, ham: BondHamiltonian,
                          configs: np.ndarray) -> np.ndarray:
    base = vans.log_amps(configs)
    if np.any(np.isinf(base.real)):
        raise ValueError("zero-amplitude reference configuration")
    eloc = np.full(configs.shape[0], complex(ham.constant), dtype=np.complex128)
    for (p, q), mat in ham.terms:
        pair = 3 * configs[:, p].astype(np.int64) + configs[:, q]
        rowvals = mat[pair]  # (B, 9)
        for ket in range(9):
            col = rowvals[:, ket]
            nz = col != 0
            if not nz.any():
                continue
            t1, t2 = divmod(ket, 3)
            diag = nz & (configs[:, p] == t1) & (configs[:, q] == t2)
            if diag.any():
                eloc[diag] += col[diag]
            off = nz & ~diag
            if off.any():
                cand = configs[off].copy()
                cand[:, p] = t1
                cand[:, q] = t2
                lr = vans.log_amps(cand) - base[off]
                ratios = np.zeros(lr.shape, dtype=np.complex128)
                fin = np.isfinite(lr.real)
                ratios[fin] = np.exp(lr[fin])
                eloc[off] += col[off] * ratios
    return eloc


def local_energy(ansatz_obj, ham: BondHamiltonian, config: SpinConfig) -> complex:
    """Local energy of a single configuration."""
    vans = as_vmc_ansatz(ansatz_obj, config.basis)
    return complex(local_energies(
        vans, ham, np.asarray(config.sites, dtype=np.int8)[None, :])[0])


def local_energy_table(ansatz_obj, ham: BondHamiltonian, sector: Sector,
                       *, basis: Optional[Basis] = None):
    """Precompute E_loc on a whole sector enumeration for lookup sampling."""
    vans = as_vmc_ansatz(ansatz_obj, basis)
    configs = sector_matrix(vans.n_sites, vans.basis, sector)
    if configs.shape[0] > MEMO_SECTOR_LIMIT:
        raise ValueError("sector too large to memoize")
    return encode_configs(configs), local_energies(vans, ham, configs)


# ---------------------------------------------------------------------------
# stochastic reconfiguration


def sr_matrices(batch: SampleBatch):
    """Centered overlap matrix S and force vector F from a sample batch."""
    if batch.log_derivs is None:
        raise ValueError("batch carries no log-derivatives")
    if batch.n_samp < 2:
        raise ValueError("need at least two samples")
    o = batch.log_derivs
    obar = o.mean(axis=0)
    do = o - obar
    de = batch.local_energies - batch.local_energies.mean()
    smat = do.conj().T @ do / batch.n_samp
    force = do.conj().T @ de / batch.n_samp
    return smat, force


def sr_step(batch: SampleBatch, cfg: SrConfig,
            diag_shift: Optional[float] = None) -> np.ndarray:
    """Parameter increment -lr * (S + shift*I)^{-1} F, trust-region capped."""
    smat, force = sr_matrices(batch)
    shift = cfg.diag_shift if diag_shift is None else diag_shift
    n = smat.shape[0]
    reg = smat + shift * np.eye(n)
    solver = cfg.solver
    if solver == "auto":
        solver = "direct" if n <= DIRECT_SOLVE_LIMIT else "cg"
    if solver == "direct":
        sol = np.linalg.solve(reg, force)
    else:
        sol, info = spla.cg(reg, force, rtol=cfg.cg_tol, maxiter=10 * n)
        if info != 0:
            resid = np.linalg.norm(reg @ sol - force)
            raise RuntimeError(f"conjugate-gradient did not converge "
                               f"(info={info}, residual={resid:.2e}); "
                               f"consider raising diag_shift")
    incr = -cfg.learning_rate * sol
    if cfg.step_cap is not None:
        dist = np.sqrt(max(np.real(incr.conj() @ (smat @ incr)), 0.0))
        if dist > cfg.step_cap:
            incr *= cfg.step_cap / dist
    return incr


# ---------------------------------------------------------------------------
# optimization drivers


def initial_params(kind: str, n_sites: int, n_hidden: int, rng,
                   scale: float = 0.01):
    """Random small complex parameters, re/im i.i.d. uniform in [-scale, scale]."""
    def u(*shape):
        return rng.uniform(-scale, scale, shape) + 1j * rng.uniform(-scale, scale, shape)
    if kind == "spin1":
        return az.Spin1RbmParams(a=u(n_sites), A=u(n_sites), b=u(n_hidden),
                                 w=u(n_hidden, n_sites), W=u(n_hidden, n_sites))
    if kind == "unary":
        return az.Spin12RbmParams(a=u(3 * n_sites), b=u(n_hidden),
                                  w=u(n_hidden, 3 * n_sites))
    raise ValueError(f"unknown ansatz kind: {kind}")


def append_hidden_unit(params, rng, scale: float = 0.01):
    """Grow the network by one randomly initialized hidden unit."""
    def u(*shape):
        return rng.uniform(-scale, scale, shape) + 1j * rng.uniform(-scale, scale, shape)
    if isinstance(params, az.Spin1RbmParams):
        n = params.n_sites
        return az.Spin1RbmParams(
            a=params.a.copy(), A=params.A.copy(),
            b=np.concatenate([params.b, u(1)]),
            w=np.vstack([params.w, u(1, n)]), W=np.vstack([params.W, u(1, n)]))
    if isinstance(params, az.Spin12RbmParams):
        nv = params.n_visible
        return az.Spin12RbmParams(a=params.a.copy(),
                                  b=np.concatenate([params.b, u(1)]),
                                  w=np.vstack([params.w, u(1, nv)]))
    raise TypeError(f"cannot grow {type(params).__name__}")


@dataclass
class OptimizationResult:
    ansatz: VmcAnsatz
    energy: float
    energy_err: float
    records: list = field(default_factory=list)


def optimize(ansatz_obj, ham: BondHamiltonian, sector: Sector,
             sampler_cfg: SamplerConfig, sr_cfg: SrConfig, *,
             basis: Optional[Basis] = None, rng=None,
             log_callback=None) -> OptimizationResult:
    """Run stochastic reconfiguration for ``sr_cfg.max_steps`` steps.

    The diagonal shift decays geometrically from ``diag_shift`` to
    ``diag_shift_floor`` over the run. Chains persist between steps; a fresh
    final batch (same sampler settings) provides the reported energy.
    """
    vans = as_vmc_ansatz(ansatz_obj, basis)
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(sampler_cfg.rng_seed))
    steps = sr_cfg.max_steps
    if sr_cfg.diag_shift > 0 and sr_cfg.diag_shift_floor > 0 and steps > 0:
        gamma = (sr_cfg.diag_shift_floor / sr_cfg.diag_shift) ** (1.0 / steps)
    else:
        gamma = 1.0
    records = []
    chains = None
    for step in range(steps):
        t0 = time.perf_counter()
        batch, chains = metropolis_sample(vans, sector, ham, sampler_cfg,
                                          rng=rng, initial=chains)
        shift = max(sr_cfg.diag_shift * gamma**step, sr_cfg.diag_shift_floor)
        incr = sr_step(batch, sr_cfg, diag_shift=shift)
        vans = vans.with_increment(incr)
        rec = {"step": step,
               "M": getattr(getattr(vans, "params", None), "n_hidden", None),
               "E_mean": batch.energy_mean(),
               "E_std": batch.energy_std_of_mean(),
               "acceptance": batch.acceptance_rate,
               "increment_norm": float(np.linalg.norm(incr)),
               "wall_time": time.perf_counter() - t0}
        records.append(rec)
        if log_callback is not None:
            log_callback(rec)
    final, _ = metropolis_sample(vans, sector, ham, sampler_cfg, rng=rng,
                                 initial=chains, compute_derivs=False)
    return OptimizationResult(ansatz=vans, energy=final.energy_mean(),
                              energy_err=final.energy_std_of_mean(),
                              records=records)


@dataclass
class GrowthRow:
    M: int
    n_params: int
    energy: float
    energy_err: float
    infidelity: Optional[float]
    resolution: Optional[float]
    params: object


def sequential_growth(ham: BondHamiltonian, basis: Basis, sector: Sector,
                      kind: str, m_max: int, reruns: int,
                      sampler_cfg: SamplerConfig, sr_cfg: SrConfig, *,
                      seed: int = 0, ed_state=None, gap: Optional[float] = None,
                      m_schedule=None, log_callback=None) -> list[GrowthRow]:
    """Sequentially grown optimizations, best-of-reruns per hidden-unit count.

    Each rerun runs the full growth sequence (M = 1 seeded small and random;
    each next M copies the converged parameters and appends one random unit).
    Per M the lowest final sampled energy across reruns is retained; fidelity
    against ``ed_state`` is reported when available but never used for
    selection.
    """
    from .exact import dense_from_ansatz, fidelity  # local import, no cycle

    schedule = list(m_schedule) if m_schedule is not None else list(range(1, m_max + 1))
    if not schedule or schedule[0] < 1:
        raise ValueError("hidden-unit schedule must start at M >= 1")
    best: dict[int, GrowthRow] = {}
    for rerun in range(reruns):
        rng = np.random.default_rng(np.random.SeedSequence((seed, rerun)))
        params = initial_params(kind, ham.n_sites, schedule[0], rng)
        prev_m = schedule[0]
        for m in schedule:
            while prev_m < m:
                params = append_hidden_unit(params, rng)
                prev_m += 1
            result = optimize(params, ham, sector, sampler_cfg, sr_cfg,
                              basis=basis, rng=rng,
                              log_callback=log_callback)
            params = result.ansatz.params
            if m not in best or result.energy < best[m].energy:
                infid = None
                if ed_state is not None:
                    dn = dense_from_ansatz(params, ham.n_sites, basis, sector)
                    infid = 1.0 - fidelity(ed_state, dn)
                res = None
                if gap is not None and np.isfinite(result.energy_err):
                    res = result.energy_err / gap
                best[m] = GrowthRow(
                    M=m, n_params=az.param_counts(kind, ham.n_sites, m),
                    energy=result.energy, energy_err=result.energy_err,
                    infidelity=infid, resolution=res, params=params.copy())
    return [best[m] for m in schedule]


def energy_statistics(ansatz_obj, sector: Sector, ham: BondHamiltonian,
                      cfg: SamplerConfig, n_runs: int,
                      n_samp_grid=None, *, basis: Optional[Basis] = None,
                      memoize: str = "auto") -> dict:
    """Independent-run energy estimates and their 1/sqrt(n_samp) scaling.

    Runs are realized as independent chains; ``delta_eps`` is the standard
    deviation across runs of the per-run mean energies. With more than one
    grid point the least-squares slope of log Delta-eps vs log n_samp is
    fitted.
    """
    if n_runs < 2:
        raise ValueError("need n_runs >= 2")
    vans = as_vmc_ansatz(ansatz_obj, basis)
    grid = sorted(n_samp_grid) if n_samp_grid is not None else [cfg.n_samp]
    table = None
    if memoize in ("auto", "always"):
        try:
            table = local_energy_table(vans, ham, sector)
        except ValueError:
            if memoize == "always":
                raise
    rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed))
    means, stds = [], []
    chains = None
    for n_samp in grid:
        run_cfg = replace(cfg, n_samp=n_samp * n_runs, n_chains=n_runs)
        batch, chains = metropolis_sample(vans, sector, ham, run_cfg, rng=rng,
                                          initial=chains, compute_derivs=False,
                                          eloc_table=table)
        run_means = batch.chain_energies().real
        means.append(float(run_means.mean()))
        stds.append(float(run_means.std(ddof=1)))
    out = {"n_samp": grid, "mean": means, "delta_eps": stds}
    if len(grid) > 1:
        slope = np.polyfit(np.log(np.asarray(grid, dtype=float)),
                           np.log(np.asarray(stds)), 1)[0]
        out["slope"] = float(slope)
    return out
