"""Ground-truth machinery: exact diagonalization, the AKLT matrix-product
oracle, analytic coupling-net constructions, fidelity, and exact observables.

Everything here materializes states on an explicit sector enumeration, so it
is meant for desk-scale chains (sector dimension within ~200k amplitudes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import ansatz as az
from .hilbert import (VISIBLE_VALUES, Basis, Sector, encode_configs,
                      sector_matrix, validate_sector)
from .model import BondHamiltonian

DENSE_EIG_LIMIT = 4000
SECTOR_DIM_BUDGET = 250_000

SQRT2 = np.sqrt(2.0)


@dataclass
class DenseState:
    """A wavefunction materialized on a sector enumeration (lexicographic)."""

    basis: Basis
    sector: Sector
    configs: np.ndarray  # (n, N) int8, rows in enumeration order
    amps: np.ndarray  # (n,) complex

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        if self.amps.shape[0] != self.configs.shape[0]:
            raise ValueError("amplitude/configuration length mismatch")
        if np.linalg.norm(self.amps) == 0:
            raise ValueError("state has zero norm")

    @property
    def n_sites(self) -> int:
        return self.configs.shape[1]

    def normalized(self) -> "DenseState":
        return DenseState(self.basis, self.sector, self.configs,
                          self.amps / np.linalg.norm(self.amps))

    def export_rows(self):
        """Rows '(config string, re, im)' in enumeration order."""
        chars = np.array(list(self.basis.chars))
        for row, amp in zip(self.configs, self.amps):
            yield "".join(chars[row]), float(amp.real), float(amp.imag)


@dataclass
class AkltMps:
    """Bond-dimension-2 MPS for the AKLT state, keyed by local-state index."""

    matrices: np.ndarray  # (3, 2, 2) complex
    basis: Basis


def aklt_mps(basis: Basis) -> AkltMps:
    if basis is Basis.SZ:
        mats = np.array([
            [[0, 1 / SQRT2], [0, 0]],        # A^+ = sigma^+ / sqrt(2)
            [[-0.5, 0], [0, 0.5]],           # A^0 = -sigma^z / 2
            [[0, 0], [-1 / SQRT2, 0]],       # A^- = -sigma^- / sqrt(2)
        ], dtype=np.complex128)
    else:
        mats = 0.5 * np.array([
            [[0, 1], [1, 0]],                # B^x = sigma^x / 2
            [[0, -1j], [1j, 0]],             # B^y = sigma^y / 2
            [[1, 0], [0, -1]],               # B^z = sigma^z / 2
        ], dtype=np.complex128)
    return AkltMps(matrices=mats, basis=basis)


def mps_amplitudes(mps: AkltMps, idx_matrix: np.ndarray) -> np.ndarray:
    """Batch trace of ordered matrix products, one per configuration row."""
    idx_matrix = np.asarray(idx_matrix, dtype=np.int64)
    g = mps.matrices[idx_matrix[:, 0]]
    for j in range(1, idx_matrix.shape[1]):
        g = g @ mps.matrices[idx_matrix[:, j]]
    return g[:, 0, 0] + g[:, 1, 1]


def mps_amplitude(mps: AkltMps, config) -> complex:
    if config.basis is not mps.basis:
        raise ValueError("config basis must match the MPS basis")
    return complex(mps_amplitudes(mps, np.asarray(config.sites)[None, :])[0])


# ---------------------------------------------------------------------------
# sector Hamiltonians and exact diagonalization


def sector_hamiltonian(ham: BondHamiltonian, sector: Sector):
    """Sparse sector-restricted Hamiltonian; returns (configs, csr_matrix)."""
    validate_sector(ham.n_sites, ham.basis, sector)
    configs = sector_matrix(ham.n_sites, ham.basis, sector)
    n = configs.shape[0]
    if n > SECTOR_DIM_BUDGET:
        raise ValueError(f"sector dimension {n} exceeds budget {SECTOR_DIM_BUDGET}")
    codes = encode_configs(configs)
    npow = 3 ** np.arange(ham.n_sites - 1, -1, -1, dtype=np.int64)
    diag = np.full(n, complex(ham.constant), dtype=np.complex128)
    rows, cols, vals = [], [], []
    idx = np.arange(n, dtype=np.int64)
    for (p, q), mat in ham.terms:
        pair = 3 * configs[:, p].astype(np.int64) + configs[:, q]
        for bra in range(9):
            row = mat[bra]
            nz = np.nonzero(row)[0]
            if nz.size == 0:
                continue
            mask = pair == bra
            if not mask.any():
                continue
            sel = idx[mask]
            s1, s2 = divmod(bra, 3)
            for ket in nz:
                t1, t2 = divmod(int(ket), 3)
                if (t1, t2) == (s1, s2):
                    diag[sel] += row[ket]
                    continue
                new_codes = codes[sel] + (t1 - s1) * npow[p] + (t2 - s2) * npow[q]
                j = np.searchsorted(codes, new_codes)
                if np.any(j >= n) or np.any(codes[np.minimum(j, n - 1)] != new_codes):
                    raise ValueError("Hamiltonian does not preserve the sector")
                rows.append(sel)
                cols.append(j)
                vals.append(np.full(sel.size, row[ket], dtype=np.complex128))
    if rows:
        off = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n))
    else:
        off = sp.csr_matrix((n, n), dtype=np.complex128)
    return configs, off + sp.diags(diag)


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    return vec / phase


def lowest_eigenpairs(ham: BondHamiltonian, sector: Sector, k: int = 2):
    """The k lowest sector eigenvalues and vectors (dense below 4000 dims,
    restarted Krylov with a deterministic all-ones start vector above)."""
    configs, hmat = sector_hamiltonian(ham, sector)
    n = hmat.shape[0]
    k = min(k, n)
    if n <= DENSE_EIG_LIMIT:
        evals, evecs = np.linalg.eigh(hmat.toarray())
        evals, evecs = evals[:k], evecs[:, :k]
    else:
        v0 = np.ones(n) / np.sqrt(n)
        evals, evecs = spla.eigsh(hmat, k=k, which="SA", v0=v0)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
        resid = spla.norm(hmat @ evecs[:, :1] - evals[0] * evecs[:, :1]) \
            if sp.issparse(evecs) else np.linalg.norm(hmat @ evecs[:, 0] - evals[0] * evecs[:, 0])
        if resid > 1e-7:
            raise RuntimeError(f"iterative eigensolver residual too large: {resid:.2e}")
    return configs, np.real(evals), evecs


def exact_ground_state(ham: BondHamiltonian, sector: Sector):
    """Lowest eigenpair of the sector-restricted problem as (E0, DenseState)."""
    configs, evals, evecs = lowest_eigenpairs(ham, sector, k=1)
    state = DenseState(ham.basis, sector, configs, _fix_phase(evecs[:, 0]))
    return float(evals[0]), state.normalized()


def ground_state_and_gap(ham: BondHamiltonian, sector: Sector):
    """(E0, gap, DenseState) from the two lowest sector eigenvalues."""
    configs, evals, evecs = lowest_eigenpairs(ham, sector, k=2)
    state = DenseState(ham.basis, sector, configs, _fix_phase(evecs[:, 0]))
    gap = float(evals[1] - evals[0]) if evals.size > 1 else np.inf
    return float(evals[0]), gap, state.normalized()


# ---------------------------------------------------------------------------
# analytic AKLT constructions

_I23 = np.ones((2, 3))

C_XY = np.array([[1, 1, 1], [-1, -1, 1]], dtype=np.complex128)
C_YZ = np.array([[1, 1, 1], [1, -1, -1]], dtype=np.complex128)
C_X = np.array([[0, 1, 1], [1, 0, 0]], dtype=np.complex128)
C_Y = np.array([[1, 1, 1], [1, -1, 1]], dtype=np.complex128)
C_Z = np.array([[1, 1, 0], [0, 0, 1]], dtype=np.complex128)

C_IU = np.array([[1, 1, 1], [1j, 0, 0]], dtype=np.complex128)
C_ID = np.array([[1, 1, 1], [0, 0, 1j]], dtype=np.complex128)
C_P0 = np.array([[1, 1, 1], [0, 1, 0]], dtype=np.complex128)
C_2U = np.array([[1, 1, 1], [2, 0, 0]], dtype=np.complex128)
C_MD = np.array([[1, 1, 1], [0, 0, -1]], dtype=np.complex128)
C_MU = np.array([[1, 1, 1], [-1, 0, 0]], dtype=np.complex128)
C_M0 = np.array([[1, 1, 1], [0, -1, 0]], dtype=np.complex128)


def aklt_nqs_xyz(n_sites: int) -> az.CouplingNet:
    """Exact xyz-basis AKLT coupling net with M = 2N hidden units.

    Two uniform parity filters fix the nodal structure; N-1 filters of each of
    two conditional types fix the sign structure accumulated by reordering the
    Pauli-matrix product.
    """
    if n_sites < 2:
        raise ValueError("need N >= 2")
    units = [np.tile(C_XY, (n_sites, 1, 1)), np.tile(C_YZ, (n_sites, 1, 1))]
    for k in range(1, n_sites):  # conditional-x filter at site k (0-based)
        u = np.tile(_I23, (n_sites, 1, 1)).astype(np.complex128)
        u[:k] = C_YZ
        u[k] = C_X
        units.append(u)
    for k in range(0, n_sites - 1):  # conditional-z filter at site k
        u = np.tile(_I23, (n_sites, 1, 1)).astype(np.complex128)
        u[k] = C_Z
        u[k + 1:] = C_Y
        units.append(u)
    return az.CouplingNet(mats=np.stack(units))


def aklt_nqs_sz(n_sites: int) -> az.CouplingNet:
    """Exact Sz-basis AKLT coupling net, M = 2N^2 + N*floor((N-1)/2) + 1.

    Hidden units act as successive filters on a periodic chain (site
    arithmetic mod N): pair-cancellation units kill +[0..0]+ / -[0..0]-
    substrings, sign units imprint (-1)^l on +[0..0]^l- substrings with odd l,
    single-excitation and all-zero units handle the remaining patterns, and a
    final per-site diagonal factor diag(2,-1,-1) is folded into the all-zero
    unit's matrices.
    """
    if n_sites < 3:
        raise ValueError("need N >= 3 (periodic substring filters)")
    n = n_sites
    units = []

    def skeleton(k, ell, left, right):
        u = np.tile(_I23, (n, 1, 1)).astype(np.complex128)
        u[k] = left
        for d in range(1, ell + 1):
            u[(k + d) % n] = C_P0
        u[(k + 1 + ell) % n] = right
        return u

    for k in range(n):
        for ell in range(0, n - 1):
            units.append(skeleton(k, ell, C_IU, C_IU))
            units.append(skeleton(k, ell, C_ID, C_ID))
    for k in range(n):
        for ell in range(1, n - 1, 2):
            units.append(skeleton(k, ell, C_2U, C_MD))
    for k in range(n):
        u = np.tile(C_P0, (n, 1, 1))
        u[k] = C_MU
        units.append(u)
        u = np.tile(C_P0, (n, 1, 1))
        u[k] = C_MD
        units.append(u)
    allzero = np.tile(C_M0, (n, 1, 1))
    allzero *= np.array([2.0, -1.0, -1.0])[None, None, :]  # per-site diag factor
    units.append(allzero)
    net = az.CouplingNet(mats=np.stack(units))
    expected = 2 * n * n + n * ((n - 1) // 2) + 1
    assert net.n_hidden == expected
    return net


# ---------------------------------------------------------------------------
# fidelity, materialization, observables


def fidelity(psi: DenseState, phi: DenseState) -> float:
    """|<psi|phi>|^2 / (<psi|psi><phi|phi>) on aligned enumerations."""
    if psi.basis is not phi.basis or psi.sector != phi.sector:
        raise ValueError("states must share basis and sector")
    if psi.configs.shape != phi.configs.shape:
        raise ValueError("states must share the enumeration")
    np1 = np.linalg.norm(psi.amps)
    np2 = np.linalg.norm(phi.amps)
    if np1 == 0 or np2 == 0:
        raise ValueError("zero-norm state")
    ov = np.vdot(psi.amps, phi.amps)
    return float(abs(ov) ** 2 / (np1**2 * np2**2))


def dense_from_ansatz(obj, n_sites: int, basis: Basis, sector: Sector,
                      chunk: int = 65536) -> DenseState:
    """Materialize an ansatz on a sector enumeration (normalized).

    ``obj`` may be Spin1RbmParams, Spin12RbmParams (unary-encoded), or a
    CouplingNet. Exactly-zero log amplitudes map to amplitude 0.
    """
    configs = sector_matrix(n_sites, basis, sector)
    logs = np.empty(configs.shape[0], dtype=np.complex128)
    for lo in range(0, configs.shape[0], chunk):
        block = configs[lo:lo + chunk]
        if isinstance(obj, az.Spin1RbmParams):
            logs[lo:lo + chunk] = az.spin1_log_amps(obj, VISIBLE_VALUES[block])
        elif isinstance(obj, az.Spin12RbmParams):
            logs[lo:lo + chunk] = az.spin12_log_amps(obj, az.unary_encode(block))
        elif isinstance(obj, az.CouplingNet):
            logs[lo:lo + chunk] = az.net_log_amps(obj, block)
        else:
            raise TypeError(f"cannot materialize {type(obj).__name__}")
    finite = np.isfinite(logs.real)
    if not finite.any():
        raise ValueError("ansatz vanishes on the whole sector")
    amps = np.zeros(configs.shape[0], dtype=np.complex128)
    ref = logs.real[finite].max()
    amps[finite] = np.exp(logs[finite] - ref)
    return DenseState(basis, sector, configs, amps).normalized()


def _diag_weights(state: DenseState):
    p = np.abs(state.amps) ** 2
    return p / p.sum()


def spin_correlation(state: DenseState, ell: int,
                     translation_average: bool = True) -> float:
    """<S^z_0 S^z_ell> on a normalized Sz-basis state."""
    if state.basis is not Basis.SZ:
        raise ValueError("spin correlations are evaluated in the Sz basis")
    n = state.n_sites
    if not 1 <= ell < n:
        raise ValueError("need 1 <= ell < N")
    v = VISIBLE_VALUES[state.configs]
    p = _diag_weights(state)
    offsets = range(n) if translation_average else (0,)
    vals = [p @ (v[:, j] * v[:, (j + ell) % n]) for j in offsets]
    return float(np.mean(vals).real)


def string_order(state: DenseState, ell: int,
                 translation_average: bool = True) -> float:
    """<S^z_0 prod_{j=1}^{ell-1} e^{i pi S^z_j} S^z_ell> (diagonal estimator)."""
    if state.basis is not Basis.SZ:
        raise ValueError("string order is evaluated in the Sz basis")
    n = state.n_sites
    if not 1 <= ell < n:
        raise ValueError("need 1 <= ell < N")
    v = VISIBLE_VALUES[state.configs]
    signs = 1.0 - 2.0 * v * v  # e^{i pi S^z} eigenvalue per site
    p = _diag_weights(state)
    offsets = range(n) if translation_average else (0,)
    vals = []
    for j in offsets:
        inner = np.ones(v.shape[0])
        for d in range(1, ell):
            inner = inner * signs[:, (j + d) % n]
        vals.append(p @ (v[:, j] * inner * v[:, (j + ell) % n]))
    return float(np.mean(vals).real)


def infidelity_bound(energy: float, ground_energy: float, gap: float) -> float:
    """Eigenstate-thermalization-free bound 1 - O <= (E - E0)/gap."""
    if gap <= 0:
        raise ValueError("gap must be positive")
    eps = energy - ground_energy
    if eps < -1e-9 * max(1.0, abs(ground_energy)):
        raise ValueError("energy below the ground energy beyond tolerance")
    return eps / gap


def fidelity_resolution(delta_eps: float, gap: float) -> float:
    """Resolution R = Delta-eps / gap below which exactness is unresolvable."""
    if gap <= 0:
        raise ValueError("gap must be positive")
    return delta_eps / gap
