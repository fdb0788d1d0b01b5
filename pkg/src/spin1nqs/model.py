"""Spin-1 chain Hamiltonians as bond-term lists in either local basis."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .hilbert import Basis, SpinConfig

SQRT2 = np.sqrt(2.0)


def spin1_matrices(basis: Basis):
    """The three 3x3 spin-1 operators (S^x, S^y, S^z) in the given basis.

    Sz basis rows/columns are ordered (up, 0, down); xyz basis (x, y, z),
    where all three operators take the same off-diagonal form.
    """
    if basis is Basis.SZ:
        sx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=np.complex128) / SQRT2
        sy = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]]) / SQRT2
        sz = np.diag([1.0, 0.0, -1.0]).astype(np.complex128)
    else:
        sx = np.array([[0, 0, 0], [0, 0, 1j], [0, -1j, 0]], dtype=np.complex128)
        sy = np.array([[0, 0, 1j], [0, 0, 0], [-1j, 0, 0]], dtype=np.complex128)
        sz = np.array([[0, 1j, 0], [-1j, 0, 0], [0, 0, 0]], dtype=np.complex128)
    return sx, sy, sz


def _heisenberg_bond(basis: Basis) -> np.ndarray:
    """S.S on an ordered pair of sites as a 9x9 matrix."""
    ops = spin1_matrices(basis)
    return sum(np.kron(s, s) for s in ops)


@dataclass
class BondHamiltonian:
    """Nearest-neighbour chain Hamiltonian: H = sum_bonds term + constant.

    ``terms`` lists ``((j, j+1 mod N), 9x9 matrix)`` acting on the ordered
    site pair. ``constant`` is a global additive scalar (any per-site shift
    the builders receive is spread uniformly over the bond matrices, so for
    periodic chains the bonds carry the whole shift and ``constant`` is 0).
    """

    n_sites: int
    periodic: bool
    terms: list = field(default_factory=list)
    constant: float = 0.0

    @property
    def basis(self) -> Basis:
        return self._basis

    def __post_init__(self):
        for _, mat in self.terms:
            if not np.allclose(mat, mat.conj().T, atol=1e-12):
                raise ValueError("bond matrices must be Hermitian")


def _bonds(n_sites: int, periodic: bool) -> list[tuple[int, int]]:
    if n_sites < 2:
        raise ValueError("chains need N >= 2")
    bonds = [(j, j + 1) for j in range(n_sites - 1)]
    if periodic:
        bonds.append((n_sites - 1, 0))
    return bonds


def _assemble(n_sites, periodic, basis, bond_matrix, per_site_shift=0.0):
    bonds = _bonds(n_sites, periodic)
    if n_sites == 2 and periodic:
        warnings.warn("periodic N=2 double-counts the single bond as two bonds",
                      stacklevel=3)
    mat = bond_matrix.astype(np.complex128)
    if per_site_shift != 0.0:
        # spread N*shift uniformly over the bonds; keeps AKLT bonds PSD
        mat = mat + (per_site_shift * n_sites / len(bonds)) * np.eye(9)
    ham = BondHamiltonian(n_sites=n_sites, periodic=periodic,
                          terms=[(b, mat) for b in bonds])
    ham._basis = basis
    return ham


def build_afh(n_sites: int, J: float = 1.0, periodic: bool = True,
              basis: Basis = Basis.SZ) -> BondHamiltonian:
    """Antiferromagnetic Heisenberg chain H = J sum_i S_i . S_{i+1}."""
    return _assemble(n_sites, periodic, basis, J * _heisenberg_bond(basis))


def build_blbq(n_sites: int, beta: float, periodic: bool = True,
               basis: Basis = Basis.SZ, shift: float = 0.0) -> BondHamiltonian:
    """Bilinear-biquadratic chain: sum_i [S.S + beta (S.S)^2] + shift per site."""
    ss = _heisenberg_bond(basis)
    return _assemble(n_sites, periodic, basis, ss + beta * (ss @ ss), shift)


def build_aklt(n_sites: int, periodic: bool = True,
               basis: Basis = Basis.SZ) -> BondHamiltonian:
    """The AKLT preset: beta = 1/3 with a +2/3 per-site shift (E0 = 0 periodic)."""
    return build_blbq(n_sites, beta=1.0 / 3.0, periodic=periodic, basis=basis,
                      shift=2.0 / 3.0)


def connected_matrix_elements(ham: BondHamiltonian, sites: np.ndarray):
    """All configs reachable from ``sites`` with their merged matrix elements.

    Returns ``(diag, others)`` where ``diag`` is the diagonal element
    <S|H|S> (always present, constant included) and ``others`` is a dict
    mapping changed-site tuples ((site, new_state), ...) to elements.
    """
    sites = np.asarray(sites, dtype=np.int64)
    diag = complex(ham.constant)
    others: dict[tuple, complex] = {}
    for (p, q), mat in ham.terms:
        # bra index is the current pair; columns enumerate reachable kets S'
        row = mat[3 * sites[p] + sites[q], :]
        for col in np.nonzero(row)[0]:
            t1, t2 = divmod(int(col), 3)
            if t1 == sites[p] and t2 == sites[q]:
                diag += complex(row[col])
                continue
            changes = tuple((s, t) for s, t in ((p, t1), (q, t2)) if sites[s] != t)
            others[changes] = others.get(changes, 0.0) + complex(row[col])
    return diag, others


def connected_configs(ham: BondHamiltonian, config: SpinConfig):
    """List of (config', <config|H|config'>) pairs, diagonal entry included.

    Exactly the configs reachable by changing at most the two sites of some
    bond, with duplicates merged by summation.
    """
    if config.basis is not ham.basis:
        raise ValueError("config basis must match the Hamiltonian basis")
    sites = np.asarray(config.sites, dtype=np.int64)
    diag, others = connected_matrix_elements(ham, sites)
    out = [(config, diag)]
    for changes, elem in others.items():
        new_sites = sites.copy()
        for site, state in changes:
            new_sites[site] = state
        out.append((SpinConfig(tuple(int(s) for s in new_sites), config.basis), elem))
    return out
