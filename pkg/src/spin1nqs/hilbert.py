"""Spin-1 configurations, the two local bases, and symmetry-sector bookkeeping.

Local states are referred to by index 0, 1, 2 everywhere. The index order is
frozen: in the Sz basis it is (up, zero, down), in the xyz basis it is
(x, y, z). Both orders map to the visible values (+1, 0, -1).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

# Eager enumeration budget: 3^14 ~ 4.8M configurations.
MAX_ENUM_SITES = 14

# Visible value by local-state index, identical for both bases.
VISIBLE_VALUES = np.array([1.0, 0.0, -1.0])


class Basis(Enum):
    SZ = "Sz"
    XYZ = "XYZ"

    @property
    def chars(self) -> str:
        """Single-character state labels in index order (site 1 leftmost)."""
        return "+0-" if self is Basis.SZ else "xyz"


@dataclass(frozen=True)
class SpinConfig:
    """A chain configuration: local-state indices plus the basis tag.

    Physical chains have N >= 2; N = 1 is allowed here so that single-site
    enumerations work (the model builders enforce N >= 2).
    """

    sites: tuple[int, ...]
    basis: Basis

    def __post_init__(self):
        if len(self.sites) < 1:
            raise ValueError("configuration needs at least one site")
        if any(s not in (0, 1, 2) for s in self.sites):
            raise ValueError("local-state indices must be in {0, 1, 2}")

    def __len__(self) -> int:
        return len(self.sites)

    def to_string(self) -> str:
        return "".join(self.basis.chars[s] for s in self.sites)

    @classmethod
    def from_string(cls, text: str, basis: Basis) -> "SpinConfig":
        lookup = {c: i for i, c in enumerate(basis.chars)}
        try:
            sites = tuple(lookup[c] for c in text)
        except KeyError as err:
            raise ValueError(f"invalid character {err} for basis {basis.value}") from None
        return cls(sites, basis)


@dataclass(frozen=True)
class TotalSz:
    """Fixed total S^z sector (sum of visible values) in the Sz basis."""

    target: int


@dataclass(frozen=True)
class ParityXYZ:
    """Fixed parities (mod 2) of the x, y, z population counts."""

    px: int
    py: int
    pz: int

    def __post_init__(self):
        if any(p not in (0, 1) for p in (self.px, self.py, self.pz)):
            raise ValueError("parities must be 0 or 1")


Sector = Optional[Union[TotalSz, ParityXYZ]]


def visible_values(config: SpinConfig) -> np.ndarray:
    """Map a configuration to its visible values (+1, 0, -1) per site."""
    return VISIBLE_VALUES[np.asarray(config.sites)]


def sector_of(config: SpinConfig) -> Sector:
    """The symmetry sector a configuration belongs to (basis-dependent kind)."""
    sites = np.asarray(config.sites)
    if config.basis is Basis.SZ:
        return TotalSz(int(VISIBLE_VALUES[sites].sum()))
    counts = np.bincount(sites, minlength=3)
    return ParityXYZ(int(counts[0] % 2), int(counts[1] % 2), int(counts[2] % 2))


def sector_mask(sites_matrix: np.ndarray, basis: Basis, sector: Sector) -> np.ndarray:
    """Boolean membership mask for rows of an (n, N) index matrix."""
    sites_matrix = np.asarray(sites_matrix)
    if sector is None:
        return np.ones(sites_matrix.shape[0], dtype=bool)
    if isinstance(sector, TotalSz):
        if basis is not Basis.SZ:
            raise ValueError("TotalSz sectors apply to the Sz basis")
        return VISIBLE_VALUES[sites_matrix].sum(axis=1) == sector.target
    if isinstance(sector, ParityXYZ):
        if basis is not Basis.XYZ:
            raise ValueError("ParityXYZ sectors apply to the XYZ basis")
        nx = (sites_matrix == 0).sum(axis=1)
        ny = (sites_matrix == 1).sum(axis=1)
        nz = (sites_matrix == 2).sum(axis=1)
        return (nx % 2 == sector.px) & (ny % 2 == sector.py) & (nz % 2 == sector.pz)
    raise TypeError(f"unknown sector kind: {sector!r}")


def validate_sector(n_sites: int, basis: Basis, sector: Sector) -> None:
    """Reject sectors that are inconsistent with the basis or site count."""
    if sector is None:
        return
    if isinstance(sector, TotalSz):
        if basis is not Basis.SZ:
            raise ValueError("TotalSz sectors apply to the Sz basis")
        if abs(sector.target) > n_sites:
            raise ValueError(f"total S^z target {sector.target} out of range for N={n_sites}")
    elif isinstance(sector, ParityXYZ):
        if basis is not Basis.XYZ:
            raise ValueError("ParityXYZ sectors apply to the XYZ basis")
        if (sector.px + sector.py + sector.pz) % 2 != n_sites % 2:
            raise ValueError("parities inconsistent with site count (must sum to N mod 2)")
    else:
        raise TypeError(f"unknown sector kind: {sector!r}")


def all_configs_matrix(n_sites: int) -> np.ndarray:
    """All 3^N configurations as an (3^N, N) int8 matrix in lexicographic order.

    Site 1 is the most significant digit, so row order coincides with the
    numeric order of the base-3 encodings.
    """
    if n_sites > MAX_ENUM_SITES:
        raise ValueError(f"N={n_sites} exceeds the enumeration budget (N <= {MAX_ENUM_SITES})")
    codes = np.arange(3**n_sites, dtype=np.int64)
    out = np.empty((codes.size, n_sites), dtype=np.int8)
    for j in range(n_sites - 1, -1, -1):
        out[:, j] = codes % 3
        codes //= 3
    return out


def sector_matrix(n_sites: int, basis: Basis, sector: Sector) -> np.ndarray:
    """Sector-restricted configuration matrix, rows in lexicographic order."""
    validate_sector(n_sites, basis, sector)
    full = all_configs_matrix(n_sites)
    return full[sector_mask(full, basis, sector)]


def enumerate_sector(n_sites: int, basis: Basis, sector: Sector) -> list[SpinConfig]:
    """Materialize every configuration of a sector in lexicographic order."""
    mat = sector_matrix(n_sites, basis, sector)
    return [SpinConfig(tuple(int(s) for s in row), basis) for row in mat]


def encode_configs(sites_matrix: np.ndarray) -> np.ndarray:
    """Base-3 integer codes of configuration rows (site 1 most significant)."""
    sites_matrix = np.asarray(sites_matrix, dtype=np.int64)
    n = sites_matrix.shape[-1]
    weights = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return sites_matrix @ weights
