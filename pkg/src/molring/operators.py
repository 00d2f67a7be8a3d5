"""Composite Hilbert spaces and sparse operator construction.

Two layout flavors share one operator interface (scipy CSR matrices):

* ``HilbertLayout`` — a full tensor product of two-level and truncated boson
  factors. Basis ordering is little-endian: the first subsystem varies
  fastest, so the global matrix is kron(op_last, ..., op_first).
* ``RestrictedLayout`` — an occupation-filtered composite basis (electronic
  occupation window, total-vibrational-quantum cap). Operators are built
  from their matrix elements; amplitudes leading out of the kept set are
  dropped, which is exact for downward cascades and the standard truncation
  for upward ladders.

Electronic basis ordering is |g> = 0, |e> = 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix, identity as sparse_identity, kron as sparse_kron

from .errors import ConfigurationError, InvalidParameterError

TWO_LEVEL = "two_level"
BOSON = "boson"

_SIGMA_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class HilbertLayout:
    """Ordered list of (kind, dim) subsystem factors."""

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for kind, dim in self.subsystems:
            if kind not in (TWO_LEVEL, BOSON):
                raise ConfigurationError(f"unknown subsystem kind {kind!r}")
            if kind == TWO_LEVEL and dim != 2:
                raise ConfigurationError("two_level subsystems have dim 2")
            if kind == BOSON and dim < 2:
                raise ConfigurationError("boson subsystems need dim >= 2 (n_max >= 1)")

    @classmethod
    def build(cls, n_two_level: int, n_boson: int = 0, n_max: int = 1) -> "HilbertLayout":
        subs = [(TWO_LEVEL, 2)] * n_two_level + [(BOSON, n_max + 1)] * n_boson
        return cls(tuple(subs))

    @property
    def total_dim(self) -> int:
        d = 1
        for _, dim in self.subsystems:
            d *= dim
        return d

    def kind(self, site: int) -> str:
        return self.subsystems[site][0]

    def dim(self, site: int) -> int:
        return self.subsystems[site][1]

    def index_of(self, occupations: Sequence[int]) -> int:
        """Basis index of a product state, first subsystem varying fastest."""
        if len(occupations) != len(self.subsystems):
            raise InvalidParameterError("occupation list length mismatch")
        idx = 0
        stride = 1
        for occ, (_, dim) in zip(occupations, self.subsystems):
            if not 0 <= occ < dim:
                raise InvalidParameterError(f"occupation {occ} out of range for dim {dim}")
            idx += occ * stride
            stride *= dim
        return idx


def embed(layout: HilbertLayout, site: int, local: np.ndarray) -> csr_matrix:
    """Lift a single-subsystem matrix to the full space."""
    ops = []
    for s, (_, dim) in enumerate(layout.subsystems):
        ops.append(csr_matrix(local) if s == site else sparse_identity(dim, format="csr"))
    out = ops[-1]
    for op in ops[-2::-1]:
        out = sparse_kron(out, op, format="csr")
    return out.tocsr()


def lowering_operator(layout: HilbertLayout, site: int) -> csr_matrix:
    """sigma = |g><e| on a two-level subsystem, identity elsewhere."""
    if layout.kind(site) != TWO_LEVEL:
        raise ConfigurationError(f"site {site} is not a two-level subsystem")
    return embed(layout, site, _SIGMA_LOWER)


def boson_annihilation(layout: HilbertLayout, site: int) -> csr_matrix:
    """Truncated annihilation operator with sqrt(n) on the superdiagonal."""
    if layout.kind(site) != BOSON:
        raise ConfigurationError(f"site {site} is not a boson subsystem")
    dim = layout.dim(site)
    local = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    return embed(layout, site, local)


def number_operator(layout: HilbertLayout, site: int) -> csr_matrix:
    if layout.kind(site) == TWO_LEVEL:
        s = lowering_operator(layout, site)
    else:
        s = boson_annihilation(layout, site)
    return (adjoint(s) @ s).tocsr()


def adjoint(op: csr_matrix) -> csr_matrix:
    return op.conj().T.tocsr()


def expectation(rho: np.ndarray, op: csr_matrix | np.ndarray) -> complex:
    """Tr(rho @ op) for dense rho and sparse or dense op."""
    if isinstance(op, np.ndarray):
        return complex(np.trace(rho @ op))
    # Tr(O rho) = sum_ij O_ij rho_ji
    return complex(op.multiply(rho.T).sum())


def basis_state(layout: HilbertLayout, occupations: Sequence[int]) -> np.ndarray:
    psi = np.zeros(layout.total_dim, dtype=complex)
    psi[layout.index_of(occupations)] = 1.0
    return psi


def pure_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise InvalidParameterError("zero state vector")
    psi = psi / nrm
    return np.outer(psi, psi.conj())


@dataclass
class DensityDiagnostics:
    trace_deviation: float
    hermiticity_deviation: float
    min_eigenvalue: float

    def within(self, trace_tol=1e-9, herm_tol=1e-12, eig_tol=-1e-8) -> bool:
        return (self.trace_deviation <= trace_tol
                and self.hermiticity_deviation <= herm_tol
                and self.min_eigenvalue >= eig_tol)


def density_diagnostics(rho: np.ndarray, compute_spectrum: bool = True) -> DensityDiagnostics:
    tr_dev = abs(np.trace(rho) - 1.0)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if compute_spectrum:
        w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        wmin = float(w.min())
    else:
        wmin = 0.0
    return DensityDiagnostics(float(tr_dev), herm, wmin)


def validate_density_matrix(rho: np.ndarray, trace_tol=1e-9, herm_tol=1e-12,
                            eig_tol=-1e-8) -> DensityDiagnostics:
    diag = density_diagnostics(rho)
    if not diag.within(trace_tol, herm_tol, eig_tol):
        raise InvalidParameterError(
            f"invalid density matrix: trace dev {diag.trace_deviation:.2e}, "
            f"hermiticity {diag.hermiticity_deviation:.2e}, "
            f"min eigenvalue {diag.min_eigenvalue:.2e}")
    return diag


# ---------------------------------------------------------------------------
# Occupation-restricted composite spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RestrictedLayout:
    """Composite basis of (electronic occupations, vibrational occupations)
    filtered by an electronic-occupation window and a total-vibration cap.

    ``n_sites`` two-level sites; if ``n_modes`` > 0 each mode is truncated at
    ``n_max`` quanta per mode and ``vib_total_max`` quanta overall.
    """

    n_sites: int
    elec_min: int = 0
    elec_max: int | None = None
    n_modes: int = 0
    n_max: int = 0
    vib_total_max: int | None = None
    states: tuple = field(init=False, repr=False)
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        emax = self.n_sites if self.elec_max is None else self.elec_max
        if not 0 <= self.elec_min <= emax <= self.n_sites:
            raise ConfigurationError("bad electronic occupation window")
        elec = [e for e in itertools.product((0, 1), repeat=self.n_sites)
                if self.elec_min <= sum(e) <= emax]
        if self.n_modes:
            cap = self.vib_total_max if self.vib_total_max is not None else self.n_modes * self.n_max
            vib = [v for v in itertools.product(range(self.n_max + 1), repeat=self.n_modes)
                   if sum(v) <= cap]
        else:
            vib = [()]
        states = tuple((e, v) for e in elec for v in vib)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "index", {s: i for i, s in enumerate(states)})

    @property
    def total_dim(self) -> int:
        return len(self.states)

    def index_of(self, elec: Sequence[int], vib: Sequence[int] = ()) -> int:
        key = (tuple(elec), tuple(vib))
        if key not in self.index:
            raise InvalidParameterError(f"state {key} outside the restricted basis")
        return self.index[key]

    def _build(self, action) -> csr_matrix:
        rows, cols, vals = [], [], []
        for s in self.states:
            col = self.index[s]
            for s2, amp in action(s):
                row = self.index.get(s2)
                if row is not None:
                    rows.append(row)
                    cols.append(col)
                    vals.append(amp)
        return csr_matrix((vals, (rows, cols)),
                          shape=(self.total_dim, self.total_dim), dtype=complex)

    def lowering(self, site: int) -> csr_matrix:
        def action(s):
            e, v = s
            if e[site] == 1:
                e2 = e[:site] + (0,) + e[site + 1:]
                return [((e2, v), 1.0)]
            return []
        return self._build(action)

    def annihilation(self, mode: int) -> csr_matrix:
        def action(s):
            e, v = s
            if v[mode] >= 1:
                v2 = v[:mode] + (v[mode] - 1,) + v[mode + 1:]
                return [((e, v2), np.sqrt(v[mode]))]
            return []
        return self._build(action)

    def elec_number(self, site: int) -> csr_matrix:
        return self._build(lambda s: [(s, 1.0)] if s[0][site] == 1 else [])

    def total_elec_number(self) -> csr_matrix:
        return self._build(lambda s: [(s, float(sum(s[0])))])

    def basis_state(self, elec: Sequence[int], vib: Sequence[int] = ()) -> np.ndarray:
        psi = np.zeros(self.total_dim, dtype=complex)
        psi[self.index_of(elec, vib)] = 1.0
        return psi
