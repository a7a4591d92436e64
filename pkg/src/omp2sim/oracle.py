"""Independent classical references for validating the circuit pipeline.

Everything here is computed without the statevector simulator or the
measurement-group machinery: exact diagonalization from the fermionic
Hamiltonian, the closed-form second-order correlation energy, a dense
gate-by-gate circuit unitary, and the packaged reference energy tables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .chem import ActiveSpaceSpec, SpinIntegrals
from .circuits import Circuit, Gate
from .jw import hamiltonian, jw_map, operator_matrix

MAX_DENSE_CIRCUIT_QUBITS = 8
_ORDERING_SLACK = 1e-10


# ---------------------------------------------------------------------------
# packaged reference energies


@dataclass(frozen=True)
class ReferencePoint:
    distance_bohr: float
    e_hf: float
    e_mp2: float
    e_omp2: float
    e_fci: float
    orbital_energies: tuple[float, ...]
    fcidump: str


@dataclass(frozen=True)
class MoleculeReference:
    name: str
    n_electrons: int
    n_spatial: int
    active_space: ActiveSpaceSpec
    points: tuple[ReferencePoint, ...]

    def point_at(self, distance: float, atol: float = 1e-9) -> ReferencePoint:
        for pt in self.points:
            if abs(pt.distance_bohr - distance) <= atol:
                return pt
        raise KeyError(f"{self.name}: no reference at {distance} bohr")


@dataclass(frozen=True)
class ReferenceValues:
    source: str
    molecules: dict[str, MoleculeReference]

    @classmethod
    def load(cls, path=None) -> "ReferenceValues":
        if path is None:
            ref = resources.files("omp2sim.data") / "reference_values.json"
            raw = json.loads(ref.read_text())
        else:
            with open(path) as fh:
                raw = json.load(fh)
        if raw.get("schema") != 1:
            raise ValueError("unsupported reference table schema")
        molecules = {}
        for name, body in raw["molecules"].items():
            spec = ActiveSpaceSpec(
                frozen_occupied=tuple(body["active_space"]["frozen_occupied"]),
                deleted_virtual=tuple(body["active_space"]["deleted_virtual"]),
            )
            points = []
            for rec in body["points"]:
                pt = ReferencePoint(
                    distance_bohr=rec["distance_bohr"],
                    e_hf=rec["e_hf"],
                    e_mp2=rec["e_mp2"],
                    e_omp2=rec["e_omp2"],
                    e_fci=rec["e_fci"],
                    orbital_energies=tuple(rec["orbital_energies"]),
                    fcidump=rec["fcidump"],
                )
                _check_ordering(name, pt)
                points.append(pt)
            molecules[name] = MoleculeReference(
                name=name,
                n_electrons=body["n_electrons"],
                n_spatial=body["n_spatial"],
                active_space=spec,
                points=tuple(points),
            )
        return cls(source=raw["source"], molecules=molecules)


def _check_ordering(name: str, pt: ReferencePoint) -> None:
    chain = (pt.e_fci, pt.e_omp2, pt.e_mp2, pt.e_hf)
    for lo, hi in zip(chain, chain[1:]):
        if lo > hi + _ORDERING_SLACK:
            raise ValueError(
                f"{name} at {pt.distance_bohr}: reference energies out of order"
            )


def fixture_path(fcidump_name: str):
    return resources.files("omp2sim.data") / "fixtures" / fcidump_name


# ---------------------------------------------------------------------------
# exact diagonalization


def _number_block(op, n_qubits: int, n_electrons: int) -> np.ndarray:
    """Hamiltonian restricted to the fixed particle-number subspace."""
    dim = 1 << n_qubits
    idx = np.arange(dim)
    weights = np.zeros(dim, dtype=np.int64)
    for q in range(n_qubits):
        weights += (idx >> q) & 1
    block = np.where(weights == n_electrons)[0]
    pos = -np.ones(dim, dtype=np.int64)
    pos[block] = np.arange(block.size)
    mat = np.zeros((block.size, block.size), dtype=complex)
    for ps in op.pauli_strings():
        flip = 0
        zmask = 0
        n_y = 0
        for q, pauli in enumerate(ps.letters, start=1):
            bit = 1 << (n_qubits - q)
            if pauli in ("X", "Y"):
                flip |= bit
            if pauli in ("Z", "Y"):
                zmask |= bit
            if pauli == "Y":
                n_y += 1
        rows = block ^ flip
        keep = pos[rows] >= 0
        cols_k = block[keep]
        rows_k = rows[keep]
        par = np.zeros(cols_k.size, dtype=np.int64)
        masked = cols_k & zmask
        for q in range(n_qubits):
            par += (masked >> q) & 1
        signs = 1.0 - 2.0 * (par % 2)
        np.add.at(mat, (pos[rows_k], pos[cols_k]), ps.coefficient * (1j**n_y) * signs)
    return mat


def fci_energy(si: SpinIntegrals, e_core: float, n_electrons: int) -> float:
    op = hamiltonian(si)
    mat = _number_block(op, si.n_spin, n_electrons)
    if np.abs(mat.imag).max() > 1e-10:
        raise ValueError("number-block Hamiltonian is not real")
    return float(np.linalg.eigvalsh(mat.real).min()) + e_core


def hartree_fock_energy(si: SpinIntegrals, e_core: float, n_electrons: int) -> float:
    occ = range(1, n_electrons + 1)
    e = sum(si.h1s[i - 1, i - 1] for i in occ)
    for i in occ:
        for j in occ:
            e += 0.5 * (si.v2s(i, j, j, i) - si.v2s(i, j, i, j))
    return float(e) + e_core


def canonical_mp2(si: SpinIntegrals, eps: np.ndarray, n_electrons: int) -> float:
    """Closed-form second-order correlation from antisymmetrized elements."""
    n = si.n_spin
    occ = range(1, n_electrons + 1)
    virt = range(n_electrons + 1, n + 1)
    e2 = 0.0
    for i in occ:
        for j in occ:
            if j <= i:
                continue
            for a in virt:
                for b in virt:
                    if b <= a:
                        continue
                    num = si.v2s(i, j, b, a) - si.v2s(i, j, a, b)
                    if abs(num) < 1e-14:
                        continue
                    denom = eps[i - 1] + eps[j - 1] - eps[a - 1] - eps[b - 1]
                    e2 += num * num / denom
    return float(e2)


# ---------------------------------------------------------------------------
# dense circuit unitary, built gate by gate without the simulator kernels


def _dense_gate(g: Gate, n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    cols = np.arange(dim)
    mat = np.zeros((dim, dim), dtype=complex)

    def bit(q: int) -> int:
        return 1 << (n_qubits - q)

    if g.kind == "X":
        mat[cols ^ bit(g.qubits[0]), cols] = 1.0
    elif g.kind == "H":
        b = bit(g.qubits[0])
        signs = 1.0 - 2.0 * ((cols & b) > 0)
        mat[cols, cols] = signs / np.sqrt(2.0)
        mat[cols ^ b, cols] = 1.0 / np.sqrt(2.0)
    elif g.kind == "RY":
        b = bit(g.qubits[0])
        c, s = np.cos(g.angle / 2.0), np.sin(g.angle / 2.0)
        mat[cols, cols] = c
        set_mask = (cols & b) > 0
        # |0> -> c|0> + s|1>, |1> -> c|1> - s|0>
        mat[cols ^ b, cols] = np.where(set_mask, -s, s)
    elif g.kind == "RZ":
        b = bit(g.qubits[0])
        phase = np.where((cols & b) > 0, np.exp(1j * g.angle / 2.0), np.exp(-1j * g.angle / 2.0))
        mat[cols, cols] = phase
    elif g.kind == "CNOT":
        c_b, t_b = bit(g.qubits[0]), bit(g.qubits[1])
        rows = np.where((cols & c_b) > 0, cols ^ t_b, cols)
        mat[rows, cols] = 1.0
    elif g.kind == "CZ":
        c_b, t_b = bit(g.qubits[0]), bit(g.qubits[1])
        both = ((cols & c_b) > 0) & ((cols & t_b) > 0)
        mat[cols, cols] = np.where(both, -1.0, 1.0)
    elif g.kind == "MULTI_CRY":
        t_b = bit(g.target)
        ctrl_mask = 0
        for q in g.controls:
            ctrl_mask |= bit(q)
        active = (cols & ctrl_mask) == ctrl_mask
        c, s = np.cos(g.angle / 2.0), np.sin(g.angle / 2.0)
        set_mask = (cols & t_b) > 0
        mat[cols, cols] = np.where(active, c, 1.0)
        off = np.where(set_mask, -s, s)
        mat[cols[active] ^ t_b, cols[active]] = off[active]
    else:
        raise ValueError(f"unknown gate kind {g.kind}")
    return mat


def circuit_unitary(c: Circuit) -> np.ndarray:
    if c.n_qubits > MAX_DENSE_CIRCUIT_QUBITS:
        raise ValueError("dense circuit unitary capped at 8 qubits")
    u = np.eye(1 << c.n_qubits, dtype=complex)
    for g in c.gates:
        u = _dense_gate(g, c.n_qubits) @ u
    return u


def excitation_generator_unitary(terms, angle: float, n_qubits: int) -> np.ndarray:
    """expm of the antihermitian combination angle * (T - T^dagger)."""
    from scipy.linalg import expm

    op = jw_map(terms, n_qubits)
    mat = operator_matrix(op, n_qubits)
    return expm(angle * (mat - mat.conj().T))


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max deviation after modding out a global phase."""
    flat_a = a.ravel()
    anchor = int(np.argmax(np.abs(flat_a)))
    ratio = b.ravel()[anchor] / flat_a[anchor]
    mag = abs(ratio)
    if mag < 1e-12:
        return float(np.abs(a - b).max())
    return float(np.abs(a * (ratio / mag) - b).max())
