"""Molecular integral ingestion and Hamiltonian assembly.

Reads FCIDUMP files into spatial-orbital integral tensors, applies
frozen-core / deleted-virtual reduction, expands to spin orbitals, and
builds the orbital energies and the one-body perturbation matrix that
the rest of the pipeline consumes.

Conventions (fixed here, relied on everywhere else):
  * spatial ERI stored chemist style, (pq|rs), full 8-fold symmetry;
  * spin orbitals interleave: spatial m -> spin 2m-1 (alpha), 2m (beta),
    1-indexed at the API surface;
  * the two-body operator is (1/2) sum_pqrs h_pqrs a+_p a+_q a_r a_s
    with h_pqrs = (ps|qr) delta(sp,ss) delta(sq,sr).
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

SYM_TOL = 1e-12
DUPLICATE_TOL = 1e-10


class FcidumpError(ValueError):
    """Malformed FCIDUMP content."""


@dataclass(frozen=True)
class MolecularIntegrals:
    """Spatial-orbital integrals for one closed-shell problem."""

    n_spatial: int
    e_core: float
    h1: np.ndarray
    eri: np.ndarray
    n_electrons: int
    ms2: int = 0

    def __post_init__(self):
        m = self.n_spatial
        if self.h1.shape != (m, m) or self.eri.shape != (m, m, m, m):
            raise ValueError("integral tensor shape mismatch")
        if np.abs(self.h1 - self.h1.T).max() > SYM_TOL:
            raise ValueError("h1 not symmetric")
        for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
            if np.abs(self.eri - self.eri.transpose(perm)).max() > SYM_TOL:
                raise ValueError("eri lacks 8-fold symmetry")
        if self.n_electrons % 2 != 0:
            raise ValueError("restricted closed-shell scope: n_electrons must be even")
        if self.ms2 != 0:
            raise ValueError("ms2 must be 0")
        self.h1.setflags(write=False)
        self.eri.setflags(write=False)


@dataclass(frozen=True)
class ActiveSpaceSpec:
    """Orbitals to drop: doubly occupied frozen cores and inactive virtuals (1-based)."""

    frozen_occupied: tuple[int, ...] = ()
    deleted_virtual: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "frozen_occupied", tuple(self.frozen_occupied))
        object.__setattr__(self, "deleted_virtual", tuple(self.deleted_virtual))
        if any(p < 1 for p in self.frozen_occupied + self.deleted_virtual):
            raise ValueError("orbital indices are 1-based")
        if set(self.frozen_occupied) & set(self.deleted_virtual):
            raise ValueError("frozen and deleted lists overlap")


@dataclass(frozen=True)
class SpinIntegrals:
    """Spin-orbital view over the spatial tensors (alpha/beta interleaved)."""

    n_spin: int
    h1s: np.ndarray
    eri_spatial: np.ndarray

    def __post_init__(self):
        self.h1s.setflags(write=False)

    def v2s(self, p: int, q: int, r: int, s: int) -> float:
        """Element h_pqrs of (1/2) h_pqrs a+_p a+_q a_r a_s (1-based spin indices)."""
        mp, sp = divmod(p - 1, 2)
        mq, sq = divmod(q - 1, 2)
        mr, sr = divmod(r - 1, 2)
        ms, ss = divmod(s - 1, 2)
        if sp != ss or sq != sr:
            return 0.0
        return float(self.eri_spatial[mp, ms, mq, mr])


_HEADER_KV = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([-0-9, ]+)")


def parse_fcidump(source) -> MolecularIntegrals:
    """source: a file path, an importlib resource, or the raw text itself."""
    if hasattr(source, "read_text"):
        text = source.read_text()
    elif isinstance(source, str) and "\n" not in source:
        with open(source) as fh:
            text = fh.read()
    else:
        text = source
    lines = text.splitlines()
    header_lines = []
    body_start = 0
    for ln, line in enumerate(lines):
        header_lines.append(line)
        if "&END" in line.upper() or "/" == line.strip():
            body_start = ln + 1
            break
    else:
        raise FcidumpError("no &END terminator in header")

    header = " ".join(header_lines)
    fields = {}
    for key, val in _HEADER_KV.findall(header):
        fields[key.upper()] = val
    if "NORB" not in fields or "NELEC" not in fields:
        raise FcidumpError("header missing NORB or NELEC")
    m = int(fields["NORB"].split(",")[0])
    n_electrons = int(fields["NELEC"].split(",")[0])
    ms2 = int(fields.get("MS2", "0").split(",")[0])

    h1 = np.zeros((m, m))
    eri = np.zeros((m, m, m, m))
    e_core = 0.0
    seen_h1 = np.zeros((m, m), dtype=bool)
    seen_eri = np.zeros((m, m, m, m), dtype=bool)

    for ln in range(body_start, len(lines)):
        parts = lines[ln].split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FcidumpError(f"line {ln + 1}: expected 'value i j k l'")
        try:
            val = float(parts[0])
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError as exc:
            raise FcidumpError(f"line {ln + 1}: {exc}") from None
        if min(i, j, k, l) < 0 or max(i, j, k, l) > m:
            raise FcidumpError(f"line {ln + 1}: orbital index out of range")
        if i == 0 and j == 0 and k == 0 and l == 0:
            e_core = val
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"line {ln + 1}: bad one-electron record")
            a, b = i - 1, j - 1
            for x, y in ((a, b), (b, a)):
                if seen_h1[x, y] and abs(h1[x, y] - val) > DUPLICATE_TOL:
                    raise FcidumpError(f"line {ln + 1}: conflicting duplicate h1 element")
                h1[x, y] = val
                seen_h1[x, y] = True
        else:
            if min(i, j, k, l) == 0:
                raise FcidumpError(f"line {ln + 1}: bad two-electron record")
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            for w, x in ((a, b), (b, a)):
                for y, z in ((c, d), (d, c)):
                    for (p, q), (r, s) in (((w, x), (y, z)), ((y, z), (w, x))):
                        if seen_eri[p, q, r, s] and abs(eri[p, q, r, s] - val) > DUPLICATE_TOL:
                            raise FcidumpError(f"line {ln + 1}: conflicting duplicate eri element")
                        eri[p, q, r, s] = val
                        seen_eri[p, q, r, s] = True

    try:
        return MolecularIntegrals(
            n_spatial=m, e_core=e_core, h1=h1, eri=eri, n_electrons=n_electrons, ms2=ms2
        )
    except ValueError as exc:
        raise FcidumpError(str(exc)) from exc


def freeze_active_space(mi: MolecularIntegrals, spec: ActiveSpaceSpec) -> MolecularIntegrals:
    """Fold frozen doubly-occupied orbitals into h1/e_core, drop inactive virtuals."""
    m = mi.n_spatial
    frozen = [p - 1 for p in spec.frozen_occupied]
    deleted = [p - 1 for p in spec.deleted_virtual]
    for p in frozen + deleted:
        if not 0 <= p < m:
            raise ValueError("active-space index out of range")
    active = [p for p in range(m) if p not in frozen and p not in deleted]
    if not active:
        raise ValueError("no active orbitals left")
    n_electrons = mi.n_electrons - 2 * len(frozen)
    if n_electrons <= 0:
        raise ValueError("no active electrons left")

    e_core = mi.e_core
    for i in frozen:
        e_core += 2.0 * mi.h1[i, i]
        for j in frozen:
            e_core += 2.0 * mi.eri[i, i, j, j] - mi.eri[i, j, j, i]

    h1 = mi.h1[np.ix_(active, active)].copy()
    for i in frozen:
        h1 += 2.0 * mi.eri[np.ix_(active, active, [i], [i])][:, :, 0, 0]
        h1 -= mi.eri[np.ix_(active, [i], [i], active)][:, 0, 0, :]

    eri = mi.eri[np.ix_(active, active, active, active)].copy()
    return MolecularIntegrals(
        n_spatial=len(active),
        e_core=e_core,
        h1=h1,
        eri=eri,
        n_electrons=n_electrons,
        ms2=mi.ms2,
    )


def spin_orbitalize(mi: MolecularIntegrals) -> SpinIntegrals:
    n = 2 * mi.n_spatial
    h1s = np.kron(mi.h1, np.eye(2))
    return SpinIntegrals(n_spin=n, h1s=h1s, eri_spatial=mi.eri)


def orbital_energies(si: SpinIntegrals, n_electrons: int) -> np.ndarray:
    """eps_p = h_pp + sum over occupied i of (h_piip - h_pipi)."""
    n = si.n_spin
    eps = np.empty(n)
    for p in range(1, n + 1):
        val = si.h1s[p - 1, p - 1]
        for i in range(1, n_electrons + 1):
            val += si.v2s(p, i, i, p) - si.v2s(p, i, p, i)
        eps[p - 1] = val
    if np.abs(eps[0::2] - eps[1::2]).max() > 1e-10:
        raise ValueError("spin degeneracy violated")
    if n_electrons and n_electrons < n:
        if eps[:n_electrons].max() > eps[n_electrons:].min() + 1e-12:
            warnings.warn("orbital energies are not aufbau ordered", stacklevel=2)
    eps.setflags(write=False)
    return eps


def build_perturbation(
    si: SpinIntegrals, eps: np.ndarray, theta: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One-body T(theta) = h1s - U diag(eps) U^T with U = exp(theta), plus the
    (theta-independent) two-body tensor.  theta is the expanded antisymmetric
    spin-orbital matrix."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (si.n_spin, si.n_spin):
        raise ValueError("theta matrix shape mismatch")
    if np.abs(theta + theta.T).max() > 1e-10:
        raise ValueError("theta matrix must be antisymmetric")
    u = expm(theta)
    t = si.h1s - u @ np.diag(eps) @ u.T
    return t, si.eri_spatial
