"""Diagonal measurement grouping of the perturbation operator.

The two-body operator (1/2) sum (pq|rs) E_pq E_rs is rewritten as a sum
of basis-rotated squares of spatial number operators: eigendecompose the
M^2 x M^2 supermatrix A[(pq),(rs)] = (pq|rs), then diagonalize each kept
eigenvector as a symmetric M x M matrix.  The operator-reordering
remainder -1/2 sum_r (pr|rq) joins the one-body matrix, which
diagonalizes into group 0.  Each group is measurable as plain occupation
statistics after its rotation circuit.

reconstruction_error records the supermatrix spectral norm of the
truncated remainder (the largest dropped |eigenvalue|); the one- and
two-body rebuilds are otherwise exact by construction.  The dense
operator-level check lives in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPIN_BLOCK_TOL = 1e-10


@dataclass(frozen=True)
class MeasurementGroup:
    rotation: np.ndarray  # spatial M x M, orthogonal, det +1
    linear: np.ndarray  # length N spin vector (group 0) or zeros
    quadratic: np.ndarray  # N x N symmetric spin matrix (groups >= 1) or zeros
    label: int

    def __post_init__(self):
        m = self.rotation.shape[0]
        if np.abs(self.rotation.T @ self.rotation - np.eye(m)).max() > 1e-10:
            raise ValueError("group rotation not orthogonal")
        if np.linalg.det(self.rotation) < 0.0:
            raise ValueError("group rotation must have det +1")
        if np.abs(self.quadratic - self.quadratic.T).max() > 1e-12:
            raise ValueError("quadratic coefficients not symmetric")
        for arr in (self.rotation, self.linear, self.quadratic):
            arr.setflags(write=False)


@dataclass(frozen=True)
class FactorizedPerturbation:
    groups: tuple[MeasurementGroup, ...]
    truncation_tol: float
    reconstruction_error: float


def _spatial_block(mat_spin: np.ndarray) -> np.ndarray:
    # interleaved spin lift means the alpha and beta blocks are the
    # even/even and odd/odd strides
    alpha = mat_spin[0::2, 0::2]
    beta = mat_spin[1::2, 1::2]
    if np.abs(alpha - beta).max() > SPIN_BLOCK_TOL:
        raise ValueError("one-body matrix has unequal spin blocks")
    if np.abs(mat_spin[0::2, 1::2]).max() > SPIN_BLOCK_TOL:
        raise ValueError("one-body matrix couples spins")
    return 0.5 * (alpha + beta)


def _det_plus_one(o: np.ndarray) -> np.ndarray:
    if np.linalg.det(o) < 0.0:
        o = o.copy()
        o[:, 0] = -o[:, 0]
    return o


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    for comp in v:
        if abs(comp) > 1e-12:
            return v if comp > 0 else -v
    return v


def spin_lift(vec_spatial: np.ndarray) -> np.ndarray:
    return np.repeat(vec_spatial, 2)


def two_body_groups(eri: np.ndarray, tol: float) -> tuple[MeasurementGroup, ...]:
    """Groups l >= 1; independent of the one-body matrix, hence of theta."""
    if tol <= 0.0:
        raise ValueError("truncation tol must be positive")
    m = eri.shape[0]
    super_a = eri.reshape(m * m, m * m)
    if np.abs(super_a - super_a.T).max() > 1e-10:
        raise ValueError("eri supermatrix not symmetric")
    w, v = np.linalg.eigh(super_a)
    order = np.argsort(-np.abs(w), kind="stable")
    groups = []
    label = 1
    for idx in order:
        if abs(w[idx]) <= tol:
            continue
        vec = _canonical_sign(v[:, idx])
        g_mat = vec.reshape(m, m)
        g_mat = 0.5 * (g_mat + g_mat.T)
        f, o = np.linalg.eigh(g_mat)
        o = _det_plus_one(o)
        f_spin = spin_lift(f)
        quadratic = 0.5 * w[idx] * np.outer(f_spin, f_spin)
        groups.append(
            MeasurementGroup(
                rotation=o,
                linear=np.zeros(2 * m),
                quadratic=quadratic,
                label=label,
            )
        )
        label += 1
    return tuple(groups)


def one_body_group(t_spin: np.ndarray, eri: np.ndarray) -> MeasurementGroup:
    """Group 0: T plus the reordering correction -1/2 sum_r (pr|rq), diagonalized."""
    t_spatial = _spatial_block(t_spin)
    correction = -0.5 * np.einsum("prrq->pq", eri)
    d, o = np.linalg.eigh(t_spatial + correction)
    o = _det_plus_one(o)
    m = t_spatial.shape[0]
    return MeasurementGroup(
        rotation=o, linear=spin_lift(d), quadratic=np.zeros((2 * m, 2 * m)), label=0
    )


def factorize(t_spin: np.ndarray, eri: np.ndarray, tol: float) -> FactorizedPerturbation:
    t_spin = np.asarray(t_spin, dtype=float)
    if np.abs(t_spin - t_spin.T).max() > 1e-10:
        raise ValueError("one-body matrix not symmetric")
    groups = (one_body_group(t_spin, eri),) + two_body_groups(eri, tol)
    m = eri.shape[0]
    super_a = eri.reshape(m * m, m * m)
    w = np.linalg.eigvalsh(super_a)
    dropped = np.abs(w)[np.abs(w) <= tol]
    err = float(dropped.max()) if dropped.size else 0.0
    return FactorizedPerturbation(
        groups=groups, truncation_tol=tol, reconstruction_error=err
    )


def refresh_one_body(fp: FactorizedPerturbation, t_spin: np.ndarray, eri: np.ndarray) -> FactorizedPerturbation:
    """New factorization for a changed one-body part; groups >= 1 are reused."""
    return FactorizedPerturbation(
        groups=(one_body_group(t_spin, eri),) + fp.groups[1:],
        truncation_tol=fp.truncation_tol,
        reconstruction_error=fp.reconstruction_error,
    )


def group_expectation_coefficients(g: MeasurementGroup):
    """b -> sum_p d_p b_p + sum_pq d_pq b_p b_q over occupation arrays."""

    def coeff(occ: np.ndarray) -> float:
        occ = np.asarray(occ, dtype=float)
        return float(g.linear @ occ + occ @ g.quadratic @ occ)

    return coeff


def coefficient_vector(g: MeasurementGroup, n_qubits: int) -> np.ndarray:
    """coeff evaluated on every bitstring, ordered by basis index."""
    dim = 1 << n_qubits
    idx = np.arange(dim)
    occ = np.zeros((dim, n_qubits))
    for q in range(n_qubits):
        occ[:, q] = (idx >> (n_qubits - 1 - q)) & 1
    return occ @ g.linear + np.einsum("bp,pq,bq->b", occ, g.quadratic, occ)
