"""Second-order correlation energy from occupation statistics of short circuits.

The energy splits as E = E0 + E1 + E2 against the frozen reference
spectrum.  E0 is the occupied-orbital energy sum.  E1 is the expectation
of the perturbation over the rotated reference, measured group by group
after each diagonalizing rotation.  E2 is assembled from residual matrix
elements r = <ref| V |double>, each extracted from three expectation
values: the same state interfered with one double excitation at quarter
and half turn.

All states are prepared by the same template: occupation prep, an
optional double excitation, the orbital-rotation circuit U(theta), and
one measurement rotation.  The orbital rotation carries the variational
parameters; everything before and after it is fixed per run, which is
what keeps the per-evaluation work linear in circuits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .chem import MolecularIntegrals, build_perturbation, orbital_energies, spin_orbitalize
from .circuits import (
    Circuit,
    cnot_depth,
    compile_orbital_rotation,
    double_excitation,
    prep_reference,
)
from .lowrank import coefficient_vector, factorize, one_body_group
from .simulator import (
    NoiseModel,
    ShotTable,
    StateVector,
    apply_circuit,
    expectation_with_variance,
    postselect,
    rng_stream,
    run,
    sample,
)

DEGENERACY_TOL = 1e-8
MAX_QUBITS = 12

_STREAM_SAMPLE = 0x5A
_STREAM_TRAJECTORY = 0x7A


@dataclass(frozen=True)
class ThetaParams:
    """Independent rotation angles, one per (odd occupied, odd virtual) pair.

    Each value is shared by the corresponding even-index pair so both spin
    channels rotate identically.
    """

    n_spin: int
    n_electrons: int
    values: tuple[float, ...]

    def __post_init__(self):
        if self.n_spin % 2 or self.n_electrons % 2:
            raise ValueError("spin orbital and electron counts must be even")
        if len(self.values) != len(self.pairs):
            raise ValueError("wrong number of parameters")

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return pair_indices(self.n_spin, self.n_electrons)

    @classmethod
    def zeros(cls, n_spin: int, n_electrons: int) -> "ThetaParams":
        n_pairs = len(pair_indices(n_spin, n_electrons))
        return cls(n_spin, n_electrons, (0.0,) * n_pairs)

    def with_values(self, values) -> "ThetaParams":
        return replace(self, values=tuple(float(v) for v in values))

    def to_matrix(self) -> np.ndarray:
        mat = np.zeros((self.n_spin, self.n_spin))
        for (p, q), v in zip(self.pairs, self.values):
            mat[p - 1, q - 1] = v
            mat[p, q] = v  # the paired spin channel
        return mat - mat.T


def pair_indices(n_spin: int, n_electrons: int) -> tuple[tuple[int, int], ...]:
    occ = range(1, n_electrons + 1, 2)
    virt = range(n_electrons + 1, n_spin + 1, 2)
    return tuple((p, q) for p in occ for q in virt)


@dataclass(frozen=True)
class DoubleExcitationIndex:
    i: int
    j: int
    a: int
    b: int

    def __post_init__(self):
        if not self.i < self.j < self.a < self.b:
            raise ValueError("indices must satisfy i < j < a < b")


def enumerate_doubles(n_spin: int, n_electrons: int) -> tuple[DoubleExcitationIndex, ...]:
    occ = range(1, n_electrons + 1)
    virt = range(n_electrons + 1, n_spin + 1)
    return tuple(
        DoubleExcitationIndex(i, j, a, b)
        for i in occ
        for j in occ
        if j > i
        for a in virt
        for b in virt
        if b > a
    )


@dataclass(frozen=True)
class EnergyBreakdown:
    e0: float
    e1: float
    e2: float
    variance: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def total(self) -> float:
        return self.e0 + self.e1 + self.e2


@dataclass(frozen=True)
class EstimatorConfig:
    mode: str = "exact"  # exact | shots
    shots: int = 100_000
    noise: NoiseModel | None = None
    postselect: bool = False
    truncation_tol: float = 1e-12
    seed: int = 1
    trajectories: int = 16

    def __post_init__(self):
        if self.mode not in ("exact", "shots"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if self.trajectories < 1:
            raise ValueError("trajectories must be positive")
        if self.noise is not None and self.mode == "exact":
            raise ValueError("gate noise requires shots mode")


@dataclass(frozen=True)
class ResourceSummary:
    n_qubits: int
    n_parameters: int
    n_doubles: int
    n_groups: int
    circuits_per_evaluation: int
    reference_depth: int
    residual_depth_max: int
    cnot_count_reference: int
    cnot_count_residual_max: int


class Estimator:
    """Energy estimates and orbital optimization for one active-space problem."""

    def __init__(self, mi: MolecularIntegrals, cfg: EstimatorConfig | None = None):
        self.cfg = cfg or EstimatorConfig()
        self.mi = mi
        self.si = spin_orbitalize(mi)
        self.n_qubits = self.si.n_spin
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"{self.n_qubits} spin orbitals exceed the {MAX_QUBITS}-qubit cap")
        self.n_electrons = mi.n_electrons
        self.eps = orbital_energies(self.si, self.n_electrons)
        self.e_core = mi.e_core
        self.e0 = float(self.eps[: self.n_electrons].sum())
        self.pairs = pair_indices(self.n_qubits, self.n_electrons)
        self.doubles = enumerate_doubles(self.n_qubits, self.n_electrons)
        self._deltas = np.array(
            [
                self.eps[d.i - 1] + self.eps[d.j - 1] - self.eps[d.a - 1] - self.eps[d.b - 1]
                for d in self.doubles
            ]
        )
        self._skip = np.abs(self._deltas) < DEGENERACY_TOL
        if self._skip.any():
            warnings.warn(
                "degenerate excitation denominators; those doubles are skipped",
                stacklevel=2,
            )

        theta0 = np.zeros((self.n_qubits, self.n_qubits))
        t0, _ = build_perturbation(self.si, self.eps, theta0)
        self._fp = factorize(t0, self.si.eri_spatial, self.cfg.truncation_tol)
        self._static_groups = self._fp.groups[1:]
        self._static_meas = tuple(
            compile_orbital_rotation(np.kron(g.rotation, np.eye(2)).T)
            for g in self._static_groups
        )
        self._static_coeffs = tuple(
            coefficient_vector(g, self.n_qubits) for g in self._static_groups
        )
        self.n_groups = 1 + len(self._static_groups)

        dim = 1 << self.n_qubits
        idx = np.arange(dim)
        self._occ = np.zeros((dim, self.n_qubits))
        for q in range(self.n_qubits):
            self._occ[:, q] = (idx >> (self.n_qubits - 1 - q)) & 1

        # column 0 is the bare reference; then quarter/half turn per double
        prep = prep_reference(self.n_qubits, self.n_electrons)
        self._column_gates = [prep.gates]
        ref = apply_circuit(prep, _zero_state(dim))
        cols = [ref]
        for d in self.doubles:
            for omega in (np.pi / 4, np.pi / 2):
                gates = double_excitation(d.i, d.j, d.a, d.b, omega)
                self._column_gates.append(prep.gates + gates)
                cols.append(apply_circuit(Circuit(self.n_qubits, gates), ref))
        self._base = np.stack(cols, axis=1)
        self.n_evaluations = 0

    # -- measurement plumbing ------------------------------------------------

    def _groups_at(self, theta_mat: np.ndarray):
        t_spin, _ = build_perturbation(self.si, self.eps, theta_mat)
        g0 = one_body_group(t_spin, self.si.eri_spatial)
        meas0 = compile_orbital_rotation(np.kron(g0.rotation, np.eye(2)).T)
        coeff0 = self._occ @ g0.linear
        meas = (meas0,) + self._static_meas
        coeffs = (coeff0,) + self._static_coeffs
        return meas, coeffs

    def _column_energies_exact(self, theta_mat: np.ndarray):
        meas, coeffs = self._groups_at(theta_mat)
        u_circ = compile_orbital_rotation(expm(theta_mat))
        psi = apply_circuit(u_circ, self._base)
        n_cols = self._base.shape[1]
        e_cols = np.zeros(n_cols)
        for meas_c, coeff in zip(meas, coeffs):
            phi = apply_circuit(meas_c, psi)
            e_cols += coeff @ (np.abs(phi) ** 2)
        return e_cols, np.zeros(n_cols), None

    def _column_energies_shots(self, theta_mat: np.ndarray):
        meas, coeffs = self._groups_at(theta_mat)
        u_circ = compile_orbital_rotation(expm(theta_mat))
        n_cols = self._base.shape[1]
        e_cols = np.zeros(n_cols)
        var_cols = np.zeros(n_cols)
        kept = []
        cfg = self.cfg
        noiseless_psi = None
        if cfg.noise is None:
            noiseless_psi = apply_circuit(u_circ, self._base)
        for l, meas_c in enumerate(meas):
            coeff_vec = coeffs[l]

            def coeff(occ, vec=coeff_vec):
                pos = int(np.dot(occ, 1 << np.arange(self.n_qubits - 1, -1, -1)))
                return float(vec[pos])

            if cfg.noise is None:
                phi = apply_circuit(meas_c, noiseless_psi)
                for col in range(n_cols):
                    rng = rng_stream(cfg.seed, _STREAM_SAMPLE, col, l)
                    table = sample(StateVector(phi[:, col], self.n_qubits), cfg.shots, rng=rng)
                    if cfg.postselect:
                        table = postselect(table, self.n_electrons)
                        kept.append(table.kept_fraction)
                    e, v = expectation_with_variance(table, coeff)
                    e_cols[col] += e
                    var_cols[col] += v
            else:
                for col in range(n_cols):
                    full = Circuit(
                        self.n_qubits,
                        self._column_gates[col] + u_circ.gates + meas_c.gates,
                    )
                    counts: dict[str, int] = {}
                    per = np.full(cfg.trajectories, cfg.shots // cfg.trajectories)
                    per[: cfg.shots % cfg.trajectories] += 1
                    for t in range(cfg.trajectories):
                        if per[t] == 0:
                            continue
                        rng = rng_stream(cfg.seed, _STREAM_TRAJECTORY, col, l, t)
                        state = run(full, noise=cfg.noise, rng=rng)
                        table_t = sample(state, int(per[t]), noise=cfg.noise, rng=rng)
                        for bits, n in table_t.counts.items():
                            counts[bits] = counts.get(bits, 0) + n
                    table = _merge_counts(counts, cfg.shots)
                    if cfg.postselect:
                        table = postselect(table, self.n_electrons)
                        kept.append(table.kept_fraction)
                    e, v = expectation_with_variance(table, coeff)
                    e_cols[col] += e
                    var_cols[col] += v
        kept_mean = float(np.mean(kept)) if kept else None
        return e_cols, var_cols, kept_mean

    def _assemble(self, e_cols, var_cols, kept_mean) -> EnergyBreakdown:
        e1 = float(e_cols[0])
        var_e1 = float(var_cols[0])
        e2 = 0.0
        var_e2 = 0.0
        residuals = []
        residual_vars = []
        for k, d in enumerate(self.doubles):
            if self._skip[k]:
                continue
            r = float(e_cols[1 + 2 * k] - 0.5 * e_cols[2 + 2 * k] - 0.5 * e1)
            var_r = float(var_cols[1 + 2 * k] + 0.25 * var_cols[2 + 2 * k] + 0.25 * var_e1)
            delta = self._deltas[k]
            e2 += r * r / delta
            var_e2 += (2.0 * r / delta) ** 2 * var_r
            residuals.append(((d.i, d.j, d.a, d.b), r))
            residual_vars.append(((d.i, d.j, d.a, d.b), var_r))
        diagnostics = {
            "residuals": tuple(residuals),
            "residual_variances": tuple(residual_vars),
            "var_e1": var_e1,
            "skipped_doubles": int(self._skip.sum()),
            "kept_fraction_mean": kept_mean,
        }
        return EnergyBreakdown(
            e0=self.e0, e1=e1, e2=float(e2), variance=var_e1 + var_e2, diagnostics=diagnostics
        )

    # -- public interface ----------------------------------------------------

    def mp2_energy(self, theta: ThetaParams) -> EnergyBreakdown:
        """E0 + E1 + E2 (electronic part; add mi.e_core for the total energy)."""
        self.n_evaluations += 1
        mat = theta.to_matrix()
        if self.cfg.mode == "exact":
            return self._assemble(*self._column_energies_exact(mat))
        return self._assemble(*self._column_energies_shots(mat))

    def estimate_e1(self, theta: ThetaParams) -> tuple[float, float]:
        bd = self.mp2_energy(theta)
        return bd.e1, bd.diagnostics["var_e1"]

    def estimate_residual(self, d: DoubleExcitationIndex, theta: ThetaParams) -> tuple[float, float]:
        bd = self.mp2_energy(theta)
        key = (d.i, d.j, d.a, d.b)
        for found, r in bd.diagnostics["residuals"]:
            if found == key:
                var = dict(bd.diagnostics["residual_variances"])[key]
                return r, var
        raise KeyError(f"no residual for {d} (degenerate denominator?)")

    def optimize(self, maxiter: int = 200) -> tuple[ThetaParams, EnergyBreakdown]:
        """Minimize the total electronic energy over the rotation angles."""
        theta0 = ThetaParams.zeros(self.n_qubits, self.n_electrons)
        n_par = len(theta0.values)

        def fun(x):
            return self.mp2_energy(theta0.with_values(x)).total

        if self.cfg.mode == "exact":
            step = 1e-4

            def grad(x):
                g = np.zeros(n_par)
                for k in range(n_par):
                    e = np.zeros(n_par)
                    e[k] = step
                    g[k] = (fun(x + e) - fun(x - e)) / (2.0 * step)
                return g

            res = minimize(
                fun,
                np.zeros(n_par),
                jac=grad,
                method="L-BFGS-B",
                options={"maxiter": maxiter, "ftol": 1e-10, "gtol": 1e-7},
            )
        else:
            res = minimize(
                fun,
                np.zeros(n_par),
                method="Nelder-Mead",
                options={"maxiter": maxiter, "xatol": 1e-3, "fatol": 1e-6},
            )
        theta = theta0.with_values(res.x)
        bd = self.mp2_energy(theta)
        bd.diagnostics.update(
            converged=bool(res.success),
            n_iterations=int(res.nit),
            n_evaluations=self.n_evaluations,
            optimizer_message=str(res.message),
        )
        return theta, bd

    def resource_summary(self) -> ResourceSummary:
        meas, _ = self._groups_at(np.zeros((self.n_qubits, self.n_qubits)))
        u_circ = compile_orbital_rotation(np.eye(self.n_qubits))
        ref_depth = 0
        ref_cnots = 0
        for meas_c in meas:
            rep = cnot_depth(Circuit(self.n_qubits, self._column_gates[0] + u_circ.gates + meas_c.gates))
            ref_depth = max(ref_depth, rep.cnot_depth)
            ref_cnots = max(ref_cnots, rep.cnot_count)
        res_depth = 0
        res_cnots = 0
        for k in range(len(self.doubles)):
            rep = cnot_depth(
                Circuit(
                    self.n_qubits,
                    self._column_gates[1 + 2 * k] + u_circ.gates + meas[0].gates,
                )
            )
            res_depth = max(res_depth, rep.cnot_depth)
            res_cnots = max(res_cnots, rep.cnot_count)
        n_cols = 1 + 2 * len(self.doubles)
        return ResourceSummary(
            n_qubits=self.n_qubits,
            n_parameters=len(self.pairs),
            n_doubles=len(self.doubles),
            n_groups=self.n_groups,
            circuits_per_evaluation=n_cols * self.n_groups,
            reference_depth=ref_depth,
            residual_depth_max=res_depth,
            cnot_count_reference=ref_cnots,
            cnot_count_residual_max=res_cnots,
        )


def _zero_state(dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[0] = 1.0
    return v


def _merge_counts(counts: dict[str, int], shots: int) -> ShotTable:
    return ShotTable(counts=counts, shots=shots)
