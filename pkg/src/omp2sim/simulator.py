"""Statevector execution, shot sampling, noise, and post-selection.

Noise is a stochastic Pauli trajectory model: after each gate, with
probability p1 (one-qubit) or p2 (two-qubit), a uniformly random
non-identity Pauli acts on the gate's qubits; measurement flips each
read bit with probability p_readout.  Multi-controlled rotations are
lowered to their CRY/CNOT network before noisy execution so error
counts follow the depth accounting.

Every stochastic routine draws from a generator derived from
(seed, stream key) so shot tables are bit-reproducible regardless of
execution order.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .circuits import Circuit, Gate, lower_circuit

SEED_ENV_VAR = "OMP2SIM_SEED"

_PAULIS_1Q = ("X", "Y", "Z")


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude length mismatch")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized: |psi| = {norm}")
        self.amplitudes.setflags(write=False)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, n_qubits)


@dataclass(frozen=True)
class NoiseModel:
    p1: float
    p2: float
    p_readout: float
    seed: int = 0

    def __post_init__(self):
        for p in (self.p1, self.p2, self.p_readout):
            if not 0.0 <= p <= 1.0:
                raise ValueError("noise probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class ShotTable:
    counts: dict[str, int]
    shots: int
    postselected: bool = False
    kept_fraction: float = 1.0


@dataclass(frozen=True)
class FidelityEstimate:
    fidelity: float
    stderr: float
    n_trajectories: int
    kept_fraction_mean: float | None = None


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key); order-independent reproducibility."""
    squashed = tuple(int(k) & 0xFFFFFFFF for k in key)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=squashed))


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV_VAR, "1"))


# ---------------------------------------------------------------------------
# gate application on a (2,)*n (+ batch axes) tensor, in place


def _apply_1q(tensor, q, mat):
    t = np.moveaxis(tensor, q - 1, 0)
    a0 = t[0].copy()
    a1 = t[1].copy()
    t[0] = mat[0, 0] * a0 + mat[0, 1] * a1
    t[1] = mat[1, 0] * a0 + mat[1, 1] * a1


def _apply_pauli(tensor, q, letter):
    t = np.moveaxis(tensor, q - 1, 0)
    if letter == "X":
        tmp = t[0].copy()
        t[0] = t[1]
        t[1] = tmp
    elif letter == "Y":
        tmp = t[0].copy()
        t[0] = -1j * t[1]
        t[1] = 1j * tmp
    else:
        t[1] = -t[1]


def _ry_matrix(angle):
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    return np.array([[c, -s], [s, c]])


_H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def _apply_gate(tensor, g: Gate):
    kind = g.kind
    if kind == "X":
        _apply_pauli(tensor, g.qubits[0], "X")
    elif kind == "H":
        _apply_1q(tensor, g.qubits[0], _H_MATRIX)
    elif kind == "RY":
        _apply_1q(tensor, g.qubits[0], _ry_matrix(g.angle))
    elif kind == "RZ":
        half = g.angle / 2.0
        t = np.moveaxis(tensor, g.qubits[0] - 1, 0)
        t[0] = t[0] * complex(math.cos(half), -math.sin(half))
        t[1] = t[1] * complex(math.cos(half), math.sin(half))
    elif kind == "CNOT":
        c, tq = g.qubits
        t = np.moveaxis(tensor, (c - 1, tq - 1), (0, 1))
        tmp = t[1, 0].copy()
        t[1, 0] = t[1, 1]
        t[1, 1] = tmp
    elif kind == "CZ":
        a, b = g.qubits
        t = np.moveaxis(tensor, (a - 1, b - 1), (0, 1))
        t[1, 1] = -t[1, 1]
    elif kind == "MULTI_CRY":
        controls, target = g.controls, g.target
        axes = tuple(q - 1 for q in (*controls, target))
        t = np.moveaxis(tensor, axes, range(len(axes)))
        sub = t[(1,) * len(controls)]
        c, s = math.cos(g.angle / 2.0), math.sin(g.angle / 2.0)
        a0 = sub[0].copy()
        a1 = sub[1].copy()
        sub[0] = c * a0 - s * a1
        sub[1] = s * a0 + c * a1
    else:
        raise ValueError(f"unknown gate kind {kind}")


def apply_circuit(
    c: Circuit,
    amplitudes: np.ndarray,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Apply c to amplitudes of shape (2^N, ...batch); returns a new array.

    With noise, one stochastic Pauli trajectory is produced (rng required).
    """
    batch = amplitudes.shape[1:]
    work = amplitudes.astype(complex).reshape((2,) * c.n_qubits + batch)
    if noise is None:
        for g in c.gates:
            _apply_gate(work, g)
    else:
        if rng is None:
            raise ValueError("noisy execution needs an rng")
        for g in lower_circuit(c).gates:
            _apply_gate(work, g)
            p = noise.p1 if len(g.qubits) == 1 else noise.p2
            if p > 0.0 and rng.random() < p:
                if len(g.qubits) == 1:
                    _apply_pauli(work, g.qubits[0], _PAULIS_1Q[rng.integers(3)])
                else:
                    pick = int(rng.integers(15)) + 1  # 1..15 over (P_a, P_b) != (I, I)
                    pa, pb = divmod(pick, 4)
                    for q, letter_idx in zip(g.qubits, (pa, pb)):
                        if letter_idx:
                            _apply_pauli(work, q, _PAULIS_1Q[letter_idx - 1])
    return work.reshape((-1,) + batch)


def run(
    c: Circuit,
    initial: StateVector | None = None,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
) -> StateVector:
    if initial is None:
        initial = StateVector.zero(c.n_qubits)
    if initial.n_qubits != c.n_qubits:
        raise ValueError("dimension mismatch")
    amps = apply_circuit(c, initial.amplitudes, noise, rng)
    amps /= np.linalg.norm(amps)
    return StateVector(amps, c.n_qubits)


def _readout_distribution(probs: np.ndarray, n_qubits: int, p_flip: float) -> np.ndarray:
    flip = np.array([[1.0 - p_flip, p_flip], [p_flip, 1.0 - p_flip]])
    t = probs.reshape((2,) * n_qubits)
    for q in range(n_qubits):
        t = np.moveaxis(np.tensordot(flip, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def sample(
    s: StateVector,
    shots: int,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
) -> ShotTable:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.abs(s.amplitudes) ** 2
    probs /= probs.sum()
    if noise is not None and noise.p_readout > 0.0:
        probs = _readout_distribution(probs, s.n_qubits, noise.p_readout)
    if rng is None:
        rng = rng_stream(noise.seed if noise else default_seed())
    draws = rng.multinomial(shots, probs)
    counts = {
        format(idx, f"0{s.n_qubits}b"): int(n) for idx, n in enumerate(draws) if n > 0
    }
    return ShotTable(counts=counts, shots=shots)


def postselect(t: ShotTable, n_electrons: int) -> ShotTable:
    kept = {b: n for b, n in t.counts.items() if b.count("1") == n_electrons}
    total = sum(t.counts.values())
    kept_total = sum(kept.values())
    fraction = kept_total / total if total else 0.0
    return ShotTable(counts=kept, shots=t.shots, postselected=True, kept_fraction=fraction)


def expectation_with_variance(t: ShotTable, coeff) -> tuple[float, float]:
    """Empirical mean of coeff(bits) over the table and its squared standard error.

    coeff maps an occupation array (0/1 ints, qubit 1 first) to a float.
    """
    if not t.counts:
        raise ValueError("empty shot table (all shots rejected?)")
    values = []
    weights = []
    for bits, n in sorted(t.counts.items()):
        occ = np.fromiter((int(ch) for ch in bits), dtype=np.int64)
        values.append(coeff(occ))
        weights.append(n)
    values = np.array(values)
    weights = np.array(weights, dtype=float)
    total = weights.sum()
    mean = float(np.dot(weights, values) / total)
    var = float(np.dot(weights, (values - mean) ** 2) / total)
    return mean, var / total


def fidelity_trajectories(
    ideal: StateVector,
    c: Circuit,
    noise: NoiseModel,
    n_traj: int,
    postselect_n: int | None = None,
    initial: StateVector | None = None,
    seed: int | None = None,
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    """Per-trajectory overlaps with the ideal state: (raw, postselected, kept).

    Post-selected entries project both states on the electron-number
    subspace, renormalize, and weight by the trajectory's kept norm.
    """
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    n = c.n_qubits
    base_seed = noise.seed if seed is None else seed
    raw = np.empty(n_traj)
    ps = kept = None
    if postselect_n is not None:
        from .jw import hamming_weights

        mask = hamming_weights(n) == postselect_n
        ideal_p = ideal.amplitudes * mask
        ideal_norm = np.linalg.norm(ideal_p)
        if ideal_norm > 0:
            ideal_p = ideal_p / ideal_norm
        ps = np.empty(n_traj)
        kept = np.empty(n_traj)
    for t in range(n_traj):
        rng = rng_stream(base_seed, 0xF1D, t)
        state = run(c, initial, noise, rng)
        raw[t] = abs(np.vdot(ideal.amplitudes, state.amplitudes)) ** 2
        if postselect_n is not None:
            proj = state.amplitudes * mask
            w = float(np.linalg.norm(proj) ** 2)
            kept[t] = w
            ps[t] = abs(np.vdot(ideal_p, proj / math.sqrt(w))) ** 2 if w > 0 else 0.0
    return raw, ps, kept


def trajectory_fidelity(
    ideal: StateVector,
    c: Circuit,
    noise: NoiseModel,
    n_traj: int,
    postselect_n: int | None = None,
    initial: StateVector | None = None,
    seed: int | None = None,
) -> FidelityEstimate:
    raw, ps, kept = fidelity_trajectories(ideal, c, noise, n_traj, postselect_n, initial, seed)
    if postselect_n is None:
        return FidelityEstimate(
            fidelity=float(raw.mean()),
            stderr=float(raw.std(ddof=1) / math.sqrt(n_traj)) if n_traj > 1 else 0.0,
            n_trajectories=n_traj,
        )
    total_kept = kept.sum()
    fid = float(np.dot(kept, ps) / total_kept) if total_kept > 0 else 0.0
    # delta-method error of the kept-weighted mean
    if n_traj > 1 and total_kept > 0:
        resid = ps - fid
        stderr = float(
            np.linalg.norm(kept * resid) / total_kept * math.sqrt(n_traj / (n_traj - 1))
        )
    else:
        stderr = 0.0
    return FidelityEstimate(
        fidelity=fid,
        stderr=stderr,
        n_trajectories=n_traj,
        kept_fraction_mean=float(kept.mean()),
    )


# ---------------------------------------------------------------------------
# noise presets


def load_noise_presets(path=None) -> dict[str, NoiseModel]:
    if path is None:
        text = resources.files("omp2sim.data").joinpath("noise_presets.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    presets = {}
    for name, fields in raw["presets"].items():
        seed = int(os.environ.get(SEED_ENV_VAR, fields.get("seed", 0)))
        presets[name] = NoiseModel(
            p1=float(fields["p1"]),
            p2=float(fields["p2"]),
            p_readout=float(fields["p_readout"]),
            seed=seed,
        )
    return presets
