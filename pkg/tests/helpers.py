"""Dense fermionic algebra built from raw kron chains.

Kept independent of the package's operator machinery so tests have a
second opinion: annihilators are Z x .. x Z x lower x I x .. x I with
qubit 1 as the leftmost factor.
"""

import numpy as np

I2 = np.eye(2)
Z2 = np.diag([1.0, -1.0])
LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])


def ladder_ops(n: int) -> list[np.ndarray]:
    """Annihilation operators a_1 .. a_n as dense 2^n matrices."""
    ops = []
    for p in range(1, n + 1):
        mats = [Z2] * (p - 1) + [LOWER] + [I2] * (n - p)
        full = mats[0]
        for m in mats[1:]:
            full = np.kron(full, m)
        ops.append(full)
    return ops


def excitation_matrices(n: int) -> np.ndarray:
    """E[p, q] = a+_p a_q as an (n, n, 2^n, 2^n) stack."""
    low = ladder_ops(n)
    dim = 1 << n
    e = np.zeros((n, n, dim, dim))
    for p in range(n):
        for q in range(n):
            e[p, q] = low[p].T @ low[q]
    return e


def dense_perturbation(t_spin: np.ndarray, si) -> np.ndarray:
    """sum T_pq a+_p a_q + 1/2 sum h_pqrs a+_p a+_q a_r a_s, dense."""
    n = si.n_spin
    e = excitation_matrices(n)
    h = np.zeros((n, n, n, n))
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            for r in range(1, n + 1):
                for s in range(1, n + 1):
                    h[p - 1, q - 1, r - 1, s - 1] = si.v2s(p, q, r, s)
    one = np.einsum("pq,pqab->ab", t_spin, e)
    # a+_p a+_q a_r a_s = E_ps E_qr - delta_sq E_pr
    two = 0.5 * np.einsum("pqrs,psab,qrbc->ac", h, e, e, optimize=True)
    two -= 0.5 * np.einsum("pqrq,prab->ab", h, e)
    return one + two


def dense_group_operator(g, n: int) -> np.ndarray:
    """linear/quadratic number-operator content of one measurement group."""
    low = ladder_ops(n)
    w = np.kron(g.rotation, I2)
    dim = 1 << n
    rotated_n = np.zeros((n, dim, dim))
    for q in range(n):
        d_dag = sum(w[p, q] * low[p].T for p in range(n))
        rotated_n[q] = d_dag @ d_dag.T
    op = np.einsum("q,qab->ab", g.linear, rotated_n)
    mixed = np.einsum("qr,rab->qab", g.quadratic, rotated_n)
    op += np.einsum("qab,qbc->ac", rotated_n, mixed)
    return op


def operator_norm(mat: np.ndarray) -> float:
    return float(np.linalg.norm(mat, 2))
