"""Generate the committed molecular fixtures and reference energies.

Standalone STO-3G restricted Hartree-Fock engine (McMurchie-Davidson
integrals) plus independent MP2 / orbital-optimized-MP2 / FCI reference
implementations.  Run once; the outputs (FCIDUMP files and
reference_values.json under src/omp2sim/data/) are committed, and the
package itself never imports this script.  Deliberately shares no code
with the package so the two can cross-check each other.

Usage:
    python scripts/make_reference_data.py            # full generation
    python scripts/make_reference_data.py --check    # self-tests only
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.linalg import eigh, expm
from scipy.optimize import minimize
from scipy.special import hyp1f1

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "omp2sim" / "data"

SOURCE_TAG = "scripts/make_reference_data.py STO-3G RHF engine, rev 1"

# STO-3G contraction data (exponent, coefficient); p shell shares the
# 2s exponents.
BASIS_H_S = [(3.42525091, 0.15432897), (0.62391373, 0.53532814), (0.16885540, 0.44463454)]
BASIS_LI_1S = [(16.1195750, 0.15432897), (2.9362007, 0.53532814), (0.7946505, 0.44463454)]
BASIS_LI_2S = [(0.6362897, -0.09996723), (0.1478601, 0.39951283), (0.0480887, 0.70011547)]
BASIS_LI_2P = [(0.6362897, 0.15591627), (0.1478601, 0.60768372), (0.0480887, 0.39195739)]

NUCLEAR_CHARGE = {"H": 1, "Li": 3}


# ---------------------------------------------------------------------------
# Gaussian integrals (McMurchie-Davidson scheme, s and p shells only)


def boys(n, x):
    return hyp1f1(n + 0.5, n + 1.5, -x) / (2.0 * n + 1.0)


def hermite_e(i, j, t, qx, a, b):
    # expansion coefficient of Gaussian product x^i_A x^j_B onto Hermite t
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-q * qx * qx)
    if j == 0:
        return (
            hermite_e(i - 1, j, t - 1, qx, a, b) / (2 * p)
            - (q * qx / a) * hermite_e(i - 1, j, t, qx, a, b)
            + (t + 1) * hermite_e(i - 1, j, t + 1, qx, a, b)
        )
    return (
        hermite_e(i, j - 1, t - 1, qx, a, b) / (2 * p)
        + (q * qx / b) * hermite_e(i, j - 1, t, qx, a, b)
        + (t + 1) * hermite_e(i, j - 1, t + 1, qx, a, b)
    )


def hermite_r(t, u, v, n, p, pc, rpc2):
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * rpc2)
    if t > 0:
        val = pc[0] * hermite_r(t - 1, u, v, n + 1, p, pc, rpc2)
        if t > 1:
            val += (t - 1) * hermite_r(t - 2, u, v, n + 1, p, pc, rpc2)
        return val
    if u > 0:
        val = pc[1] * hermite_r(t, u - 1, v, n + 1, p, pc, rpc2)
        if u > 1:
            val += (u - 1) * hermite_r(t, u - 2, v, n + 1, p, pc, rpc2)
        return val
    val = pc[2] * hermite_r(t, u, v - 1, n + 1, p, pc, rpc2)
    if v > 1:
        val += (v - 1) * hermite_r(t, u, v - 2, n + 1, p, pc, rpc2)
    return val


def prim_overlap(a, lmn1, ra, b, lmn2, rb):
    p = a + b
    s = (math.pi / p) ** 1.5
    for k in range(3):
        s *= hermite_e(lmn1[k], lmn2[k], 0, ra[k] - rb[k], a, b)
    return s


def prim_kinetic(a, lmn1, ra, b, lmn2, rb):
    l2, m2, n2 = lmn2
    term0 = b * (2 * (l2 + m2 + n2) + 3) * prim_overlap(a, lmn1, ra, b, lmn2, rb)
    term1 = -2 * b * b * (
        prim_overlap(a, lmn1, ra, b, (l2 + 2, m2, n2), rb)
        + prim_overlap(a, lmn1, ra, b, (l2, m2 + 2, n2), rb)
        + prim_overlap(a, lmn1, ra, b, (l2, m2, n2 + 2), rb)
    )
    term2 = 0.0
    if l2 > 1:
        term2 += l2 * (l2 - 1) * prim_overlap(a, lmn1, ra, b, (l2 - 2, m2, n2), rb)
    if m2 > 1:
        term2 += m2 * (m2 - 1) * prim_overlap(a, lmn1, ra, b, (l2, m2 - 2, n2), rb)
    if n2 > 1:
        term2 += n2 * (n2 - 1) * prim_overlap(a, lmn1, ra, b, (l2, m2, n2 - 2), rb)
    return term0 + term1 - 0.5 * term2


def prim_nuclear(a, lmn1, ra, b, lmn2, rb, rc):
    p = a + b
    rp = (a * ra + b * rb) / p
    pc = rp - rc
    rpc2 = float(pc @ pc)
    val = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        et = hermite_e(lmn1[0], lmn2[0], t, ra[0] - rb[0], a, b)
        for u in range(lmn1[1] + lmn2[1] + 1):
            eu = hermite_e(lmn1[1], lmn2[1], u, ra[1] - rb[1], a, b)
            for v in range(lmn1[2] + lmn2[2] + 1):
                ev = hermite_e(lmn1[2], lmn2[2], v, ra[2] - rb[2], a, b)
                val += et * eu * ev * hermite_r(t, u, v, 0, p, pc, rpc2)
    return 2.0 * math.pi / p * val


def prim_eri(a, lmn1, ra, b, lmn2, rb, c, lmn3, rc, d, lmn4, rd):
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    rp = (a * ra + b * rb) / p
    rq = (c * rc + d * rd) / q
    pq = rp - rq
    rpq2 = float(pq @ pq)

    e1 = [
        [hermite_e(lmn1[k], lmn2[k], t, ra[k] - rb[k], a, b) for t in range(lmn1[k] + lmn2[k] + 1)]
        for k in range(3)
    ]
    e2 = [
        [hermite_e(lmn3[k], lmn4[k], t, rc[k] - rd[k], c, d) for t in range(lmn3[k] + lmn4[k] + 1)]
        for k in range(3)
    ]
    val = 0.0
    for t, et in enumerate(e1[0]):
        for u, eu in enumerate(e1[1]):
            for v, ev in enumerate(e1[2]):
                w1 = et * eu * ev
                if w1 == 0.0:
                    continue
                for tt, ett in enumerate(e2[0]):
                    for uu, euu in enumerate(e2[1]):
                        for vv, evv in enumerate(e2[2]):
                            w2 = ett * euu * evv
                            if w2 == 0.0:
                                continue
                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                            val += w1 * w2 * sign * hermite_r(
                                t + tt, u + uu, v + vv, 0, alpha, pq, rpq2
                            )
    val *= 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))
    return val


class ContractedGaussian:
    def __init__(self, center, lmn, primitives):
        self.center = np.asarray(center, dtype=float)
        self.lmn = tuple(lmn)
        self.exps = np.array([e for e, _ in primitives])
        # fold primitive norms into the contraction coefficients
        l, m, n = lmn
        norms = []
        for e in self.exps:
            nrm = (2 * e / math.pi) ** 0.75 * (4 * e) ** ((l + m + n) / 2.0)
            nrm /= math.sqrt(_df(2 * l - 1) * _df(2 * m - 1) * _df(2 * n - 1))
            norms.append(nrm)
        self.coefs = np.array([c for _, c in primitives]) * np.array(norms)
        self_olap = contracted_1e(self, self, prim_overlap)
        self.coefs /= math.sqrt(self_olap)


def _df(n):
    # double factorial with (-1)!! = 1
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def contracted_1e(ga, gb, prim_fn, *extra):
    val = 0.0
    for ca, ea in zip(ga.coefs, ga.exps):
        for cb, eb in zip(gb.coefs, gb.exps):
            val += ca * cb * prim_fn(ea, ga.lmn, ga.center, eb, gb.lmn, gb.center, *extra)
    return val


def contracted_eri(ga, gb, gc, gd):
    val = 0.0
    for ca, ea in zip(ga.coefs, ga.exps):
        for cb, eb in zip(gb.coefs, gb.exps):
            for cc, ec in zip(gc.coefs, gc.exps):
                for cd, ed in zip(gd.coefs, gd.exps):
                    val += ca * cb * cc * cd * prim_eri(
                        ea, ga.lmn, ga.center,
                        eb, gb.lmn, gb.center,
                        ec, gc.lmn, gc.center,
                        ed, gd.lmn, gd.center,
                    )
    return val


def build_basis(atoms):
    basis = []
    for symbol, center in atoms:
        if symbol == "H":
            basis.append(ContractedGaussian(center, (0, 0, 0), BASIS_H_S))
        elif symbol == "Li":
            basis.append(ContractedGaussian(center, (0, 0, 0), BASIS_LI_1S))
            basis.append(ContractedGaussian(center, (0, 0, 0), BASIS_LI_2S))
            for lmn in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
                basis.append(ContractedGaussian(center, lmn, BASIS_LI_2P))
        else:
            raise ValueError(symbol)
    return basis


def ao_integrals(atoms):
    basis = build_basis(atoms)
    m = len(basis)
    s = np.zeros((m, m))
    t = np.zeros((m, m))
    v = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1):
            s[i, j] = s[j, i] = contracted_1e(basis[i], basis[j], prim_overlap)
            t[i, j] = t[j, i] = contracted_1e(basis[i], basis[j], prim_kinetic)
            vij = 0.0
            for symbol, center in atoms:
                vij -= NUCLEAR_CHARGE[symbol] * contracted_1e(
                    basis[i], basis[j], prim_nuclear, np.asarray(center, dtype=float)
                )
            v[i, j] = v[j, i] = vij
    eri = np.zeros((m, m, m, m))
    # chemist (ij|kl) with full 8-fold symmetry
    pairs = [(i, j) for i in range(m) for j in range(i + 1)]
    for ij_idx, (i, j) in enumerate(pairs):
        for k, l in pairs[: ij_idx + 1]:
            val = contracted_eri(basis[i], basis[j], basis[k], basis[l])
            for a, b in ((i, j), (j, i)):
                for c, d in ((k, l), (l, k)):
                    eri[a, b, c, d] = val
                    eri[c, d, a, b] = val
    return s, t, v, eri


def nuclear_repulsion(atoms):
    e = 0.0
    for (sym1, r1), (sym2, r2) in itertools.combinations(atoms, 2):
        d = np.linalg.norm(np.asarray(r1, float) - np.asarray(r2, float))
        e += NUCLEAR_CHARGE[sym1] * NUCLEAR_CHARGE[sym2] / d
    return e


# ---------------------------------------------------------------------------
# Restricted Hartree-Fock with DIIS


def rhf(atoms, n_electrons, conv=1e-12, max_iter=300):
    s, t, v, eri = ao_integrals(atoms)
    hcore = t + v
    e_nuc = nuclear_repulsion(atoms)
    n_occ = n_electrons // 2

    sval, svec = eigh(s)
    x = svec @ np.diag(sval ** -0.5) @ svec.T

    def fock(dm):
        j = np.einsum("pqrs,rs->pq", eri, dm)
        k = np.einsum("prqs,rs->pq", eri, dm)
        return hcore + 2.0 * j - k

    def density(f):
        fp = x.T @ f @ x
        eps, cp = eigh(fp)
        c = x @ cp
        return c[:, :n_occ] @ c[:, :n_occ].T, c, eps

    dm, c, eps = density(hcore)
    e_old = 0.0
    err_list, f_list = [], []
    for _ in range(max_iter):
        f = fock(dm)
        err = f @ dm @ s - s @ dm @ f
        err_list.append(err)
        f_list.append(f)
        if len(f_list) > 8:
            err_list.pop(0)
            f_list.pop(0)
        if len(f_list) > 1:
            n = len(f_list)
            b = -np.ones((n + 1, n + 1))
            b[n, n] = 0.0
            for i in range(n):
                for j in range(n):
                    b[i, j] = np.einsum("pq,pq->", err_list[i], err_list[j])
            rhs = np.zeros(n + 1)
            rhs[n] = -1.0
            try:
                w = np.linalg.solve(b, rhs)[:n]
                f = sum(wi * fi for wi, fi in zip(w, f_list))
            except np.linalg.LinAlgError:
                pass
        dm, c, eps = density(f)
        e_elec = np.einsum("pq,pq->", dm, hcore + fock(dm))
        if abs(e_elec - e_old) < conv and np.abs(err).max() < 1e-9:
            break
        e_old = e_elec
    else:
        raise RuntimeError(f"SCF failed to converge for {atoms}")

    f_final = fock(dm)
    return {
        "c": c,
        "eps": eps,
        "e_elec": e_elec,
        "e_nuc": e_nuc,
        "e_hf": e_elec + e_nuc,
        "s": s,
        "hcore": hcore,
        "eri_ao": eri,
        "fock_ao": f_final,
    }


def mo_integrals(scf):
    c = scf["c"]
    h = c.T @ scf["hcore"] @ c
    eri = np.einsum("pqrs,pi,qj,rk,sl->ijkl", scf["eri_ao"], c, c, c, c, optimize=True)
    return h, eri


# ---------------------------------------------------------------------------
# Active-space reduction (frozen doubly-occupied + deleted virtuals)


def reduce_active(h, eri, e_offset, n_electrons, frozen, deleted):
    m = h.shape[0]
    frozen = sorted(frozen)
    active = [p for p in range(m) if p not in frozen and p not in deleted]
    e_core = e_offset
    for i in frozen:
        e_core += 2.0 * h[i, i]
        for j in frozen:
            e_core += 2.0 * eri[i, i, j, j] - eri[i, j, j, i]
    h_act = np.zeros((len(active), len(active)))
    for p_new, p in enumerate(active):
        for q_new, q in enumerate(active):
            val = h[p, q]
            for i in frozen:
                val += 2.0 * eri[p, q, i, i] - eri[p, i, i, q]
            h_act[p_new, q_new] = val
    eri_act = eri[np.ix_(active, active, active, active)]
    return h_act, eri_act, e_core, n_electrons - 2 * len(frozen), active


# ---------------------------------------------------------------------------
# Spin-orbital reference methods.  Interleaved convention: spatial m gives
# spin orbitals 2m (alpha) and 2m+1 (beta), 0-based.


def spin_eps(h, eri, n_elec):
    m = h.shape[0]
    n = 2 * m
    eps = np.zeros(n)
    occ = range(n_elec)
    for p in range(n):
        mp, sp = divmod(p, 2)
        val = h[mp, mp]
        for i in occ:
            mi, si = divmod(i, 2)
            val += eri[mp, mp, mi, mi]
            if si == sp:
                val -= eri[mp, mi, mi, mp]
        eps[p] = val
    return eps


def antisym_element(eri, p, q, r, s):
    # <pq||rs> over spin orbitals, chemist-notation spatial input
    mp, sp_ = divmod(p, 2)
    mq, sq = divmod(q, 2)
    mr, sr = divmod(r, 2)
    ms, ss = divmod(s, 2)
    direct = eri[mp, mr, mq, ms] if (sp_ == sr and sq == ss) else 0.0
    exch = eri[mp, ms, mq, mr] if (sp_ == ss and sq == sr) else 0.0
    return direct - exch


def mp2_correlation(h, eri, n_elec, eps):
    m = h.shape[0]
    n = 2 * m
    corr = 0.0
    for i in range(n_elec):
        for j in range(i + 1, n_elec):
            for a in range(n_elec, n):
                for b in range(a + 1, n):
                    num = antisym_element(eri, i, j, a, b)
                    if num == 0.0:
                        continue
                    corr += num * num / (eps[i] + eps[j] - eps[a] - eps[b])
    return corr


def hf_electronic(h, eri, n_elec):
    n_occ = n_elec // 2
    e = 2.0 * np.trace(h[:n_occ, :n_occ])
    for i in range(n_occ):
        for j in range(n_occ):
            e += 2.0 * eri[i, i, j, j] - eri[i, j, j, i]
    return e


def rotate_integrals(h, eri, u):
    h2 = u.T @ h @ u
    eri2 = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, u, u, u, u, optimize=True)
    return h2, eri2


def omp2_energy_at(h, eri, n_elec, eps, kappa):
    # orbital-rotated MP2 with frozen canonical denominators: the exact
    # functional the circuit estimator minimizes
    u = expm(kappa)
    h2, eri2 = rotate_integrals(h, eri, u)
    return hf_electronic(h2, eri2, n_elec) + mp2_correlation_rotated(eri2, n_elec, eps, h.shape[0])


def mp2_correlation_rotated(eri2, n_elec, eps, m):
    n = 2 * m
    corr = 0.0
    for i in range(n_elec):
        for j in range(i + 1, n_elec):
            for a in range(n_elec, n):
                for b in range(a + 1, n):
                    num = antisym_element(eri2, i, j, a, b)
                    if num == 0.0:
                        continue
                    corr += num * num / (eps[i] + eps[j] - eps[a] - eps[b])
    return corr


def omp2_minimize(h, eri, n_elec, eps):
    m = h.shape[0]
    n_occ = n_elec // 2
    n_virt = m - n_occ
    n_par = n_occ * n_virt

    def unpack(x):
        kappa = np.zeros((m, m))
        idx = 0
        for o in range(n_occ):
            for v in range(n_virt):
                kappa[o, n_occ + v] = x[idx]
                kappa[n_occ + v, o] = -x[idx]
                idx += 1
        return kappa

    def fun(x):
        return omp2_energy_at(h, eri, n_elec, eps, unpack(x))

    best = None
    for x0 in [np.zeros(n_par), np.full(n_par, 0.02), np.full(n_par, -0.02)]:
        res = minimize(fun, x0, method="BFGS", options={"gtol": 1e-11, "maxiter": 500})
        if best is None or res.fun < best.fun:
            best = res
    return best.fun, best.x


# ---------------------------------------------------------------------------
# FCI by exact diagonalization over spin-orbital determinants


def fci_ground(h, eri, n_elec):
    m = h.shape[0]
    n = 2 * m
    dets = [d for d in itertools.combinations(range(n), n_elec)]
    index = {d: k for k, d in enumerate(dets)}
    dim = len(dets)
    ham = np.zeros((dim, dim))

    def h1(p, q):
        mp, sp_ = divmod(p, 2)
        mq, sq = divmod(q, 2)
        return h[mp, mq] if sp_ == sq else 0.0

    for ka, da in enumerate(dets):
        occ = list(da)
        # diagonal
        e = sum(h1(p, p) for p in occ)
        for x in range(len(occ)):
            for y in range(x + 1, len(occ)):
                e += antisym_element(eri, occ[x], occ[y], occ[x], occ[y])
        ham[ka, ka] = e
        occ_set = set(occ)
        virt = [p for p in range(n) if p not in occ_set]
        # singles
        for oi, p in enumerate(occ):
            for q in virt:
                db = tuple(sorted(occ_set - {p} | {q}))
                kb = index[db]
                sign = _exc_sign(da, p, q)
                val = h1(p, q)
                for r in occ:
                    if r != p:
                        val += antisym_element(eri, p, r, q, r)
                ham[ka, kb] = ham[kb, ka] = sign * val
        # doubles (only fill upper triangle partner once; overwritten identically)
        for p, r in itertools.combinations(occ, 2):
            for q, s_ in itertools.combinations(virt, 2):
                db = tuple(sorted(occ_set - {p, r} | {q, s_}))
                kb = index[db]
                sign = _exc_sign2(da, p, r, q, s_)
                ham[ka, kb] = ham[kb, ka] = sign * antisym_element(eri, p, r, q, s_)

    evals = np.linalg.eigvalsh(ham)
    return evals[0]


def _exc_sign(det, p, q):
    # sign of a_q^dag a_p |det>
    occ = list(det)
    sign = 1
    ip = occ.index(p)
    sign *= (-1) ** ip
    occ.pop(ip)
    pos = sum(1 for o in occ if o < q)
    sign *= (-1) ** pos
    return sign


def _exc_sign2(det, p, r, q, s_):
    # sign of a_q^dag a_s^dag a_r a_p, matching the <pr||qs> coupling:
    # annihilators act right-to-left (p first), then s is created, then q
    occ = list(det)
    sign = 1
    for x in (p, r):
        ix = occ.index(x)
        sign *= (-1) ** ix
        occ.pop(ix)
    for y in (s_, q):
        pos = sum(1 for o in occ if o < y)
        sign *= (-1) ** pos
        occ.insert(pos, y)
    return sign


# ---------------------------------------------------------------------------
# FCIDUMP emission


def write_fcidump(path, h, eri, e_core, n_elec, ms2=0, thresh=1e-14):
    m = h.shape[0]
    lines = [f"&FCI NORB={m:3d},NELEC={n_elec:2d},MS2={ms2},"]
    lines.append(" ORBSYM=" + ",".join(["1"] * m) + ",")
    lines.append(" ISYM=1,")
    lines.append("&END")

    def rec(val, i, j, k, l):
        lines.append(f"{val: .16E} {i:3d} {j:3d} {k:3d} {l:3d}")

    pairs = [(i, j) for i in range(m) for j in range(i + 1)]
    for ij_idx, (i, j) in enumerate(pairs):
        for k, l in pairs[: ij_idx + 1]:
            val = eri[i, j, k, l]
            if abs(val) > thresh:
                rec(val, i + 1, j + 1, k + 1, l + 1)
    for i in range(m):
        for j in range(i + 1):
            if abs(h[i, j]) > thresh:
                rec(h[i, j], i + 1, j + 1, 0, 0)
    rec(e_core, 0, 0, 0, 0)
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Molecules


def linear_chain(n_atoms, d):
    return [("H", (i * d, 0.0, 0.0)) for i in range(n_atoms)]


def molecule_setup(name, d):
    if name == "h2":
        return linear_chain(2, d), 2
    if name == "h3+":
        return linear_chain(3, d), 2
    if name == "h4":
        return linear_chain(4, d), 4
    if name == "lih":
        return [("Li", (0.0, 0.0, 0.0)), ("H", (d, 0.0, 0.0))], 4
    raise ValueError(name)


def lih_active_spec(scf):
    # pi MOs are the ones with weight on Li 2p_y / 2p_z (AO rows 3, 4);
    # they plus the core sigma are dropped from the active space
    c = scf["c"]
    pi_idx = [k for k in range(c.shape[1]) if np.hypot(c[3, k], c[4, k]) > 0.5]
    if len(pi_idx) != 2:
        raise RuntimeError(f"expected 2 pi orbitals, found {pi_idx}")
    core = abs(c[0, 0])
    if core < 0.9:
        raise RuntimeError("lowest MO is not the Li 1s core")
    return [0], sorted(pi_idx)


GRIDS = {
    "h2": [round(0.6 + 0.2 * k, 1) for k in range(13)],     # 0.6 .. 3.0
    "h3+": [round(1.0 + 0.2 * k, 1) for k in range(20)],    # 1.0 .. 4.8
    "lih": [round(1.9 + 0.2 * k, 1) for k in range(20)],    # 1.9 .. 5.7
    "h4": [round(1.0 + 0.2 * k, 1) for k in range(19)],     # 1.0 .. 4.6
}


def generate_point(name, d):
    atoms, n_elec = molecule_setup(name, d)
    scf = rhf(atoms, n_elec)
    h_mo, eri_mo = mo_integrals(scf)

    if name == "lih":
        frozen, deleted = lih_active_spec(scf)
    else:
        frozen, deleted = [], []

    h_act, eri_act, e_core, n_act, active = reduce_active(
        h_mo, eri_mo, scf["e_nuc"], n_elec, frozen, deleted
    )
    eps = spin_eps(h_act, eri_act, n_act)

    e_hf_active = hf_electronic(h_act, eri_act, n_act) + e_core
    if abs(e_hf_active - scf["e_hf"]) > 1e-8:
        raise RuntimeError(f"active-space HF mismatch at {name} d={d}")

    e_mp2 = e_hf_active + mp2_correlation(h_act, eri_act, n_act, eps)
    e_omp2_corr, theta = omp2_minimize(h_act, eri_act, n_act, eps)
    e_omp2 = e_omp2_corr + e_core
    e_fci = fci_ground(h_act, eri_act, n_act) + e_core

    return {
        "scf": scf,
        "h_mo": h_mo,
        "eri_mo": eri_mo,
        "frozen": frozen,
        "deleted": deleted,
        "point": {
            "distance_bohr": d,
            "e_hf": e_hf_active,
            "e_mp2": e_mp2,
            "e_omp2": e_omp2,
            "e_fci": e_fci,
            "orbital_energies": [eps[2 * k] for k in range(len(active))],
        },
    }


def ordering_ok(pt, slack=1e-10):
    return (
        pt["e_fci"] <= pt["e_omp2"] + slack
        and pt["e_omp2"] <= pt["e_mp2"] + slack
        and pt["e_mp2"] <= pt["e_hf"] + slack
    )


def generate_all(out_dir):
    fixtures = out_dir / "fixtures"
    fixtures.mkdir(parents=True, exist_ok=True)
    reference = {"schema": 1, "source": SOURCE_TAG, "molecules": {}}
    for name, grid in GRIDS.items():
        safe = name.replace("+", "p")
        mol_entry = None
        points = []
        for d in grid:
            res = generate_point(name, d)
            pt = res["point"]
            if not ordering_ok(pt):
                print(f"  [{name} d={d}] variational ordering violated; truncating grid here")
                break
            fname = f"{safe}_{d:.1f}.fcidump"
            write_fcidump(
                fixtures / fname,
                res["h_mo"],
                res["eri_mo"],
                res["scf"]["e_nuc"],
                molecule_setup(name, d)[1],
            )
            pt["fcidump"] = fname
            points.append(pt)
            if mol_entry is None:
                mol_entry = {
                    "n_electrons": molecule_setup(name, d)[1],
                    "n_spatial": res["h_mo"].shape[0],
                    "active_space": {
                        "frozen_occupied": [k + 1 for k in res["frozen"]],
                        "deleted_virtual": [k + 1 for k in res["deleted"]],
                    },
                    "points": points,
                }
            print(
                f"  [{name} d={d}] HF={pt['e_hf']:.8f} MP2={pt['e_mp2']:.8f} "
                f"OMP2={pt['e_omp2']:.8f} FCI={pt['e_fci']:.8f}"
            )
        reference["molecules"][safe] = mol_entry
    (out_dir / "reference_values.json").write_text(json.dumps(reference, indent=1) + "\n")
    print(f"wrote {out_dir / 'reference_values.json'}")


# ---------------------------------------------------------------------------
# Self-checks against published STO-3G values


def self_check():
    # H2 at 1.4 bohr: Szabo & Ostlund section 3.5 tabulates every integral
    atoms, _ = molecule_setup("h2", 1.4)
    s, t, _, eri = ao_integrals(atoms)
    checks = [
        ("S12", s[0, 1], 0.6593, 5e-4),
        ("T11", t[0, 0], 0.7600, 5e-4),
        ("(11|11)", eri[0, 0, 0, 0], 0.7746, 5e-4),
        ("(11|22)", eri[0, 0, 1, 1], 0.5697, 5e-4),
        ("(21|11)", eri[1, 0, 0, 0], 0.4441, 5e-4),
        ("(21|21)", eri[1, 0, 1, 0], 0.2970, 5e-4),
    ]
    scf = rhf(atoms, 2)
    checks += [
        ("E_HF(H2,1.4)", scf["e_hf"], -1.1167, 2e-4),
        ("eps_1", scf["eps"][0], -0.5782, 2e-4),
        ("eps_2", scf["eps"][1], 0.6703, 2e-4),
    ]
    ok = True
    for label, got, want, tol in checks:
        good = abs(got - want) < tol
        ok &= good
        print(f"  {label:14s} got {got: .6f}  want {want: .6f}  {'ok' if good else 'FAIL'}")

    # H2 FCI sanity and MO orthonormality
    h_mo, eri_mo = mo_integrals(scf)
    e_fci = fci_ground(h_mo, eri_mo, 2) + scf["e_nuc"]
    good = abs(e_fci - (-1.13728)) < 5e-4
    ok &= good
    print(f"  {'E_FCI(H2,1.4)':14s} got {e_fci: .6f}  want -1.137280  {'ok' if good else 'FAIL'}")
    c, smat = scf["c"], scf["s"]
    good = np.abs(c.T @ smat @ c - np.eye(2)).max() < 1e-10
    ok &= good
    print(f"  MO orthonormality {'ok' if good else 'FAIL'}")

    # LiH near equilibrium: published RHF/STO-3G total energy is about -7.8634
    scf_lih = rhf(*molecule_setup("lih", 3.0139))
    good = abs(scf_lih["e_hf"] - (-7.8634)) < 2e-3
    ok &= good
    print(f"  E_HF(LiH,3.014) got {scf_lih['e_hf']: .6f}  want -7.8634(2e-3) {'ok' if good else 'FAIL'}")
    fro, dele = lih_active_spec(scf_lih)
    good = fro == [0] and len(dele) == 2
    ok &= good
    print(f"  LiH active spec frozen={fro} deleted={dele} {'ok' if good else 'FAIL'}")
    if not ok:
        sys.exit("self-check FAILED")
    print("self-check passed")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--check", action="store_true", help="run self-tests only")
    ap.add_argument("--out", type=Path, default=DATA_DIR)
    args = ap.parse_args()
    self_check()
    if not args.check:
        generate_all(args.out)


if __name__ == "__main__":
    main()
