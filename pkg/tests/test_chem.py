import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_point
from omp2sim.chem import (
    ActiveSpaceSpec,
    FcidumpError,
    build_perturbation,
    freeze_active_space,
    orbital_energies,
    parse_fcidump,
    spin_orbitalize,
)
from omp2sim.oracle import fixture_path, hartree_fock_energy

MINIMAL = """&FCI NORB=2,NELEC=2,MS2=0,
 ORBSYM=1,1,
 ISYM=1,
&END
  7.0000000000000000E-01   1   1   1   1
  2.0000000000000000E-01   2   1   1   1
  6.0000000000000000E-01   2   2   1   1
  3.0000000000000000E-01   2   1   2   1
  5.5000000000000000E-01   2   2   2   1
  6.5000000000000000E-01   2   2   2   2
 -1.2000000000000000E+00   1   1   0   0
 -3.0000000000000000E-01   2   1   0   0
 -9.0000000000000000E-01   2   2   0   0
  5.0000000000000000E-01   0   0   0   0
"""


def test_parse_minimal_text():
    mi = parse_fcidump(MINIMAL)
    assert mi.n_spatial == 2
    assert mi.n_electrons == 2
    assert mi.e_core == 0.5
    assert mi.h1[0, 0] == -1.2
    assert mi.h1[0, 1] == mi.h1[1, 0] == -0.3
    # one record fans out to all 8 permutation slots
    assert mi.eri[1, 0, 0, 0] == 0.2
    assert mi.eri[0, 1, 0, 0] == 0.2
    assert mi.eri[0, 0, 1, 0] == 0.2
    assert mi.eri[0, 0, 0, 1] == 0.2
    assert mi.eri[1, 0, 1, 0] == 0.3
    assert mi.eri[0, 1, 1, 0] == 0.3


def test_parse_slash_terminator():
    text = MINIMAL.replace("&END", " /")
    mi = parse_fcidump(text)
    assert mi.n_spatial == 2


def test_parse_packaged_fixture():
    mi = parse_fcidump(fixture_path("h2_1.4.fcidump"))
    assert mi.n_spatial == 2
    assert mi.n_electrons == 2
    assert mi.e_core > 0.0
    assert np.abs(mi.h1 - mi.h1.T).max() < 1e-14


def test_parse_rejects_missing_header():
    with pytest.raises(FcidumpError):
        parse_fcidump("&FCI NELEC=2,MS2=0,\n&END\n 0.0 0 0 0 0\n")


def test_parse_rejects_garbage_record():
    with pytest.raises(FcidumpError) as err:
        parse_fcidump(MINIMAL + " not a number 1 1 1 1\n")
    assert "line" in str(err.value)


def test_parse_rejects_conflicting_duplicates():
    text = MINIMAL + "  9.9000000000000000E-01   2   1   1   1\n"
    with pytest.raises(FcidumpError):
        parse_fcidump(text)


def test_parse_rejects_odd_electrons():
    with pytest.raises(FcidumpError):
        parse_fcidump(MINIMAL.replace("NELEC=2", "NELEC=3"))


_H3P = parse_fcidump(fixture_path("h3p_2.0.fcidump"))


@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(1, 6))
def test_spin_selection_rules(p, q, r, s):
    si = spin_orbitalize(_H3P)
    val = si.v2s(p, q, r, s)
    same_ps = (p - 1) % 2 == (s - 1) % 2
    same_qr = (q - 1) % 2 == (r - 1) % 2
    if not (same_ps and same_qr):
        assert val == 0.0
    else:
        mp, mq, mr, ms = ((x - 1) // 2 for x in (p, q, r, s))
        assert val == _H3P.eri[mp, ms, mq, mr]


def test_spin_orbitalize_shapes():
    mi = parse_fcidump(MINIMAL)
    si = spin_orbitalize(mi)
    assert si.n_spin == 4
    assert np.allclose(si.h1s, np.kron(mi.h1, np.eye(2)))


def test_orbital_energies_match_reference(refs):
    for molecule in refs.molecules:
        pt = refs.molecules[molecule].points[0]
        mi, _ = load_point(refs, molecule, pt.distance_bohr)
        si = spin_orbitalize(mi)
        eps = orbital_energies(si, mi.n_electrons)
        assert np.allclose(eps[0::2], pt.orbital_energies, atol=1e-9)
        assert np.allclose(eps[1::2], pt.orbital_energies, atol=1e-9)


def test_freeze_active_space_preserves_hf(refs):
    pt = refs.molecules["lih"].points[5]
    full = parse_fcidump(fixture_path(pt.fcidump))
    e_full = hartree_fock_energy(spin_orbitalize(full), full.e_core, full.n_electrons)
    active = freeze_active_space(full, refs.molecules["lih"].active_space)
    assert active.n_spatial == 3
    assert active.n_electrons == 2
    e_active = hartree_fock_energy(
        spin_orbitalize(active), active.e_core, active.n_electrons
    )
    assert abs(e_full - e_active) < 1e-10
    assert abs(e_full - pt.e_hf) < 1e-9


def test_active_space_validation():
    with pytest.raises(ValueError):
        ActiveSpaceSpec(frozen_occupied=(0,), deleted_virtual=())
    with pytest.raises(ValueError):
        ActiveSpaceSpec(frozen_occupied=(1,), deleted_virtual=(1,))


def test_build_perturbation_at_zero():
    mi = parse_fcidump(fixture_path("h2_1.4.fcidump"))
    si = spin_orbitalize(mi)
    eps = orbital_energies(si, 2)
    t, eri = build_perturbation(si, eps, np.zeros((4, 4)))
    assert np.allclose(t, si.h1s - np.diag(eps))
    assert eri is si.eri_spatial


def test_build_perturbation_rejects_symmetric_theta():
    mi = parse_fcidump(fixture_path("h2_1.4.fcidump"))
    si = spin_orbitalize(mi)
    eps = orbital_energies(si, 2)
    bad = np.ones((4, 4))
    with pytest.raises(ValueError):
        build_perturbation(si, eps, bad)


@settings(max_examples=25)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_perturbation_trace_invariant(a, b):
    # U diag(eps) U^T is a similarity transform, so the trace of T is fixed
    mi = parse_fcidump(fixture_path("h2_1.4.fcidump"))
    si = spin_orbitalize(mi)
    eps = orbital_energies(si, 2)
    theta = np.zeros((4, 4))
    theta[0, 2] = theta[1, 3] = a
    theta[0, 3] = b
    theta = theta - theta.T
    t, _ = build_perturbation(si, eps, theta)
    t0, _ = build_perturbation(si, eps, np.zeros((4, 4)))
    assert abs(np.trace(t) - np.trace(t0)) < 1e-10
