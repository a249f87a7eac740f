import numpy as np
import pytest

from hstorsion.forms import conjugate
from hstorsion.metric import HermitianStructure
from hstorsion.torsion import (NotHermitianSymplectic, classify, hs_feasible,
                               torsion_form)


def test_flat_torus_all_flags(torus_H):
    cls = classify(torus_H)
    assert cls.kahler and cls.skt and cls.balanced
    assert cls.strongly_gauduchon and cls.hermitian_symplectic
    for r in cls.residuals.values():
        assert r <= 1e-12


def test_iwasawa_flags(iwasawa_H):
    cls = classify(iwasawa_H)
    assert not cls.kahler
    assert not cls.skt
    assert cls.balanced
    assert cls.strongly_gauduchon
    assert not cls.hermitian_symplectic
    assert cls.residuals["hermitian_symplectic"] > 0.1


def test_spectral_perturbed_flags(spectral_H):
    cls = classify(spectral_H)
    assert not cls.kahler  # the potential perturbation is not d-closed
    assert cls.skt  # Aeppli-potential metrics satisfy del dbar omega = 0
    assert cls.hermitian_symplectic
    assert cls.truncated_power


def test_hs_feasibility_residuals(spectral_H, iwasawa_H):
    feas = hs_feasible(spectral_H)
    assert feas.feasible and feas.residual <= 1e-10
    bad = hs_feasible(iwasawa_H)
    assert not bad.feasible


def test_torsion_zero_at_kahler(torus_H):
    rep = torsion_form(torus_H)
    assert rep.norm <= 1e-12
    assert rep.residual_constraint <= 1e-12


def test_torsion_solves_the_system(spectral_H):
    H = spectral_H
    cx = H.complex
    rep = torsion_form(H)
    dw = cx.apply_del(H.omega)
    assert H.norm(cx.apply_dbar(rep.rho20) + dw) <= 1e-10 * (1 + H.norm(dw))
    assert H.norm(cx.apply_del(rep.rho20)) <= 1e-10 * (1 + H.norm(dw))
    assert np.allclose(rep.rho02.coeffs, conjugate(rep.rho20).coeffs)
    assert rep.norm > 0


def test_torsion_matches_minimal_norm_oracle(spectral_H):
    rep = torsion_form(spectral_H)
    assert rep.minimality_gap <= 1e-8


def test_torsion_orthogonal_to_homogeneous_kernel(spectral_H):
    # rho is G-orthogonal to {sigma : del sigma = 0, dbar sigma = 0}
    H = spectral_H
    cx = H.complex
    rep = torsion_form(H)
    A = np.vstack([cx.del_matrix(2, 0), cx.dbar_matrix(2, 0)])
    _, _, Vh = np.linalg.svd(A)
    s = np.linalg.svd(A, compute_uv=False)
    rank = int((s > 1e-10 * s[0]).sum())
    kernel = Vh[rank:].conj().T  # columns span ker A
    G = H.gram(2, 0)
    overlap = np.abs(kernel.conj().T @ (G @ rep.rho20.coeffs)).max()
    assert overlap <= 1e-8 * (1 + rep.norm)


def test_torsion_raises_when_infeasible(iwasawa_H):
    with pytest.raises(NotHermitianSymplectic):
        torsion_form(iwasawa_H)


def test_torsion_scales_linearly_in_small_perturbations(spectral_cx):
    # for omega_t = flat + t (dbar u + del conj u), rho_t = t del(u) + O(t^2)
    cx = spectral_cx
    rng = np.random.default_rng(3)
    u = 0.05 * cx.random_form(1, 0, rng)
    norms = []
    for t in (0.02, 0.01):
        flat = HermitianStructure(cx, h=np.eye(3))
        wt = flat.omega + t * (cx.apply_dbar(u) + cx.apply_del(conjugate(u)))
        Ht = HermitianStructure(cx, omega=wt)
        norms.append(torsion_form(Ht).norm)
    ratio = norms[0] / norms[1]
    assert abs(ratio - 2.0) <= 0.1
