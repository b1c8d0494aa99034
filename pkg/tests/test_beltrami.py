import json
import math
from fractions import Fraction

import numpy as np
import pytest

from teichlab import beltrami as bt
from teichlab import teichdeform as td
from teichlab.exceptions import DegenerateJacobian, NotAdmissible, NotInverse

KS = [round(0.1 * j, 1) for j in range(1, 10)]


def rect(n=33, half=1.0):
    return bt.GridDomain.rectangle(-half, half, -half, half, n)


def affine_grid(k, n=33, half=1.0):
    return bt.MapGrid.from_function(rect(n, half), lambda z: td.affine_map(z, k))


def inverse_affine_grid(k, n=33, half=1.0):
    return bt.MapGrid.from_function(rect(n, half), lambda w: td.inverse_affine_map(w, k))


def test_dilatation_exact():
    assert bt.dilatation(Fraction(1, 3)) == 2
    assert bt.dilatation(Fraction(1, 2)) == 3
    assert isinstance(bt.dilatation(Fraction(1, 3)), Fraction)
    assert bt.dilatation(0) == 1
    assert bt.dilatation(1) == math.inf


def test_dilatation_of_field():
    fld = bt.BeltramiField.constant(bt.GridDomain.torus(8), 0.5j)
    assert bt.dilatation(fld) == pytest.approx(3, rel=1e-15)


@pytest.mark.parametrize("k", KS)
def test_inverse_teichmuller_coefficient(k):
    mu = bt.mu_of_map(inverse_affine_grid(k))
    assert np.abs(mu.values + k).max() < 1e-10


@pytest.mark.parametrize("k", KS)
def test_forward_teichmuller_coefficient(k):
    mu = bt.mu_of_map(affine_grid(k))
    assert np.abs(mu.values - k).max() < 1e-10


@pytest.mark.parametrize("k", KS)
def test_inverse_law(k):
    rep = bt.inverse_law_check(affine_grid(k, half=0.5), inverse_affine_grid(k, half=4.0))
    assert rep.passed
    assert rep.difference < 1e-10


def test_inverse_law_complex_coefficient():
    # F(z) = z + c conj(z) + b with complex c has a closed-form inverse
    c, b = 0.2 + 0.1j, 0.3 - 0.2j
    dom = rect(41, 0.5)
    f = bt.MapGrid.from_function(dom, lambda z: z + c * np.conj(z) + b)

    def finv(w):
        w = w - b
        return (w - c * np.conj(w)) / (1 - abs(c) ** 2)

    g = bt.MapGrid.from_function(rect(41, 2.0), finv)
    rep = bt.inverse_law_check(f, g)
    assert rep.passed


def test_inverse_law_rejects_non_inverse():
    with pytest.raises(NotInverse):
        bt.inverse_law_check(affine_grid(0.3, half=0.5), affine_grid(0.3, half=4.0))


def test_composition_law_holomorphic():
    f = affine_grid(0.3, n=129)
    assert bt.composition_law_check(f, lambda w: w + 5).passed
    assert bt.composition_law_check(f, lambda w: 2j * w - 1).passed


def test_composition_law_detects_antiholomorphic():
    rep = bt.composition_law_check(affine_grid(0.3), np.conj)
    assert not rep.passed
    assert rep.deviation > 0.1


def test_wirtinger_closed_form_rectangle():
    dom = rect(257)
    z = dom.points()
    f = z ** 2 * np.conj(z)
    fz, fzb = bt.wirtinger(f, dom)
    assert np.abs(fz - 2 * z * np.conj(z)).max() < 1e-3
    assert np.abs(fzb - z ** 2).max() < 1e-3
    # second order: halving h cuts the error by four
    dom2 = rect(513)
    z2 = dom2.points()
    fz2, _ = bt.wirtinger(z2 ** 2 * np.conj(z2), dom2)
    e1 = np.abs(fz - 2 * z * np.conj(z)).max()
    e2 = np.abs(fz2 - 2 * z2 * np.conj(z2)).max()
    assert 3.5 < e1 / e2 < 4.5


def test_wirtinger_spectral_on_sheared_torus():
    lat = (1.0, 0.3 + 1.1j)
    dom = bt.GridDomain.torus(32, lat)
    z = dom.points()
    # s is the first parallelogram coordinate, so exp(2 pi i s) is periodic
    det = (np.conj(lat[0]) * lat[1]).imag
    s = (np.conj(z) * lat[1]).imag / det
    f = np.exp(2j * np.pi * s)
    # s = (conj(z) l2 - z conj(l2)) / (2i det)
    ds_dz = -np.conj(lat[1]) / (2j * det)
    ds_dzb = lat[1] / (2j * det)
    fz, fzb = bt.wirtinger(f, dom)
    assert np.abs(fz - 2j * np.pi * ds_dz * f).max() < 1e-11
    assert np.abs(fzb - 2j * np.pi * ds_dzb * f).max() < 1e-11


def test_field_rejects_nonadmissible():
    dom = bt.GridDomain.torus(8)
    vals = np.zeros(dom.shape, complex)
    vals[2, 3] = 1.0
    with pytest.raises(NotAdmissible):
        bt.BeltramiField(dom, vals)


def test_mu_rejects_orientation_reversal():
    with pytest.raises(NotAdmissible):
        bt.mu_of_map(bt.MapGrid.from_function(rect(9), lambda z: np.conj(z) + 0.1 * z))


def test_mu_rejects_degenerate():
    with pytest.raises(DegenerateJacobian):
        bt.mu_of_map(bt.MapGrid.from_function(rect(9), lambda z: 0 * z + 1))


def test_mask_excludes_samples():
    dom = rect(9)
    fmap = bt.MapGrid.from_function(dom, lambda z: z ** 2)
    mask = np.abs(dom.points()) < 0.3
    mu = bt.mu_of_map(bt.with_mask(fmap, mask))
    assert bt.sup_norm(mu) < 1e-12


def test_chain_rule_identity():
    # f = w^2 + conj(w) composed with w = z + c conj(z): f_wbar = 1
    c = 0.25
    dom = rect(65)
    w = bt.MapGrid.from_function(dom, lambda z: z + c * np.conj(z), lambda z: 1, lambda z: c)
    wv = w.values
    f = bt.MapGrid(dom, wv ** 2 + np.conj(wv), 2 * wv + c, 2 * wv * c + 1)
    nu = bt.mu_of_map(w)
    assert bt.chain_rule_residual(f, w, nu, f_wbar=1) < 1e-13
    assert bt.chain_rule_residual(f, w, nu) < 1e-13


def test_field_json_roundtrip():
    dom = bt.GridDomain.torus(8, (1, 0.5 + 1j))
    fld = bt.BeltramiField.from_function(dom, lambda z: 0.2 * np.sin(z.real) + 0.1j)
    doc = json.loads(json.dumps(fld.to_dict()))
    back = bt.BeltramiField.from_dict(doc)
    assert np.array_equal(back.values, fld.values)
    assert back.domain == fld.domain
    assert set(doc) == {"nx", "ny", "domain", "periodic", "values"}


def test_grid_from_rectangle_list():
    doc = {"nx": 4, "ny": 3, "domain": [0, 1, 0, 2], "periodic": [False, False],
           "values": [[0, 0]] * 12}
    dom, vals = bt.grid_from_dict(doc)
    assert vals.shape == (3, 4)
    assert dom.points()[-1, -1] == pytest.approx(1 + 2j)


def test_map_evaluate_interpolates():
    dom = bt.GridDomain.rectangle(0, 1, 0, 1, 17)
    z = dom.points()
    fmap = bt.MapGrid(dom, 2 * z + 1j)
    pts = np.array([0.33 + 0.71j, 0.5 + 0.1j])
    assert np.allclose(fmap.evaluate(pts), 2 * pts + 1j, atol=1e-14)
    assert np.isnan(fmap.evaluate(np.array([2 + 2j]))[0])


def test_holomorphic_map_has_zero_coefficient():
    dom = rect(65, 2.0)
    z = dom.points()
    fmap = bt.with_mask(bt.MapGrid.from_function(dom, lambda z: z ** 2 + 3), np.abs(z) < 0.5)
    assert bt.sup_norm(bt.mu_of_map(fmap)) < 1e-10


@pytest.mark.parametrize("poly", [lambda z: z ** 4 + z, lambda z: z ** 3 + 0.1 * z,
                                  lambda z: z ** 2 + z])
def test_polynomial_coefficient_is_second_order(poly):
    # critical points of all three lie inside the masked disk |z| < 0.8
    sups = []
    for n in (33, 65, 129):
        dom = rect(n, 2.0)
        z = dom.points()
        fmap = bt.with_mask(bt.MapGrid.from_function(dom, poly), np.abs(z) < 0.8)
        h = 4.0 / (n - 1)
        sups.append(bt.sup_norm(bt.mu_of_map(fmap)))
        assert sups[-1] < 5 * h ** 2
    assert sups[0] >= sups[1] >= sups[2]


def test_sup_norm_examples():
    dom = bt.GridDomain.torus(128)
    assert bt.sup_norm(bt.BeltramiField.constant(dom, 0)) == 0
    assert bt.sup_norm(bt.BeltramiField.constant(dom, -0.4)) == pytest.approx(0.4, abs=1e-16)
    fld = bt.BeltramiField.from_function(
        dom, lambda z: 0.3 * np.cos(2 * np.pi * z.real) * np.cos(2 * np.pi * z.imag))
    assert abs(bt.sup_norm(fld) - 0.3) < 1e-12


def test_dilatation_monotone():
    ks = [Fraction(j, 20) for j in range(20)]
    vals = [bt.dilatation(k) for k in ks]
    assert all(a < b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("k", [0.0] + KS)
def test_inverse_law_battery(k):
    rep = bt.inverse_law_check(affine_grid(k, half=0.5), inverse_affine_grid(k, half=4.0))
    assert rep.difference < 1e-10
    assert rep.norm == pytest.approx(k, abs=1e-12)


def test_inverse_law_identity_pair():
    ident = bt.MapGrid.from_function(rect(17), lambda z: z)
    rep = bt.inverse_law_check(ident, bt.MapGrid.from_function(rect(17, 2.0), lambda z: z))
    assert rep.norm == 0 and rep.inverse_norm == 0


def test_inverse_law_wrong_k():
    with pytest.raises(NotInverse):
        bt.inverse_law_check(affine_grid(0.3, half=0.5), inverse_affine_grid(0.4, half=4.0))


def test_composition_square_on_fine_grid():
    # image of [1, 2] x [-0.5, 0.5] under A_k avoids 0, where u^2 is injective
    dom = bt.GridDomain.rectangle(1, 2, -0.5, 0.5, 256)
    f = bt.MapGrid.from_function(dom, lambda z: td.affine_map(z, 0.3))
    assert bt.composition_law_check(f, lambda w: w ** 2).deviation < 1e-8
    assert bt.composition_law_check(f, lambda w: w + 5).deviation < 1e-12


def test_chain_rule_examples():
    c = 0.25
    dom = rect(33)
    w = bt.MapGrid.from_function(dom, lambda z: z + c * np.conj(z), lambda z: 1, lambda z: c)
    nu = bt.BeltramiField.constant(dom, c)
    wv = w.values
    assert bt.chain_rule_residual(w, w, nu) < 1e-10
    sq = bt.MapGrid(dom, wv ** 2, 2 * wv, 2 * wv * c)
    assert bt.chain_rule_residual(sq, w, nu) < 1e-10
    # conj(w): f_z = c, f_zb = 1 and f_wbar = 1
    cj = bt.MapGrid(dom, np.conj(wv), np.full(dom.shape, c, complex), np.ones(dom.shape, complex))
    assert bt.chain_rule_residual(cj, w, nu, f_wbar=1) < 1e-10
    lhs = 1 - c * c
    assert bt.chain_rule_residual(cj, w, nu, f_wbar=0) == pytest.approx(lhs, rel=1e-14)


def test_not_admissible_boundary():
    dom = bt.GridDomain.torus(4)
    bt.BeltramiField(dom, np.full(dom.shape, np.nextafter(1.0, 0), complex))
    with pytest.raises(NotAdmissible):
        bt.BeltramiField(dom, np.full(dom.shape, 1j))
