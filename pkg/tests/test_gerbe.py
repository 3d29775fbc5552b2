import dataclasses
import itertools
import math

import numpy as np
import pytest
from scipy.linalg import expm

from twistk import gerbe, mesh

TWO_PI = 2.0 * math.pi


def base_phase():
    return gerbe.linear_phase([0.3, 0.5, -0.2, 0.4])


def base_map(degree=1):
    return gerbe.det_twist(gerbe.power_map(degree), base_phase())


def base_log_h():
    chi = base_phase()
    return lambda x: 1j * np.asarray(chi(x))


def unit_cochain():
    one = lambda x: np.ones(np.asarray(x).shape[:-1], dtype=complex)
    return {(a, b): one for a in range(5) for b in range(a + 1, 5)}


def coboundary_cochain(seed=11):
    """lambda_ab = mu_a / mu_b: nontrivial lifts with exactly trivial f."""
    rng = np.random.default_rng(seed)
    mus = [
        (lambda c: (lambda x: np.exp(1j * (np.asarray(x) @ c))))(
            0.7 * rng.standard_normal(4))
        for _ in range(5)]
    return {(a, b): (lambda ma, mb: (lambda x: ma(x) / mb(x)))(
        mus[a], mus[b]) for a in range(5) for b in range(a + 1, 5)}


@pytest.fixture(scope="module")
def twisted_atlas():
    """Synthetic atlas with Dixmier-Douady integer 3 and its vortex point."""
    lam = gerbe.smooth_phase_cochain(7, scale=0.8)
    face = mesh.Triangulation(0).face_corners(2, 3)
    vort, center = gerbe.vortex_phase(face, -3)
    base = lam[(2, 3)]
    lam[(2, 3)] = lambda x: base(x) * vort(x)
    return gerbe.make_scalar_twist_atlas(
        base_map(1), lam, base_log_h(), singular=[((2, 3), center)])


# -- local identities -------------------------------------------------------

def test_face_stokes_residual_with_nonscalar_lift():
    g_a = base_map(2)
    rng = np.random.default_rng(0)
    ys = []
    for _ in range(2):
        y = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        ys.append((y - y.conj().T) / 2)

    def phi(x):
        x = np.asarray(x)
        flat = x.reshape(-1, 4)
        out = np.array([expm(p[1] * ys[0] + p[2] * ys[1]) for p in flat])
        return out.reshape(x.shape[:-1] + (2, 2))

    def g_b(x):
        ph = phi(x)
        return ph @ g_a(x) @ np.linalg.inv(ph)

    corners, _ = mesh.Triangulation(6).tet_elements(0)
    for cell in corners[:3]:
        assert gerbe.stokes_residual_face(g_a, g_b, phi, cell) < 1e-6


def test_edge_stokes_residual_scalar_atlas():
    atlas = gerbe.make_scalar_twist_atlas(
        base_map(2), gerbe.smooth_phase_cochain(7, scale=0.8), base_log_h())
    tri = mesh.Triangulation(3)
    cells, _ = mesh.ref_triangles(6)
    sc = mesh.sphere_corners(tri.face_corners(0, 1), cells)
    triple = (0, 1, 2)
    branch = lambda pts: np.log(atlas.f_at(*triple, pts))
    for cell in sc[:3]:
        assert gerbe.stokes_residual_edge(atlas, tri, triple, cell,
                                          branch) < 1e-8


def test_cyclic_overlap_form_vanishes_when_f_trivial():
    atlas = gerbe.make_scalar_twist_atlas(base_map(2), coboundary_cochain(),
                                          base_log_h())
    tri = mesh.Triangulation(3)
    cells, _ = mesh.ref_triangles(5)
    sc = mesh.sphere_corners(tri.face_corners(0, 1), cells)
    # f is exactly 1 on the triple overlap
    probe = sc[0]
    assert np.abs(atlas.f_at(0, 1, 2, probe) - 1.0).max() < 1e-12
    for cell in sc[:3]:
        total = 0.0 + 0.0j
        for pair in ((0, 1), (1, 2), (2, 0)):
            phi = lambda x, p=pair: atlas.phi_at(p[0], p[1], x)
            total += gerbe.omega2_cell_integrals(
                atlas.charts[pair[0]], phi, cell[None, :, :])[0]
        assert abs(total) < 1e-8


def test_winding_density_closed():
    """The pulled-back density extends radially to a closed 3-form in R^4."""
    g = base_map(2)

    def g_ext(x):
        x = np.asarray(x, dtype=float)
        return g(x / np.linalg.norm(x, axis=-1, keepdims=True))

    h = 1e-3

    def mc(x, i):
        e = np.zeros(4)
        e[i] = 1.0
        d = (-g_ext(x + 2 * h * e) + 8 * g_ext(x + h * e)
             - 8 * g_ext(x - h * e) + g_ext(x - 2 * h * e)) / (12 * h)
        return np.linalg.inv(g_ext(x)) @ d

    def component(x, idx):
        a = [mc(x, i) for i in idx]
        total = 0.0
        for p in itertools.permutations(range(3)):
            sgn = 1 if p in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1
            total += sgn * np.trace(a[p[0]] @ a[p[1]] @ a[p[2]])
        return total

    def exterior_derivative(x):
        total = 0.0
        for axis in range(4):
            rest = tuple(i for i in range(4) if i != axis)
            e = np.zeros(4)
            e[axis] = 1.0
            d = (-component(x + 2 * h * e, rest)
                 + 8 * component(x + h * e, rest)
                 - 8 * component(x - h * e, rest)
                 + component(x - 2 * h * e, rest)) / (12 * h)
            total += (-1) ** axis * d
        return total

    rng = np.random.default_rng(1)
    for _ in range(4):
        x = rng.standard_normal(4)
        x /= np.linalg.norm(x)
        assert abs(exterior_derivative(x)) < 1e-6


# -- collated invariant -----------------------------------------------------

def test_untwisted_invariant_equals_winding_integral():
    tri = mesh.Triangulation(3)
    g = base_map(2)
    atlas = gerbe.make_scalar_twist_atlas(g, unit_cochain(), base_log_h())
    rec = gerbe.theorem1_invariant(atlas, tri)
    assert rec["dd_k"] == 0
    assert abs(rec["invariant"] - gerbe.witten_integral(g, tri)) < 1e-6


def test_smooth_twist_collation_telescopes():
    tri = mesh.Triangulation(3)
    g = base_map(2)
    atlas = gerbe.make_scalar_twist_atlas(
        g, gerbe.smooth_phase_cochain(7, scale=0.8), base_log_h())
    rec = gerbe.theorem1_invariant(atlas, tri)
    assert rec["dd_k"] == 0
    assert abs(rec["imag"]) < 1e-9
    assert abs(rec["invariant"] - gerbe.witten_integral(g, tri)) < 1e-6


def test_twisted_atlas_dd_integer(twisted_atlas):
    assert gerbe.dd_integer(twisted_atlas) == 3


def test_dd_integer_independent_of_chart_maps(twisted_atlas):
    other = dataclasses.replace(
        twisted_atlas, charts={a: base_map(2) for a in range(5)})
    assert gerbe.dd_integer(other) == 3


def test_branch_shifts_move_invariant_by_multiples_of_k(twisted_atlas):
    tri = mesh.Triangulation(3)
    base = gerbe.theorem1_invariant(twisted_atlas, tri)
    assert base["dd_k"] == 3
    k = base["dd_k"]
    for triple in ((0, 1, 4), (2, 3, 4), (0, 2, 3)):
        shifted = dataclasses.replace(twisted_atlas,
                                      branch_offsets={triple: 1})
        delta = gerbe.theorem1_invariant(shifted, tri)["invariant"] \
            - base["invariant"]
        assert abs(delta - k * round(delta / k)) < 1e-6
    for off in (1, -2):
        shifted = dataclasses.replace(twisted_atlas, h_offset=off)
        delta = gerbe.theorem1_invariant(shifted, tri)["invariant"] \
            - base["invariant"]
        assert abs(delta - k * round(delta / k)) < 1e-6
        assert round(delta / k) == off  # the h shift moves by exactly k*off


def test_invariant_agrees_across_triangulations(twisted_atlas):
    vals = [gerbe.theorem1_invariant(twisted_atlas,
                                     mesh.Triangulation(4, diagonal=d))
            ["invariant"] for d in (0, 1, 2)]
    assert max(vals) - min(vals) < 1e-3


def test_invariant_homotopy_invariant(twisted_atlas):
    tri = mesh.Triangulation(3)
    base = gerbe.theorem1_invariant(twisted_atlas, tri)["invariant"]
    rng = np.random.default_rng(3)
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    x = (x - x.conj().T) / 2
    g = twisted_atlas.charts[0]
    for s in (0.5, 1.0):
        u, ui = expm(s * x), expm(-s * x)
        conj = lambda p, u=u, ui=ui: u @ g(p) @ ui
        moved = dataclasses.replace(twisted_atlas,
                                    charts={a: conj for a in range(5)})
        val = gerbe.theorem1_invariant(moved, tri)["invariant"]
        assert abs(val - base) < 1e-4


# -- winding numbers --------------------------------------------------------

@pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
def test_winding_number_of_phase_powers(m):
    theta = np.linspace(0.0, TWO_PI, 401)
    loop = np.stack([np.cos(theta), np.sin(theta),
                     0 * theta, 0 * theta], axis=1)
    hmap = lambda pts: (pts[:, 0] + 1j * pts[:, 1]) ** m
    assert gerbe.winding_number(hmap, loop) == m
    assert gerbe.winding_number(hmap, loop[::2]) == m  # refinement-stable


def test_vortex_phase_winds_around_its_center(twisted_atlas):
    face = mesh.Triangulation(0).face_corners(2, 3)
    vort, center = gerbe.vortex_phase(face, -3)
    e1 = face[1] - face[0]
    e1 /= np.linalg.norm(e1)
    e2 = face[2] - face[0]
    e2 -= (e2 @ e1) * e1
    e2 /= np.linalg.norm(e2)
    theta = np.linspace(0.0, TWO_PI, 513)
    loop = center + 0.05 * (np.cos(theta)[:, None] * e1
                            + np.sin(theta)[:, None] * e2)
    assert gerbe.winding_number(vort, loop) == -3


def test_non_contractible_determinant_rejected():
    g = gerbe.power_map(1)  # det g == 1, but feed a winding log branch
    bad_log_h = lambda x: 1j * np.asarray(x)[..., 0] * 50.0
    atlas = gerbe.make_scalar_twist_atlas(g, unit_cochain(), bad_log_h)
    with pytest.raises(ValueError):
        gerbe.theorem1_invariant(atlas, mesh.Triangulation(2))
