"""Chart-wise winding invariants on the triangulated 3-sphere.

Implements the Witten winding integral for globally defined unitary maps,
the correction 2-forms on chart overlaps, the log-branch 1-forms on triple
overlaps, the locally constant quadruple data and its integer class, and
the full alternating-sum invariant for twisted (gerbe) transition data.

All maps are vectorized callables: points of shape (..., 4) on the unit
sphere in R^4 go in, matrices of shape (..., d, d) (or scalars (...,)) come
out.  Derivatives are 4th-order central differences in the reference
coordinates of each mesh cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import (SEG_RULE, TET_RULE, TRI_RULE, Triangulation,
                   ref_segments, sphere_points)

FD_STEP = 1e-4
TWO_PI = 2.0 * math.pi

# Pauli matrices for the quaternion chart model.
_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_S3 = np.array([[1, 0], [0, -1]], dtype=complex)


# ---------------------------------------------------------------------------
# map families
# ---------------------------------------------------------------------------

def quaternion_matrix(x: np.ndarray) -> np.ndarray:
    """Unit quaternion x in S^3 as an SU(2) matrix x0 + i x.sigma."""
    x = np.asarray(x, dtype=float)
    out = (x[..., 0, None, None] * np.eye(2)
           + 1j * (x[..., 1, None, None] * _S1
                   + x[..., 2, None, None] * _S2
                   + x[..., 3, None, None] * _S3))
    return out


def power_map(degree: int):
    """The degree-d map S^3 -> SU(2), x -> x^d in quaternion language."""
    if degree < 0:
        raise ValueError("degree must be >= 0")

    def g(x):
        u = quaternion_matrix(x)
        out = np.broadcast_to(np.eye(2, dtype=complex),
                              u.shape).copy()
        for _ in range(degree):
            out = out @ u
        return out
    return g


def det_twist(g, chi):
    """Multiply a U(2)-valued map by diag(e^{i chi(x)}, 1)."""
    def g2(x):
        m = np.array(g(x))
        m[..., :, 0] = m[..., :, 0] * np.exp(1j * chi(x))[..., None]
        return m
    return g2


def linear_phase(coeffs):
    """chi(x) = coeffs . x, a contractible circle-valued exponent."""
    c = np.asarray(coeffs, dtype=float)

    def chi(x):
        return np.asarray(x) @ c
    return chi


# ---------------------------------------------------------------------------
# finite differences and the Witten integral
# ---------------------------------------------------------------------------

def _fd4(sample, h: float):
    """4th-order central difference of a batched map R -> arrays."""
    return (-sample(2 * h) + 8 * sample(h)
            - 8 * sample(-h) + sample(-2 * h)) / (12.0 * h)


def _check_unitary(m: np.ndarray, where: str):
    d = m.shape[-1]
    res = m @ np.conj(np.swapaxes(m, -1, -2)) - np.eye(d)
    worst = float(np.abs(res).max())
    if worst > 1e-8:
        raise ValueError(
            f"map samples are not unitary ({where}): residual {worst:.3e}")


def _maurer_cartan(g, corners: np.ndarray, u0: np.ndarray,
                   directions, step: float = FD_STEP):
    """g^-1 dg along reference directions at one quadrature node batch."""
    g0 = g(sphere_points(corners, u0))
    ginv = np.linalg.inv(g0)
    forms = []
    for e in directions:
        de = _fd4(lambda s: g(sphere_points(corners, u0 + s * e)), step)
        forms.append(ginv @ de)
    return g0, forms


def witten_density_term(g, corners: np.ndarray, validate: bool = False):
    """Integral of tr (g^-1 dg)^3 over a batch of oriented cells.

    corners has shape (N, 4, 4); returns the per-cell integrals (N,) of the
    pulled-back 3-form in reference orientation (du1 du2 du3 > 0).
    """
    pts, wts = TET_RULE
    eye3 = np.eye(3)
    out = np.zeros(corners.shape[0], dtype=complex)
    for u0, w in zip(pts, wts):
        g0, (a1, a2, a3) = _maurer_cartan(g, corners, u0, eye3)
        if validate:
            _check_unitary(g0, "tetrahedron quadrature")
            validate = False
        dens = 3.0 * np.trace(a1 @ (a2 @ a3 - a3 @ a2),
                              axis1=-2, axis2=-1)
        out += w * dens
    return out


def witten_integral(g, tri: Triangulation) -> float:
    """(1/24 pi^2) integral of tr (g^-1 dg)^3 over the triangulated S^3."""
    total = 0.0 + 0.0j
    first = True
    for alpha in range(5):
        corners, signs = tri.tet_elements(alpha)
        vals = witten_density_term(g, corners, validate=first)
        first = False
        total += np.sum(signs * vals)
    val = total / (24.0 * math.pi ** 2)
    return float(val.real)


# ---------------------------------------------------------------------------
# chart atlases with scalar or matrix transition lifts
# ---------------------------------------------------------------------------

@dataclass
class ChartAtlas:
    """Per-chart maps with transition lifts and log-branch bookkeeping.

    charts maps alpha -> unitary-valued callable; phi maps ordered pairs
    (alpha, beta) with alpha < beta to the lift on the overlap; log_h is a
    smooth global branch of log det g (required for the invariant; its
    existence is the contractibility hypothesis).  branch_offsets adds
    2 pi i times an integer to the chosen log f branch of a triple;
    h_offset shifts the global log h branch.  singular lists (pair, point)
    marks where an overlap lift has an integrable vortex, so face
    quadrature grades its refinement toward the point.
    """

    charts: dict
    phi: dict
    log_h: object
    branch_offsets: dict = field(default_factory=dict)
    h_offset: int = 0
    singular: list = field(default_factory=list)

    def phi_oriented(self, a: int, b: int):
        if a == b:
            raise ValueError("transition lift needs two distinct charts")
        if (a, b) in self.phi:
            return self.phi[(a, b)], False
        return self.phi[(b, a)], True

    def phi_at(self, a: int, b: int, x: np.ndarray) -> np.ndarray:
        fn, inverted = self.phi_oriented(a, b)
        m = fn(x)
        return np.linalg.inv(m) if inverted else m

    def f_at(self, a: int, b: int, c: int, x: np.ndarray) -> np.ndarray:
        """Scalar cocycle phi_ab phi_bc phi_ca; validates scalarity."""
        prod = self.phi_at(a, b, x) @ self.phi_at(b, c, x) \
            @ self.phi_at(c, a, x)
        f = prod[..., 0, 0]
        d = prod.shape[-1]
        res = prod - f[..., None, None] * np.eye(d)
        if float(np.abs(res).max()) > 1e-8:
            raise ValueError(
                f"cocycle of ({a},{b},{c}) is not scalar: "
                f"residual {float(np.abs(res).max()):.3e}")
        return f

    def log_h_at(self, x: np.ndarray) -> np.ndarray:
        return self.log_h(x) + TWO_PI * 1j * self.h_offset

    def singular_on(self, a: int, b: int):
        for pair, point in self.singular:
            if tuple(sorted(pair)) == (min(a, b), max(a, b)):
                return point
        return None


def make_scalar_twist_atlas(g, lambda_cochain: dict, log_h,
                            singular=None) -> ChartAtlas:
    """Atlas with scalar lifts phi_ab = lambda_ab Id around one global map.

    lambda_cochain maps ordered pairs (a, b), a < b, to S^1-valued
    callables; scalars commute with g, so the gluing relation holds with
    g_alpha = g on every chart, and f is the coboundary of lambda.
    """
    probe = np.array(g(np.array([1.0, 0.0, 0.0, 0.0])))
    d = probe.shape[-1]
    eye = np.eye(d, dtype=complex)

    def lift(lam):
        def phi(x):
            return np.asarray(lam(x))[..., None, None] * eye
        return phi

    charts = {alpha: g for alpha in range(5)}
    phi = {pair: lift(lam) for pair, lam in lambda_cochain.items()}
    return ChartAtlas(charts, phi, log_h, singular=list(singular or []))


def smooth_phase_cochain(seed: int, scale: float = 1.0) -> dict:
    """Winding-free S^1-valued 1-cochain lambda_ab = exp(i c_ab . x)."""
    rng = np.random.default_rng(seed)
    out = {}
    for a in range(5):
        for b in range(a + 1, 5):
            c = scale * rng.standard_normal(4)
            out[(a, b)] = (lambda cc: (lambda x: np.exp(
                1j * (np.asarray(x) @ cc))))(c)
    return out


def vortex_phase(face_corners: np.ndarray, winding: int):
    """Unit-modulus map winding around the center of a spherical triangle.

    Returns (callable, center point).  The callable is smooth except at the
    center, where the phase winds the given number of times; used to build
    synthetic atlases with nonzero Dixmier-Douady class.
    """
    center = face_corners.mean(axis=0)
    center = center / np.linalg.norm(center)
    e1 = face_corners[1] - face_corners[0]
    e1 = e1 / np.linalg.norm(e1)
    e2 = face_corners[2] - face_corners[0]
    e2 = e2 - (e2 @ e1) * e1
    e2 = e2 / np.linalg.norm(e2)

    def lam(x):
        dx = np.asarray(x) - center
        w = dx @ e1 + 1j * (dx @ e2)
        phase = w / np.abs(w)
        return phase ** winding
    return lam, center


# ---------------------------------------------------------------------------
# overlap 2-form (1-forms a = dphi phi^-1 wedged against chart currents)
# ---------------------------------------------------------------------------

def omega2_cell_integrals(g, phi, corners: np.ndarray,
                          step: float = FD_STEP) -> np.ndarray:
    """Per-cell integrals of the overlap correction 2-form.

    corners is a batch (N, 3, 4) of spherical triangles; g is the chart map
    on the lower-index side of the ordered pair, phi the lift.  The
    integrand is (1/8 pi^2) tr a ^ [dg g^-1 + g^-1 dg + g a g^-1 - a] with
    a = dphi phi^-1, evaluated in reference orientation.
    """
    pts, wts = TRI_RULE
    eye2 = np.eye(2)
    out = np.zeros(corners.shape[0], dtype=complex)
    for u0, w in zip(pts, wts):
        g0, dgs = _maurer_cartan(g, corners, u0, eye2, step)
        phi0 = phi(sphere_points(corners, u0))
        phiinv = np.linalg.inv(phi0)
        ginv = np.linalg.inv(g0)
        a_forms, b_forms = [], []
        for i, e in enumerate(eye2):
            dphi = _fd4(lambda s: phi(sphere_points(corners, u0 + s * e)),
                        step)
            a = dphi @ phiinv
            dg = g0 @ dgs[i]           # dg itself; dgs holds g^-1 dg
            b = dg @ ginv + dgs[i] + g0 @ a @ ginv - a
            a_forms.append(a)
            b_forms.append(b)
        wedge = np.trace(a_forms[0] @ b_forms[1]
                         - a_forms[1] @ b_forms[0], axis1=-2, axis2=-1)
        out += w * wedge
    return out / (8.0 * math.pi ** 2)


def omega2_face_integral(atlas: ChartAtlas, tri: Triangulation,
                         a: int, b: int, depth: int = 18) -> complex:
    """Integral of the correction 2-form over the face shared by a < b."""
    singular = atlas.singular_on(a, b)
    corners, signs = tri.face_elements(a, b, singular=singular, depth=depth)
    phi = lambda x: atlas.phi_at(a, b, x)
    vals = omega2_cell_integrals(atlas.charts[a], phi, corners)
    return complex(np.sum(signs * vals))


# ---------------------------------------------------------------------------
# log branches along nerve edges, quadruple constants, DD integer
# ---------------------------------------------------------------------------

class EdgeBranch:
    """Continuous branch of log f along one nerve edge.

    The edge runs from the lower-index to the higher-index remaining
    vertex; the branch starts at the principal log at t = 0 plus
    2 pi i times the configured offset, and is continued by phase
    unwrapping on a fine parameter grid.
    """

    N_FINE = 1024

    def __init__(self, atlas: ChartAtlas, tri: Triangulation,
                 triple: tuple):
        self.triple = tuple(triple)
        self.corners = tri.edge_corners(*self.triple)
        self._atlas = atlas
        t = np.linspace(0.0, 1.0, self.N_FINE + 1)
        pts = self._points(t)
        f = atlas.f_at(*self.triple, pts)
        mag = np.abs(f)
        if float(np.abs(mag - 1.0).max()) > 1e-8:
            raise ValueError("cocycle is not unit modulus along the edge")
        self._t = t
        self._phase = np.unwrap(np.angle(f))
        self._offset = TWO_PI * atlas.branch_offsets.get(self.triple, 0)

    def _points(self, t: np.ndarray) -> np.ndarray:
        p, q = self.corners
        flat = p[None, :] + np.asarray(t)[:, None] * (q - p)[None, :]
        return flat / np.linalg.norm(flat, axis=-1, keepdims=True)

    def log_f(self, t: np.ndarray) -> np.ndarray:
        """Branch values at parameters t (exact f, unwrapped sheet)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        f = self._atlas.f_at(*self.triple, self._points(t))
        raw = np.angle(f)
        ref = np.interp(t, self._t, self._phase)
        sheet = np.round((ref - raw) / TWO_PI)
        return 1j * (raw + TWO_PI * sheet + self._offset)

    def at_vertex(self, point: np.ndarray) -> complex:
        p, q = self.corners
        t = 0.0 if np.linalg.norm(point - p) < np.linalg.norm(point - q) \
            else 1.0
        return complex(self.log_f(np.array([t]))[0])


def edge_branches(atlas: ChartAtlas, tri: Triangulation) -> dict:
    import itertools
    return {t: EdgeBranch(atlas, tri, t)
            for t in itertools.combinations(range(5), 3)}


def omega1_edge_integral(atlas: ChartAtlas, tri: Triangulation,
                         branch: EdgeBranch) -> complex:
    """Integral of (1/4 pi^2) log f  h^-1 dh along one nerve edge."""
    pts, wts = SEG_RULE
    cells, _ = ref_segments(tri.level)
    total = 0.0 + 0.0j
    for cell in cells:
        t0, t1 = float(cell[0, 0]), float(cell[1, 0])
        dt = t1 - t0
        for u0, w in zip(pts[:, 0], wts):
            t = t0 + u0 * dt

            def sample(s):
                return atlas.log_h_at(branch._points(
                    np.array([t + s])))[0]
            dlh = _fd4(sample, FD_STEP)
            lf = branch.log_f(np.array([t]))[0]
            total += w * dt * lf * dlh
    return total / (4.0 * math.pi ** 2)


def quadruple_constants(atlas: ChartAtlas, tri: Triangulation,
                        branches: dict | None = None) -> dict:
    """a_{abcd} = (delta log f) at each nerve vertex; must lie in 2 pi i Z."""
    import itertools
    branches = branches or edge_branches(atlas, tri)
    out = {}
    for quad in itertools.combinations(range(5), 4):
        a, b, c, d = quad
        point = tri.vertex_point(*quad)
        val = (branches[(b, c, d)].at_vertex(point)
               - branches[(a, c, d)].at_vertex(point)
               + branches[(a, b, d)].at_vertex(point)
               - branches[(a, b, c)].at_vertex(point))
        n = val / (TWO_PI * 1j)
        if abs(n - round(n.real)) > 1e-8:
            raise ValueError(
                f"quadruple constant at {quad} is not 2 pi i times an "
                f"integer: {val!r}")
        out[quad] = val
    return out


def dd_integer(atlas: ChartAtlas, tri: Triangulation | None = None,
               branches: dict | None = None) -> int:
    """Dixmier-Douady integer: signed sum of a/(2 pi i) over nerve vertices."""
    tri = tri or Triangulation(0)
    consts = quadruple_constants(atlas, tri, branches)
    total = 0.0
    for quad, val in consts.items():
        total += tri.sign_vertex(*quad) * (val / (TWO_PI * 1j)).real
    k = round(total)
    if abs(total - k) > 1e-8:
        raise ValueError(f"DD sum is not an integer: {total!r}")
    return int(k)


def winding_number(hmap, loop_points: np.ndarray) -> int:
    """Winding of a circle-valued map along a closed polyline of points."""
    vals = np.asarray(hmap(loop_points))
    if float(np.abs(np.abs(vals) - 1.0).max()) > 1e-6:
        raise ValueError("map is not unit modulus along the loop")
    ph = np.unwrap(np.angle(vals))
    total = ph[-1] - ph[0] + np.angle(vals[0] / vals[-1])
    w = total / TWO_PI
    if abs(w - round(w)) > 1e-6:
        raise ValueError(f"winding is not an integer: {w!r}")
    return int(round(w))


def _check_contractible(atlas: ChartAtlas, tri: Triangulation):
    """Verify log_h is a genuine continuous branch of log det g."""
    import itertools
    for triple in itertools.combinations(range(5), 3):
        corners = tri.edge_corners(*triple)
        t = np.linspace(0.0, 1.0, 257)
        flat = corners[0] + t[:, None] * (corners[1] - corners[0])
        pts = flat / np.linalg.norm(flat, axis=-1, keepdims=True)
        chart = min(i for i in range(5) if i not in triple)
        det = np.linalg.det(atlas.charts[chart](pts))
        lh = atlas.log_h_at(pts)
        res = np.exp(lh) - det
        if float(np.abs(res).max()) > 1e-6:
            raise ValueError(
                "log_h is not a branch of log det g along the edge "
                f"{triple}: residual {float(np.abs(res).max()):.3e}")
        jump = np.abs(np.diff(lh.imag))
        if float(jump.max()) > math.pi:
            raise ValueError(
                f"log_h branch jumps along edge {triple}; the determinant "
                "is not contractible with this branch — use winding_number")


def theorem1_invariant(atlas: ChartAtlas, tri: Triangulation,
                       depth: int = 18) -> dict:
    """Alternating-sum invariant of a twisted chart family.

    Returns a record with the invariant, the Dixmier-Douady modulus, and
    the individual terms.  The collation signs are the fundamental-cycle
    signs of the boundary-of-4-simplex nerve.
    """
    import itertools
    _check_contractible(atlas, tri)
    term_tet = 0.0 + 0.0j
    first = True
    for alpha in range(5):
        corners, signs = tri.tet_elements(alpha)
        vals = witten_density_term(atlas.charts[alpha], corners,
                                   validate=first)
        first = False
        term_tet += np.sum(signs * vals)
    term_tet /= 24.0 * math.pi ** 2

    term_face = 0.0 + 0.0j
    for a, b in itertools.combinations(range(5), 2):
        term_face += omega2_face_integral(atlas, tri, a, b, depth=depth)

    branches = edge_branches(atlas, tri)
    term_edge = 0.0 + 0.0j
    for triple, branch in branches.items():
        sign = tri.sign_edge(*triple)
        term_edge += sign * omega1_edge_integral(atlas, tri, branch)

    consts = quadruple_constants(atlas, tri, branches)
    term_vertex = 0.0 + 0.0j
    for quad, aval in consts.items():
        point = tri.vertex_point(*quad)
        lh = complex(np.asarray(atlas.log_h_at(point[None, :]))[0])
        term_vertex += tri.sign_vertex(*quad) * aval * lh \
            / (4.0 * math.pi ** 2)

    k = dd_integer(atlas, tri, branches)
    total = term_tet - term_face + term_edge - term_vertex
    return {
        "invariant": float(total.real),
        "imag": float(total.imag),
        "dd_k": k,
        "modulus": abs(k),
        "terms": {
            "tet": complex(term_tet),
            "face": complex(term_face),
            "edge": complex(term_edge),
            "vertex": complex(term_vertex),
        },
    }


# ---------------------------------------------------------------------------
# local Stokes diagnostics
# ---------------------------------------------------------------------------

_FACE_OF_TET = [((1, 2, 3), 1), ((0, 2, 3), -1), ((0, 1, 3), 1),
                ((0, 1, 2), -1)]


def stokes_residual_face(g_alpha, g_beta, phi,
                         corners: np.ndarray) -> float:
    """Residual of d omega_ab = density(b) - density(a) on one cell.

    corners is a single spherical tetrahedron (4, 4); both sides are
    computed in the cell's own reference orientation, so the check is
    convention-free.
    """
    vol = witten_density_term(g_beta, corners[None, :, :])[0] \
        - witten_density_term(g_alpha, corners[None, :, :])[0]
    vol /= 24.0 * math.pi ** 2
    bdry = 0.0 + 0.0j
    for face, sign in _FACE_OF_TET:
        fc = corners[list(face)]
        bdry += sign * omega2_cell_integrals(g_alpha, phi,
                                             fc[None, :, :])[0]
    return float(abs(bdry - vol))


_EDGE_OF_TRI = [((1, 2), 1), ((0, 2), -1), ((0, 1), 1)]


def stokes_residual_edge(atlas: ChartAtlas, tri: Triangulation,
                         triple: tuple, corners: np.ndarray,
                         branch_from) -> float:
    """Residual of omega_ab + omega_bc + omega_ca = d omega_abc on a cell.

    corners is one spherical triangle (3, 4) inside the triple overlap
    region; branch_from maps points to the chosen log f branch (callable).
    """
    a, b, c = triple
    area = 0.0 + 0.0j
    for pair in ((a, b), (b, c), (c, a)):
        lo, hi = pair
        phi = lambda x, lo=lo, hi=hi: atlas.phi_at(lo, hi, x)
        area += omega2_cell_integrals(atlas.charts[lo], phi,
                                      corners[None, :, :])[0]
    bdry = 0.0 + 0.0j
    pts, wts = SEG_RULE
    for edge, sign in _EDGE_OF_TRI:
        p, q = corners[list(edge)]

        def at(t):
            flat = p[None, :] + np.asarray(t)[:, None] * (q - p)[None, :]
            return flat / np.linalg.norm(flat, axis=-1, keepdims=True)
        for u0, w in zip(pts[:, 0], wts):
            def sample(s):
                return atlas.log_h_at(at(np.array([u0 + s])))[0]
            dlh = _fd4(sample, FD_STEP)
            lf = branch_from(at(np.array([u0])))[0]
            bdry += sign * w * lf * dlh
    bdry /= 4.0 * math.pi ** 2
    return float(abs(area - bdry))
