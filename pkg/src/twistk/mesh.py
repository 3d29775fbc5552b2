"""Triangulated model of the 3-sphere as the boundary of a 4-simplex.

The five charts are the radial projections to S^3 of the five tetrahedral
facets of a regular 4-simplex centered at the origin of R^4.  Every finite
intersection is again a simplex (face, edge, vertex), so the cover is good
and its nerve is the full boundary complex.  Orientation bookkeeping is
purely combinatorial: each p-simplex of the nerve is stored with sorted
vertex indices, and the sign with which it enters the fundamental cycle is
accumulated from the alternating boundary signs of the simplices above it.

Subdivision for quadrature happens in reference (barycentric) coordinates
and is cached per (level, diagonal): tetrahedra by midpoint octasection
(the interior octahedron split along a configurable diagonal, which yields
genuinely different triangulations of the same geometry), triangles by
midpoint quadrisection, segments by bisection.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

N_CHARTS = 5


def simplex_vertices() -> np.ndarray:
    """Vertices of a regular 4-simplex, radially projected to S^3."""
    pts = np.eye(N_CHARTS) - np.full((N_CHARTS, N_CHARTS), 1.0 / N_CHARTS)
    # orthonormal basis of the hyperplane orthogonal to (1,...,1)
    u, sv, vt = np.linalg.svd(pts)
    basis = vt[:4]
    coords = pts @ basis.T
    return coords / np.linalg.norm(coords, axis=1, keepdims=True)


def sphere_points(corners: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Map reference coordinates through affine corners onto S^3.

    corners has shape (..., m+1, 4); bary has shape (m,) giving the
    reference coordinates with respect to corner 0.  Returns (..., 4).
    """
    c0 = corners[..., 0, :]
    edges = corners[..., 1:, :] - corners[..., :1, :]
    p = c0 + np.einsum("m,...mi->...i", bary, edges)
    return p / np.linalg.norm(p, axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# quadrature rules (reference-simplex coordinates, weights sum to the
# reference volume)
# ---------------------------------------------------------------------------

_A_TET = 0.5854101966249685
_B_TET = 0.1381966011250105
TET_RULE = (
    np.array([[_A_TET, _B_TET, _B_TET],
              [_B_TET, _A_TET, _B_TET],
              [_B_TET, _B_TET, _A_TET],
              [_B_TET, _B_TET, _B_TET]]),
    np.full(4, 1.0 / 24.0),
)

_TRI_PTS = []
_TRI_WTS = []
for _p, _w in ((0.445948490915965, 0.223381589678011),
               (0.091576213509771, 0.109951743655322)):
    _TRI_PTS += [[1 - 2 * _p, _p], [_p, 1 - 2 * _p], [_p, _p]]
    _TRI_WTS += [_w] * 3
TRI_RULE = (np.array(_TRI_PTS), 0.5 * np.array(_TRI_WTS))

_G3 = math.sqrt(0.6)
SEG_RULE = (
    np.array([[0.5 * (1 - _G3)], [0.5], [0.5 * (1 + _G3)]]),
    np.array([5.0, 8.0, 5.0]) / 18.0,
)


# ---------------------------------------------------------------------------
# reference-space subdivision (cached)
# ---------------------------------------------------------------------------

_OCT_CYCLES = {
    # diagonal pair -> equatorial 4-cycle (midpoint index pairs)
    0: (((0, 1), (2, 3)), ((0, 2), (1, 2), (1, 3), (0, 3))),
    1: (((0, 2), (1, 3)), ((0, 1), (1, 2), (2, 3), (0, 3))),
    2: (((0, 3), (1, 2)), ((0, 1), (1, 3), (2, 3), (0, 2))),
}


def _octasect(corners: np.ndarray, diagonal: int):
    """Split one tetrahedron (4, m) into eight through edge midpoints."""
    mid = {}
    for i, j in itertools.combinations(range(4), 2):
        mid[(i, j)] = 0.5 * (corners[i] + corners[j])
    out = []
    for i in range(4):
        cs = [corners[i]] + [mid[tuple(sorted((i, j)))]
                             for j in range(4) if j != i]
        out.append(np.array(cs))
    (d1, d2), cycle = _OCT_CYCLES[diagonal]
    a, b = mid[d1], mid[d2]
    for e1, e2 in zip(cycle, cycle[1:] + cycle[:1]):
        out.append(np.array([a, b, mid[e1], mid[e2]]))
    return out


def _quadrisect(corners: np.ndarray):
    c0, c1, c2 = corners
    m01, m02, m12 = 0.5 * (c0 + c1), 0.5 * (c0 + c2), 0.5 * (c1 + c2)
    return [np.array([c0, m01, m02]), np.array([m01, c1, m12]),
            np.array([m02, m12, c2]), np.array([m01, m12, m02])]


def _ref_signs(cells: np.ndarray) -> np.ndarray:
    edges = cells[:, 1:, :] - cells[:, :1, :]
    return np.sign(np.linalg.det(edges)).astype(int)


@lru_cache(maxsize=None)
def ref_tets(level: int, diagonal: int):
    """Reference-tet subdivision: (cells (N,4,3), signs (N,))."""
    cells = [np.vstack([np.zeros(3), np.eye(3)])]
    for _ in range(level):
        cells = [c for cell in cells for c in _octasect(cell, diagonal)]
    cells = np.array(cells)
    return cells, _ref_signs(cells)


@lru_cache(maxsize=None)
def ref_triangles(level: int):
    cells = [np.vstack([np.zeros(2), np.eye(2)])]
    for _ in range(level):
        cells = [c for cell in cells for c in _quadrisect(cell)]
    cells = np.array(cells)
    return cells, _ref_signs(cells)


@lru_cache(maxsize=None)
def ref_segments(level: int):
    n = 2 ** level
    t = np.linspace(0.0, 1.0, n + 1)
    cells = np.stack([t[:-1], t[1:]], axis=1)[..., None]
    return cells, np.ones(n, dtype=int)


def refine_triangles_toward(cells: np.ndarray, signs: np.ndarray,
                            point: np.ndarray, depth: int,
                            ratio: float = 1.0):
    """Graded quadrisection of reference triangles toward a marked point.

    A cell is split while its diameter exceeds ratio times its distance to
    the point, up to the given extra depth; used to resolve integrable
    vortex singularities of overlap 2-forms.
    """
    out_c, out_s = [], []
    work = [(c, s, 0) for c, s in zip(cells, signs)]
    while work:
        c, s, d = work.pop()
        diam = max(np.linalg.norm(c[0] - c[1]), np.linalg.norm(c[1] - c[2]),
                   np.linalg.norm(c[0] - c[2]))
        centroid = c.mean(axis=0)
        dist = np.linalg.norm(centroid - point)
        if d < depth and diam > ratio * dist:
            # midpoint quadrisection preserves the parent orientation
            for child in _quadrisect(c):
                work.append((child, s, d + 1))
        else:
            out_c.append(c)
            out_s.append(s)
    return np.array(out_c), np.array(out_s)


# ---------------------------------------------------------------------------
# the triangulation object
# ---------------------------------------------------------------------------

@dataclass
class Triangulation:
    """Boundary-of-4-simplex triangulation of S^3 at a subdivision level."""

    level: int
    diagonal: int = 0
    vertices: np.ndarray = field(default_factory=simplex_vertices)

    def __post_init__(self):
        if not 0 <= self.diagonal <= 2:
            raise ValueError("diagonal must be 0, 1, or 2")
        if self.level < 0:
            raise ValueError("level must be >= 0")

    # -- nerve combinatorics ---------------------------------------------
    def chart_indices(self, alpha: int):
        return [i for i in range(N_CHARTS) if i != alpha]

    def chart_corners(self, alpha: int) -> np.ndarray:
        return self.vertices[self.chart_indices(alpha)]

    def face_corners(self, alpha: int, beta: int) -> np.ndarray:
        idx = [i for i in range(N_CHARTS) if i not in (alpha, beta)]
        return self.vertices[idx]

    def edge_corners(self, alpha: int, beta: int, gamma: int) -> np.ndarray:
        idx = [i for i in range(N_CHARTS) if i not in (alpha, beta, gamma)]
        return self.vertices[idx]

    def vertex_point(self, alpha, beta, gamma, eta) -> np.ndarray:
        (rho,) = [i for i in range(N_CHARTS)
                  if i not in (alpha, beta, gamma, eta)]
        return self.vertices[rho]

    # -- collation signs (fundamental cycle of the boundary complex) ------
    def sign_chart(self, alpha: int) -> int:
        # global orientation chosen so the identity chart map has degree +1
        return -((-1) ** alpha)

    def sign_face(self, alpha: int, beta: int) -> int:
        pos = sum(1 for i in self.chart_indices(alpha) if i < beta)
        return self.sign_chart(alpha) * (-1) ** pos

    def sign_edge(self, alpha: int, beta: int, gamma: int) -> int:
        idx = [i for i in range(N_CHARTS) if i not in (alpha, beta)]
        pos = sum(1 for i in idx if i < gamma)
        return self.sign_face(alpha, beta) * (-1) ** pos

    def sign_vertex(self, alpha, beta, gamma, eta) -> int:
        (rho,) = [i for i in range(N_CHARTS)
                  if i not in (alpha, beta, gamma, eta)]
        return self.sign_edge(alpha, beta, gamma) * (-1 if rho > eta else 1)

    # -- curved elements for quadrature ----------------------------------
    def tet_elements(self, alpha: int):
        """(corner batch (N,4,4), signed orientations (N,)) for one chart."""
        cells, signs = ref_tets(self.level, self.diagonal)
        big = self.chart_corners(alpha)
        corners = sphere_corners(big, cells)
        return corners, signs * self.sign_chart(alpha)

    def face_elements(self, alpha: int, beta: int, singular=None,
                      depth: int = 0):
        cells, signs = ref_triangles(self.level)
        big = self.face_corners(alpha, beta)
        if singular is not None and depth > 0:
            upoint = _project_to_reference(big, singular)
            cells, signs = refine_triangles_toward(cells, signs, upoint,
                                                   depth)
        corners = sphere_corners(big, cells)
        return corners, signs * self.sign_face(alpha, beta)

    def edge_elements(self, alpha: int, beta: int, gamma: int):
        cells, signs = ref_segments(self.level)
        big = self.edge_corners(alpha, beta, gamma)
        corners = sphere_corners(big, cells)
        return corners, signs * self.sign_edge(alpha, beta, gamma)

    def n_tets(self) -> int:
        return N_CHARTS * 8 ** self.level


def sphere_corners(big: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Push reference cells (N, m+1, m) through affine corners onto S^3."""
    edges = big[1:] - big[:1]
    flat = big[0] + cells @ edges
    return flat / np.linalg.norm(flat, axis=-1, keepdims=True)


def _project_to_reference(big: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Reference coordinates of a point on the flat simplex spanned by big."""
    edges = (big[1:] - big[:1]).T
    sol, *_ = np.linalg.lstsq(edges, np.asarray(point) - big[0], rcond=None)
    return sol
