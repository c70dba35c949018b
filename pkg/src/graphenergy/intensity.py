"""Intensity of vertex-angle configurations and their critical points.

The intensity psi(alpha) = 1 - (pi - alpha)/sin(alpha) of a single angle
(0 at alpha = pi) sums over unordered pairs of a k-tuple of unit vectors to
the tuple intensity Psi on the configuration space Omega_k.  Criticality,
Hessian classification and projected-descent local search are carried out
for Phi = -Psi, the sign under which the straight pair, the planar 2pi/3
triple and the tetrahedral tuple are local minima.

All derivatives are analytic: dpsi/dalpha and the gradient factor
G(alpha) = psi'(alpha)/sin(alpha) switch to fixed Taylor expansions about
alpha = pi where the closed forms lose precision to cancellation.
"""

import math

import numpy as np
from scipy.linalg import eigvalsh

__all__ = [
    "IntensityError",
    "BarrierHitError",
    "TupleConfig",
    "CriticalityReport",
    "psi",
    "psi_prime",
    "big_psi",
    "riemannian_gradient",
    "criticality_report",
    "local_search",
    "canonical_config",
]

# Hard lower barrier on pairwise angles ("non-coinciding" segments).
_ANGLE_FLOOR = 1e-6
# Input vectors must be unit to this tolerance before exact renormalization.
_UNIT_TOL = 1e-9
# Near-zero Hessian eigenvalues, relative to the spectral radius.
_ZERO_MODE_REL = 1e-6
# Central finite-difference step in the 2-dimensional sphere charts.
_FD_STEP = 1e-4
# Switch from closed forms to series about alpha = pi below this pi - alpha.
_SERIES_CUT = 0.05
# Descent termination.
_GRAD_TOL = 1e-8
_MIN_STEP = 1e-14
# Attempts at drawing a feasible random start before giving up.
_MAX_DRAWS = 1000


class IntensityError(ValueError):
    """Invalid angle, configuration, or request."""


class BarrierHitError(IntensityError):
    """Local search collapsed toward coinciding segments.

    Carries the last feasible configuration as ``config``.
    """

    def __init__(self, message, config):
        super().__init__(message)
        self.config = config


def psi(alpha):
    """Intensity of a single angle.

    Parameters
    ----------
    alpha : float
        Angle in (0, pi].

    Returns
    -------
    float
        1 - (pi - alpha)/sin(alpha) for alpha < pi, and exactly 0 at pi.
        Always <= 0, decreasing without bound as alpha -> 0+.
    """
    alpha = float(alpha)
    if not (0.0 < alpha <= math.pi):
        raise IntensityError("angle must lie in (0, pi], got %r" % alpha)
    e = math.pi - alpha
    if e == 0.0:
        return 0.0
    if e < _SERIES_CUT:
        # 1 - e/sin(e) cancels to nothing near pi; expand instead.
        e2 = e * e
        return -e2 * (1.0 / 6.0 + e2 * (7.0 / 360.0 + e2 * (31.0 / 15120.0
                      + e2 * (127.0 / 604800.0 + e2 * (73.0 / 3421440.0)))))
    if alpha >= 0.5 * math.pi:
        # pi - alpha is exact here; sin(e) avoids the sin(alpha) cancellation.
        return 1.0 - e / math.sin(e)
    return 1.0 - e / math.sin(alpha)


def psi_prime(alpha):
    """Derivative dpsi/dalpha, smooth on (0, pi] with psi'(pi) = 0.

    The closed form (sin a + (pi - a) cos a)/sin^2 a cancels near pi and is
    replaced there by its Taylor expansion in e = pi - alpha.
    """
    alpha = float(alpha)
    if not (0.0 < alpha <= math.pi):
        raise IntensityError("angle must lie in (0, pi], got %r" % alpha)
    e = math.pi - alpha
    if e < _SERIES_CUT:
        e2 = e * e
        return e * (1.0 / 3.0 + e2 * (7.0 / 90.0 + e2 * (31.0 / 2520.0
                    + e2 * (127.0 / 75600.0 + e2 * (73.0 / 342144.0)))))
    if alpha >= 0.5 * math.pi:
        # Express through e = pi - alpha only: mixing sin(alpha) with e
        # reintroduces the cancellation the branch exists to avoid.
        s = math.sin(e)
        return (s - e * math.cos(e)) / (s * s)
    s = math.sin(alpha)
    return (s + e * math.cos(alpha)) / (s * s)


def _g_factor(alpha):
    """G(alpha) = psi'(alpha)/sin(alpha); removable limit 1/3 at alpha = pi."""
    e = math.pi - alpha
    if e < _SERIES_CUT:
        e2 = e * e
        return (1.0 / 3.0 + e2 * (2.0 / 15.0 + e2 * (2.0 / 63.0
                + e2 * (4.0 / 675.0 + e2 * (2.0 / 2079.0)))))
    if alpha >= 0.5 * math.pi:
        s = math.sin(e)
        return (s - e * math.cos(e)) / (s * s * s)
    s = math.sin(alpha)
    return (s + e * math.cos(alpha)) / (s * s * s)


class TupleConfig:
    """A point of Omega_k: k non-coinciding enumerated unit vectors in R^3.

    Parameters
    ----------
    vectors : (k, 3) array_like
        Unit vectors (renormalized exactly; rejected when off by more than
        1e-9 or when k < 2).
    floor : float
        Hard lower bound on pairwise angles (default 1e-6).

    Attributes
    ----------
    vectors : (k, 3) ndarray
    alpha : (k, k) ndarray
        Pairwise angles, zero diagonal.
    """

    def __init__(self, vectors, floor=_ANGLE_FLOOR):
        arr = np.array(vectors, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 2:
            raise IntensityError("config needs k >= 2 vectors in R^3")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_TOL):
            raise IntensityError("vectors must be unit within %g" % _UNIT_TOL)
        arr /= norms[:, None]
        dots = np.clip(arr @ arr.T, -1.0, 1.0)
        alpha = np.arccos(dots)
        np.fill_diagonal(alpha, 0.0)
        k = arr.shape[0]
        iu = np.triu_indices(k, 1)
        amin = float(alpha[iu].min())
        if amin <= floor:
            raise IntensityError(
                "pairwise angle %.3e at or below the floor %.3e"
                % (amin, floor))
        self.vectors = arr
        self.alpha = alpha
        self.floor = float(floor)
        self.k = k

    def min_angle(self):
        iu = np.triu_indices(self.k, 1)
        return float(self.alpha[iu].min())

    def pair_angles(self):
        """Pairs ((i, j), alpha_ij) for i < j in lexicographic order."""
        return [((i, j), float(self.alpha[i, j]))
                for i in range(self.k) for j in range(i + 1, self.k)]

    def to_payload(self):
        return {"vectors": [[float(c) for c in v] for v in self.vectors]}


def big_psi(config):
    """Tuple intensity Psi(omega) = sum over unordered pairs of psi(alpha_ij)."""
    return math.fsum(psi(a) for _, a in config.pair_angles())


def _charts(vectors):
    """Deterministic orthonormal tangent pairs (t1, t2) at each unit vector.

    The seed axis is the least-aligned coordinate axis, mirroring the plane
    basis convention used for circles and arcs.
    """
    k = len(vectors)
    t1 = np.empty((k, 3))
    t2 = np.empty((k, 3))
    for i, u in enumerate(vectors):
        axis = np.zeros(3)
        axis[int(np.argmin(np.abs(u)))] = 1.0
        w = axis - (axis @ u) * u
        w /= np.linalg.norm(w)
        t1[i] = w
        t2[i] = np.cross(u, w)
    return t1, t2


def _ambient_gradient(config):
    """Euclidean gradient of Psi in the 3k ambient coordinates, (k, 3)."""
    u = config.vectors
    k = config.k
    g = np.zeros((k, 3))
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            # d psi(alpha_ij)/d u_i = -psi'(alpha) u_j / sin(alpha).
            g[i] -= _g_factor(config.alpha[i, j]) * u[j]
    return g


def riemannian_gradient(config):
    """Riemannian gradient of Psi on (S^2)^k in sphere-chart coordinates.

    Returns
    -------
    (ndarray, float)
        The 2k chart components (charts are orthonormal, so the Euclidean
        norm of the vector is the Riemannian gradient norm) and that norm.
    """
    u = config.vectors
    g = _ambient_gradient(config)
    g -= np.einsum("ij,ij->i", g, u)[:, None] * u
    t1, t2 = _charts(u)
    comp = np.empty(2 * config.k)
    comp[0::2] = np.einsum("ij,ij->i", g, t1)
    comp[1::2] = np.einsum("ij,ij->i", g, t2)
    return comp, float(np.linalg.norm(comp))


def _retract(vectors, t1, t2, xi):
    """Move each vector by chart displacement xi (2k,) and renormalize."""
    moved = (vectors + xi[0::2, None] * t1 + xi[1::2, None] * t2)
    return moved / np.linalg.norm(moved, axis=1)[:, None]


def _phi_of(vectors, floor):
    return -big_psi(TupleConfig(vectors, floor=floor))


class CriticalityReport:
    """Criticality data of a configuration, classified for Phi = -Psi."""

    __slots__ = ("psi_value", "phi_value", "grad_norm", "eigenvalues",
                 "zero_modes", "classification")

    def __init__(self, psi_value, phi_value, grad_norm, eigenvalues,
                 zero_modes, classification):
        self.psi_value = psi_value
        self.phi_value = phi_value
        self.grad_norm = grad_norm
        self.eigenvalues = eigenvalues
        self.zero_modes = zero_modes
        self.classification = classification

    def to_json_obj(self):
        return {
            "psi": self.psi_value,
            "phi": self.phi_value,
            "grad_norm": self.grad_norm,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "zero_modes": self.zero_modes,
            "classification": self.classification,
        }

    def csv_row(self):
        return "%.17g,%.17g,%.17g,%d,%s" % (
            self.psi_value, self.phi_value, self.grad_norm,
            self.zero_modes, self.classification)


def criticality_report(config, fd_step=_FD_STEP):
    """Gradient norm, chart finite-difference Hessian of Phi, classification.

    The Hessian is assembled by central second differences of Phi in the 2k
    orthonormal chart coordinates (step 1e-4 by default).  Eigenvalues are
    returned ascending; modes with |lambda| below 1e-6 times the spectral
    radius count as zero modes (rotations contribute 3 of them, 2 for
    collinear pairs), and the min/max/saddle classification is read off the
    remaining spectrum.
    """
    _, gnorm = riemannian_gradient(config)
    u = config.vectors
    t1, t2 = _charts(u)
    n = 2 * config.k
    h = float(fd_step)
    phi0 = -big_psi(config)

    def phi_at(xi):
        return _phi_of(_retract(u, t1, t2, xi), config.floor)

    hess = np.empty((n, n))
    for a in range(n):
        ea = np.zeros(n)
        ea[a] = h
        hess[a, a] = (phi_at(ea) - 2.0 * phi0 + phi_at(-ea)) / (h * h)
        for b in range(a + 1, n):
            eb = np.zeros(n)
            eb[b] = h
            val = (phi_at(ea + eb) - phi_at(ea - eb)
                   - phi_at(-ea + eb) + phi_at(-ea - eb)) / (4.0 * h * h)
            hess[a, b] = val
            hess[b, a] = val
    eig = eigvalsh(hess)
    radius = float(np.abs(eig).max())
    if radius == 0.0:
        zero = n
    else:
        zero = int((np.abs(eig) < _ZERO_MODE_REL * radius).sum())
    nonzero = eig[np.abs(eig) >= _ZERO_MODE_REL * radius] if radius else eig[:0]
    if nonzero.size == 0:
        cls = "degenerate"
    elif np.all(nonzero > 0.0):
        cls = "min"
    elif np.all(nonzero < 0.0):
        cls = "max"
    else:
        cls = "saddle"
    return CriticalityReport(big_psi(config), phi0, gnorm, eig, zero, cls)


def local_search(k, seed=0, step0=1.0, shrink=0.5, armijo=1e-4,
                 max_iter=10000, grad_tol=_GRAD_TOL, floor=_ANGLE_FLOOR):
    """Projected gradient descent of Phi = -Psi over (S^2)^k.

    Starts from a seeded uniform random configuration, takes retracted
    steps along the negative chart gradient of Phi with Armijo backtracking,
    and stops when the gradient norm drops below ``grad_tol`` or at the
    iteration cap.  The angle floor is a hard barrier: steps crossing it are
    rejected, and a run whose every step is rejected at the smallest step
    size while pinned to the floor raises :class:`BarrierHitError`.

    Returns
    -------
    (TupleConfig, CriticalityReport)
    """
    if k < 2:
        raise IntensityError("k must be at least 2")
    rng = np.random.default_rng(seed)
    # Start clear of the barrier; for large floors the 100x margin can
    # exceed what k spread vectors admit, so cap the required clearance.
    clearance = min(100.0 * floor, floor + 0.1)
    for _ in range(_MAX_DRAWS):
        raw = rng.normal(size=(k, 3))
        raw /= np.linalg.norm(raw, axis=1)[:, None]
        try:
            config = TupleConfig(raw, floor=floor)
        except IntensityError:
            continue
        if config.min_angle() > clearance:
            break
    else:
        raise IntensityError(
            "no starting configuration clear of the angle floor %.3g in %d "
            "draws" % (floor, _MAX_DRAWS))

    phi = -big_psi(config)
    for _ in range(max_iter):
        grad_psi, gnorm = riemannian_gradient(config)
        if gnorm < grad_tol:
            break
        # Descent on Phi: its chart gradient is -grad(Psi).
        direction = grad_psi
        t1, t2 = _charts(config.vectors)
        step = step0
        accepted = False
        barrier_blocked = False
        while step >= _MIN_STEP:
            cand_vec = _retract(config.vectors, t1, t2, step * direction)
            try:
                cand = TupleConfig(cand_vec, floor=floor)
            except IntensityError:
                barrier_blocked = True
                step *= shrink
                continue
            cand_phi = -big_psi(cand)
            if cand_phi <= phi - armijo * step * gnorm * gnorm:
                config, phi = cand, cand_phi
                accepted = True
                break
            step *= shrink
        if not accepted:
            if barrier_blocked and config.min_angle() < 100.0 * floor:
                raise BarrierHitError(
                    "descent collapsed to the angle floor %.1e" % floor,
                    config)
            break
    return config, criticality_report(config)


def canonical_config(name):
    """Named critical configurations.

    ``straight2`` (antipodal pair), ``planar3`` (coplanar at 120 degrees),
    ``square4`` (diagonals of the square), ``tetrahedral4`` (centroid rays
    of the regular tetrahedron).
    """
    if name == "straight2":
        vecs = [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0)]
    elif name == "planar3":
        s = math.sqrt(3.0) / 2.0
        vecs = [(1.0, 0.0, 0.0), (-0.5, s, 0.0), (-0.5, -s, 0.0)]
    elif name == "square4":
        vecs = [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0),
                (0.0, 1.0, 0.0), (0.0, -1.0, 0.0)]
    elif name == "tetrahedral4":
        r = 1.0 / math.sqrt(3.0)
        vecs = [(r, r, r), (r, -r, -r), (-r, r, -r), (-r, -r, r)]
    else:
        raise IntensityError("unknown canonical config %r" % name)
    return TupleConfig(vecs)
