"""Eigenvalues and per-edge eigenfunction amplitudes.

Eigenfunctions restricted to an edge are stored in amplitude/phase form
``psi_j(x) = b_j(e) cos(sigma_j x + phi_j(e))`` with ``b >= 0``.  Three
sources are available: closed forms for the interval, star and two-petal
flower, the adjacency spectrum of a completely symmetric graph (eigenvalues
only) and a numerical secular-equation solver for arbitrary graphs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .closed_forms import SymmetricGraphData
from .graph import GraphPoint, MetricGraph
from .paths import bond_scattering_matrix

TWO_PI = 2.0 * math.pi


@dataclass
class Spectrum:
    """One entry of ``sigma`` per eigenfunction, nondecreasing, ``sigma[0] == 0``."""

    sigma: np.ndarray
    source: str
    sigma_max: float
    # (J, m, 2) cosine/sine coefficients per edge, when eigenfunctions are known
    modes: np.ndarray | None = field(default=None, repr=False)

    @property
    def lam(self) -> np.ndarray:
        return self.sigma ** 2

    def __len__(self) -> int:
        return len(self.sigma)

    def levels(self, rtol: float = 1e-9) -> list[tuple[float, float, int]]:
        """Distinct ``(sigma, lambda, multiplicity)`` triples."""
        out: list[list] = []
        for s in self.sigma:
            if out and abs(s - out[-1][0]) <= rtol * max(1.0, s):
                out[-1][2] += 1
            else:
                out.append([float(s), float(s) ** 2, 1])
        return [tuple(x) for x in out]

    def counting(self, lam: float) -> int:
        return int(np.searchsorted(self.lam, lam, side="right"))

    def trace(self, t: float) -> float:
        return math.fsum(np.exp(-t * self.lam))


@dataclass
class EdgeAmplitude:
    edges: tuple[str, ...]
    lengths: np.ndarray
    b: np.ndarray      # (J, m)
    phi: np.ndarray    # (J, m), in [0, 2 pi)

    def column(self, edge: str) -> int:
        return self.edges.index(edge)


def _amp_phase(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``A cos + B sin = b cos(. + phi)``."""
    b = np.hypot(A, B)
    phi = np.mod(np.arctan2(-B, A), TWO_PI)
    phi = np.where(b > 0, phi, 0.0)
    return b, phi


# -- closed forms -----------------------------------------------------------

def _helmert(d: int) -> np.ndarray:
    """Orthonormal basis of the zero-sum subspace of R^d, rows r = 1..d-1."""
    H = np.zeros((d - 1, d))
    for r in range(1, d):
        H[r - 1, :r] = 1.0
        H[r - 1, r] = -r
        H[r - 1] /= math.sqrt(r * (r + 1))
    return H


def closed_form_spectrum(family: str, sigma_max: float, **params) -> tuple[Spectrum, EdgeAmplitude]:
    """Exact spectrum and amplitudes for ``interval(a)``, ``star(d, a)`` or ``flower(a, L)``.

    Edge ids and orientations match :mod:`qgheat.graph` builders of the same family.
    """
    if not sigma_max > 0:
        raise ValueError("sigma_max must be positive")
    rows: list[tuple[float, list[float], list[float]]] = []  # (sigma, b per edge, phi per edge)
    if family == "interval":
        a = float(params.get("a", 1.0))
        edges, lengths = ("e",), [a]
        rows.append((0.0, [1 / math.sqrt(a)], [0.0]))
        for k in range(1, int(sigma_max * a / math.pi) + 1):
            rows.append((k * math.pi / a, [math.sqrt(2 / a)], [0.0]))
    elif family == "star":
        d, a = int(params["d"]), float(params.get("a", 1.0))
        edges, lengths = tuple(f"e{i}" for i in range(d)), [a] * d
        rows.append((0.0, [1 / math.sqrt(a * d)] * d, [0.0] * d))
        H = _helmert(d)
        kmax = int(sigma_max * a / math.pi) + 1
        for k in range(0, kmax + 1):
            s_anti = (k + 0.5) * math.pi / a
            if k >= 1 and k * math.pi / a <= sigma_max:
                rows.append((k * math.pi / a, [math.sqrt(2 / (a * d))] * d, [0.0] * d))
            if s_anti <= sigma_max:
                for h in H:
                    b = list(math.sqrt(2 / a) * np.abs(h))
                    phi = [1.5 * math.pi if c > 0 else (0.5 * math.pi if c < 0 else 0.0) for c in h]
                    rows.append((s_anti, b, phi))
    elif family == "flower":
        a, L = float(params["a"]), float(params["L"])
        edges, lengths = ("p1", "p2"), [a, L - a]
        rows.append((0.0, [1 / math.sqrt(L)] * 2, [0.0, 0.0]))
        for k in range(1, int(sigma_max * L / TWO_PI) + 1):
            s = TWO_PI * k / L
            rows.append((s, [math.sqrt(2 / L)] * 2, [(-s * a / 2) % TWO_PI, (s * a / 2) % TWO_PI]))
        for k in range(1, int(sigma_max * a / TWO_PI) + 1):
            rows.append((TWO_PI * k / a, [math.sqrt(2 / a), 0.0], [1.5 * math.pi, 0.0]))
        for k in range(1, int(sigma_max * (L - a) / TWO_PI) + 1):
            rows.append((TWO_PI * k / (L - a), [0.0, math.sqrt(2 / (L - a))], [0.0, 1.5 * math.pi]))
    else:
        raise ValueError(f"unknown family {family!r}")
    rows.sort(key=lambda r: r[0])
    sigma = np.array([r[0] for r in rows])
    amps = EdgeAmplitude(edges, np.array(lengths, dtype=float),
                         np.array([r[1] for r in rows]), np.array([r[2] for r in rows]))
    return Spectrum(sigma, "closed-form", sigma_max), amps


def symmetric_spectrum(data: SymmetricGraphData, sigma_max: float) -> Spectrum:
    """Eigenvalues of a completely symmetric equilateral graph from its adjacency spectrum."""
    a, n, d = data.a, data.n, data.d
    period = TWO_PI / a
    sig: list[float] = [0.0]
    for s, mu in data.Q:
        k = 0
        while s + k * period <= sigma_max:
            sig += [s + k * period] * mu
            k += 1
        k = 1
        while k * period - s <= sigma_max:
            sig += [k * period - s] * mu
            k += 1
    base = int(round((d / 2 - 1) * n))
    k = 1
    while k * math.pi / a <= sigma_max:
        mult = base + 2 if (data.bipartite or k % 2 == 0) else base
        sig += [k * math.pi / a] * mult
        k += 1
    return Spectrum(np.sort(np.array(sig)), "adjacency", sigma_max)


# -- secular equation -------------------------------------------------------

class SecularError(ArithmeticError):
    pass


def _secular_matrices(S: np.ndarray, blen: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    D = np.exp(1j * sigmas[:, None] * blen[None, :])
    return np.eye(len(blen))[None] - S[None] * D[:, None, :]


def _edge_coefficients(g: MetricGraph, sigma: float, a: np.ndarray) -> np.ndarray:
    """Bond amplitudes -> complex (m, 2) cosine/sine coefficients."""
    lengths = g.bond_length[0::2]
    af, ar = a[0::2], a[1::2]
    c = ar * np.exp(1j * sigma * lengths)
    return np.stack([af + c, 1j * (af - c)], axis=1)


def _mode_gram(sigma: float, lengths: np.ndarray, W: np.ndarray) -> np.ndarray:
    """L2 Gram matrix of real coefficient vectors ``W`` of shape (k, m, 2)."""
    s2 = np.sin(2 * sigma * lengths) / (4 * sigma)
    cc, ss = lengths / 2 + s2, lengths / 2 - s2
    cs = np.sin(sigma * lengths) ** 2 / (2 * sigma)
    A, B = W[:, :, 0], W[:, :, 1]
    return ((A * cc) @ A.T + (B * ss) @ B.T + (A * cs) @ B.T + (B * cs) @ A.T)


def _real_basis(g: MetricGraph, sigma: float, null: np.ndarray) -> np.ndarray:
    """Orthonormal real eigenfunctions spanning the null space (columns of ``null``)."""
    mu = null.shape[1]
    coeffs = np.stack([_edge_coefficients(g, sigma, null[:, k]) for k in range(mu)])
    cand = np.concatenate([coeffs.real, coeffs.imag]).reshape(2 * mu, -1)
    _, sv, vh = np.linalg.svd(cand, full_matrices=False)
    W = vh[:mu].reshape(mu, g.m, 2)
    G = _mode_gram(sigma, g.bond_length[0::2], W)
    Lc = np.linalg.cholesky(G)
    W = np.linalg.solve(Lc, W.reshape(mu, -1)).reshape(mu, g.m, 2)
    for k in range(mu):
        norms = np.hypot(W[k, :, 0], W[k, :, 1])
        j = int(np.argmax(norms > 1e-8 * norms.max()))
        A, B = W[k, j]
        if A < -1e-12 * norms[j] or (abs(A) <= 1e-12 * norms[j] and B > 0):
            W[k] = -W[k]
    return W


def secular_function(g: MetricGraph, sigma: float) -> float:
    """Real-valued secular function ``e^{-i sigma L} det(I - S D(sigma))`` (times a unit constant)."""
    S = bond_scattering_matrix(g)
    M = _secular_matrices(S, g.bond_length, np.array([sigma]))[0]
    z = np.linalg.det(M) * np.exp(-1j * sigma * g.total_length)
    return float(z.real if np.linalg.det(S) > 0 else z.imag)


def secular_spectrum(g: MetricGraph, sigma_max: float, step: float | None = None) -> Spectrum:
    """All eigenvalues with ``0 < sigma <= sigma_max`` plus ``sigma = 0``.

    The smallest singular value of ``I - S D(sigma)`` is scanned on a uniform
    grid; each local minimum is refined by golden-section search and
    accepted when the matrix is numerically singular.  Golden-section search is
    used because the smallest singular value has a kink at each root.  Multiplicity is the
    number of singular values below ``1e-8`` times the largest.
    """
    if not sigma_max > 0:
        raise ValueError("sigma_max must be positive")
    S = bond_scattering_matrix(g)
    blen = np.asarray(g.bond_length, dtype=float)
    L = g.total_length
    step = step or min(math.pi / (4 * L), 0.01)
    grid = np.arange(1, int(math.ceil(sigma_max / step)) + 2) * step
    smin = np.empty(len(grid))
    for lo in range(0, len(grid), 512):
        sv = np.linalg.svd(_secular_matrices(S, blen, grid[lo:lo + 512]), compute_uv=False)
        smin[lo:lo + 512] = sv[:, -1]
    padded = np.concatenate([[np.inf], smin, [np.inf]])
    cand = [i for i in range(len(grid))
            if padded[i + 1] <= padded[i] and padded[i + 1] <= padded[i + 2]]

    def f(s):
        return np.linalg.svd(_secular_matrices(S, blen, np.array([s]))[0], compute_uv=False)[-1]

    real_part = np.linalg.det(S) > 0

    def F(s):
        z = np.linalg.det(_secular_matrices(S, blen, np.array([s]))[0]) * np.exp(-1j * s * L)
        return z.real if real_part else z.imag

    sig: list[float] = [0.0]
    modes = [np.zeros((1, g.m, 2))]
    modes[0][0, :, 0] = 1 / math.sqrt(L)
    found: list[float] = []
    for i in cand:
        lo = grid[i - 1] if i > 0 else 0.5 * grid[0]
        hi = grid[i + 1] if i + 1 < len(grid) else grid[i] + step
        try:
            res = minimize_scalar(f, bracket=(lo, grid[i], hi), method="golden",
                                  options={"xtol": 1e-15, "maxiter": 500})
        except ValueError:
            # flat bracket, minimum sits on a grid node
            res = minimize_scalar(f, bounds=(lo, hi), method="bounded")
        s = float(res.x)
        M = _secular_matrices(S, blen, np.array([s]))[0]
        _, sv, vh = np.linalg.svd(M)
        if sv[-1] > 1e-6 * sv[0]:
            continue
        mu = int(np.sum(sv < 1e-8 * sv[0]))
        if mu == 0:
            raise SecularError(f"root near sigma={s:.12g} in [{lo:.6g}, {hi:.6g}] not isolated")
        if mu % 2 == 1:
            d = 1e-9 * max(1.0, s)
            fa, fb = F(s - d), F(s + d)
            if fa * fb < 0:
                s = brentq(F, s - d, s + d, xtol=1e-15, rtol=1e-15)
                _, sv, vh = np.linalg.svd(_secular_matrices(S, blen, np.array([s]))[0])
        if s > sigma_max or any(abs(s - r) < 1e-9 for r in found):
            continue
        found.append(s)
        null = vh[-mu:].conj().T
        modes.append(_real_basis(g, s, null))
        sig += [s] * mu
    order = np.argsort(np.array(sig), kind="stable")
    allmodes = np.concatenate(modes)[order]
    return Spectrum(np.array(sig)[order], "secular", sigma_max, allmodes)


def edge_amplitudes(g: MetricGraph, spec: Spectrum, edge: str | None = None) -> EdgeAmplitude:
    """Amplitudes and phases from the eigenfunction coefficients of a secular spectrum."""
    if spec.modes is None:
        raise ValueError("spectrum carries no eigenfunctions")
    cols = list(range(g.m)) if edge is None else [g.edge_index(edge)]
    b, phi = _amp_phase(spec.modes[:, cols, 0], spec.modes[:, cols, 1])
    full = np.hypot(spec.modes[:, :, 0], spec.modes[:, :, 1]).max(axis=1, keepdims=True)
    dead = b < 1e-10 * full
    b[dead], phi[dead] = 0.0, 0.0
    phi[spec.sigma == 0.0] = 0.0
    return EdgeAmplitude(tuple(g.edges[c].id for c in cols),
                         np.array([g.edges[c].length for c in cols]), b, phi)


# -- eigenfunction expansions -----------------------------------------------

def eigenfunction_values(spec: Spectrum, amps: EdgeAmplitude, q: GraphPoint,
                         N: int | None = None) -> np.ndarray:
    N = len(spec) if N is None else N
    if N > len(spec):
        raise ValueError(f"only {len(spec)} eigenfunctions available, {N} requested")
    c = amps.column(q.edge)
    return amps.b[:N, c] * np.cos(spec.sigma[:N] * q.x + amps.phi[:N, c])


def eigen_heat_kernel(spec: Spectrum, amps: EdgeAmplitude, t: float, q1: GraphPoint,
                      q2: GraphPoint, N: int | None = None) -> tuple[float, float]:
    """Truncated eigenfunction expansion and a Weyl-envelope tail estimate."""
    N = len(spec) if N is None else N
    p1 = eigenfunction_values(spec, amps, q1, N)
    p2 = eigenfunction_values(spec, amps, q2, N)
    val = math.fsum(np.exp(-t * spec.lam[:N]) * p1 * p2)
    L = float(np.sum(amps.lengths)) if len(amps.edges) else 1.0
    B2 = float(np.max(amps.b[:N] ** 2))
    s0 = float(spec.sigma[N - 1])
    tail = B2 * (L / math.pi) * 0.5 * math.sqrt(math.pi / t) * math.erfc(s0 * math.sqrt(t))
    return val, tail


def local_weyl_average(spec: Spectrum, amps: EdgeAmplitude, q: GraphPoint, M: int) -> float:
    """``(1/M) sum_{j <= M} psi_j(q)^2``."""
    return math.fsum(eigenfunction_values(spec, amps, q, M) ** 2) / M


def amplitude_average(amps: EdgeAmplitude, edge: str, M: int) -> float:
    """``(1/M) sum_{j <= M} b_j(edge)^2``."""
    if M > amps.b.shape[0]:
        raise ValueError(f"only {amps.b.shape[0]} eigenfunctions available")
    return math.fsum(amps.b[:M, amps.column(edge)] ** 2) / M


def edge_distribution_average(spec: Spectrum, amps: EdgeAmplitude, edge: str, f, M: int,
                              n_nodes: int = 4000) -> float:
    """``(1/M) sum_{j <= M} int_edge f(x) psi_j(x)^2 dx`` by Gauss-Legendre quadrature."""
    c = amps.column(edge)
    a = float(amps.lengths[c])
    z, w = np.polynomial.legendre.leggauss(n_nodes)
    x = 0.5 * a * (z + 1)
    w = 0.5 * a * w * f(x)
    vals = [math.fsum(w * (amps.b[j, c] * np.cos(spec.sigma[j] * x + amps.phi[j, c])) ** 2)
            for j in range(M)]
    return math.fsum(vals) / M


def gram_matrix(spec: Spectrum, amps: EdgeAmplitude, J: int = 20, n_nodes: int = 400) -> np.ndarray:
    """L2 inner products of the first ``J`` eigenfunctions, by quadrature on every edge."""
    z, w = np.polynomial.legendre.leggauss(n_nodes)
    G = np.zeros((J, J))
    for c, a in enumerate(amps.lengths):
        x = 0.5 * a * (z + 1)
        P = amps.b[:J, c, None] * np.cos(spec.sigma[:J, None] * x + amps.phi[:J, c, None])
        G += (P * (0.5 * a * w)) @ P.T
    return G


def counting_envelope(spec: Spectrum, L: float) -> float:
    """``max |N(lambda) - (L/pi) sqrt(lambda)|`` at the computed eigenvalues."""
    j = np.arange(1, len(spec) + 1)
    return float(max(np.max(np.abs(j - L * spec.sigma / math.pi)),
                     np.max(np.abs(j - 1 - L * spec.sigma / math.pi))))
