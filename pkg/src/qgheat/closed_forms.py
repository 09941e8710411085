"""Closed-form diagonal kernels and the lattice-sum identities behind them.

All infinite sums over k are truncated once the envelope of the next term
drops below ``1e-16`` of the running envelope sum, after at least 8 terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, MetricGraph, adjacency_matrix, is_bipartite

SERIES_RTOL = 1e-16
MIN_TERMS = 8


def _nterms(env, start: int = 0, cap: int = 10_000_000) -> int:
    """Index of the first term after which ``env(k)`` is negligible."""
    total, k = 0.0, start
    while True:
        e = env(k)
        total += e
        if k - start >= MIN_TERMS and e < SERIES_RTOL * total:
            return k
        k += 1
        if k > cap:
            raise ArithmeticError("series does not converge")


def _gauss_env(scale: float, t: float, shift: float = 0.0):
    """Envelope ``exp(-((scale k) - shift)^2 t)`` for k >= 0 evaluated at |k|."""
    return lambda k: math.exp(-max(scale * k - abs(shift), 0.0) ** 2 * t)


# -- symmetric graph data ----------------------------------------------------

@dataclass(frozen=True)
class SymmetricGraphData:
    n: int
    d: int
    a: float
    A: np.ndarray
    bipartite: bool
    Q: tuple[tuple[float, int], ...]

    @property
    def c(self) -> int:
        return 1 if self.bipartite else 2

    @property
    def total_length(self) -> float:
        return self.n * self.d * self.a / 2

    def __post_init__(self):
        if (self.n * self.d) % 2:
            raise ValueError("n*d must be even")
        theta = np.linalg.eigvalsh(self.A)
        if np.any(np.abs(theta) > self.d + 1e-9):
            raise ValueError("adjacency eigenvalue outside [-d, d]")
        if sum(mu for _, mu in self.Q) != self.n - 2 // self.c:
            raise ValueError(f"Q multiplicities sum to {sum(mu for _, mu in self.Q)}, "
                             f"expected n - 2/c = {self.n - 2 // self.c}")
        for s, _ in self.Q:
            if not 0 < s < math.pi / self.a:
                raise ValueError(f"Q frequency {s} outside (0, pi/a)")

    @classmethod
    def from_adjacency(cls, A, a: float, bipartite: bool | None = None,
                       tol: float = 1e-9) -> "SymmetricGraphData":
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        deg = A.sum(axis=1)
        if not np.allclose(deg, deg[0]):
            raise ValueError("graph is not regular")
        d = int(round(deg[0]))
        theta = np.linalg.eigvalsh(A)
        if bipartite is None:
            bipartite = bool(np.any(np.abs(theta + d) < tol))
        Q: list[list] = []
        for th in np.sort(theta)[::-1]:
            if abs(abs(th) - d) < tol:
                continue
            s = math.acos(max(-1.0, min(1.0, th / d))) / a
            if Q and abs(Q[-1][0] - s) < tol:
                Q[-1][1] += 1
            else:
                Q.append([s, 1])
        return cls(n, d, float(a), A, bool(bipartite), tuple((s, mu) for s, mu in Q))

    @classmethod
    def from_graph(cls, g: MetricGraph) -> "SymmetricGraphData":
        lengths = [e.length for e in g.edges]
        if max(lengths) - min(lengths) > 1e-12 * max(lengths):
            raise GraphError("graph is not equilateral")
        return cls.from_adjacency(adjacency_matrix(g), lengths[0], is_bipartite(g))


# -- theta function and images ------------------------------------------------

def theta3(z, tau) -> complex | float:
    """``sum_k exp(i pi tau k^2) cos(2 k z)`` for ``Im tau > 0``."""
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError("theta3 needs Im(tau) > 0")
    q = np.exp(1j * math.pi * tau)
    rate = math.pi * tau.imag
    zi = abs(complex(z).imag)
    K = _nterms(lambda k: math.exp(-rate * k * k + 2 * zi * k), start=1)
    k = np.arange(1, K + 1)
    terms = q ** (k * k) * np.cos(2 * k * complex(z))
    val = 1 + 2 * (math.fsum(terms.real) + 1j * math.fsum(terms.imag))
    return val.real if (tau.real == 0 and complex(z).imag == 0) else val


def interval_images(a: float, t: float, x: float, y: float, K: int | None = None) -> float:
    """Neumann interval kernel by the method of images."""
    if K is None:
        K = _nterms(lambda k: math.exp(-max(2 * k * a - 2 * a, 0.0) ** 2 / (4 * t)))
    k = np.arange(-K, K + 1)
    terms = np.concatenate([np.exp(-(x - y + 2 * k * a) ** 2 / (4 * t)),
                            np.exp(-(x + y + 2 * k * a) ** 2 / (4 * t))])
    return math.fsum(terms) / math.sqrt(4 * math.pi * t)


def interval_cosine_series(a: float, t: float, x, y, N: int = 500) -> np.ndarray:
    """``N``-term eigenfunction series of the Neumann interval, in extended precision."""
    x = np.asarray(x, dtype=np.longdouble)
    y = np.asarray(y, dtype=np.longdouble)
    pi = np.arccos(np.longdouble(-1))
    k = np.arange(1, N, dtype=np.longdouble)[:, None]
    s = k * pi / np.longdouble(a)
    terms = np.exp(-s * s * np.longdouble(t)) * np.cos(s * x.ravel()) * np.cos(s * y.ravel())
    out = (1 + 2 * terms.sum(axis=0)) / np.longdouble(a)
    return out.reshape(np.broadcast(x, y).shape).astype(float)


# -- star and flower ---------------------------------------------------------

def star_diagonal(d: int, a: float, t: float, x, N: int | None = None,
                  form: str = "eigen"):
    """Diagonal kernel on an edge of the equilateral star, x measured from the centre."""
    x = np.asarray(x, dtype=float)
    if form == "eigen":
        s = math.pi / a
        K = N or _nterms(_gauss_env(s, t), start=1)
        k = np.arange(1, K + 1)[:, None]
        h = k - 0.5
        sym = np.exp(-(s * k) ** 2 * t) * np.cos(s * k * x.ravel()) ** 2
        anti = np.exp(-(s * h) ** 2 * t) * np.sin(s * h * x.ravel()) ** 2
        val = 1 / (a * d) + 2 / (a * d) * sym.sum(axis=0) + 2 * (d - 1) / (a * d) * anti.sum(axis=0)
    elif form == "poisson":
        K = N or _nterms(lambda k: math.exp(-max(k * a - a, 0.0) ** 2 / t))
        l = np.arange(-K, K + 1)[:, None]
        E = np.exp(-(l * a) ** 2 / t)
        X = np.exp(-(l * a - x.ravel()) ** 2 / t)
        sgn = np.where(l % 2 == 0, 1.0, -1.0)
        val = ((E + X).sum(axis=0) / d + (d - 1) / d * (sgn * (E - X)).sum(axis=0)) \
            / math.sqrt(4 * math.pi * t)
    else:
        raise ValueError(f"unknown form {form!r}")
    return val.reshape(x.shape)


def flower_diagonal(a: float, L: float, t: float, x, N: int | None = None,
                    form: str = "eigen"):
    """Diagonal kernel on the petal of length ``a`` of a two-petal flower of total length ``L``.

    For the other petal call with ``a`` replaced by ``L - a``.
    """
    x = np.asarray(x, dtype=float).ravel()
    if form == "eigen":
        s1, s2 = 2 * math.pi / L, 2 * math.pi / a
        K = N or _nterms(_gauss_env(min(s1, s2), t), start=1)
        k = np.arange(1, K + 1)[:, None]
        even = np.exp(-(s1 * k) ** 2 * t) * np.cos(s1 * k * (x - a / 2)) ** 2
        odd = np.exp(-(s2 * k) ** 2 * t) * np.sin(s2 * k * x) ** 2
        val = 1 / L + 2 / L * even.sum(axis=0) + 2 / a * odd.sum(axis=0)
    elif form == "poisson":
        K = N or _nterms(lambda n: math.exp(-max(n * min(a, L) - 2 * L, 0.0) ** 2 / (4 * t)))
        n = np.arange(-K, K + 1)[:, None]
        g = lambda y: np.exp(-y ** 2 / (4 * t))
        p1 = 0.5 * g(n * L) + 0.25 * g(2 * x - a + n * L) + 0.25 * g(2 * x - a - n * L)
        p2 = 0.5 * g(n * a) - 0.25 * g(2 * x + n * a) - 0.25 * g(2 * x - n * a)
        val = (p1.sum(axis=0) + p2.sum(axis=0)) / math.sqrt(4 * math.pi * t)
    else:
        raise ValueError(f"unknown form {form!r}")
    return val if val.size > 1 else float(val[0])


# -- completely symmetric graphs ------------------------------------------------

def _zsum(f, scale: float, t: float, shift: float = 0.0) -> float:
    """``sum_{k in Z} f(k)`` for terms bounded by ``exp(-(scale k + shift)^2 t)``."""
    K = _nterms(_gauss_env(scale, t, shift))
    k = np.arange(-K, K + 1)
    return math.fsum(f(k))


def symmetric_diagonal(data: SymmetricGraphData, t: float, x: float, N: int | None = None) -> float:
    """Spectral three-sum form of the diagonal kernel on any edge."""
    a, d, n, c = data.a, data.d, data.n, data.c
    s = math.pi / a
    if N is not None:
        K = np.arange(-N, N + 1)
        zs = lambda f, *_: math.fsum(f(K))
    else:
        zs = _zsum
    first = zs(lambda k: np.exp(-(c * s * k) ** 2 * t), c * s, t)
    second = zs(lambda k: np.exp(-(s * k) ** 2 * t) * (1 - np.cos(2 * s * k * x)), s, t)
    third = math.fsum(mu * zs(lambda k: np.exp(-(sig + 2 * s * k) ** 2 * t), 2 * s, t, sig)
                      for sig, mu in data.Q)
    return 2 / (d * n * a) * first + (d - 2) / (2 * d * a) * second + 2 / (d * n * a) * third


def A_l(data: SymmetricGraphData, l: int) -> float:
    """Coefficient of ``exp(-(l a)^2 / 4t)`` in the length-organised form, l >= 1."""
    if l < 1:
        raise ValueError("l must be >= 1")
    a, d, n = data.a, data.d, data.n
    qs = math.fsum(mu * math.cos(l * a * s) for s, mu in data.Q)
    if data.bipartite:
        base = qs if l % 2 else 2 + qs
    else:
        base = 1 + qs
    return 4 / (d * n) * base + (2 * (d - 2) / d if l % 2 == 0 else 0.0)


def l0_coefficients(data: SymmetricGraphData) -> tuple[float, float, float]:
    """The three length-zero coefficients of the Poisson-summed form; they add up to 1."""
    d, n = data.d, data.n
    return (4 / (data.c * d * n), (d - 2) / d,
            2 / (d * n) * sum(mu for _, mu in data.Q))


def symmetric_pathform(data: SymmetricGraphData, t: float, x: float,
                       L_max: float | None = None) -> float:
    """Length-organised Gaussian form of the diagonal kernel."""
    a, d = data.a, data.d
    if L_max is None:
        lmax = _nterms(lambda l: math.exp(-max(l * a - a, 0.0) ** 2 / (4 * t)))
    else:
        lmax = int(L_max / a + 1e-9)
    terms = [1.0] + [A_l(data, l) * math.exp(-(l * a) ** 2 / (4 * t)) for l in range(2, lmax + 1)]
    K = max(lmax // 2 + 1, 1)
    l = np.arange(-K, K + 1)
    terms += list(-(d - 2) / d * np.exp(-(l * a - x) ** 2 / t))
    return math.fsum(terms) / math.sqrt(4 * math.pi * t)


# -- derivative expansion and identities ----------------------------------------

def sine_coefficient(d0: int, d1: int, a: float, n):
    n = np.asarray(n)
    return math.pi * n / (2 * a * a) * ((1 - 2 / d0) + np.where(n % 2 == 0, 1.0, -1.0) * (1 - 2 / d1))


def dx_sine_expansion(d0: int, d1: int, a: float, t: float, x, N: int | None = None):
    """``sum_n c_n exp(-(pi n / 2a)^2 t) sin(pi n x / a)``."""
    x = np.asarray(x, dtype=float)
    w = math.pi / (2 * a)
    if N is None:
        N = _nterms(lambda n: (n + 1) * math.exp(-(w * n) ** 2 * t), start=1)
    n = np.arange(1, N + 1)[:, None]
    terms = sine_coefficient(d0, d1, a, n) * np.exp(-(w * n) ** 2 * t) * np.sin(2 * w * n * x.ravel())
    return np.array([math.fsum(col) for col in terms.T]).reshape(x.shape)


def poisson_identities(a: float, sigma: float, x: float, t: float, c: int = 2) -> tuple[float, float, float]:
    """Absolute residuals of the three lattice identities, each side summed to convergence."""
    s = math.pi / a
    r4 = math.sqrt(4 * math.pi * t)
    lhs1 = _zsum(lambda k: np.exp(-(c * s * k) ** 2 * t), c * s, t)
    rhs1 = 2 * a / c / r4 * _zsum(lambda l: np.exp(-(l * a) ** 2 / (c * c * t)), a / c, 1 / t)
    lhs2 = _zsum(lambda k: np.exp(-(s * k) ** 2 * t) * (1 - np.cos(2 * s * k * x)), s, t)
    rhs2 = 2 * a / r4 * _zsum(lambda l: np.exp(-(l * a) ** 2 / t) - np.exp(-(l * a - x) ** 2 / t),
                              a, 1 / t, x)
    lhs3 = _zsum(lambda k: np.exp(-(sigma + 2 * s * k) ** 2 * t), 2 * s, t, sigma)
    rhs3 = a / r4 * _zsum(lambda l: np.cos(l * a * sigma) * np.exp(-(l * a) ** 2 / (4 * t)), a, 1 / (4 * t))
    return abs(lhs1 - rhs1), abs(lhs2 - rhs2), abs(lhs3 - rhs3)


def theta_reduction_residual(a: float, x: float, t: float) -> float:
    """``|sum_k exp(-(pi k/a)^2 t) cos(2 pi k x / a) - theta3(pi x/a, i pi t/a^2)|``."""
    s = math.pi / a
    lhs = _zsum(lambda k: np.exp(-(s * k) ** 2 * t) * np.cos(2 * s * k * x), s, t)
    return abs(lhs - theta3(math.pi * x / a, 1j * math.pi * t / a ** 2))
