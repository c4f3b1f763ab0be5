"""Coupling-strength distributions and degree-matched random graphs.

Couplings are per-oscillator gains applied to the population mean field.
A network enters the mean-field picture only through its degree sequence:
K_j = k_j / N, so sampling a coupling set and realizing a graph whose
degrees round to K_j * N describe the same ensemble at two levels of
detail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CouplingSet, NetworkGraph

__all__ = [
    "DistributionSpec",
    "GraphGenerationError",
    "sample_gaussian_couplings",
    "sample_powerlaw_couplings",
    "sample_brainlike_couplings",
    "sample_couplings",
    "powerlaw_bounds_for_mean",
    "truncated_powerlaw_mean",
    "generate_graph_from_degrees",
    "degrees_from_couplings",
    "degrees_to_couplings",
    "load_adjacency",
    "load_couplings",
    "save_couplings",
    "export_edge_list",
]

# Fixed upper/lower coupling ratio for mean-parametrized power laws.
POWERLAW_RATIO = 20.0


class GraphGenerationError(RuntimeError):
    """Degree sequence could not be realized as a simple graph."""

    def __init__(self, message, degrees=None):
        super().__init__(message)
        self.degrees = None if degrees is None else np.asarray(degrees)


@dataclass(frozen=True)
class DistributionSpec:
    """Recipe for a coupling-strength sample.

    kind: 'gaussian' (mean, sd), 'powerlaw' (gamma0 exponent; either
    k_bounds or a target mean with the fixed 20:1 bound ratio),
    'brainlike' (beta-shaped, heavy left mass; mean), or 'file' (path,
    one strength per line).
    """

    kind: str
    mean: float | None = None
    sd: float | None = None
    gamma0: float = 2.0
    k_bounds: tuple[float, float] | None = None
    path: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "powerlaw", "brainlike", "file"):
            raise ValueError(f"unknown distribution kind: {self.kind!r}")
        if self.kind == "gaussian":
            if self.mean is None or self.sd is None:
                raise ValueError("gaussian needs mean and sd")
            if self.mean <= 0 or self.sd <= 0:
                raise ValueError("gaussian mean and sd must be > 0")
        elif self.kind == "powerlaw":
            if self.k_bounds is None and self.mean is None:
                raise ValueError("powerlaw needs k_bounds or mean")
            if self.k_bounds is not None:
                lo, hi = self.k_bounds
                if not (0 < lo < hi):
                    raise ValueError("k_bounds must satisfy 0 < lo < hi")
                if self.mean is not None and not (lo <= self.mean <= hi):
                    raise ValueError("mean lies outside k_bounds")
        elif self.kind == "brainlike":
            if self.mean is None or self.mean <= 0:
                raise ValueError("brainlike needs mean > 0")
        elif self.kind == "file" and not self.path:
            raise ValueError("file kind needs path")


def sample_gaussian_couplings(spec: DistributionSpec, n: int) -> CouplingSet:
    """Positive Gaussian sample; non-positive draws are redrawn."""
    if spec.kind != "gaussian":
        raise ValueError("spec.kind must be 'gaussian'")
    rng = np.random.default_rng(spec.seed)
    K = rng.normal(spec.mean, spec.sd, n)
    while True:
        bad = K <= 0
        if not bad.any():
            break
        K[bad] = rng.normal(spec.mean, spec.sd, int(bad.sum()))
    return CouplingSet(K)


def truncated_powerlaw_mean(lo: float, hi: float, gamma0: float) -> float:
    """Mean of density ~ x^-gamma0 truncated to [lo, hi]."""
    if gamma0 == 1.0:
        return (hi - lo) / np.log(hi / lo)
    if gamma0 == 2.0:
        return lo * hi * np.log(hi / lo) / (hi - lo)
    a, b = 1.0 - gamma0, 2.0 - gamma0
    return (hi**b - lo**b) / b * a / (hi**a - lo**a)


def powerlaw_bounds_for_mean(mean: float, gamma0: float, ratio: float = POWERLAW_RATIO):
    """Solve for (lo, ratio*lo) so the truncated power law hits the mean.

    The mean scales linearly with lo at fixed ratio, so lo = mean * lo_unit
    where lo_unit comes from the unit-mean problem; a bisection keeps this
    robust for any exponent.
    """
    f = lambda lo: truncated_powerlaw_mean(lo, ratio * lo, gamma0) - mean
    lo_a, lo_b = mean / (2.0 * ratio), mean
    if not (f(lo_a) < 0 < f(lo_b)):
        raise ValueError("could not bracket power-law lower bound")
    for _ in range(200):
        mid = 0.5 * (lo_a + lo_b)
        if f(mid) < 0:
            lo_a = mid
        else:
            lo_b = mid
    lo = 0.5 * (lo_a + lo_b)
    return lo, ratio * lo


def sample_powerlaw_couplings(spec: DistributionSpec, n: int) -> CouplingSet:
    """Inverse-CDF sample of a truncated power law x^-gamma0 on [lo, hi]."""
    if spec.kind != "powerlaw":
        raise ValueError("spec.kind must be 'powerlaw'")
    g = spec.gamma0
    if spec.k_bounds is not None:
        lo, hi = spec.k_bounds
    else:
        lo, hi = powerlaw_bounds_for_mean(spec.mean, g)
    rng = np.random.default_rng(spec.seed)
    u = rng.random(n)
    if g == 1.0:
        K = lo * (hi / lo) ** u
    else:
        a = 1.0 - g
        K = (lo**a + u * (hi**a - lo**a)) ** (1.0 / a)
    return CouplingSet(K)


def sample_brainlike_couplings(spec: DistributionSpec, n: int) -> CouplingSet:
    """Beta-shaped strengths: heavy mass near the lower bound, long right
    shoulder, sd/mean ~ 0.43.  Stand-in for cortical connectome degree
    statistics; rescaled exactly to the requested mean."""
    if spec.kind != "brainlike":
        raise ValueError("spec.kind must be 'brainlike'")
    rng = np.random.default_rng(spec.seed)
    lo, hi = 1.0e-3, 98.0e-3
    K = lo + (hi - lo) * rng.beta(2.85, 4.94, n)
    K *= spec.mean / K.mean()
    return CouplingSet(K)


def load_couplings(path) -> CouplingSet:
    K = np.loadtxt(path, ndmin=1)
    if K.ndim != 1:
        raise ValueError("coupling file must hold one strength per line")
    return CouplingSet(K)


def save_couplings(couplings: CouplingSet, path):
    np.savetxt(path, couplings.K, fmt="%.17g")


def sample_couplings(spec: DistributionSpec, n: int) -> CouplingSet:
    """Dispatch on spec.kind; 'file' loads instead of sampling."""
    if spec.kind == "gaussian":
        return sample_gaussian_couplings(spec, n)
    if spec.kind == "powerlaw":
        return sample_powerlaw_couplings(spec, n)
    if spec.kind == "brainlike":
        return sample_brainlike_couplings(spec, n)
    return load_couplings(spec.path)


def _is_graphical(degrees: np.ndarray) -> bool:
    # Erdos-Gallai: even sum plus the k-prefix inequalities.
    d = np.sort(degrees)[::-1].astype(np.int64)
    n = d.size
    if d.sum() % 2 != 0:
        return False
    if (d < 0).any() or (d >= n).any():
        return False
    prefix = np.cumsum(d)
    for k in range(1, n + 1):
        rhs = k * (k - 1) + np.minimum(d[k:], k).sum()
        if prefix[k - 1] > rhs:
            return False
    return True


def generate_graph_from_degrees(degrees, seed=None) -> NetworkGraph:
    """Realize a degree sequence as a simple undirected graph.

    Random stub matching first; since a clean pairing is rare for dense
    sequences, duplicate/self edges left after the restart budget are
    removed by degree-preserving double-edge swaps against randomly chosen
    good edges.
    """
    degrees = np.asarray(degrees, dtype=np.int64).copy()
    if degrees.ndim != 1 or degrees.size < 2:
        raise ValueError("need a 1-d sequence of at least two degrees")
    rng = np.random.default_rng(seed)
    if degrees.sum() % 2 != 0:
        degrees[rng.integers(degrees.size)] += 1
    if not _is_graphical(degrees):
        raise GraphGenerationError(
            f"degree sequence is not graphical (n={degrees.size}, "
            f"sum={degrees.sum()}, max={degrees.max()})",
            degrees,
        )
    n = degrees.size
    stubs = np.repeat(np.arange(n), degrees)

    pairs = None
    for _ in range(100):
        perm = rng.permutation(stubs)
        cand = perm.reshape(-1, 2)
        cand = np.sort(cand, axis=1)
        no_self = (cand[:, 0] != cand[:, 1]).all()
        keys = cand[:, 0] * n + cand[:, 1]
        if no_self and np.unique(keys).size == keys.size:
            pairs = cand
            break

    if pairs is None:
        # Repair pass: keep the last pairing, swap endpoints of offending
        # pairs with random good edges until the multigraph is simple.
        edges = [tuple(e) for e in cand]
        seen = set()
        bad = []
        for idx, (u, v) in enumerate(edges):
            if u == v or (u, v) in seen:
                bad.append(idx)
            else:
                seen.add((u, v))
        max_iter = 200 * len(edges)
        it = 0
        while bad:
            it += 1
            if it > max_iter:
                raise GraphGenerationError(
                    "edge-swap repair did not converge for degree sequence "
                    f"(n={n}, sum={degrees.sum()}, max={degrees.max()})",
                    degrees,
                )
            i = bad[-1]
            a, b = edges[i]
            j = int(rng.integers(len(edges)))
            u, v = edges[j]
            if j == i or j in bad:
                continue
            if rng.random() < 0.5:
                u, v = v, u
            e1 = (min(a, u), max(a, u))
            e2 = (min(b, v), max(b, v))
            if e1[0] == e1[1] or e2[0] == e2[1]:
                continue
            if e1 in seen or e2 in seen or e1 == e2:
                continue
            seen.discard((min(u, v), max(u, v)))
            edges[i] = e1
            edges[j] = e2
            seen.add(e1)
            seen.add(e2)
            bad.pop()
        pairs = np.array(edges)

    A = np.zeros((n, n), dtype=np.int8)
    A[pairs[:, 0], pairs[:, 1]] = 1
    A[pairs[:, 1], pairs[:, 0]] = 1
    return NetworkGraph(A)


def degrees_from_couplings(couplings: CouplingSet, n_nodes: int) -> np.ndarray:
    """Round K_j * N to integer degrees, clamped to the rounded ends."""
    k = np.rint(couplings.K * n_nodes).astype(np.int64)
    k_lo = max(1, int(np.rint(couplings.K_min * n_nodes)))
    k_hi = int(np.rint(couplings.K_max * n_nodes))
    return np.clip(k, k_lo, max(k_lo, k_hi))


def degrees_to_couplings(network: NetworkGraph) -> CouplingSet:
    """K_j = k_j / N.  Isolated nodes have no coupling strength and must
    be removed before conversion."""
    if (network.degrees == 0).any():
        bad = np.flatnonzero(network.degrees == 0)
        raise ValueError(
            f"zero-degree nodes {bad.tolist()} cannot carry a coupling; "
            "remove them first"
        )
    return CouplingSet(network.degrees / network.n)


def _read_numeric_rows(path):
    rows = []
    with open(path) as fh:
        for i, line in enumerate(fh):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.replace(",", " ").split()
            vals = []
            for c, p in enumerate(parts):
                try:
                    vals.append(float(p))
                except ValueError:
                    raise ValueError(
                        f"{path}: unparseable entry at row {i + 1}, column {c + 1}"
                    ) from None
            rows.append((i, vals))
    if not rows:
        raise ValueError(f"{path}: empty adjacency file")
    width = len(rows[0][1])
    if any(len(vals) != width for _, vals in rows):
        raise ValueError(f"{path}: ragged rows")
    return rows, width


def load_adjacency(path, symmetrize: bool = False) -> NetworkGraph:
    """Read a dense 0/1 matrix or a src,dst edge list.

    File rows point source -> destination; internally the matrix is stored
    so row j lists the inputs driving oscillator j (the transpose of the
    dense file).  Nodes that end up with no inputs are dropped, once, and
    the reduced graph is returned.
    """
    rows, width = _read_numeric_rows(path)
    all01 = all(v in (0.0, 1.0) for _, vals in rows for v in vals)
    is_edge_list = width == 2 and not (len(rows) == 2 and all01)

    if is_edge_list:
        pairs = np.array([vals for _, vals in rows])
        if not np.array_equal(pairs, np.rint(pairs)) or pairs.min() < 0:
            raise ValueError(f"{path}: edge list entries must be node ids >= 0")
        pairs = pairs.astype(np.int64)
        n = int(pairs.max()) + 1
        A = np.zeros((n, n), dtype=np.int8)
        A[pairs[:, 1], pairs[:, 0]] = 1  # src drives dst
    else:
        if len(rows) != width:
            raise ValueError(f"{path}: matrix is {len(rows)}x{width}, not square")
        for lineno, vals in rows:
            for c, v in enumerate(vals):
                if v not in (0.0, 1.0):
                    raise ValueError(
                        f"{path}: entry {v!r} at row {lineno + 1}, "
                        f"column {c + 1} is not 0 or 1"
                    )
        A = np.array([vals for _, vals in rows], dtype=np.int8).T
    if symmetrize:
        A = np.maximum(A, A.T)
    np.fill_diagonal(A, 0)
    in_deg = A.sum(axis=1)
    keep = np.flatnonzero(in_deg > 0)
    if keep.size < A.shape[0]:
        A = A[np.ix_(keep, keep)]
    if A.shape[0] == 0:
        raise ValueError(f"{path}: no nodes with inputs remain")
    return NetworkGraph(A)


def export_edge_list(network: NetworkGraph, path):
    """Write one src,dst row per directed edge (both directions for
    symmetric graphs, so a plain reload reproduces the matrix)."""
    dst, src = np.nonzero(network.adjacency)  # A[j, k]: k drives j
    with open(path, "w") as fh:
        for s, d in zip(src, dst):
            fh.write(f"{s},{d}\n")
