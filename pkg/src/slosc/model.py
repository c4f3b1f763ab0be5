"""Model definitions for coupled Stuart-Landau oscillators.

The population obeys

    dz_j/dt = (lambda - |z_j|^2 + i*omega) z_j
              + (S K_j / N) sum_k (z_k e^{-i beta} - z_j d0 e^{-i alpha})

with per-oscillator coupling strengths K_j > 0.  When the interaction runs
over an explicit adjacency matrix instead of the population mean, K_j is
replaced by A_jk inside the sum and the prefactor becomes S/N.

Production integration works on the Cartesian (complex) form; the polar
form is provided as a test oracle and for observables, since r_j can
transiently approach zero where theta_j is ill-conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

R_FLOOR = 1e-9  # below this amplitude the polar form is declared singular

__all__ = [
    "ModelParams",
    "CouplingSet",
    "EnsembleState",
    "NetworkGraph",
    "R_FLOOR",
    "mean_field_rhs",
    "polar_rhs",
    "full_network_rhs",
]


@dataclass(frozen=True)
class ModelParams:
    """Scalar model constants.

    Parameters
    ----------
    lambda_ : float
        Bifurcation parameter, > 0.  Uncoupled limit-cycle radius is
        sqrt(lambda_).
    omega : float
        Intrinsic angular frequency, shared by every oscillator.
    alpha : float
        Argument of the constant self-coupling term d0*e^{-i alpha},
        in [0, pi).
    beta : float
        Phase delay applied to the source term, in [0, pi/2).
    d0 : float
        Magnitude of the constant self-coupling term (any real).
    S : float
        Global coupling scale, > 0.  The analysis sets S = 1; larger S
        exaggerates amplitude differences without qualitative change.
    N : int
        Oscillator count, >= 1.
    """

    lambda_: float = 1.0
    omega: float = np.pi
    alpha: float = 0.0
    beta: float = 0.0
    d0: float = 0.0
    S: float = 1.0
    N: int = 1

    def __post_init__(self):
        if not self.lambda_ > 0:
            raise ValueError(f"lambda must be > 0, got {self.lambda_}")
        if not self.S > 0:
            raise ValueError(f"S must be > 0, got {self.S}")
        if not 0 <= self.alpha < np.pi:
            raise ValueError(f"alpha must lie in [0, pi), got {self.alpha}")
        if not 0 <= self.beta < np.pi / 2:
            raise ValueError(f"beta must lie in [0, pi/2), got {self.beta}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")

    def with_(self, **changes) -> "ModelParams":
        """Copy with selected fields replaced."""
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class CouplingSet:
    """Per-oscillator coupling strengths with summary statistics.

    Statistics are recomputed from the stored sequence, never trusted
    from a caller.
    """

    K: np.ndarray
    K_min: float = field(init=False)
    K_max: float = field(init=False)
    K_mean: float = field(init=False)
    sigma_K: float = field(init=False)

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        if K.ndim != 1 or K.size == 0:
            raise ValueError("coupling set must be a nonempty 1-d sequence")
        if not np.all(K > 0):
            raise ValueError("every coupling strength must be > 0")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "K_min", float(K.min()))
        object.__setattr__(self, "K_max", float(K.max()))
        object.__setattr__(self, "K_mean", float(K.mean()))
        object.__setattr__(self, "sigma_K", float(K.std()))

    def __len__(self) -> int:
        return self.K.size

    @classmethod
    def homogeneous(cls, K: float, n: int) -> "CouplingSet":
        return cls(np.full(n, float(K)))


@dataclass(frozen=True)
class EnsembleState:
    """Positions of all N oscillators in the complex plane at one time."""

    z: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        if z.ndim != 1:
            raise ValueError("state must be a 1-d complex sequence")
        if not np.all(np.isfinite(z.view(float))):
            raise ValueError("state contains non-finite components")
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def theta(self) -> np.ndarray:
        return np.angle(self.z)

    @property
    def r(self) -> np.ndarray:
        return np.abs(self.z)


@dataclass(frozen=True)
class NetworkGraph:
    """Undirected simple graph held as a dense binary adjacency matrix.

    A[j, k] = 1 means oscillator k drives oscillator j.  Generated
    networks are bidirectional with zero diagonal; degrees are the row
    sums.
    """

    adjacency: np.ndarray
    degrees: np.ndarray = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if not np.isin(A, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if np.any(np.diag(A) != 0):
            raise ValueError("self-coupling (nonzero diagonal) not allowed")
        A = A.astype(np.int8)
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "degrees", A.sum(axis=1).astype(np.int64))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def is_symmetric(self) -> bool:
        return bool((self.adjacency == self.adjacency.T).all())


def _check_sizes(state: EnsembleState, n: int, what: str):
    if state.n != n:
        raise ValueError(
            f"dimension mismatch: state has {state.n} oscillators, {what} has {n}"
        )


def mean_field_rhs(
    state: EnsembleState, params: ModelParams, couplings: CouplingSet
) -> np.ndarray:
    """Time derivative of the mean-field model.

    The population sum is computed once, so the call is O(N).

    Returns
    -------
    ndarray of complex
        dz_j/dt for every oscillator.
    """
    _check_sizes(state, len(couplings), "coupling set")
    z = state.z
    Z = z.mean()  # (1/N) sum_k z_k
    drive = Z * np.exp(-1j * params.beta)
    self_term = params.d0 * np.exp(-1j * params.alpha)
    intrinsic = (params.lambda_ - np.abs(z) ** 2 + 1j * params.omega) * z
    return intrinsic + params.S * couplings.K * (drive - self_term * z)


def polar_rhs(
    state: EnsembleState, params: ModelParams, couplings: CouplingSet
) -> tuple[np.ndarray, np.ndarray]:
    """Polar-coordinate derivatives (dtheta_j/dt, dr_j/dt).

    Test oracle only; not the production integrator path.  Requires all
    amplitudes above ``R_FLOOR`` because dtheta divides by r_j.
    """
    _check_sizes(state, len(couplings), "coupling set")
    r = state.r
    if np.any(r <= R_FLOOR):
        raise FloatingPointError(
            f"polar form singular: amplitude at or below r_floor={R_FLOOR}"
        )
    theta = state.theta
    n = state.n
    # pairwise phase differences theta_k - theta_j - beta
    diff = theta[None, :] - theta[:, None] - params.beta
    SKN = params.S * couplings.K / n
    dtheta = params.omega + SKN * (
        (r[None, :] / r[:, None] * np.sin(diff)).sum(axis=1)
        + n * params.d0 * np.sin(params.alpha)
    )
    dr = (params.lambda_ - r**2) * r + SKN * (
        (r[None, :] * np.cos(diff)).sum(axis=1)
        - n * r * params.d0 * np.cos(params.alpha)
    )
    return dtheta, dr


def full_network_rhs(
    state: EnsembleState, params: ModelParams, network: NetworkGraph
) -> np.ndarray:
    """Time derivative with the full adjacency matrix retained.

    dz_j/dt = (lambda - |z_j|^2 + i omega) z_j
              + (S/N) sum_k A_jk (z_k e^{-i beta} - z_j d0 e^{-i alpha})
    """
    _check_sizes(state, network.n, "network")
    z = state.z
    n = state.n
    neighbor_sum = network.adjacency @ z
    drive = neighbor_sum * np.exp(-1j * params.beta)
    self_term = network.degrees * params.d0 * np.exp(-1j * params.alpha) * z
    intrinsic = (params.lambda_ - np.abs(z) ** 2 + 1j * params.omega) * z
    return intrinsic + (params.S / n) * (drive - self_term)
