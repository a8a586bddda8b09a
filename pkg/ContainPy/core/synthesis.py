"""
Gain Synthesis
==============

Companion-form lifted plants, Riccati-based controller and estimator
gains, and closed-loop stability certificates.

Gain vectors are stored aligned with the lifted state: ``K[j]`` multiplies
the j-th derivative (or difference) of the lifted error, so for a plant of
order q the vector reads (kappa_{q-1}, ..., kappa_0) and
``kappa_l = K[q - 1 - l]``.

Continuous gains solve the algebraic Riccati equation
A^T P + P A + I - P B B^T P = 0 by Newton-Kleinman iteration and set
K = eps B^T P. Discrete gains iterate the modified Riccati map

    P <- A^T P A - (1 - eps^2) A^T P B (B^T P B)^{-1} B^T P A + I

to its fixed point and set K = (B^T P B)^{-1} B^T P A.

Authors: ContainPy Development Team
Version: 0.1.0
"""

from dataclasses import dataclass, field
from typing import Literal, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.special import comb

from .errors import CertificationError, ConvergenceError
from .topology import LaplacianBlocks, SpectrumReport, Weighting, input_scale, normalized_spectrum
from .utils import DEFAULT_TOLERANCES, SIGMA_FRACTION, Tolerances, reversal_matrix, spectral_radius


# Type alias for the time domain of a plant
TimeDomain = Literal["continuous", "discrete"]

# Type alias for the closed-loop certificate computation
CertificateMethod = Literal["kronecker", "blockwise"]


def get_time_domains() -> list:
    """Return the supported time domains."""
    return ["continuous", "discrete"]


def validate_time_domain(mode: str) -> bool:
    """Check whether a time domain name is valid."""
    return mode in get_time_domains()


def _require_mode(mode: str):
    if not validate_time_domain(mode):
        raise ValueError(
            f"Invalid mode '{mode}'. "
            f"Must be one of: {get_time_domains()}"
        )


# =============================================================================
# PLANTS
# =============================================================================

@dataclass(frozen=True, eq=False)
class CompanionPlant:
    """
    Chain of q integrators (continuous) or accumulators (discrete).

    ``A`` is the upper shift, ``B`` the last unit vector as a (q, 1) column.
    In discrete mode ``A_hat = I + A`` is the one-step transition.
    """

    order: int
    mode: TimeDomain
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)

    @property
    def A_hat(self) -> np.ndarray:
        return np.eye(self.order) + self.A

    @property
    def transition(self) -> np.ndarray:
        """A in continuous mode, A_hat in discrete mode."""
        return self.A if self.mode == "continuous" else self.A_hat


def companion_plant(order: int, mode: TimeDomain = "continuous") -> CompanionPlant:
    """
    Build the companion plant of a lifted agent.

    Examples
    --------
    >>> companion_plant(2).A
    array([[0., 1.],
           [0., 0.]])
    """
    _require_mode(mode)
    if order < 1:
        raise ValueError(f"Plant order must be >= 1, got {order}")
    A = np.eye(order, k=1)
    B = np.zeros((order, 1))
    B[-1, 0] = 1.0
    A.setflags(write=False)
    B.setflags(write=False)
    return CompanionPlant(order=int(order), mode=mode, A=A, B=B)


def gain_to_kappa(K) -> np.ndarray:
    """(kappa_0, ..., kappa_{q-1}) from a state-aligned gain vector."""
    return np.asarray(K, dtype=np.float64).reshape(-1)[::-1].copy()


def kappa_to_gain(kappa) -> np.ndarray:
    """Inverse of :func:`gain_to_kappa`."""
    return np.asarray(kappa, dtype=np.float64).reshape(-1)[::-1].copy()


# =============================================================================
# RICCATI SOLVERS
# =============================================================================

def _lyapunov_kron(acl: np.ndarray, q_mat: np.ndarray) -> np.ndarray:
    """Solve acl^T P + P acl + q_mat = 0 through its vectorised form."""
    n = acl.shape[0]
    eye = np.eye(n)
    lhs = np.kron(acl.T, eye) + np.kron(eye, acl.T)
    vec = scipy.linalg.solve(lhs, -q_mat.reshape(-1))
    P = vec.reshape(n, n)
    return 0.5 * (P + P.T)


def care_residual(P: np.ndarray, A: np.ndarray, B: np.ndarray) -> float:
    """Frobenius norm of A^T P + P A + I - P B B^T P."""
    res = A.T @ P + P @ A + np.eye(A.shape[0]) - P @ B @ B.T @ P
    return float(np.linalg.norm(res))


def _newton_kleinman(
    A: np.ndarray,
    B: np.ndarray,
    K0: np.ndarray,
    tol: float,
    max_iter: int,
) -> Tuple[np.ndarray, float, int]:
    K = np.asarray(K0, dtype=np.float64).reshape(1, -1)
    eye = np.eye(A.shape[0])
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        acl = A - B @ K
        P = _lyapunov_kron(acl, eye + K.T @ K)
        K = B.T @ P
        residual = care_residual(P, A, B)
        if residual < tol:
            return P, residual, iteration
    raise ConvergenceError(
        f"Newton-Kleinman iteration stopped after {max_iter} steps "
        f"with residual {residual:.3e}"
    )


def _pole_placement_gain(order: int) -> np.ndarray:
    """Gain putting every pole of the integrator chain at -1: C(q, j)."""
    return comb(order, np.arange(order)).astype(np.float64)


def care_solve(
    plant: CompanionPlant,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """
    Stabilising solution of A^T P + P A + I - P B B^T P = 0.

    Newton-Kleinman starts from the gain that places all closed-loop poles
    at -1; each step solves a Lyapunov equation.

    Returns
    -------
    np.ndarray
        Symmetric positive definite P (q x q).

    Raises
    ------
    ConvergenceError
        If the residual does not drop below ``tolerances.care_residual``.
    """
    if plant.mode != "continuous":
        raise ValueError("care_solve needs a continuous plant")
    P, _, _ = _newton_kleinman(
        plant.A, plant.B, _pole_placement_gain(plant.order),
        tolerances.care_residual, tolerances.care_max_iter,
    )
    return P


def epsilon_continuous(spectrum: Union[SpectrumReport, float]) -> float:
    """
    Coupling gain eps = 0.5 max(1, 1 / sigma) with sigma = 0.99 lambda_min.

    Raises
    ------
    CertificationError
        If the smallest real part of spec(L2) is not positive.
    """
    lam_min = spectrum.lambda_min_real if isinstance(spectrum, SpectrumReport) else float(spectrum)
    if lam_min <= 0:
        raise CertificationError(
            f"lambda_min = {lam_min:.3e} is not positive; some follower is unreachable"
        )
    sigma = SIGMA_FRACTION * lam_min
    return 0.5 * max(1.0, 1.0 / sigma)


def continuous_gain(P: np.ndarray, epsilon: float, plant: CompanionPlant) -> np.ndarray:
    """K = eps B^T P, i.e. eps times the last row of P."""
    return float(epsilon) * (plant.B.T @ P).reshape(-1)


def _riccati_map(P: np.ndarray, A: np.ndarray, B: np.ndarray, epsilon: float) -> np.ndarray:
    """A^T P A - (1 - eps^2) A^T P B (B^T P B)^{-1} B^T P A, symmetrized."""
    BPA = B.T @ P @ A
    image = A.T @ P @ A - (1.0 - epsilon ** 2) * BPA.T @ np.linalg.solve(B.T @ P @ B, BPA)
    return 0.5 * (image + image.T)


def _modified_dare(
    A: np.ndarray,
    B: np.ndarray,
    epsilon: float,
    tol: float,
    max_iter: int,
) -> Tuple[np.ndarray, int]:
    # Stop on the Frobenius change relative to max(1, ||P||_F).
    eye = np.eye(A.shape[0])
    P = eye.copy()
    for iteration in range(1, max_iter + 1):
        update = _riccati_map(P, A, B, epsilon) + eye
        change = float(np.linalg.norm(update - P)) / max(1.0, float(np.linalg.norm(update)))
        P = update
        if change < tol:
            return P, iteration
    raise ConvergenceError(
        f"Modified Riccati iteration did not settle within {max_iter} steps "
        f"(last change {change:.3e})"
    )


def dare_margin(P: np.ndarray, A: np.ndarray, B: np.ndarray, epsilon: float) -> float:
    """
    Smallest eigenvalue of P - [A^T P A - (1 - eps^2) A^T P B (B^T P B)^{-1} B^T P A].

    Equals 1 at the exact fixed point.
    """
    diff = 0.5 * (P + P.T) - _riccati_map(P, A, B, epsilon)
    return float(np.min(np.linalg.eigvalsh(diff)))


def modified_dare_solve(
    plant: CompanionPlant,
    epsilon: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """
    Fixed point of the modified discrete Riccati map, iterated from P = I.

    Parameters
    ----------
    plant : CompanionPlant
        Discrete plant.
    epsilon : float
        Must lie in (0, 1).

    Returns
    -------
    np.ndarray
        P satisfying the strict Riccati inequality with margin
        ``tolerances.dare_margin``.

    Raises
    ------
    ValueError
        If eps is outside (0, 1) or the plant is continuous.
    ConvergenceError
        If successive iterates do not settle, or the inequality margin is
        too small.
    """
    if plant.mode != "discrete":
        raise ValueError("modified_dare_solve needs a discrete plant")
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    P, _ = _modified_dare(
        plant.A_hat, plant.B, epsilon, tolerances.dare_change, tolerances.dare_max_iter
    )
    margin = dare_margin(P, plant.A_hat, plant.B, epsilon)
    if margin < tolerances.dare_margin:
        raise ConvergenceError(f"Riccati inequality margin {margin:.3e} below {tolerances.dare_margin}")
    return P


def discrete_gain(P: np.ndarray, plant: CompanionPlant) -> np.ndarray:
    """K = (B^T P B)^{-1} B^T P A_hat."""
    return _discrete_gain(P, plant.A_hat, plant.B)


def _discrete_gain(P: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    BPB = float((B.T @ P @ B)[0, 0])
    if BPB <= 0:
        raise CertificationError(f"B^T P B = {BPB:.3e} is not positive; P is corrupted")
    return ((B.T @ P @ A) / BPB).reshape(-1)


def epsilon_discrete(normalized_eigenvalues) -> float:
    """
    Midpoint of (max |1 - lambda_hat|, 1).

    Raises
    ------
    CertificationError
        If some normalized eigenvalue lies outside the unit disk centred at 1.
    """
    radius = float(np.max(np.abs(1.0 - np.asarray(normalized_eigenvalues))))
    if radius >= 1.0:
        raise CertificationError(
            f"max |1 - lambda_hat| = {radius:.4f} >= 1; the discrete law cannot be certified"
        )
    return 0.5 * (radius + 1.0)


# =============================================================================
# ESTIMATOR GAINS
# =============================================================================

def estimator_matrices(order: int, mode: TimeDomain = "continuous") -> Tuple[np.ndarray, np.ndarray]:
    """
    (E, G) of the derivative estimator: E the upper shift (I + shift in
    discrete mode) and G = e_1^T the position read-out.
    """
    plant = companion_plant(order, mode)
    G = np.zeros((1, order))
    G[0, 0] = 1.0
    return plant.transition.copy(), G


def estimator_care_solve(order: int, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Solve E P + P E^T + I - P G^T G P = 0 (the transposed Riccati equation)."""
    E, G = estimator_matrices(order, "continuous")
    init = _pole_placement_gain(order)[::-1]
    P, _, _ = _newton_kleinman(
        E.T, G.T, init, tolerances.care_residual, tolerances.care_max_iter
    )
    return P


def estimator_gain_continuous(
    order: int,
    epsilon: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    K_e = eps P G^T, i.e. eps times the first column of P.

    Returns
    -------
    K_e : np.ndarray
        Shape (m,).
    P : np.ndarray
        Estimator Riccati solution.
    """
    P = estimator_care_solve(order, tolerances)
    return float(epsilon) * P[:, 0].copy(), P


def estimator_gain_discrete(
    order: int,
    epsilon: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    K_e = E~ P G^T (G P G^T)^{-1} with P the modified Riccati solution of
    the transposed plant (E~^T, G^T).

    Returns
    -------
    K_e : np.ndarray
        Shape (m,).
    P : np.ndarray
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    E, G = estimator_matrices(order, "discrete")
    P, _ = _modified_dare(E.T, G.T, epsilon, tolerances.dare_change, tolerances.dare_max_iter)
    margin = dare_margin(P, E.T, G.T, epsilon)
    if margin < tolerances.dare_margin:
        raise ConvergenceError(f"Riccati inequality margin {margin:.3e} below {tolerances.dare_margin}")
    return _discrete_gain(P, E.T, G.T), P


# =============================================================================
# CLOSED-LOOP CERTIFICATES
# =============================================================================

def follower_weights(
    blocks: LaplacianBlocks,
    mode: TimeDomain,
    weighting: Weighting = "normalized",
    mu: Optional[float] = None,
) -> np.ndarray:
    """Input weights: ones in continuous time, 1/(1+d_i) or mu in discrete time."""
    if mode == "continuous":
        return np.ones(blocks.num_followers)
    return input_scale(blocks, weighting, mu)


def closed_loop_matrix(
    blocks: LaplacianBlocks,
    plant: CompanionPlant,
    K,
    weighting: Weighting = "normalized",
    mu: Optional[float] = None,
) -> np.ndarray:
    """
    Lifted closed loop I_N (x) A - L2 (x) B K, or I_N (x) A_hat - L2_hat (x) B K
    with L2_hat = diag(weights) L2 in discrete mode.
    """
    K = np.asarray(K, dtype=np.float64).reshape(1, -1)
    scale = follower_weights(blocks, plant.mode, weighting, mu)
    l2 = scale[:, None] * blocks.l2
    return np.kron(np.eye(blocks.num_followers), plant.transition) - np.kron(l2, plant.B @ K)


def _margin(matrix: np.ndarray, mode: TimeDomain) -> float:
    if mode == "continuous":
        return float(-np.max(np.linalg.eigvals(matrix).real))
    return 1.0 - spectral_radius(matrix)


def verify_closed_loop(
    blocks: LaplacianBlocks,
    plant: CompanionPlant,
    K,
    weighting: Weighting = "normalized",
    mu: Optional[float] = None,
    method: CertificateMethod = "kronecker",
) -> float:
    """
    Stability margin of the lifted closed loop.

    Continuous: -max Re spec(I_N (x) A - L2 (x) B K).
    Discrete: 1 - rho(I_N (x) A_hat - L2_hat (x) B K).
    Positive means certified; nothing is raised for a non-positive margin.

    ``method="blockwise"`` checks A - lambda_i B K for each eigenvalue of the
    weighted L2 instead of forming the Kronecker matrix.
    """
    if method == "kronecker":
        return _margin(closed_loop_matrix(blocks, plant, K, weighting, mu), plant.mode)
    if method != "blockwise":
        raise ValueError(f"Invalid method '{method}'. Must be one of: ['kronecker', 'blockwise']")

    K = np.asarray(K, dtype=np.float64).reshape(1, -1)
    scale = follower_weights(blocks, plant.mode, weighting, mu)
    eigs = scipy.linalg.eigvals(scale[:, None] * blocks.l2)
    BK = plant.B @ K
    return min(_margin(plant.transition - lam * BK, plant.mode) for lam in eigs)


def verify_estimator(
    blocks: LaplacianBlocks,
    K_e,
    mode: TimeDomain,
    method: CertificateMethod = "kronecker",
) -> float:
    """
    Stability margin of the estimator error dynamics.

    Continuous: -max Re spec(I_N (x) E - L2 (x) K_e G). Discrete uses E~
    and the normalized Laplacian (I + D)^{-1} L2, matching the 1/(1+d_i)
    factor on the innovation.
    """
    K_e = np.asarray(K_e, dtype=np.float64).reshape(-1, 1)
    E, G = estimator_matrices(K_e.shape[0], mode)
    scale = follower_weights(blocks, mode, "normalized")
    l2 = scale[:, None] * blocks.l2
    if method == "blockwise":
        return min(_margin(E - lam * (K_e @ G), mode) for lam in scipy.linalg.eigvals(l2))
    full = np.kron(np.eye(blocks.num_followers), E) - np.kron(l2, K_e @ G)
    return _margin(full, mode)


# =============================================================================
# SYNTHESIS PIPELINES
# =============================================================================

@dataclass(frozen=True, eq=False)
class GainSynthesis:
    """Certified controller gains with everything needed to audit them."""

    mode: TimeDomain
    order: int
    P: np.ndarray
    epsilon: float
    K: np.ndarray
    residual: float
    margin: float
    certified: bool
    weighting: Optional[str] = None
    mu: Optional[float] = None

    @property
    def kappa(self) -> np.ndarray:
        return gain_to_kappa(self.K)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "order": self.order,
            "P": self.P.tolist(),
            "epsilon": self.epsilon,
            "K": self.K.tolist(),
            "residual": self.residual,
            "margin": self.margin,
            "certified": self.certified,
            "weighting": self.weighting,
            "mu": self.mu,
        }


@dataclass(frozen=True, eq=False)
class EstimatorGainSynthesis:
    """Estimator gain K_e with its Riccati solution and error-loop margin."""

    mode: TimeDomain
    order: int
    P: np.ndarray
    epsilon: float
    K_e: np.ndarray
    margin: float
    certified: bool

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "order": self.order,
            "P": self.P.tolist(),
            "epsilon": self.epsilon,
            "K_e": self.K_e.tolist(),
            "margin": self.margin,
            "certified": self.certified,
        }


def synthesize_gains(
    blocks: LaplacianBlocks,
    spectrum: SpectrumReport,
    order: int,
    mode: TimeDomain,
    weighting: Weighting = "normalized",
    mu: Optional[float] = None,
    epsilon: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> GainSynthesis:
    """
    Full controller synthesis for a lifted plant of the given order.

    Parameters
    ----------
    blocks, spectrum : LaplacianBlocks, SpectrumReport
        Certified topology data.
    order : int
        Lifted order q = max(m, n + 1).
    mode : {'continuous', 'discrete'}
    weighting, mu :
        Discrete input weighting.
    epsilon : float, optional
        Override of the automatically chosen coupling parameter.

    Returns
    -------
    GainSynthesis
    """
    _require_mode(mode)
    plant = companion_plant(order, mode)
    if mode == "continuous":
        eps = epsilon_continuous(spectrum) if epsilon is None else float(epsilon)
        P = care_solve(plant, tolerances)
        K = continuous_gain(P, eps, plant)
        residual = care_residual(P, plant.A, plant.B)
        weighting, mu = None, None
    else:
        lam_hat = normalized_spectrum(blocks, weighting, mu)
        eps = epsilon_discrete(lam_hat) if epsilon is None else float(epsilon)
        P = modified_dare_solve(plant, eps, tolerances)
        K = discrete_gain(P, plant)
        residual = dare_margin(P, plant.A_hat, plant.B, eps)
    margin = verify_closed_loop(blocks, plant, K, weighting or "normalized", mu)
    return GainSynthesis(
        mode=mode,
        order=int(order),
        P=P,
        epsilon=float(eps),
        K=K,
        residual=float(residual),
        margin=margin,
        certified=margin > 0,
        weighting=weighting,
        mu=mu,
    )


def synthesize_estimator(
    blocks: LaplacianBlocks,
    spectrum: SpectrumReport,
    order: int,
    mode: TimeDomain,
    epsilon: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EstimatorGainSynthesis:
    """Estimator gain for followers of order m, with its error-loop margin."""
    _require_mode(mode)
    if mode == "continuous":
        eps = epsilon_continuous(spectrum) if epsilon is None else float(epsilon)
        K_e, P = estimator_gain_continuous(order, eps, tolerances)
    else:
        eps = epsilon_discrete(spectrum.normalized_eigenvalues) if epsilon is None else float(epsilon)
        K_e, P = estimator_gain_discrete(order, eps, tolerances)
    margin = verify_estimator(blocks, K_e, mode)
    return EstimatorGainSynthesis(
        mode=mode,
        order=int(order),
        P=P,
        epsilon=float(eps),
        K_e=K_e,
        margin=margin,
        certified=margin > 0,
    )


def reversal_dual(P: np.ndarray) -> np.ndarray:
    """J P J with J the reversal permutation."""
    J = reversal_matrix(P.shape[0])
    return J @ P @ J
