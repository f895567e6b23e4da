"""Modal solution, mode correlation and the modal-distance cost function.

The generalized eigenproblem K phi = omega^2 M phi is solved undamped:
damping enters only as per-mode ratios used by the FRF synthesis.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, solve_triangular

from .beam import SystemMatrices

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

# Eigenvalues this far below the first elastic eigenvalue count as rigid-body.
RIGID_RATIO = 1e-6


class EigenSolveError(RuntimeError):
    """Raised when the modal solve fails (mass not SPD, or residual too large)."""


@dataclass
class ModalData:
    """Natural frequencies and mass-normalized mode shapes.

    Parameters
    ----------
    frequencies : (n_modes,) array
        Natural frequencies in rad/s, ascending and non-negative.
    mode_shapes : (n_coords, n_modes) array
        One column per mode; rows follow coordinate_map.
    coordinate_map : (n_coords,) int array
        Global DOF index of each mode-shape row.
    damping_ratios : (n_modes,) array, optional
        Per-mode damping ratios, default all zero.
    rigid : (n_modes,) bool array, optional
        Flags rigid-body modes, default all False.
    """

    frequencies: np.ndarray
    mode_shapes: np.ndarray
    coordinate_map: np.ndarray
    damping_ratios: np.ndarray = field(default=None)
    rigid: np.ndarray = field(default=None)

    def __post_init__(self):
        self.frequencies = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        self.mode_shapes = np.asarray(self.mode_shapes, dtype=float)
        if self.mode_shapes.ndim == 1:
            self.mode_shapes = self.mode_shapes[:, None]
        self.coordinate_map = np.atleast_1d(np.asarray(self.coordinate_map, dtype=int))
        n = self.n_modes
        if self.damping_ratios is None:
            self.damping_ratios = np.zeros(n)
        self.damping_ratios = np.atleast_1d(np.asarray(self.damping_ratios, dtype=float))
        if self.rigid is None:
            self.rigid = np.zeros(n, dtype=bool)
        self.rigid = np.atleast_1d(np.asarray(self.rigid, dtype=bool))
        if np.any(self.frequencies < 0.0):
            raise ValueError("frequencies must be non-negative")
        if np.any(np.diff(self.frequencies) < 0.0):
            raise ValueError("frequencies must be sorted ascending")
        if self.mode_shapes.shape[1] != n:
            raise ValueError("mode-shape column count must equal frequency count")
        if self.mode_shapes.shape[0] != self.coordinate_map.size:
            raise ValueError("mode-shape row count must match coordinate_map")
        if self.damping_ratios.size != n or np.any(self.damping_ratios < 0.0):
            raise ValueError("need one non-negative damping ratio per mode")
        if self.rigid.size != n:
            raise ValueError("need one rigid flag per mode")

    @property
    def n_modes(self) -> int:
        return self.frequencies.size

    @property
    def frequencies_hz(self) -> np.ndarray:
        return self.frequencies / TWO_PI

    def select_modes(self, indices) -> "ModalData":
        """New ModalData holding the given modes (order preserved)."""
        idx = np.atleast_1d(np.asarray(indices, dtype=int))
        return ModalData(
            frequencies=self.frequencies[idx],
            mode_shapes=self.mode_shapes[:, idx],
            coordinate_map=self.coordinate_map.copy(),
            damping_ratios=self.damping_ratios[idx],
            rigid=self.rigid[idx],
        )

    def elastic(self) -> "ModalData":
        """Only the non-rigid modes."""
        return self.select_modes(np.flatnonzero(~self.rigid))

    def at_coordinates(self, dofs) -> "ModalData":
        """Restrict mode shapes to the given global DOF indices."""
        dofs = np.atleast_1d(np.asarray(dofs, dtype=int))
        pos = np.searchsorted(self.coordinate_map, dofs)
        if np.any(pos >= self.coordinate_map.size) or np.any(self.coordinate_map[np.minimum(pos, self.coordinate_map.size - 1)] != dofs):
            raise ValueError("requested DOFs are not observed coordinates of this modal set")
        return ModalData(
            frequencies=self.frequencies.copy(),
            mode_shapes=self.mode_shapes[pos, :],
            coordinate_map=dofs.copy(),
            damping_ratios=self.damping_ratios.copy(),
            rigid=self.rigid.copy(),
        )


@dataclass
class CostWeights:
    """Frequency weights gamma (one per mode) and mode-shape weight beta."""

    gamma: np.ndarray
    beta: float

    def __post_init__(self):
        self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if np.any(self.gamma < 0.0) or self.beta < 0.0:
            raise ValueError("weights must be non-negative")


def _count_rigid(eigenvalues: np.ndarray, ratio: float = RIGID_RATIO) -> int:
    """Number of leading near-zero eigenvalues, split at a gap of `ratio`.

    Scans candidate split points from the most inclusive down, so small
    positive noise eigenvalues of free-free models are still flagged.
    """
    n = eigenvalues.size
    limit = min(n, 7)
    for i in range(limit - 1, -1, -1):
        lam = eigenvalues[i]
        if lam <= 0.0:
            continue
        if i == 0 or np.max(np.abs(eigenvalues[:i])) < ratio * lam:
            return i
    return 0


def solve_modes(matrices: SystemMatrices, n_modes: int,
                rigid_ratio: float = RIGID_RATIO,
                residual_tol: float = 1e-8) -> ModalData:
    """Lowest n_modes eigenpairs of K phi = omega^2 M phi.

    The mass matrix is Cholesky-factored (M = L L^T) and the pencil is
    reduced to a standard symmetric problem on L^-1 K L^-T, solved densely.
    Returned shapes are mass-normalized (phi^T M phi = 1). Rigid-body
    modes (omega ~ 0) stay in the spectrum and are flagged.

    Raises
    ------
    EigenSolveError
        If M is not positive definite, the dense solver fails, or any
        returned elastic mode violates the residual tolerance.
    """
    n = matrices.dof_count
    if not (1 <= n_modes <= n):
        raise ValueError(f"n_modes must be in [1, {n}], got {n_modes}")

    M = matrices.mass
    K = matrices.stiffness
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(f"mass matrix is not positive definite: {exc}") from exc

    # A = L^-1 K L^-T, symmetrized against roundoff
    tmp = solve_triangular(L, K, lower=True)
    A = solve_triangular(L, tmp.T, lower=True)
    A = 0.5 * (A + A.T)
    try:
        lam, Y = eigh(A)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(f"dense symmetric eigensolver did not converge: {exc}") from exc

    rigid_count = _count_rigid(lam, rigid_ratio)
    lam_sel = lam[:n_modes]
    # phi = L^-T y keeps y^T y = 1 equivalent to phi^T M phi = 1
    phi = solve_triangular(L.T, Y[:, :n_modes], lower=False)

    rigid = np.zeros(n_modes, dtype=bool)
    rigid[:min(rigid_count, n_modes)] = True
    omega2 = np.where(rigid, np.maximum(lam_sel, 0.0), lam_sel)
    if np.any(omega2 < 0.0):
        raise EigenSolveError(
            f"negative elastic eigenvalue {omega2.min():.3e}; model is not PSD")

    elastic = ~rigid
    if np.any(elastic):
        k_phi = K @ phi[:, elastic]
        res = k_phi - (M @ phi[:, elastic]) * lam_sel[elastic]
        rel = np.linalg.norm(res, axis=0) / np.linalg.norm(k_phi, axis=0)
        if np.any(rel > residual_tol):
            i = int(np.argmax(rel))
            raise EigenSolveError(
                f"eigen residual {rel[i]:.3e} exceeds {residual_tol:.1e} "
                f"(worst of {int(elastic.sum())} elastic modes)")

    return ModalData(
        frequencies=np.sqrt(omega2),
        mode_shapes=phi,
        coordinate_map=matrices.dof_map.copy(),
        rigid=rigid,
    )


def mac(shapes_a: np.ndarray, shapes_b: np.ndarray) -> np.ndarray:
    """Modal assurance criterion matrix between two mode-shape sets.

    MAC_ij = |phi_ai . phi_bj|^2 / ((phi_ai . phi_ai)(phi_bj . phi_bj)),
    the correlation coefficient of Allemang & Brown (1982). Entries lie
    in [0, 1] and are invariant to per-column scaling of either input.
    """
    A = np.asarray(shapes_a, dtype=float)
    B = np.asarray(shapes_b, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[0] != B.shape[0]:
        raise ValueError("mode-shape sets must share observed coordinates")
    na = np.sum(A * A, axis=0)
    nb = np.sum(B * B, axis=0)
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise ValueError("zero-norm mode shape")
    cross = A.T @ B
    return cross**2 / np.outer(na, nb)


def cost(calc: ModalData, measured: ModalData, weights: CostWeights,
         pairing: np.ndarray | None = None) -> float:
    """Modal-distance error between paired calculated and measured modes.

    E = sum_i gamma_i ((w_i^m - w_i^calc) / w_i^m)^2
        + beta * sum_i (1 - diag(MAC)_i)

    Without a pairing, calc and measured are compared mode-for-mode and
    must have equal mode counts. A pairing (one calc column index per
    measured mode, e.g. from pair_modes) selects calc modes instead; it
    may reorder modes, as happens when mode crossings swap the spectrum.
    """
    if pairing is None:
        if calc.n_modes != measured.n_modes:
            raise ValueError("mode counts must match (pair modes first)")
        pairing = np.arange(measured.n_modes)
    else:
        pairing = np.asarray(pairing, dtype=int)
        if pairing.size != measured.n_modes:
            raise ValueError("need one paired calc mode per measured mode")
    if calc.mode_shapes.shape[0] != measured.mode_shapes.shape[0]:
        raise ValueError("mode shapes must share observed coordinates")
    if weights.gamma.size != measured.n_modes:
        raise ValueError("need one gamma weight per mode")
    if np.any(measured.frequencies == 0.0):
        raise ValueError("measured frequencies must be non-zero")
    rel = (measured.frequencies - calc.frequencies[pairing]) / measured.frequencies
    mac_diag = np.diag(mac(calc.mode_shapes[:, pairing], measured.mode_shapes))
    return float(np.sum(weights.gamma * rel**2) + weights.beta * np.sum(1.0 - mac_diag))


def pair_modes(calc: ModalData, measured: ModalData) -> np.ndarray:
    """Greedy MAC-maximizing assignment of calculated modes to measured ones.

    Each measured mode, in order, takes the unused calculated elastic mode
    with the highest MAC. Rigid-body modes never participate. Returns the
    selected calc-mode indices, one per measured mode.
    """
    elastic_idx = np.flatnonzero(~calc.rigid)
    if elastic_idx.size < measured.n_modes:
        raise ValueError(
            f"{elastic_idx.size} elastic calculated modes cannot cover "
            f"{measured.n_modes} measured modes")
    m = mac(calc.mode_shapes[:, elastic_idx], measured.mode_shapes)
    used = np.zeros(elastic_idx.size, dtype=bool)
    pairing = np.empty(measured.n_modes, dtype=int)
    for j in range(measured.n_modes):
        col = np.where(used, -1.0, m[:, j])
        i = int(np.argmax(col))
        used[i] = True
        pairing[j] = elastic_idx[i]
        if m[i, j] < 0.5:
            log.warning("measured mode %d paired with MAC %.3f < 0.5", j, m[i, j])
    return pairing


def frf_inertance(modal: ModalData, k: int, l: int, freq_grid: np.ndarray) -> np.ndarray:
    """Inertance FRF H_kl(omega) by modal summation.

    H_kl(w) = sum_i -w^2 phi_k^i phi_l^i / (w_i^2 - w^2 + 2j zeta_i w_i w)

    Grid points landing exactly on an undamped resonance are singular;
    they are returned as NaN and reported through a warning.
    """
    n_coords = modal.mode_shapes.shape[0]
    if not (0 <= k < n_coords and 0 <= l < n_coords):
        raise ValueError("excitation/response coordinates out of range")
    w = np.atleast_1d(np.asarray(freq_grid, dtype=float))
    wi = modal.frequencies[:, None]
    zi = modal.damping_ratios[:, None]
    num = -w[None, :]**2 * (modal.mode_shapes[k, :] * modal.mode_shapes[l, :])[:, None]
    den = wi**2 - w[None, :]**2 + 2j * zi * wi * w[None, :]
    singular = den == 0.0
    if np.any(singular):
        pts = w[np.any(singular, axis=0)]
        warnings.warn(
            f"FRF grid hits {pts.size} undamped resonance point(s), e.g. "
            f"omega = {pts[0]:.6g} rad/s; returned as NaN", RuntimeWarning)
        den = np.where(singular, np.nan, den)
    with np.errstate(invalid="ignore"):
        return np.sum(num / den, axis=0)
