"""
Linear spectral problem of the CP^(N-1) model.

Potentials are indexed by the Wirtinger pair, D₁ = ∂ and D₂ = ∂̄:

    U₁ = 2/(1+λ)·[∂P_k, P_k],   U₂ = 2/(1−λ)·[∂̄P_k, P_k],

and the soliton wavefunction Φ_k solves D_αΦ = U_αΦ. The spectral
parameter runs over the line λ = it and stays symbolic in every field, so
d/dλ is exact.
"""

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from soliton_surfaces.cpn_model import ProjectorChain, ThetaField, theta_of
from soliton_surfaces.diffops import LAMBDA, T, FieldSampler
from soliton_surfaces.errors import ContractViolationError, SingularParameterError
from soliton_surfaces.matrixcore import frobenius
from soliton_surfaces.utils.app_logger import get_logger

logger = get_logger("linear_spectral")

NORMALIZATIONS = ("closed", "su", "row")


class Coordinates(enum.Enum):
    WIRTINGER = "wirtinger"
    REAL = "real"


@dataclass(frozen=True)
class PotentialPair:
    """(U₁, U₂) with the coordinates their derivative operators refer to."""

    U1: FieldSampler
    U2: FieldSampler
    coords: Coordinates = Coordinates.WIRTINGER

    @property
    def N(self) -> int:
        return self.U1.dim

    def __iter__(self):
        return iter((self.U1, self.U2))

    def D(self, field: FieldSampler, alpha: int) -> FieldSampler:
        """D_α of a field in this pair's coordinates."""
        return derivative(field, alpha, self.coords)

    def to_real(self) -> "PotentialPair":
        """(U_x, U_y) = (U₁ + U₂, i(U₁ − U₂)); identity on real pairs."""
        if self.coords is Coordinates.REAL:
            return self
        return PotentialPair(
            self.U1 + self.U2, (self.U1 - self.U2).scale(sp.I), Coordinates.REAL
        )

    def at(self, x, y, t=0.0) -> Tuple[np.ndarray, np.ndarray]:
        return self.U1(x, y, t), self.U2(x, y, t)

    @classmethod
    def zero(cls, N: int, coords: Coordinates = Coordinates.WIRTINGER) -> "PotentialPair":
        return cls(FieldSampler.zero(N), FieldSampler.zero(N), coords)


@dataclass(frozen=True)
class Wavefunction:
    phi: FieldSampler
    phi_inv: FieldSampler
    k: int = 0
    normalization: str = "closed"

    @property
    def N(self) -> int:
        return self.phi.dim

    @classmethod
    def identity(cls, N: int) -> "Wavefunction":
        eye = FieldSampler.identity(N)
        return cls(eye, eye, k=-1, normalization="identity")


def derivative(field: FieldSampler, alpha: int, coords: Coordinates) -> FieldSampler:
    if alpha not in (1, 2):
        raise ContractViolationError(f"derivative index must be 1 or 2, got {alpha}")
    if coords is Coordinates.WIRTINGER:
        return field.d() if alpha == 1 else field.dbar()
    return field.partial("x" if alpha == 1 else "y")


def _spectral(lam: Optional[complex]) -> sp.Expr:
    if lam is None:
        return LAMBDA
    lam = complex(lam)
    if abs(lam * lam - 1.0) < 1e-15:
        raise SingularParameterError(lam)
    return sp.nsimplify(lam.real, rational=True) + sp.I * sp.nsimplify(lam.imag, rational=True)


@lru_cache(maxsize=None)
def potentials(chain: ProjectorChain, k: int, lam: Optional[complex] = None) -> PotentialPair:
    """
    LSP potentials of chain member k.

    ``lam=None`` keeps λ = it symbolic; a complex value freezes λ.

    Raises:
        SingularParameterError: λ = ±1
    """
    chain.check_index(k)
    lam_expr = _spectral(lam)
    P = chain[k]
    U1 = P.d().bracket(P).scale(2 / (1 + lam_expr))
    U2 = P.dbar().bracket(P).scale(2 / (1 - lam_expr))
    U1.label, U2.label = f"U1_{k}", f"U2_{k}"
    return PotentialPair(U1, U2, Coordinates.WIRTINGER)


@lru_cache(maxsize=None)
def potentials_theta(theta: ThetaField, lam: Optional[complex] = None) -> PotentialPair:
    """
    Real-coordinate potentials written with θ:

        U₁ = −2/(1−λ²)·([∂xθ,θ] − iλ[∂yθ,θ]),
        U₂ = −2/(1−λ²)·(iλ[∂xθ,θ] + [∂yθ,θ]).

    Raises:
        SingularParameterError: λ² = 1
    """
    lam_expr = _spectral(lam)
    th = theta.theta
    cx = th.partial("x").bracket(th)
    cy = th.partial("y").bracket(th)
    pref = -2 / (1 - lam_expr**2)
    U1 = (cx - cy.scale(sp.I * lam_expr)).scale(pref)
    U2 = (cx.scale(sp.I * lam_expr) + cy).scale(pref)
    U1.label, U2.label = "U1_theta", "U2_theta"
    return PotentialPair(U1, U2, Coordinates.REAL)


@dataclass(frozen=True)
class PotentialRelation:
    """Outcome of comparing the θ potentials with the projector potentials."""

    same_lambda: float
    reflected_lambda: float

    @property
    def relation(self) -> str:
        if self.reflected_lambda < 1e-9 <= self.same_lambda:
            return "theta(λ) = real(projector(−λ))"
        if self.same_lambda < 1e-9:
            return "theta(λ) = real(projector(λ))"
        return "no linear relation found"


def compare_potential_constructions(
    chain: ProjectorChain, k: int, points: Sequence[Tuple[float, float, float]]
) -> PotentialRelation:
    """Max deviation of the θ potentials from the real form of the projector potentials at λ and −λ."""
    bb = potentials_theta(theta_of(chain[k]))
    real = potentials(chain, k).to_real()
    same = reflected = 0.0
    for x, y, t in points:
        b1, b2 = bb.at(x, y, t)
        r1, r2 = real.at(x, y, t)
        m1, m2 = real.at(x, y, -t)
        same = max(same, float(frobenius(b1 - r1)), float(frobenius(b2 - r2)))
        reflected = max(reflected, float(frobenius(b1 - m1)), float(frobenius(b2 - m2)))
    outcome = PotentialRelation(same, reflected)
    logger.info(
        "potential constructions for k=%d: %s (same %.3e, reflected %.3e)",
        k, outcome.relation, same, reflected,
    )
    return outcome


def _closed_form(chain: ProjectorChain, k: int, sign: int) -> FieldSampler:
    # sign=+1 gives Φ_k, sign=-1 its inverse (λ -> -λ)
    lam = sign * LAMBDA
    N = chain.N
    acc = FieldSampler.identity(N) + chain[k].scale(-2 / (1 - lam))
    if k:
        lower = chain[0]
        for j in range(1, k):
            lower = lower + chain[j]
        acc = acc + lower.scale(4 * lam / (1 - lam) ** 2)
    return acc


def wavefunction_determinant(k: int) -> sp.Expr:
    """det Φ_k = −((1+λ)/(1−λ))^(2k+1) for the closed form."""
    return -(((1 + LAMBDA) / (1 - LAMBDA)) ** (2 * k + 1))


@lru_cache(maxsize=None)
def wavefunction(chain: ProjectorChain, k: int, normalization: str = "closed") -> Wavefunction:
    """
    Soliton wavefunction Φ_k = I + 4λ/(1−λ)²·Σ_{j<k}P_j − 2/(1−λ)·P_k.

    normalization:
        "closed": the formula above, Φ⁻¹ = Φ(−λ);
        "su": times exp(−i(π + 2(2k+1)·arctan t)/N), unit determinant;
        "row": diag(1/det Φ_k, 1, …, 1)·Φ_k, the constant gauge of the
            printed CP¹ wavefunctions (not a solution of the LSP).
    """
    chain.check_index(k)
    if normalization not in NORMALIZATIONS:
        raise ContractViolationError(f"unknown normalization {normalization!r}")
    phi, phi_inv = _closed_form(chain, k, 1), _closed_form(chain, k, -1)
    N = chain.N
    if normalization == "su":
        s = sp.exp(-sp.I * (sp.pi + 2 * (2 * k + 1) * sp.atan(T)) / N)
        phi, phi_inv = phi.scale(s), phi_inv.scale(1 / s)
    elif normalization == "row":
        det = wavefunction_determinant(k)
        row = sp.diag(1 / det, *([1] * (N - 1)))
        row_inv = sp.diag(det, *([1] * (N - 1)))
        phi = FieldSampler.from_expr(row, "row", simplify=True) @ phi
        phi_inv = phi_inv @ FieldSampler.from_expr(row_inv, "row^-1", simplify=True)
    phi.label, phi_inv.label = f"Phi{k}", f"Phi{k}^-1"
    return Wavefunction(phi, phi_inv, k, normalization)


def wavefunction_invariants(psi: Wavefunction, x, y, t) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(‖ΦΦ⁻¹ − I‖, ‖Φ†Φ − (Φ†Φ)₁₁I‖, det Φ) at points."""
    phi = psi.phi(x, y, t)
    inv = psi.phi_inv(x, y, t)
    eye = np.eye(psi.N)
    gram = np.conj(np.swapaxes(phi, -1, -2)) @ phi
    unitary = frobenius(gram - gram[..., :1, :1] * eye)
    return frobenius(phi @ inv - eye), unitary, np.linalg.det(phi)


def lsp_residual(psi: Wavefunction, U: PotentialPair, x, y, t=0.0) -> np.ndarray:
    """max over α of ‖D_αΦ − U_αΦ‖."""
    phi = psi.phi(x, y, t)
    worst = None
    for alpha, Ua in enumerate(U, start=1):
        r = frobenius(U.D(psi.phi, alpha)(x, y, t) - Ua(x, y, t) @ phi)
        worst = r if worst is None else np.maximum(worst, r)
    return worst


@lru_cache(maxsize=None)
def zcc_field(U: PotentialPair) -> FieldSampler:
    """D₂U₁ − D₁U₂ + [U₁,U₂]."""
    return U.D(U.U1, 2) - U.D(U.U2, 1) + U.U1.bracket(U.U2)


def zcc_residual(U: PotentialPair, x, y, t=0.0) -> np.ndarray:
    return frobenius(zcc_field(U)(x, y, t))


def deformed_zcc_residual(
    A1: FieldSampler, A2: FieldSampler, U: PotentialPair, x, y, t=0.0
) -> np.ndarray:
    """‖D₂A₁ − D₁A₂ + [A₁,U₂] + [U₁,A₂]‖."""
    expr = U.D(A1, 2) - U.D(A2, 1) + A1.bracket(U.U2) + U.U1.bracket(A2)
    return frobenius(expr(x, y, t))


def perturbed_potentials(U: PotentialPair, dt: float) -> PotentialPair:
    """Shift λ in U₁ only; used as a negative control for the ZCC."""
    return PotentialPair(U.U1.shift_t(dt), U.U2, U.coords)
