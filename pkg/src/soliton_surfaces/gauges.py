"""
Gauges S conjugated by Φ into surfaces, the symmetries they come from, and
the matrices M relating the ST and FG descriptions of one surface.

Every symmetry is carried by a :class:`SymmetryAction`: its gauge S, its
action on Φ and its characteristics A_α (Wirtinger-indexed, like the
potentials). On a solution of the LSP these satisfy

    D_αS + [S, U_α] = A_α,      action(Φ) = S·Φ.
"""

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
import sympy as sp

from soliton_surfaces import config
from soliton_surfaces.cpn_model import ProjectorChain
from soliton_surfaces.diffops import Z, ZBAR, FieldSampler
from soliton_surfaces.errors import ContractViolationError, MappingUndefinedError
from soliton_surfaces.linear_spectral import (
    PotentialPair,
    Wavefunction,
    deformed_zcc_residual,
    potentials,
    wavefunction,
)
from soliton_surfaces.matrixcore import frobenius, trace
from soliton_surfaces.utils.app_logger import get_logger

logger = get_logger("gauges")

# β(λ) in F = βΦ⁻¹D_λΦ; β = i makes the ST surface su(N)-valued on λ = it
DEFAULT_SPECTRAL_WEIGHT = 1j
DEFAULT_CONFORMAL_CONSTANT = 1 + 1j


class Family(enum.Enum):
    ST = "st"
    CD = "cd"
    G_SCALING = "g"
    C_CONFORMAL = "c"
    FG_GENERALIZED = "fg"
    GWFI = "gwfi"
    COMBINED = "combined"


class MappingDirection(enum.Enum):
    FG_TO_ST = "fg_to_st"
    ST_TO_FG = "st_to_fg"


@dataclass(frozen=True)
class GaugeField:
    S: FieldSampler
    family: Family
    k: int = 0

    def __call__(self, x, y, t=0.0) -> np.ndarray:
        return self.S(x, y, t)


@dataclass(frozen=True)
class SymmetryAction:
    """
    One symmetry of the ZCC realised on the CP^(N-1) fixtures.

    Attributes:
        gauge: S with action(Φ) = S·Φ
        characteristics: (A₁, A₂) in the coordinates of ``potentials``
        act: pr ω applied to a matrix field (Φ or any of its derivatives)
        potentials: the pair the characteristics refer to
    """

    gauge: GaugeField
    characteristics: Tuple[FieldSampler, FieldSampler]
    act: Callable[[FieldSampler], FieldSampler]
    potentials: PotentialPair

    @property
    def family(self) -> Family:
        return self.gauge.family


def _as_sympy(value: complex) -> sp.Expr:
    value = complex(value)
    return sp.nsimplify(value.real, rational=True) + sp.I * sp.nsimplify(value.imag, rational=True)


def _pair(chain: ProjectorChain, k: int, U: Optional[PotentialPair]) -> PotentialPair:
    if U is None:
        return potentials(chain, k)
    return U


def spectral_weight_expr(beta) -> sp.Expr:
    return sp.sympify(beta) if isinstance(beta, sp.Expr) else _as_sympy(beta)


@lru_cache(maxsize=None)
def st_action(
    chain: ProjectorChain,
    k: int,
    beta=DEFAULT_SPECTRAL_WEIGHT,
    normalization: str = "su",
) -> SymmetryAction:
    """λ-conformal (Sym-Tafel) symmetry: S = β(D_λΦ)Φ⁻¹, A_α = βD_λU_α."""
    psi = wavefunction(chain, k, normalization)
    U = potentials(chain, k)
    b = spectral_weight_expr(beta)
    S = (psi.phi.d_lambda() @ psi.phi_inv).scale(b)
    S.label = f"S{k}^ST"
    A = tuple(Ua.d_lambda().scale(b) for Ua in U)
    return SymmetryAction(
        GaugeField(S, Family.ST, k), A, lambda f: f.d_lambda().scale(b), U
    )


@lru_cache(maxsize=None)
def scaling_action(chain: ProjectorChain, k: int, U: PotentialPair = None) -> SymmetryAction:
    """Scaling symmetry: S = zU₁ + z̄U₂, action (z∂ + z̄∂̄)."""
    U = _pair(chain, k, U)
    U1, U2 = U
    S = U1.scale(Z) + U2.scale(ZBAR)
    S.label = f"S{k}^g"
    A1 = U1.scale(Z).d() + U1.dbar().scale(ZBAR)
    A2 = U2.d().scale(Z) + U2.scale(ZBAR).dbar()

    def act(f: FieldSampler) -> FieldSampler:
        return f.d().scale(Z) + f.dbar().scale(ZBAR)

    return SymmetryAction(GaugeField(S, Family.G_SCALING, k), (A1, A2), act, U)


@lru_cache(maxsize=None)
def conformal_action(
    chain: ProjectorChain, k: int, g: complex = DEFAULT_CONFORMAL_CONSTANT, U: PotentialPair = None
) -> SymmetryAction:
    """Conformal symmetry with constant g: S = −(gU₁ + ḡU₂), action −(g∂ + ḡ∂̄)."""
    U = _pair(chain, k, U)
    ge = _as_sympy(g)
    gb = sp.conjugate(ge)

    def act(f: FieldSampler) -> FieldSampler:
        return -(f.d().scale(ge) + f.dbar().scale(gb))

    U1, U2 = U
    S = -(U1.scale(ge) + U2.scale(gb))
    S.label = f"S{k}^c"
    return SymmetryAction(GaugeField(S, Family.C_CONFORMAL, k), (act(U1), act(U2)), act, U)


@lru_cache(maxsize=None)
def generalized_action(chain: ProjectorChain, k: int, U: PotentialPair = None) -> SymmetryAction:
    """
    Generalized symmetry: S = ∂U₁ + ∂̄U₂, action (∂² + ∂̄²), and

        A_α = (∂² + ∂̄²)U_α + [∂U_α, U₁] + [∂̄U_α, U₂].
    """
    U = _pair(chain, k, U)
    U1, U2 = U
    S = U1.d() + U2.dbar()
    S.label = f"S{k}^FG"

    def act(f: FieldSampler) -> FieldSampler:
        return f.d().d() + f.dbar().dbar()

    A = tuple(act(Ua) + Ua.d().bracket(U1) + Ua.dbar().bracket(U2) for Ua in U)
    return SymmetryAction(GaugeField(S, Family.FG_GENERALIZED, k), A, act, U)


def printed_generalized_characteristics(U: PotentialPair) -> Tuple[FieldSampler, FieldSampler]:
    """(∂² + ∂̄²)U_α + [∂U_α,U_α] + [∂̄U_α,U_α], the tangent form as usually printed."""
    return tuple(
        Ua.d().d() + Ua.dbar().dbar() + Ua.d().bracket(Ua) + Ua.dbar().bracket(Ua) for Ua in U
    )


def gauge_st(chain: ProjectorChain, k: int, beta=DEFAULT_SPECTRAL_WEIGHT, normalization: str = "su") -> GaugeField:
    return st_action(chain, k, beta, normalization).gauge


def gauge_g(chain: ProjectorChain, k: int) -> GaugeField:
    return scaling_action(chain, k).gauge


def gauge_c(chain: ProjectorChain, k: int, g: complex = DEFAULT_CONFORMAL_CONSTANT) -> GaugeField:
    return conformal_action(chain, k, g).gauge


def gauge_fg(chain: ProjectorChain, k: int) -> GaugeField:
    return generalized_action(chain, k).gauge


def gauge_invariants(gauge: GaugeField, x, y, t) -> Tuple[np.ndarray, np.ndarray]:
    """(|tr S|, |det S|) at points."""
    S = gauge(x, y, t)
    return np.abs(trace(S)), np.abs(np.linalg.det(S))


def _worst(values):
    out = None
    for v in values:
        out = v if out is None else np.maximum(out, v)
    return out


def prop1_residual(
    gauge: GaugeField, U: PotentialPair, x, y, t, beta=DEFAULT_SPECTRAL_WEIGHT
) -> np.ndarray:
    """max over α of ‖D_αS + [S,U_α] − βD_λU_α‖."""
    b = complex(beta)
    S = gauge.S
    return _worst(
        frobenius(
            U.D(S, alpha)(x, y, t)
            + S.bracket(Ua)(x, y, t)
            - b * Ua.d_lambda()(x, y, t)
        )
        for alpha, Ua in enumerate(U, start=1)
    )


def prop2_residual(
    gauge: GaugeField, U: PotentialPair, A: Tuple[FieldSampler, FieldSampler], x, y, t
) -> np.ndarray:
    """max over α of ‖D_αS + [S,U_α] − A_α‖."""
    S = gauge.S
    return _worst(
        frobenius(U.D(S, alpha)(x, y, t) + S.bracket(Ua)(x, y, t) - Aa(x, y, t))
        for alpha, (Ua, Aa) in enumerate(zip(U, A), start=1)
    )


def induced_characteristics(gauge: GaugeField, U: PotentialPair) -> Tuple[FieldSampler, FieldSampler]:
    """A_α = D_αS + [S,U_α]."""
    return tuple(U.D(gauge.S, alpha) + gauge.S.bracket(Ua) for alpha, Ua in enumerate(U, start=1))


def compatibility_residual(gauge: GaugeField, U: PotentialPair, x, y, t) -> np.ndarray:
    """Deformed ZCC of the characteristics induced by S; zero by the ZCC and Jacobi."""
    A1, A2 = induced_characteristics(gauge, U)
    return deformed_zcc_residual(A1, A2, U, x, y, t)


def linearization_residual(action: SymmetryAction, psi: Wavefunction, x, y, t) -> np.ndarray:
    """‖action(Φ) − S·Φ‖."""
    lhs = action.act(psi.phi)(x, y, t)
    return frobenius(lhs - action.gauge(x, y, t) @ psi.phi(x, y, t))


@dataclass(frozen=True)
class MappingMatrix:
    M: np.ndarray
    direction: MappingDirection

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.M)


def mapping_m(
    S1: GaugeField,
    S2: GaugeField,
    x: float,
    y: float,
    t: float,
    direction: MappingDirection = MappingDirection.FG_TO_ST,
) -> MappingMatrix:
    """
    M = S₁S₂⁻¹ (FG to ST) or M⁻¹ = S₂S₁⁻¹ (ST to FG) at one point.

    Raises:
        MappingUndefinedError: the gauge being inverted is singular
    """
    a, b = S1(x, y, t), S2(x, y, t)
    if direction is MappingDirection.ST_TO_FG:
        a, b = b, a
    det = complex(np.linalg.det(b))
    if abs(det) <= config.GAUGE_DET_TOL:
        raise MappingUndefinedError(abs(det), (x, y, t))
    return MappingMatrix(a @ np.linalg.inv(b), direction)


def mapping_consistency(
    st: SymmetryAction, fg: SymmetryAction, psi: Wavefunction, x: float, y: float, t: float
) -> Tuple[float, float]:
    """(‖S₁ − M·S₂‖, ‖βD_λΦ − M·S₂·Φ‖) for M = S₁S₂⁻¹."""
    M = mapping_m(st.gauge, fg.gauge, x, y, t).M
    S1, S2 = st.gauge(x, y, t), fg.gauge(x, y, t)
    phi = psi.phi(x, y, t)
    lhs = st.act(psi.phi)(x, y, t)
    return float(frobenius(S1 - M @ S2)), float(frobenius(lhs - M @ S2 @ phi))


def mixed_equation_residual(
    st: SymmetryAction, fg: SymmetryAction, psi: Wavefunction, x, y, t
) -> np.ndarray:
    """
    Norm of the wavefunction equation obtained by eliminating S₂:

        β(D_λΦ)U_α − βΦU_αΦ⁻¹(D_λΦ) + β(D_λU_α)Φ
            + Φ[−pr ω(D_αΦ) + U_α(pr ω Φ)]Φ⁻¹,

    maximised over α.
    """
    U = st.potentials
    phi, inv = psi.phi(x, y, t), psi.phi_inv(x, y, t)
    bdphi = st.act(psi.phi)(x, y, t)
    omega_phi = fg.act(psi.phi)(x, y, t)
    out = []
    for alpha, (Ua, Aa) in enumerate(zip(U, st.characteristics), start=1):
        u = Ua(x, y, t)
        omega_dphi = fg.act(U.D(psi.phi, alpha))(x, y, t)
        expr = (
            bdphi @ u
            - phi @ u @ inv @ bdphi
            + Aa(x, y, t) @ phi
            + phi @ (-omega_dphi + u @ omega_phi) @ inv
        )
        out.append(frobenius(expr))
    return _worst(out)


def action_for(family: Family, chain: ProjectorChain, k: int, **options) -> SymmetryAction:
    """Symmetry action of a gauge family by tag."""
    if family is Family.ST:
        return st_action(chain, k, **options)
    if family is Family.G_SCALING:
        return scaling_action(chain, k)
    if family is Family.C_CONFORMAL:
        return conformal_action(chain, k, **options)
    if family is Family.FG_GENERALIZED:
        return generalized_action(chain, k)
    raise ContractViolationError(f"no symmetry action for family {family.value!r}")
