"""
CP^(N-1) sigma model: projectors, the Veronese chain and its invariants.

The chain is generated from a holomorphic polynomial seed f0(z) by

    f_{k+1} = |f_k|² ∂f_k − (f_k† ∂f_k) f_k,

which is (I − P_k)∂f_k up to a scalar factor, so P_{k+1} = Π₊(P_k) with the
raising operator Π₊(P) = ∂P·P·∂̄P / tr(∂P·P·∂̄P) (∂ = ½(∂x − i∂y)). The
lowering operator pairs the derivatives the other way round. This pairing
gives Π₊(P₀) = P₁ and Π₋(P₀) = 0 for the CP¹ seed f0 = (1, z).
"""

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from scipy import integrate

from soliton_surfaces import config
from soliton_surfaces.diffops import X, Y, Z, FieldSampler, scalar_field
from soliton_surfaces.errors import (
    ChainLengthError,
    ContractViolationError,
    IntegrationError,
    NearDegenerateError,
)
from soliton_surfaces.matrixcore import frobenius, is_rank_one_projector, trace
from soliton_surfaces.utils.app_logger import get_logger

logger = get_logger("cpn_model")

Seed = Tuple[Tuple[complex, ...], ...]

# Sample points used to detect an identically vanishing chain vector.
_CHECK_POINTS = ((0.3, -0.7), (1.1, 0.4), (-0.6, 1.9), (2.3, -1.2))


class ProjectorSource(enum.Enum):
    FROM_VECTOR = "from_vector"
    FROM_RAISING = "from_raising"
    FROM_LOWERING = "from_lowering"


@dataclass(frozen=True)
class Projector:
    """A rank-one Hermitian projector at one point."""

    matrix: np.ndarray
    source: ProjectorSource

    def __post_init__(self):
        _, passed = is_rank_one_projector(self.matrix, config.PROJECTOR_TOL * 10)
        if not passed:
            raise ContractViolationError("matrix is not a rank-one Hermitian projector")


@dataclass(frozen=True)
class ProjectorChain:
    """P_0 ... P_{N-1} built from one holomorphic seed."""

    N: int
    members: Tuple[FieldSampler, ...]
    seed: Seed

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, k: int) -> FieldSampler:
        return self.members[k]

    def check_index(self, k: int) -> None:
        if not 0 <= k < self.N:
            raise ContractViolationError(f"chain index k={k} outside 0..{self.N - 1}")

    def at(self, x, y) -> np.ndarray:
        """Stacked members at points, shape (N, ..., N, N)."""
        return np.stack([p(x, y) for p in self.members])


@dataclass(frozen=True)
class ThetaField:
    """θ = i(P − I/N)."""

    theta: FieldSampler

    @property
    def N(self) -> int:
        return self.theta.dim


def projector_from_vector(f) -> Projector:
    """
    P = f⊗f† / f†f.

    Raises:
        ContractViolationError: f is the zero vector
    """
    v = np.asarray(f, dtype=complex).reshape(-1)
    norm2 = float(np.vdot(v, v).real)
    if norm2 == 0.0:
        raise ContractViolationError("cannot build a projector from the zero vector")
    return Projector(np.outer(v, np.conj(v)) / norm2, ProjectorSource.FROM_VECTOR)


def veronese_seed(N: int) -> Seed:
    """f0 = (1, √C(N−1,1) z, ..., z^{N−1}) as coefficient lists."""
    seed = []
    for j in range(N):
        coeffs = [0.0] * j + [float(np.sqrt(float(sp.binomial(N - 1, j))))]
        seed.append(tuple(coeffs))
    return tuple(seed)


def _exact_number(c) -> sp.Expr:
    c = complex(c)
    return sp.nsimplify(c.real, rational=True) + sp.I * sp.nsimplify(c.imag, rational=True)


def _seed_component(coeffs: Sequence[complex], j: int, N: int) -> sp.Expr:
    if N > 2 and coeffs == veronese_seed(N)[j]:
        # keep the binomial weights exact
        return sp.sqrt(sp.binomial(N - 1, j)) * Z**j
    terms = [_exact_number(c) * Z**p for p, c in enumerate(coeffs)]
    return sp.Add(*terms)


def _vector_field(f: sp.Matrix, label: str) -> FieldSampler:
    n = f.shape[0]
    norm2 = sp.expand(sum(f[i] * sp.conjugate(f[i]) for i in range(n)))
    entries = [[sp.expand(f[i] * sp.conjugate(f[j])) / norm2 for j in range(n)] for i in range(n)]
    return FieldSampler.from_expr(entries, label, simplify=True)


def _is_identically_zero(vec: sp.Matrix) -> bool:
    if all(sp.expand(c) == 0 for c in vec):
        return True
    evaluate = sp.lambdify((X, Y), list(vec), modules="numpy")
    for x, y in _CHECK_POINTS:
        if np.linalg.norm(np.asarray(evaluate(x, y), dtype=complex)) > 1e-10:
            return False
    return True


def _wirtinger_d(expr: sp.Expr) -> sp.Expr:
    return (sp.diff(expr, X) - sp.I * sp.diff(expr, Y)) / 2


@lru_cache(maxsize=None)
def _build_chain(N: int, seed: Seed) -> ProjectorChain:
    f = sp.Matrix([_seed_component(c, j, N) for j, c in enumerate(seed)])
    members = []
    for k in range(N):
        if _is_identically_zero(f):
            raise ChainLengthError(k, N)
        members.append(_vector_field(f, f"P{k}"))
        if k == N - 1:
            break
        df = f.applyfunc(_wirtinger_d)
        norm2 = sum(f[i] * sp.conjugate(f[i]) for i in range(N))
        overlap = sum(sp.conjugate(f[i]) * df[i] for i in range(N))
        f = (norm2 * df - overlap * f).applyfunc(sp.expand)
    logger.info("built projector chain N=%d from seed %s", N, seed)
    return ProjectorChain(N, tuple(members), seed)


def veronese_chain(N: int = 2, seed: Optional[Sequence[Sequence[complex]]] = None) -> ProjectorChain:
    """
    Projector chain generated from a holomorphic polynomial seed.

    Args:
        N: model size (N ≥ 2)
        seed: one coefficient list per component, ascending powers of z;
            defaults to the Veronese curve, (1, z) for N = 2

    Raises:
        ContractViolationError: N < 2 or seed of the wrong length
        ChainLengthError: the chain terminates before P_{N-1}

    Example:
        >>> chain = veronese_chain(2)
        >>> chain[0](1.0, 1.0)   # P0 at z = 1 + i
    """
    if N < 2:
        raise ContractViolationError(f"N must be at least 2, got {N}")
    if seed is None:
        seed = veronese_seed(N)
    seed = tuple(tuple(complex(c) if np.iscomplexobj(c) else float(c) for c in comp) for comp in seed)
    if len(seed) != N:
        raise ContractViolationError(f"seed has {len(seed)} components, expected {N}")
    return _build_chain(N, seed)


def _ladder(p: FieldSampler, x: float, y: float, raising: bool) -> np.ndarray:
    P = p(x, y)
    dP, dbP = p.d()(x, y), p.dbar()(x, y)
    numerator = dP @ P @ dbP if raising else dbP @ P @ dP
    num_norm = float(frobenius(numerator))
    if num_norm < config.RAISING_ZERO_TOL:
        return np.zeros_like(P)
    tr = complex(trace(numerator))
    if abs(tr) < config.RAISING_ZERO_TOL:
        raise NearDegenerateError(abs(tr), num_norm, (x, y))
    return numerator / tr


def raising(p: FieldSampler, x: float, y: float) -> np.ndarray:
    """Π₊(P) = ∂P·P·∂̄P / tr(∂P·P·∂̄P); zero matrix when the numerator vanishes."""
    return _ladder(p, x, y, raising=True)


def lowering(p: FieldSampler, x: float, y: float) -> np.ndarray:
    """Π₋(P) = ∂̄P·P·∂P / tr(∂̄P·P·∂P); zero matrix when the numerator vanishes."""
    return _ladder(p, x, y, raising=False)


def raising_theta(theta: ThetaField, x: float, y: float) -> np.ndarray:
    """∂θ(I/N − iθ)∂̄θ / tr(...), the raising operator written with θ."""
    th = theta.theta
    E = np.eye(th.dim) / th.dim
    numerator = th.d()(x, y) @ (E - 1j * th(x, y)) @ th.dbar()(x, y)
    num_norm = float(frobenius(numerator))
    if num_norm < config.RAISING_ZERO_TOL:
        return np.zeros_like(numerator)
    tr = complex(trace(numerator))
    if abs(tr) < config.RAISING_ZERO_TOL:
        raise NearDegenerateError(abs(tr), num_norm, (x, y))
    return numerator / tr


def ladder_residual(chain: ProjectorChain, x: float, y: float) -> float:
    """max over k of ‖Π₊(P_k) − P_{k+1}‖ and ‖Π₋(P_k) − P_{k−1}‖ (zero at the ends)."""
    worst = 0.0
    for k, p in enumerate(chain.members):
        up = chain[k + 1](x, y) if k + 1 < chain.N else np.zeros((chain.N, chain.N))
        down = chain[k - 1](x, y) if k > 0 else np.zeros((chain.N, chain.N))
        worst = max(worst, float(frobenius(raising(p, x, y) - up)))
        worst = max(worst, float(frobenius(lowering(p, x, y) - down)))
    return worst


def chain_identity_residual(chain: ProjectorChain, x, y) -> np.ndarray:
    """Pointwise max of ‖P_jP_k − δ_jk P_j‖ and ‖ΣP_j − I‖."""
    mats = chain.at(x, y)
    worst = frobenius(mats.sum(axis=0) - np.eye(chain.N))
    for j in range(chain.N):
        for k in range(chain.N):
            target = mats[j] if j == k else 0.0
            worst = np.maximum(worst, frobenius(mats[j] @ mats[k] - target))
    return worst


@lru_cache(maxsize=None)
def el_field(p: FieldSampler) -> FieldSampler:
    """∂[∂̄P,P] + ∂̄[∂P,P] as a field."""
    return p.dbar().bracket(p).d() + p.d().bracket(p).dbar()


def el_residual(p: FieldSampler, x, y) -> np.ndarray:
    """Frobenius norm of ∂[∂̄P,P] + ∂̄[∂P,P]."""
    return frobenius(el_field(p)(x, y))


@lru_cache(maxsize=None)
def gwfi(chain: ProjectorChain, k: int) -> FieldSampler:
    """
    Integrated Weierstrass immersion F_k = −i(P_k + 2Σ_{j<k}P_j) + i(1+2k)/N·I.

    Satisfies ∂F_k = −i[∂P_k,P_k] and ∂̄F_k = i[∂̄P_k,P_k].
    """
    chain.check_index(k)
    acc = chain[k]
    for j in range(k):
        acc = acc + chain[j].scale(2)
    field = acc.scale(-sp.I) + scalar_field(sp.I * sp.Rational(1 + 2 * k, chain.N), chain.N)
    field.label = f"F{k}"
    return field


def gwfi_derivative_residual(chain: ProjectorChain, k: int, x, y) -> np.ndarray:
    """max(‖∂F_k + i[∂P_k,P_k]‖, ‖∂̄F_k − i[∂̄P_k,P_k]‖)."""
    F, P = gwfi(chain, k), chain[k]
    r1 = frobenius(F.d()(x, y) + 1j * P.d().bracket(P)(x, y))
    r2 = frobenius(F.dbar()(x, y) - 1j * P.dbar().bracket(P)(x, y))
    return np.maximum(r1, r2)


def algebraic_conditions_residual(
    chain: ProjectorChain, x, y, fields: Optional[Sequence[np.ndarray]] = None
) -> np.ndarray:
    """
    Residual of the polynomial identities satisfied by the GWFI surfaces.

    With c_k = (1+2k)/N, X_k = F_k − i c_k I = −i(P_k + 2Σ_{j<k}P_j):
      k = 0:        (F₀ − ic₀I)(F₀ − i(c₀−1)I) = 0
      k = N−1:      (F − i(c−1)I)(F − i(c−2)I) = 0
      0 < k < N−1:  (F − ic I)(F − i(c−1)I)(F − i(c−2)I) = 0
    and the alternating sum Σ(−1)^j F_j = 0.
    ``fields`` replaces the computed F_k values (negative controls).
    """
    N = chain.N
    if fields is None:
        fields = [gwfi(chain, k)(x, y) for k in range(N)]
    eye = np.eye(N)
    worst = None
    for k, F in enumerate(fields):
        c = (1 + 2 * k) / N
        a = F - 1j * c * eye
        if k == 0:
            expr = a @ (F - 1j * (c - 1) * eye)
        elif k == N - 1:
            expr = (F - 1j * (c - 1) * eye) @ (F - 1j * (c - 2) * eye)
        else:
            expr = a @ (F - 1j * (c - 1) * eye) @ (F - 1j * (c - 2) * eye)
        r = frobenius(expr)
        worst = r if worst is None else np.maximum(worst, r)
    alternating = sum((-1) ** j * F for j, F in enumerate(fields))
    worst = np.maximum(worst, frobenius(alternating))
    return worst


@lru_cache(maxsize=None)
def theta_of(p: FieldSampler) -> ThetaField:
    N = p.dim
    theta = (p - scalar_field(sp.Rational(1, N), N)).scale(sp.I)
    theta.label = f"theta({p.label})"
    return ThetaField(theta)


def theta_constraint_residual(theta: ThetaField, x, y) -> np.ndarray:
    """‖θ² + i(2−N)/N·θ − (1−N)/N²·I‖."""
    N = theta.N
    th = theta.theta(x, y)
    expr = th @ th + 1j * (2 - N) / N * th - (1 - N) / N**2 * np.eye(N)
    return frobenius(expr)


def theta_el_residual(theta: ThetaField, x, y) -> np.ndarray:
    """‖[(∂x² + ∂y²)θ, θ]‖."""
    th = theta.theta
    lap = th.partial("x").partial("x") + th.partial("y").partial("y")
    return frobenius(lap.bracket(th)(x, y))


@lru_cache(maxsize=None)
def _euler_integrand(p: FieldSampler):
    """∂∂̄ ln tr(∂P·∂̄P) = ¼Δ ln T, with T the trace, as numpy callables."""
    dP, dbP = p.d(), p.dbar()
    T = sp.cancel(sp.expand((dP @ dbP).expr.trace()))
    Tx, Ty = sp.diff(T, X), sp.diff(T, Y)
    lap = sp.diff(Tx, X) + sp.diff(Ty, Y)
    density = sp.cancel((lap * T - Tx**2 - Ty**2) / 4)
    trace_fn = sp.lambdify((X, Y), T, modules="numpy")
    numer_fn = sp.lambdify((X, Y), density, modules="numpy")
    return trace_fn, numer_fn


def euler_characteristic(p: FieldSampler, radius: float = 50.0, n: int = 2000) -> float:
    """
    χ = (−1/π)∬ ∂∂̄ ln tr(∂P·∂̄P) dx dy over the disk |z| ≤ radius.

    Tensor grid in polar coordinates: Simpson in r (n intervals), periodic
    trapezoid in the angle (n nodes). The missing tail outside the disk is
    O(1/radius²) for the Veronese density.

    Raises:
        IntegrationError: the trace drops below the integrand floor
    """
    if radius <= 0 or n < 4:
        raise ContractViolationError("euler_characteristic needs radius > 0 and n >= 4")
    if not p.exact:
        raise ContractViolationError("euler_characteristic needs an exact projector field")
    trace_fn, density_fn = _euler_integrand(p)
    r = np.linspace(0.0, radius, n + 1)
    phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    R, PHI = np.meshgrid(r, phi, indexing="ij")
    xs, ys = R * np.cos(PHI), R * np.sin(PHI)
    with np.errstate(divide="ignore", invalid="ignore"):
        T = np.real(np.broadcast_to(np.asarray(trace_fn(xs, ys), dtype=complex), xs.shape))
        density = np.real(np.broadcast_to(np.asarray(density_fn(xs, ys), dtype=complex), xs.shape))
    if np.any(~np.isfinite(T)) or np.any(T <= config.INTEGRAND_FLOOR):
        idx = np.argwhere(~np.isfinite(T) | (T <= config.INTEGRAND_FLOOR))[0]
        raise IntegrationError(
            "tr(dP dbarP) vanishes", (float(xs[tuple(idx)]), float(ys[tuple(idx)]))
        )
    # ∂∂̄ ln T = (TΔT − |∇T|²) / (4T²)
    integrand = density / T**2 * R
    angular = integrand.sum(axis=1) * (2 * np.pi / n)
    total = integrate.simpson(angular, x=r)
    chi = -total / np.pi
    logger.debug("euler characteristic of %s on radius %g, n=%d: %.12f", p.label, radius, n, chi)
    return float(chi)
