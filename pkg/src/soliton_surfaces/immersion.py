"""
Immersions F = Φ⁻¹(βD_λΦ + SΦ + pr ω Φ) of 2D surfaces in su(N), their
tangent frames and curvatures.

Each :class:`ImmersionField` keeps the data its geometry is computed from:
the wavefunction Φ, the potentials U_α and the characteristics A_α with
D_αF = Φ⁻¹A_αΦ. Frames and fundamental forms are always taken in the real
coordinates (x, y), converting Wirtinger-indexed data with

    A_x = A₁ + A₂,   A_y = i(A₁ − A₂).
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import sympy as sp

from soliton_surfaces import config
from soliton_surfaces.cpn_model import ProjectorChain, gwfi
from soliton_surfaces.diffops import X, Y, FieldSampler, map_chunks
from soliton_surfaces.errors import (
    ContractViolationError,
    FrameDegeneracyError,
    MetricDegeneracyError,
    NotInAlgebraError,
    SphereFitError,
)
from soliton_surfaces.gauges import (
    DEFAULT_CONFORMAL_CONSTANT,
    DEFAULT_SPECTRAL_WEIGHT,
    Family,
    GaugeField,
    SymmetryAction,
    conformal_action,
    generalized_action,
    induced_characteristics,
    scaling_action,
    spectral_weight_expr,
    st_action,
)
from soliton_surfaces.linear_spectral import (
    Coordinates,
    PotentialPair,
    Wavefunction,
    potentials,
    wavefunction,
)
from soliton_surfaces.matrixcore import (
    algebra_residuals,
    frobenius,
    inner,
    su_basis,
    su_project,
    trace_product,
)
from soliton_surfaces.utils.app_logger import get_logger

logger = get_logger("immersion")

# Points where gauges are checked for su(N) membership; away from z = 0 and |z| = 1.
_CHECK_POINTS = ((0.37, -0.61, 0.5), (1.3, 0.45, 1.0), (-0.8, 1.7, 0.25))


@dataclass(frozen=True)
class ImmersionField:
    """
    Surface F(x, y) at spectral parameter t, with its tangent data.

    Attributes:
        F: the immersion, su(N)-valued
        family: which formula produced it
        k: chain index (−1 for synthetic surfaces)
        psi: wavefunction conjugating the tangents
        U: potentials (Wirtinger or real, see ``U.coords``)
        A: characteristics, D_αF = Φ⁻¹A_αΦ in the coordinates of U
        parts: active parts of a combined field
    """

    F: FieldSampler
    family: Family
    k: int
    psi: Wavefunction
    U: PotentialPair
    A: Tuple[FieldSampler, FieldSampler]
    parts: Tuple[Family, ...] = field(default=())

    @property
    def N(self) -> int:
        return self.F.dim

    def __call__(self, x, y, t=0.0) -> np.ndarray:
        return self.F(x, y, t)

    def components(self, x, y, t=0.0) -> np.ndarray:
        """Coordinates in the su(N) basis, shape (..., N²−1)."""
        return su_project(self.F(x, y, t), su_basis(self.N))

    def shifted(self, constant) -> "ImmersionField":
        """F + C for a constant su(N) matrix C; the tangent data is unchanged."""
        C = FieldSampler.constant(constant, "C")
        return ImmersionField(self.F + C, self.family, self.k, self.psi, self.U, self.A, self.parts)

    @cached_property
    def real_data(self) -> Tuple[FieldSampler, FieldSampler, FieldSampler, FieldSampler]:
        """(A_x, A_y, U_x, U_y)."""
        A1, A2 = self.A
        if self.U.coords is Coordinates.REAL:
            return A1, A2, self.U.U1, self.U.U2
        real_u = self.U.to_real()
        return A1 + A2, (A1 - A2).scale(sp.I), real_u.U1, real_u.U2


@dataclass(frozen=True)
class FrameData:
    """
    Tangent frame at points, in real coordinates.

    A1, A2 are the unconjugated tangents, T1, T2 = Φ⁻¹A_αΦ, ``normal`` the
    conjugated unit normal; g and b have shape (..., 2, 2). Entries at
    irregular points (``regular`` False) are NaN.
    """

    A1: np.ndarray
    A2: np.ndarray
    T1: np.ndarray
    T2: np.ndarray
    normal: np.ndarray
    g: np.ndarray
    b: np.ndarray
    epsilon: int
    regular: np.ndarray
    orientation: int = 1

    def flipped(self) -> "FrameData":
        return FrameData(
            self.A1, self.A2, self.T1, self.T2, -self.normal, self.g, -self.b,
            self.epsilon, self.regular, -self.orientation,
        )


@dataclass(frozen=True)
class CurvaturePair:
    """K and H (sum of principal curvatures), with the literal two-trace formulas alongside."""

    K: np.ndarray
    H: np.ndarray
    K_literal: np.ndarray
    H_literal: np.ndarray

    def principal_gap(self) -> np.ndarray:
        """H² − 4K, non-negative up to rounding."""
        return self.H**2 - 4 * self.K


@dataclass(frozen=True)
class SphereFit:
    center: np.ndarray
    radius: float
    max_residual: float


def _check_algebra(S: FieldSampler) -> None:
    for x, y, t in _CHECK_POINTS:
        value = S.evaluate(x, y, t, strict=False)
        if not np.isfinite(value).all():
            continue
        herm, tr = algebra_residuals(value)
        scale = max(1.0, float(frobenius(value)))
        if herm > config.ALGEBRA_TOL * scale or tr > config.ALGEBRA_TOL * scale:
            raise NotInAlgebraError(float(herm), float(tr), config.ALGEBRA_TOL)


def _conjugate(psi: Wavefunction, middle: FieldSampler) -> FieldSampler:
    return psi.phi_inv @ middle @ psi.phi


def immersion_cd(
    psi: Wavefunction,
    S,
    U: Optional[PotentialPair] = None,
    A: Optional[Tuple[FieldSampler, FieldSampler]] = None,
    family: Family = Family.CD,
    k: int = 0,
) -> ImmersionField:
    """
    CD formula F = Φ⁻¹SΦ.

    Args:
        psi: wavefunction solving the LSP of ``U``
        S: gauge, a GaugeField or an su(N)-valued FieldSampler
        U: potentials; zero Wirtinger potentials by default
        A: characteristics; D_αS + [S,U_α] by default

    Raises:
        NotInAlgebraError: S is not su(N)-valued
    """
    gauge = S if isinstance(S, GaugeField) else GaugeField(S, family, k)
    _check_algebra(gauge.S)
    if U is None:
        U = PotentialPair.zero(psi.N)
    if A is None:
        A = induced_characteristics(gauge, U)
    F = _conjugate(psi, gauge.S)
    F.label = f"F{k}^{family.value}"
    return ImmersionField(F, family, k, psi, U, tuple(A))


def _from_action(action: SymmetryAction, psi: Wavefunction, k: int) -> ImmersionField:
    return immersion_cd(psi, action.gauge, action.potentials, action.characteristics, action.family, k)


@lru_cache(maxsize=None)
def immersion_st(
    chain: ProjectorChain,
    k: int,
    beta=DEFAULT_SPECTRAL_WEIGHT,
    normalization: str = "su",
) -> ImmersionField:
    """
    ST formula F = βΦ⁻¹D_λΦ, differentiating the closed-form Φ in t.

    With β = i this is Φ⁻¹dΦ/dt. ``normalization="row"`` gives the gauge in
    which the usual CP¹ tables are printed; that Φ does not solve the LSP,
    so only "su" and "closed" carry consistent tangent data.
    """
    action = st_action(chain, k, beta, normalization)
    psi = wavefunction(chain, k, normalization)
    F = psi.phi_inv @ action.act(psi.phi)
    F.label = f"F{k}^ST"
    return ImmersionField(F, Family.ST, k, psi, action.potentials, action.characteristics)


@lru_cache(maxsize=None)
def immersion_g(chain: ProjectorChain, k: int) -> ImmersionField:
    """F^g = Φ⁻¹(zU₁ + z̄U₂)Φ, from the scaling symmetry."""
    return _from_action(scaling_action(chain, k), wavefunction(chain, k), k)


@lru_cache(maxsize=None)
def immersion_c(
    chain: ProjectorChain, k: int, g: complex = DEFAULT_CONFORMAL_CONSTANT
) -> ImmersionField:
    """F^c = −Φ⁻¹(gU₁ + ḡU₂)Φ; g = −1 gives Φ⁻¹(U₁ + U₂)Φ."""
    return _from_action(conformal_action(chain, k, g), wavefunction(chain, k), k)


@lru_cache(maxsize=None)
def immersion_fg(chain: ProjectorChain, k: int) -> ImmersionField:
    """F^FG = Φ⁻¹(∂U₁ + ∂̄U₂)Φ, from the generalized symmetry."""
    return _from_action(generalized_action(chain, k), wavefunction(chain, k), k)


@lru_cache(maxsize=None)
def immersion_gwfi(chain: ProjectorChain, k: int) -> ImmersionField:
    """
    F_k of the integrated Weierstrass formula, with the trivial pair Φ = I,
    U = 0 and A₁ = −i[∂P_k,P_k], A₂ = i[∂̄P_k,P_k].
    """
    P = chain[k]
    A = (P.d().bracket(P).scale(-sp.I), P.dbar().bracket(P).scale(sp.I))
    return ImmersionField(
        gwfi(chain, k), Family.GWFI, k, Wavefunction.identity(chain.N),
        PotentialPair.zero(chain.N), A,
    )


def st_cd_fg_master(
    chain: ProjectorChain,
    k: int,
    beta=0,
    S: Optional[GaugeField] = None,
    omega: Optional[SymmetryAction] = None,
) -> ImmersionField:
    """
    F = Φ⁻¹(βD_λΦ + SΦ + pr ω Φ) with the SU(N)-normalised Φ_k.

    Tangent characteristics add up: A_α = βD_λU_α + D_αS + [S,U_α] + A_α^ω.
    With one active part the family is that part's; otherwise COMBINED.
    """
    psi = wavefunction(chain, k, "su")
    U = potentials(chain, k)
    N = chain.N
    middle = FieldSampler.zero(N)
    A = [FieldSampler.zero(N), FieldSampler.zero(N)]
    parts = []
    b = spectral_weight_expr(beta)
    if b != 0:
        middle = middle + psi.phi.d_lambda().scale(b)
        A = [a + Ua.d_lambda().scale(b) for a, Ua in zip(A, U)]
        parts.append(Family.ST)
    if S is not None:
        middle = middle + S.S @ psi.phi
        A = [a + s for a, s in zip(A, induced_characteristics(S, U))]
        parts.append(Family.CD)
    if omega is not None:
        middle = middle + omega.act(psi.phi)
        A = [a + w for a, w in zip(A, omega.characteristics)]
        parts.append(omega.family)
    if not parts:
        raise ContractViolationError("st_cd_fg_master needs at least one active part")
    F = psi.phi_inv @ middle
    F.label = f"F{k}^" + "+".join(p.value for p in parts)
    family = parts[0] if len(parts) == 1 else Family.COMBINED
    return ImmersionField(F, family, k, psi, U, tuple(A), tuple(parts))


def synthetic_sphere(radius: float, center: Sequence[float] = (0.0, 0.0, 0.0)) -> ImmersionField:
    """
    Round sphere r·(sin x cos y, sin x sin y, cos x) + c in su(2), as a CD
    immersion with Φ = I and zero real potentials.
    """
    r = sp.nsimplify(radius)
    coords = (sp.sin(X) * sp.cos(Y), sp.sin(X) * sp.sin(Y), sp.cos(X))
    S = FieldSampler.zero(2)
    for a, e in enumerate(su_basis(2).elements):
        S = S + FieldSampler.constant(e, f"e{a + 1}").scale(r * coords[a] + sp.nsimplify(center[a]))
    S.label = "sphere"
    psi = Wavefunction.identity(2)
    return immersion_cd(psi, S, PotentialPair.zero(2, Coordinates.REAL), family=Family.CD, k=-1)


def frame(
    field_: ImmersionField,
    x,
    y,
    t=0.0,
    epsilon: int = -1,
    orientation: int = 1,
    strict: bool = True,
) -> FrameData:
    """
    Tangents, unit normal and fundamental forms at points.

        g_ij = (ε/2)tr(A_iA_j),   b_ij = (ε/2)tr((D_jA_i + [A_i,U_j])n),
        n = [A_x,A_y] / ‖[A_x,A_y]‖,  ‖X‖² = −½tr(X²).

    Raises:
        FrameDegeneracyError: strict and ‖[A_x,A_y]‖ ≤ 1e−10 at some point
    """
    if epsilon not in (-1, 1):
        raise ContractViolationError(f"epsilon must be ±1, got {epsilon}")
    Ax_f, Ay_f, Ux_f, Uy_f = field_.real_data
    Ax, Ay = Ax_f(x, y, t), Ay_f(x, y, t)
    Ux, Uy = Ux_f(x, y, t), Uy_f(x, y, t)
    C = Ax @ Ay - Ay @ Ax
    size = frobenius(C)
    regular = size > config.FRAME_DEGENERACY_TOL
    if strict and not np.all(regular):
        bad = np.argwhere(~np.asarray(regular))
        idx = tuple(bad[0]) if bad.size else ()
        xb, yb = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        raise FrameDegeneracyError(float(np.asarray(size)[idx]), (float(xb[idx]), float(yb[idx])))
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.sqrt(np.abs(inner(C, C)))
        n = orientation * C / np.where(regular, norm, np.nan)[..., None, None]
    tangents = (Ax, Ay)
    grads = ((Ax_f.partial("x"), Ax_f.partial("y")), (Ay_f.partial("x"), Ay_f.partial("y")))
    potentials_ = (Ux, Uy)
    half = epsilon / 2.0
    g = np.empty(np.shape(size) + (2, 2))
    b = np.empty(np.shape(size) + (2, 2))
    for i in range(2):
        for j in range(2):
            g[..., i, j] = half * trace_product(tangents[i], tangents[j]).real
            Ai = tangents[i]
            B = grads[i][j](x, y, t) + Ai @ potentials_[j] - potentials_[j] @ Ai
            b[..., i, j] = half * trace_product(B, n).real
    phi, inv = field_.psi.phi(x, y, t), field_.psi.phi_inv(x, y, t)
    return FrameData(
        A1=Ax,
        A2=Ay,
        T1=inv @ Ax @ phi,
        T2=inv @ Ay @ phi,
        normal=inv @ n @ phi,
        g=g,
        b=b,
        epsilon=epsilon,
        regular=np.asarray(regular),
        orientation=orientation,
    )


def curvatures(frame_: FrameData, strict: bool = True) -> CurvaturePair:
    """
    K = det b / det g and H = (g₂₂b₁₁ − 2g₁₂b₁₂ + g₁₁b₂₂) / det g.

    The literal two-trace expressions are evaluated from the same forms using
    tr(A_iA_j) = (2/ε)g_ij and tr(B_ij n) = (2/ε)b_ij:

        Δ = tr(A₁²)tr(A₂²) − 4tr(A₁A₂),
        H_lit = (tr(A₂²)tr(B₁₁n) − 8tr(A₁A₂)tr(B₁₂n) + tr(A₁²)tr(B₂₂n)) / Δ,
        K_lit = (tr(B₁₁n)tr(B₂₂n) − 2tr²(B₁₂n)) / Δ.

    Raises:
        MetricDegeneracyError: strict and det g ≤ 1e−12 at a regular point
    """
    g, b = frame_.g, frame_.b
    det_g = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    bad = frame_.regular & ~(det_g > config.METRIC_DEGENERACY_TOL)
    if strict and np.any(bad):
        raise MetricDegeneracyError(float(np.min(det_g[bad])))
    with np.errstate(divide="ignore", invalid="ignore"):
        det_b = b[..., 0, 0] * b[..., 1, 1] - b[..., 0, 1] ** 2
        K = det_b / det_g
        H = (g[..., 1, 1] * b[..., 0, 0] - 2 * g[..., 0, 1] * b[..., 0, 1] + g[..., 0, 0] * b[..., 1, 1]) / det_g
        s = 2.0 / frame_.epsilon
        tg, tb = s * g, s * b
        delta = tg[..., 0, 0] * tg[..., 1, 1] - 4 * tg[..., 0, 1]
        H_lit = (tg[..., 1, 1] * tb[..., 0, 0] - 8 * tg[..., 0, 1] * tb[..., 0, 1] + tg[..., 0, 0] * tb[..., 1, 1]) / delta
        K_lit = (tb[..., 0, 0] * tb[..., 1, 1] - 2 * tb[..., 0, 1] ** 2) / delta
    mask = frame_.regular & ~bad
    nan = np.nan
    return CurvaturePair(
        np.where(mask, K, nan), np.where(mask, H, nan),
        np.where(mask, K_lit, nan), np.where(mask, H_lit, nan),
    )


def oriented_frame(field_: ImmersionField, x, y, t=0.0, epsilon: int = -1) -> FrameData:
    """Frame with the normal oriented so that H ≥ 0 at the first regular point."""
    fr = frame(field_, x, y, t, epsilon, strict=False)
    regular = np.ravel(fr.regular)
    if not regular.any():
        return fr
    first = int(np.argmax(regular))
    H = np.ravel(curvatures(fr, strict=False).H)[first]
    if H < 0:
        logger.debug("normal of %s flipped at point %d", field_.F.label, first)
        return fr.flipped()
    return fr


def curvature_sweep(field_: ImmersionField, grid, t: float = config.DEFAULT_T, epsilon: int = -1) -> pd.DataFrame:
    """
    K, H and their literal counterparts over a grid.

    Args:
        grid: a GridSpec (anything with ``mesh()`` returning x, y arrays)

    Returns:
        DataFrame with columns x, y, K, H, K_literal, H_literal, regular;
        ``attrs`` holds the orientation and the number of excluded points.
    """
    gx, gy = grid.mesh()
    xs, ys = np.ravel(gx), np.ravel(gy)

    def forms(xc, yc):
        fr = frame(field_, xc, yc, t, epsilon, strict=False)
        return fr.g, fr.b, fr.regular

    g, b, regular = map_chunks(forms, xs, ys)
    fr = FrameData(None, None, None, None, None, g, b, epsilon, regular)
    orientation = 1
    if regular.any():
        first = int(np.argmax(regular))
        if curvatures(fr, strict=False).H[first] < 0:
            fr, orientation = fr.flipped(), -1
    curv = curvatures(fr, strict=False)
    excluded = int(np.count_nonzero(~regular))
    if excluded:
        logger.info("%s: %d of %d grid points have degenerate frames", field_.F.label, excluded, len(xs))
    df = pd.DataFrame(
        {
            "x": xs,
            "y": ys,
            "K": curv.K,
            "H": curv.H,
            "K_literal": curv.K_literal,
            "H_literal": curv.H_literal,
            "regular": regular,
        }
    )
    df.attrs["orientation"] = orientation
    df.attrs["excluded"] = excluded
    return df


def curvature_summary(df: pd.DataFrame) -> pd.DataFrame:
    """mean/std/min/max of K and H over regular points."""
    return df.loc[df["regular"], ["K", "H", "K_literal", "H_literal"]].agg(["mean", "std", "min", "max"])


def tangent_residual(field_: ImmersionField, x, y, t=0.0) -> np.ndarray:
    """max over α of ‖D_αF − Φ⁻¹A_αΦ‖, D_αF by exact differentiation of F."""
    phi, inv = field_.psi.phi(x, y, t), field_.psi.phi_inv(x, y, t)
    worst = None
    for alpha, Aa in enumerate(field_.A, start=1):
        r = frobenius(field_.U.D(field_.F, alpha)(x, y, t) - inv @ Aa(x, y, t) @ phi)
        worst = r if worst is None else np.maximum(worst, r)
    return worst


def psi_deformation_residual(
    field_: ImmersionField,
    x,
    y,
    t=0.0,
    A: Optional[Tuple[FieldSampler, FieldSampler]] = None,
) -> np.ndarray:
    """max over α of ‖D_α(ΦF) − U_αΦF − A_αΦ‖ with Ψ = ΦF."""
    A = field_.A if A is None else A
    Psi = field_.psi.phi @ field_.F
    psi_v, phi = Psi(x, y, t), field_.psi.phi(x, y, t)
    worst = None
    for alpha, (Ua, Aa) in enumerate(zip(field_.U, A), start=1):
        r = frobenius(field_.U.D(Psi, alpha)(x, y, t) - Ua(x, y, t) @ psi_v - Aa(x, y, t) @ phi)
        worst = r if worst is None else np.maximum(worst, r)
    return worst


def sphere_fit(samples) -> SphereFit:
    """
    Least-squares sphere through points of R³.

    Solves [2x 2y 2z 1]·(c, d) = x² + y² + z², r² = d + |c|².

    Raises:
        SphereFitError: fewer than 4 points, or coplanar samples
    """
    pts = np.asarray(samples, dtype=float).reshape(-1, 3)
    pts = pts[np.isfinite(pts).all(axis=1)]
    if len(pts) < 4:
        raise SphereFitError(f"sphere fit needs at least 4 points, got {len(pts)}")
    spread = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
    if spread[0] == 0.0 or spread[-1] / spread[0] < 1e-10:
        raise SphereFitError("samples are coplanar")
    design = np.column_stack([2 * pts, np.ones(len(pts))])
    rhs = np.sum(pts**2, axis=1)
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    center = sol[:3]
    radius = float(np.sqrt(sol[3] + center @ center))
    residual = float(np.max(np.abs(np.linalg.norm(pts - center, axis=1) - radius)))
    logger.debug("sphere fit: center %s radius %.12g residual %.3e", center, radius, residual)
    return SphereFit(center, radius, residual)


def sphere_identity_residual(F, center, radius: float) -> np.ndarray:
    """‖(F − C)² + r²I‖ for su(2) values F and C = Σc_a e_a."""
    F = np.asarray(F, dtype=complex)
    C = su_basis(2).reconstruct(center)
    D = F - C
    return frobenius(D @ D + radius**2 * np.eye(2))
