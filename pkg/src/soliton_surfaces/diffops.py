"""
Matrix-valued fields over (x, y, t) and their derivatives.

A :class:`FieldSampler` is either *exact* (a sympy matrix in the real symbols
x, y, t, differentiated symbolically and evaluated through ``lambdify``) or
*numeric-only* (a vectorised callable, differentiated by 4th-order central
differences). Arithmetic between samplers stays exact when both operands are
exact, so every fixture of the CP^(N-1) model is differentiated exactly; the
numeric path exists as an independent oracle (see :meth:`FieldSampler.numeric`).

Conventions:
    z = x + iy, λ = it,
    ∂ = ½(∂x − i∂y), ∂̄ = ½(∂x + i∂y), d/dλ = −i d/dt.
"""

import math
import numbers
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Optional, Union

import numpy as np
import sympy as sp

from soliton_surfaces import config
from soliton_surfaces.errors import ContractViolationError, FieldEvaluationError
from soliton_surfaces.utils.app_logger import get_logger

logger = get_logger("diffops")

X, Y, T = sp.symbols("x y t", real=True)
Z = X + sp.I * Y
ZBAR = X - sp.I * Y
LAMBDA = sp.I * T

_SYMBOLS = {"x": X, "y": Y, "t": T}

EXACT_ORDER = math.inf

Scalar = Union[numbers.Number, sp.Expr]
NumericFunc = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SpectralPoint:
    """A point λ = it on the imaginary spectral axis."""

    t: float

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError(f"spectral parameter t must be finite, got {self.t}")

    @property
    def lam(self) -> complex:
        return 1j * self.t


def _broadcast(x, y, t):
    return np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(t, dtype=float)
    )


# Symbolic work is keyed by the expression itself, so a field rebuilt from
# the same pieces (a residual evaluated point by point, a gauge rebuilt per
# check) reuses its cancelled form, its derivatives and its compiled evaluator.
_EXPR_CACHE_SIZE = 4096


@lru_cache(maxsize=_EXPR_CACHE_SIZE)
def _cancelled(expr: sp.ImmutableMatrix) -> sp.ImmutableMatrix:
    return sp.ImmutableMatrix(expr.applyfunc(sp.cancel))


@lru_cache(maxsize=_EXPR_CACHE_SIZE)
def _derivative(expr: sp.ImmutableMatrix, var: str) -> sp.ImmutableMatrix:
    return sp.ImmutableMatrix(expr.diff(_SYMBOLS[var]))


def expression_cache_info() -> dict:
    """Hit/miss counters of the symbolic caches."""
    return {
        "cancel": _cancelled.cache_info(),
        "derivative": _derivative.cache_info(),
        "compile": _compile_matrix.cache_info(),
    }


@lru_cache(maxsize=_EXPR_CACHE_SIZE)
def _compile_matrix(expr: sp.ImmutableMatrix) -> NumericFunc:
    n = expr.shape[0]
    entries = list(expr)
    fn = sp.lambdify((X, Y, T), entries, modules="numpy", cse=True)

    def evaluate(x, y, t):
        out = np.empty(x.shape + (n, n), dtype=complex)
        for idx, value in enumerate(fn(x, y, t)):
            out[..., idx // n, idx % n] = value
        return out

    return evaluate


def _compile_scalar(expr) -> NumericFunc:
    fn = sp.lambdify((X, Y, T), sp.sympify(expr), modules="numpy")

    def evaluate(x, y, t):
        return np.broadcast_to(np.asarray(fn(x, y, t), dtype=complex), x.shape)

    return evaluate


def _step(var: str, x, y, t, rel_step: float) -> np.ndarray:
    if var == "t":
        return rel_step * np.maximum(1.0, np.abs(t))
    return rel_step * np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))


def _shifted(func: NumericFunc, var: str, x, y, t, offset):
    if var == "x":
        return func(x + offset, y, t)
    if var == "y":
        return func(x, y + offset, t)
    return func(x, y, t + offset)


def _stencil(func: NumericFunc, var: str, x, y, t, h) -> np.ndarray:
    hh = np.asarray(h)[..., None, None]
    return (
        _shifted(func, var, x, y, t, -2 * h)
        - 8 * _shifted(func, var, x, y, t, -h)
        + 8 * _shifted(func, var, x, y, t, h)
        - _shifted(func, var, x, y, t, 2 * h)
    ) / (12 * hh)


def _central_difference(func: NumericFunc, var: str, rel_step: float) -> NumericFunc:
    def derivative(x, y, t):
        h = _step(var, x, y, t, rel_step)
        return _stencil(func, var, x, y, t, h)

    return derivative


class FieldSampler:
    """
    Pure map (x, y, t) -> N×N complex matrix.

    Args:
        dim: matrix size N
        expr: sympy matrix in x, y, t (exact sampler)
        func: vectorised callable (numeric-only sampler)
        label: name used in diagnostics
        simplify: cancel rational expressions after every exact algebraic
            operation; derivatives are kept as differentiated and cancelled
            by the next operation that combines them
    """

    def __init__(
        self,
        dim: int,
        expr: Optional[sp.ImmutableMatrix] = None,
        func: Optional[NumericFunc] = None,
        label: str = "field",
        simplify: bool = False,
        rel_step: float = config.FD_RELATIVE_STEP,
    ):
        if (expr is None) == (func is None):
            raise ContractViolationError("a field needs exactly one of expr or func")
        if simplify and expr is not None:
            expr = _cancelled(expr)
        self.dim = dim
        self.expr = expr
        self._func = func
        self.label = label
        self.simplify = simplify
        self.rel_step = rel_step
        self._derivatives = {}

    # -- construction -----------------------------------------------------
    @classmethod
    def from_expr(cls, matrix, label: str = "field", simplify: bool = False) -> "FieldSampler":
        expr = sp.ImmutableMatrix(matrix)
        if expr.shape[0] != expr.shape[1]:
            raise ContractViolationError(f"field must be square, got {expr.shape}")
        return cls(expr.shape[0], expr=expr, label=label, simplify=simplify)

    @classmethod
    def from_function(cls, func: NumericFunc, dim: int, label: str = "field") -> "FieldSampler":
        return cls(dim, func=func, label=label)

    @classmethod
    def constant(cls, matrix, label: str = "const") -> "FieldSampler":
        m = sp.Matrix(np.asarray(matrix, dtype=complex))
        return cls.from_expr(m.applyfunc(lambda v: sp.nsimplify(v, rational=True)), label, True)

    @classmethod
    def identity(cls, dim: int) -> "FieldSampler":
        return cls.from_expr(sp.eye(dim), f"I{dim}", simplify=True)

    @classmethod
    def zero(cls, dim: int) -> "FieldSampler":
        return cls.from_expr(sp.zeros(dim, dim), "0", simplify=True)

    @property
    def exact(self) -> bool:
        return self.expr is not None

    @cached_property
    def _evaluator(self) -> NumericFunc:
        if self.expr is not None:
            return _compile_matrix(self.expr)
        return self._func

    # -- evaluation -------------------------------------------------------
    def evaluate(self, x, y, t=0.0, strict: bool = True) -> np.ndarray:
        """Evaluate on points (scalars or broadcastable arrays)."""
        xb, yb, tb = _broadcast(x, y, t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self._evaluator(xb, yb, tb)
        if strict:
            bad = ~np.isfinite(out).all(axis=(-2, -1))
            if np.any(bad):
                idx = tuple(np.argwhere(bad)[0]) if bad.ndim else ()
                loc = (float(xb[idx]), float(yb[idx]), float(tb[idx]))
                raise FieldEvaluationError(self.label, loc)
        return out

    __call__ = evaluate

    def numeric(self) -> "FieldSampler":
        """Numeric-only twin: same values, derivatives by finite differences."""
        if not self.exact:
            return self
        source = self
        return FieldSampler.from_function(
            lambda x, y, t: source.evaluate(x, y, t, strict=False),
            self.dim,
            label=f"{self.label}~fd",
        )

    # -- derivatives ------------------------------------------------------
    def _derived(self, expr: sp.ImmutableMatrix, label: str) -> "FieldSampler":
        out = FieldSampler(self.dim, expr=expr, label=label)
        out.simplify = self.simplify
        return out

    def partial(self, var: str) -> "FieldSampler":
        """Derivative along ``"x"``, ``"y"`` or ``"t"``."""
        if var not in _SYMBOLS:
            raise ContractViolationError(f"unknown coordinate {var!r}")
        cached = self._derivatives.get(var)
        if cached is not None:
            return cached
        label = f"d{var}({self.label})"
        if self.exact:
            result = self._derived(_derivative(self.expr, var), label)
        else:
            result = FieldSampler.from_function(
                _central_difference(self._evaluator, var, self.rel_step), self.dim, label
            )
        self._derivatives[var] = result
        return result

    def _wirtinger(self, key: str, sign: int) -> "FieldSampler":
        cached = self._derivatives.get(key)
        if cached is not None:
            return cached
        label = f"{key}({self.label})"
        if self.exact:
            dx, dy = _derivative(self.expr, "x"), _derivative(self.expr, "y")
            cached = self._derived(sp.ImmutableMatrix((dx + sign * sp.I * dy) / 2), label)
        else:
            fx, fy = self.partial("x")._func, self.partial("y")._func
            cached = FieldSampler.from_function(
                lambda x, y, t: 0.5 * (fx(x, y, t) + sign * 1j * fy(x, y, t)), self.dim, label
            )
        self._derivatives[key] = cached
        return cached

    def d(self) -> "FieldSampler":
        """Wirtinger ∂ = ½(∂x − i∂y)."""
        return self._wirtinger("d", -1)

    def dbar(self) -> "FieldSampler":
        """Wirtinger ∂̄ = ½(∂x + i∂y)."""
        return self._wirtinger("dbar", 1)

    def d_lambda(self) -> "FieldSampler":
        """d/dλ = −i d/dt on the line λ = it."""
        out = self.partial("t").scale(-sp.I)
        out.label = f"dlam({self.label})"
        return out

    def shift_t(self, dt: float) -> "FieldSampler":
        if self.exact:
            return FieldSampler(
                self.dim,
                expr=self.expr.subs(T, T + sp.nsimplify(dt)),
                label=f"{self.label}[t+{dt}]",
                simplify=self.simplify,
            )
        f = self._evaluator
        return FieldSampler.from_function(
            lambda x, y, t: f(x, y, t + dt), self.dim, f"{self.label}[t+{dt}]"
        )

    # -- algebra ----------------------------------------------------------
    def _check(self, other: "FieldSampler") -> None:
        if not isinstance(other, FieldSampler):
            raise ContractViolationError(f"expected a FieldSampler, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ContractViolationError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def _values(self) -> NumericFunc:
        if self.exact:
            return self._evaluator
        return self._func

    def _combine(self, other, exact_op, numeric_op, label) -> "FieldSampler":
        self._check(other)
        if self.exact and other.exact:
            return FieldSampler(
                self.dim,
                expr=sp.ImmutableMatrix(exact_op(self.expr, other.expr)),
                label=label,
                simplify=self.simplify and other.simplify,
            )
        f, g = self._values(), other._values()
        return FieldSampler.from_function(
            lambda x, y, t: numeric_op(f(x, y, t), g(x, y, t)), self.dim, label
        )

    def __add__(self, other: "FieldSampler") -> "FieldSampler":
        return self._combine(other, lambda a, b: a + b, np.add, f"({self.label}+{other.label})")

    def __sub__(self, other: "FieldSampler") -> "FieldSampler":
        return self._combine(
            other, lambda a, b: a - b, np.subtract, f"({self.label}-{other.label})"
        )

    def __matmul__(self, other: "FieldSampler") -> "FieldSampler":
        return self._combine(other, lambda a, b: a * b, np.matmul, f"{self.label}{other.label}")

    def __neg__(self) -> "FieldSampler":
        return self.scale(-1)

    def bracket(self, other: "FieldSampler") -> "FieldSampler":
        """Commutator [self, other]."""
        return self._combine(
            other,
            lambda a, b: a * b - b * a,
            lambda a, b: a @ b - b @ a,
            f"[{self.label},{other.label}]",
        )

    def scale(self, coef: Scalar) -> "FieldSampler":
        """Multiply by a number or a scalar sympy expression in x, y, t."""
        coef = sp.sympify(coef)
        label = f"({coef})*{self.label}"
        if self.exact:
            return FieldSampler(
                self.dim, expr=sp.ImmutableMatrix(self.expr * coef), label=label,
                simplify=self.simplify,
            )
        f = self._func
        if coef.free_symbols:
            c = _compile_scalar(coef)
            return FieldSampler.from_function(
                lambda x, y, t: c(x, y, t)[..., None, None] * f(x, y, t), self.dim, label
            )
        value = complex(coef)
        return FieldSampler.from_function(lambda x, y, t: value * f(x, y, t), self.dim, label)

    def __mul__(self, coef: Scalar) -> "FieldSampler":
        return self.scale(coef)

    __rmul__ = __mul__

    def dagger(self) -> "FieldSampler":
        label = f"{self.label}^H"
        if self.exact:
            return FieldSampler(self.dim, expr=self.expr.H, label=label, simplify=self.simplify)
        f = self._func
        return FieldSampler.from_function(
            lambda x, y, t: np.conj(np.swapaxes(f(x, y, t), -1, -2)), self.dim, label
        )

    def __repr__(self) -> str:
        kind = "exact" if self.exact else "numeric"
        return f"FieldSampler({self.label!r}, N={self.dim}, {kind})"


def scalar_field(expr: Scalar, dim: int) -> FieldSampler:
    """expr·I as a field."""
    return FieldSampler.from_expr(sp.eye(dim) * sp.sympify(expr), f"{expr}I", simplify=True)


def partial_x(f: FieldSampler, x, y, t=0.0) -> np.ndarray:
    return f.partial("x")(x, y, t)


def partial_y(f: FieldSampler, x, y, t=0.0) -> np.ndarray:
    return f.partial("y")(x, y, t)


def wirtinger(f: FieldSampler, x, y, t=0.0):
    """(∂f, ∂̄f) at the given points."""
    return f.d()(x, y, t), f.dbar()(x, y, t)


def d_lambda(f: FieldSampler, x, y, at: SpectralPoint) -> np.ndarray:
    """dF/dλ = −i dF/dt at λ = it."""
    return f.d_lambda()(x, y, at.t)


def central_difference(f: FieldSampler, var: str, x, y, t, h) -> np.ndarray:
    """4th-order central difference of the sampled values with an explicit step."""
    xb, yb, tb = _broadcast(x, y, t)
    values = lambda a, b, c: f.evaluate(a, b, c, strict=False)  # noqa: E731
    return _stencil(values, var, xb, yb, tb, np.broadcast_to(np.asarray(h, float), xb.shape))


def convergence_order(
    f: FieldSampler, x: float, y: float, t: float = 0.0, var: str = "x", base_step: float = None
) -> float:
    """
    Observed order of the central-difference stencil at a point.

    Uses the exact derivative as reference when available, otherwise a
    three-step Richardson estimate on h, h/2, h/4. Returns EXACT_ORDER when
    the stencil error is already at rounding level.
    """
    if base_step is None:
        scale = abs(t) if var == "t" else max(abs(x), abs(y))
        base_step = 0.05 * max(1.0, scale)
    steps = [base_step, base_step / 2, base_step / 4]
    estimates = [central_difference(f, var, x, y, t, h) for h in steps]
    scale = max(1.0, float(np.max(np.abs(f.evaluate(x, y, t)))))
    floor = 1e-13 * scale
    if f.exact:
        reference = f.partial(var)(x, y, t)
        e1 = float(np.linalg.norm(estimates[0] - reference))
        e2 = float(np.linalg.norm(estimates[1] - reference))
    else:
        e1 = float(np.linalg.norm(estimates[0] - estimates[1]))
        e2 = float(np.linalg.norm(estimates[1] - estimates[2]))
    if e1 <= floor or e2 <= floor:
        return EXACT_ORDER
    return math.log2(e1 / e2)


def map_chunks(func: Callable, *arrays: np.ndarray, workers: int = None, chunk: int = 4096):
    """
    Apply ``func`` to aligned 1-D arrays in chunks on a thread pool and
    concatenate the results in index order.

    The first chunk runs on the calling thread so that lazily compiled
    evaluators are built once before the pool starts.
    """
    n = len(arrays[0])
    if n == 0:
        return func(*arrays)
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    workers = max(1, workers or config.THREADS)
    lo, hi = bounds[0]
    parts = [func(*(a[lo:hi] for a in arrays))]
    rest = bounds[1:]
    if workers == 1 or len(rest) <= 1:
        parts.extend(func(*(a[lo:hi] for a in arrays)) for lo, hi in rest)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts.extend(pool.map(lambda b: func(*(a[b[0]:b[1]] for a in arrays)), rest))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(p, axis=0) for p in zip(*parts))
    return np.concatenate(parts, axis=0)
