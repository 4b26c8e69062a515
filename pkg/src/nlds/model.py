"""Problem instances: the reaction nonlinearity f, the nonlocal diffusion law
a(l(.)), the initial history function phi, optional forcing h, and the
structural constants of the sign condition on u*f(u).

f, a, l and h come from small enumerated menus so that an experiment is
reproducible from its JSON config alone. A ProblemSpec is immutable after
validation and can be shared freely across workers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .grid import Grid, GridFunction

L_KINDS = {"l2_norm_sq": _kernels.L_L2_SQ, "h10_norm": _kernels.L_H10,
           "mean_integral": _kernels.L_MEAN}


@dataclass(frozen=True)
class Nonlinearity:
    """Reaction term f. Kinds: zero | linear (slope*u) | quadratic (u^2) |
    chafee_infante (u - u^3)."""

    kind: str = "zero"
    slope: float = 1.0

    _CODES = {"zero": _kernels.F_ZERO, "linear": _kernels.F_LINEAR,
              "quadratic": _kernels.F_QUADRATIC,
              "chafee_infante": _kernels.F_CHAFEE}

    def __post_init__(self):
        if self.kind not in self._CODES:
            raise ValueError(f"unknown f kind {self.kind!r}")

    @property
    def code(self) -> int:
        return self._CODES[self.kind]

    @property
    def param(self) -> float:
        return float(self.slope)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(u)
        if self.kind == "linear":
            return self.slope * u
        # overflow to inf is tolerated: eval_f reports non-finite output
        with np.errstate(over="ignore"):
            if self.kind == "quadratic":
                return u ** 2
            return u - u ** 3


@dataclass(frozen=True)
class DiffusionLaw:
    """Scalar diffusion law a(s) with range forced into [m, M] at evaluation.

    Kinds: constant (value) | inverse_decay (m + (M-m)/(1+max(s,0))) |
    affine (intercept + slope*s, which validate_spec will flag if it needs
    clamping on the sampled range).
    """

    kind: str = "constant"
    value: float = 1.0
    intercept: float = 1.0
    slope: float = 0.0

    _CODES = {"constant": _kernels.A_CONSTANT,
              "inverse_decay": _kernels.A_INVERSE_DECAY,
              "affine": _kernels.A_AFFINE}

    def __post_init__(self):
        if self.kind not in self._CODES:
            raise ValueError(f"unknown a kind {self.kind!r}")

    @property
    def code(self) -> int:
        return self._CODES[self.kind]

    @property
    def params(self) -> tuple[float, float]:
        if self.kind == "constant":
            return float(self.value), 0.0
        if self.kind == "affine":
            return float(self.intercept), float(self.slope)
        return 0.0, 0.0

    def raw(self, s, m: float, big_m: float):
        """Unclamped a(s); used by validate_spec to detect clamping."""
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.full_like(s, self.value)
        if self.kind == "inverse_decay":
            return m + (big_m - m) / (1.0 + np.maximum(s, 0.0))
        return self.intercept + self.slope * s


@dataclass(frozen=True)
class Forcing:
    """Bounded forcing h(tau, x). Kinds: zero | constant (value, uniform in x)."""

    kind: str = "zero"
    value: float = 0.0

    _CODES = {"zero": _kernels.H_ZERO, "constant": _kernels.H_CONSTANT}

    def __post_init__(self):
        if self.kind not in self._CODES:
            raise ValueError(f"unknown h kind {self.kind!r}")

    @property
    def code(self) -> int:
        return self._CODES[self.kind]

    @property
    def param(self) -> float:
        return float(self.value)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "constant" and self.value == 0.0)


@dataclass(frozen=True)
class InitialFunction:
    """History function phi on [-rho, 0]: time-stamped grid states on a
    uniform sigma-grid, linear interpolation in time."""

    grid: Grid
    rho: float
    samples: np.ndarray = field(repr=False)  # (n_sigma, n_interior), sigma ascending

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[0] < 2 or s.shape[1] != self.grid.n_interior:
            raise ValueError("samples must be (n_sigma >= 2, n_interior)")
        if not np.all(np.isfinite(s)):
            raise ValueError("phi samples must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def dsigma(self) -> float:
        return self.rho / (self.samples.shape[0] - 1)

    @property
    def sigma(self) -> np.ndarray:
        return np.linspace(-self.rho, 0.0, self.samples.shape[0])

    def eval(self, sigma: float) -> GridFunction:
        out = np.empty(self.grid.n_interior)
        _kernels.interp_initial(sigma, -self.rho, self.dsigma, self.samples, out)
        return GridFunction(self.grid, out)

    def at_zero(self) -> GridFunction:
        return GridFunction(self.grid, self.samples[-1].copy())

    def sup_linf(self) -> float:
        return float(np.max(np.abs(self.samples)))

    @classmethod
    def from_callable(cls, grid: Grid, rho: float, func, n_sigma: int = 33):
        """func(sigma, x_array) -> values; sampled on n_sigma uniform stamps."""
        sig = np.linspace(-rho, 0.0, n_sigma)
        samples = np.stack([np.asarray(func(s, grid.x), dtype=float) for s in sig])
        return cls(grid, rho, samples)

    @classmethod
    def constant(cls, state: GridFunction, rho: float):
        return cls(state.grid, rho, np.stack([state.values, state.values]))

    @classmethod
    def zero(cls, grid: Grid, rho: float):
        return cls(grid, rho, np.zeros((2, grid.n_interior)))


@dataclass(frozen=True)
class ProblemSpec:
    """The full problem instance. Immutable; validate with validate_spec."""

    lam: float
    gamma: float
    rho: float
    m: float
    big_m: float
    f: Nonlinearity
    a: DiffusionLaw
    l: str
    phi: InitialFunction
    h: Forcing = Forcing("zero")

    def __post_init__(self):
        if self.l not in L_KINDS:
            raise ValueError(f"unknown l kind {self.l!r}")

    @property
    def l_code(self) -> int:
        return L_KINDS[self.l]

    def to_jsonable(self, include_phi_samples: bool = True) -> dict:
        doc = {
            "lambda": self.lam,
            "gamma": self.gamma,
            "rho": self.rho,
            "m": self.m,
            "M": self.big_m,
            "f": {"kind": self.f.kind, "slope": self.f.slope},
            "a": {"kind": self.a.kind, "value": self.a.value,
                  "intercept": self.a.intercept, "slope": self.a.slope},
            "l": self.l,
            "h": {"kind": self.h.kind, "value": self.h.value},
            "n_interior": self.phi.grid.n_interior,
        }
        if include_phi_samples:
            doc["phi_samples"] = [[float(v) for v in row] for row in self.phi.samples]
        return doc

    @classmethod
    def from_jsonable(cls, doc: dict) -> "ProblemSpec":
        grid = Grid(int(doc["n_interior"]))
        rho = float(doc["rho"])
        samples = np.asarray(doc["phi_samples"], dtype=float)
        phi = InitialFunction(grid, rho, samples)
        return cls(
            lam=float(doc["lambda"]),
            gamma=float(doc["gamma"]),
            rho=rho,
            m=float(doc["m"]),
            big_m=float(doc["M"]),
            f=Nonlinearity(doc["f"]["kind"], float(doc["f"].get("slope", 1.0))),
            a=DiffusionLaw(doc["a"]["kind"], float(doc["a"].get("value", 1.0)),
                           float(doc["a"].get("intercept", 1.0)),
                           float(doc["a"].get("slope", 0.0))),
            l=doc["l"],
            phi=phi,
            h=Forcing(doc["h"]["kind"], float(doc["h"].get("value", 0.0))),
        )

    def content_hash(self) -> str:
        blob = json.dumps(self.to_jsonable(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def eval_f(spec: ProblemSpec, u: GridFunction) -> GridFunction:
    """Pointwise f(u_i); lam is applied by callers."""
    vals = spec.f(u.values)
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        i = int(bad[0])
        raise ValueError(
            f"f produced non-finite value at node {i} (u={u.values[i]!r})"
        )
    return GridFunction(u.grid, vals)


def eval_diffusion(spec: ProblemSpec, u: GridFunction) -> float:
    """clamp(a(l(u)), m, M); always lands in [m, M]."""
    lval = _kernels.l_functional(u.values, u.grid.dx, spec.l_code)
    p0, p1 = spec.a.params
    return float(_kernels.a_coefficient(lval, spec.a.code, p0, p1, spec.m, spec.big_m))


# sampled l-range used by validate_spec to probe the diffusion law for
# clamping; a finite documented surrogate for "a(R) subset [m, M]"
_A_SCAN = np.linspace(-100.0, 100.0, 4001)


def validate_spec(spec: ProblemSpec) -> list[str]:
    """Empty list iff the instance is well formed and a stays in [m, M]
    without clamping on the sampled range. Diagnostics are human-readable;
    the function never raises and is side-effect free."""
    diags: list[str] = []
    if not (spec.m > 0.0):
        diags.append("m must be positive")
    if not (spec.big_m >= spec.m):
        diags.append("M must satisfy M >= m")
    if not (spec.rho > 0.0):
        diags.append("rho must be positive")
    if not (spec.lam > 0.0):
        diags.append("lambda must be positive")
    if spec.gamma < 0.0:
        diags.append("gamma must be nonnegative")
    if spec.m > 0.0 and spec.big_m >= spec.m:
        scan = _A_SCAN if spec.l == "mean_integral" else _A_SCAN[_A_SCAN >= 0.0]
        raw = spec.a.raw(scan, spec.m, spec.big_m)
        over = float(np.max(raw - spec.big_m, initial=0.0))
        under = float(np.max(spec.m - raw, initial=0.0))
        if over > 0.0 or under > 0.0:
            diags.append(
                "diffusion law leaves [m, M] on the sampled l-range "
                f"(max overshoot {over:.3g}, max undershoot {under:.3g}); "
                "values are clamped at evaluation"
            )
    if abs(spec.phi.rho - spec.rho) > 1e-12:
        diags.append("phi must cover [-rho, 0] for the spec's rho")
    return diags


def derive_chafee_constants(c0: float, nu: float) -> float:
    """Minimal C1 with u(u - u^3) <= -nu*C0*u^2 + C1*|u| for all u.

    Dividing by |u| reduces this to max_{s>=0} s*(1 + nu*C0) - s^3, attained
    at s = sqrt((1 + nu*C0)/3), giving C1 = (2/(3*sqrt(3)))*(1 + nu*C0)^(3/2).
    If 1 + nu*C0 <= 0 the left side is always <= 0 and C1 = 0 suffices.
    """
    q = 1.0 + nu * c0
    if q <= 0.0:
        return 0.0
    return float(2.0 / (3.0 * np.sqrt(3.0)) * q ** 1.5)


@dataclass(frozen=True)
class StructuralConstants:
    """C0, C1 and the two nu values m/lambda, M/lambda used by the sign
    condition checks."""

    c0: float
    c1: float
    nu_values: tuple[float, float]

    @classmethod
    def for_spec(cls, spec: ProblemSpec, c0: float, c1: float | None = None):
        nus = (spec.m / spec.lam, spec.big_m / spec.lam)
        if c1 is None:
            if spec.f.kind != "chafee_infante":
                raise ValueError("c1 can only be derived for the cubic reaction")
            c1 = max(derive_chafee_constants(c0, nu) for nu in nus)
        return cls(c0, float(c1), nus)
