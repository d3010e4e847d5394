"""k-explicit mesh prescriptions for h-FEM, hp-FEM and circle BEM.

Multi-term thresholds ``sum_m F_m (h_m k)^{e_m} = c`` are split with an equal
budget ``c / m`` per term, so every term is met with equality.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

NONTRAPPING = "Nontrapping"
POWER_LAW = "PowerLaw"
USER_TABLE = "UserTable"

KQO = "kQO"
KQO_AWAY = "kQO-away"
CRE = "CRE"
CRE_AWAY = "CRE-away"
REGIONS = ("K", "V", "I")


@dataclass(frozen=True)
class RhoModel:
    """``rho(k)``: ``C k`` (nontrapping), ``C k^alpha`` or log-log interpolation of a table."""

    kind: str = NONTRAPPING
    C: float = 1.0
    alpha: float = 1.0
    table: tuple = ()

    def __post_init__(self):
        if self.kind not in (NONTRAPPING, POWER_LAW, USER_TABLE):
            raise ValueError(f"unknown rho model {self.kind!r}")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.kind == USER_TABLE:
            ks = [float(a) for a, _ in self.table]
            if len(ks) < 2 or any(b <= a for a, b in zip(ks, ks[1:])):
                raise ValueError("table needs at least two increasing wavenumbers")
            if any(float(v) <= 0 for _, v in self.table):
                raise ValueError("table values must be positive")

    def __call__(self, k: float) -> float:
        k = float(k)
        if k <= 0:
            raise ValueError("k must be positive")
        if self.kind == NONTRAPPING:
            return self.C * k
        if self.kind == POWER_LAW:
            return self.C * k**self.alpha
        ks = np.log([float(a) for a, _ in self.table])
        vs = np.log([float(b) for _, b in self.table])
        return float(np.exp(np.interp(np.log(k), ks, vs)))

    def lower_bound_ratio(self, ks) -> float:
        """``min rho(k)/k`` over ``ks``; positive values satisfy ``rho >= c k``."""
        return float(min(self(k) / k for k in ks))


@dataclass(frozen=True)
class Term:
    """One summand ``factor * (h k)^exponent`` of a threshold."""

    region: str
    factor: float
    exponent: float
    hk: float

    @property
    def value(self) -> float:
        return self.factor * self.hk**self.exponent


@dataclass(frozen=True)
class MeshPlan:
    rule: str
    k: float
    p: int
    c: float
    h: dict
    dofs: float
    guarantee: str
    terms: tuple = ()
    budget: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def h_uniform(self) -> float:
        return min(self.h.values())

    def check(self) -> float:
        """Largest relative deviation of a term from its budget."""
        if not self.terms:
            return 0.0
        return max(abs(t.value - self.budget) / self.budget for t in self.terms)

    def to_json(self) -> dict:
        out = asdict(self)
        out["hk"] = {r: h * self.k for r, h in self.h.items()}
        return out


def _local_dofs(p: int) -> int:
    return (p + 1) * (p + 2) // 2


def _solve_term(factor: float, exponent: float, budget: float) -> float:
    return (budget / factor) ** (1.0 / exponent)


def uniform_fem_plan(k: float, p: int, rho: RhoModel, c: float = 0.5, area: float = 1.0, variant: str = CRE) -> MeshPlan:
    """Uniform mesh from ``(hk)^{2p} rho = c`` (CRE) or ``(hk)^p rho = c`` (kQO)."""
    if c <= 0:
        raise ValueError("c must be positive")
    if variant not in (CRE, KQO):
        raise ValueError("variant must be CRE or kQO")
    r = rho(k)
    e = 2 * p if variant == CRE else p
    hk = _solve_term(r, e, c)
    h = hk / k
    return MeshPlan(
        rule=f"uniform-{variant}", k=float(k), p=int(p), c=float(c), h={"all": h},
        dofs=area / h**2 * _local_dofs(p), guarantee=variant,
        terms=(Term("all", r, e, hk),), budget=float(c),
    )


# rows: guarantee and, per region K/V/I, (factor name, exponent multiplier of p)
REGIME_ROWS = {
    1: (KQO, (("rho", 1), ("rho", 1), ("rho", 1))),
    2: (KQO, (("rho", 1), ("sqrt", 1), ("k", 1))),
    3: (KQO_AWAY, (("sqrt", 1), ("k", 1), ("k", 1))),
    4: (CRE, (("rho", 2), ("rho", 2), ("rho", 2))),
    5: (CRE, (("rho", 2), ("sqrt", 2), ("k", 2))),
    6: (CRE_AWAY, (("rho", 2), ("k", 1), ("k", 1))),
}

# factor F = k^a rho^b as exact exponents (a, b)
_FACTOR_EXPONENTS = {"rho": (Fraction(0), Fraction(1)), "sqrt": (Fraction(1, 2), Fraction(1, 2)), "k": (Fraction(1), Fraction(0))}


def _factor(name: str, k: float, r: float) -> float:
    return {"rho": r, "sqrt": math.sqrt(k * r), "k": k}[name]


def regime_plan(row: int, k: float, p: int, rho: RhoModel, c: float = 0.5, areas: dict | None = None) -> MeshPlan:
    """Per-region widths for one threshold row; ``h_P k = c`` in the layer."""
    if row not in REGIME_ROWS:
        raise ValueError(f"invalid regime row {row}; expected 1..6")
    if c <= 0:
        raise ValueError("c must be positive")
    areas = {"K": 1.0, "V": 1.0, "I": 1.0, "P": 1.0} if areas is None else dict(areas)
    if any(areas.get(r, 0.0) <= 0 for r in ("K", "V", "I", "P")):
        raise ValueError("region areas must be positive")
    guarantee, spec = REGIME_ROWS[row]
    r = rho(k)
    budget = c / len(spec)
    terms, h = [], {}
    for region, (name, mult) in zip(REGIONS, spec):
        F, e = _factor(name, k, r), mult * p
        hk = _solve_term(F, e, budget)
        terms.append(Term(region, F, e, hk))
        h[region] = hk / k
    h["P"] = c / k
    dofs = sum(areas[reg] / h[reg] ** 2 for reg in h) * _local_dofs(p)
    return MeshPlan(
        rule=f"regime-{row}", k=float(k), p=int(p), c=float(c), h=h, dofs=dofs,
        guarantee=guarantee, terms=tuple(terms), budget=budget, extra={"areas": areas},
    )


def dof_exponents(row: int, p: int, d: int = 2) -> dict:
    """Exact exponents ``(a, b)`` with ``DOFs_region ~ vol k^a rho^b`` for each region.

    From ``h k = (c / F)^{1/e}`` and ``DOFs ~ vol h^{-d}``: ``a = d + d a_F / e``, ``b = d b_F / e``.
    """
    _, spec = REGIME_ROWS[row]
    out = {}
    for region, (name, mult) in zip(REGIONS, spec):
        aF, bF = _FACTOR_EXPONENTS[name]
        e = Fraction(mult * p)
        out[region] = (d + d * aF / e, d * bF / e)
    return out


def hp_plan(k: float, eps: float, c: float = 0.5, area: float = 1.0) -> MeshPlan:
    """``p = ceil(1 + eps log k)`` and ``h = c p / k``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    p = int(math.ceil(1.0 + eps * math.log(k) - 1e-9))
    h = c * p / k
    return MeshPlan(
        rule="hp", k=float(k), p=p, c=float(c), h={"all": h}, dofs=area * (p / h) ** 2,
        guarantee=KQO, terms=(Term("all", 1.0 / p, 1.0, h * k),), budget=float(c),
    )


def bem_plan(k: float, p: int, rhoA: RhoModel, c: float = 0.5) -> MeshPlan:
    """``h = min((c / 2 rho_A)^{1/(2p+2)} / k, c / (2k))`` and ``M = ceil(2 pi / h)``."""
    if c <= 0:
        raise ValueError("c must be positive")
    r = rhoA(k)
    e = 2 * p + 2
    hk1 = _solve_term(r, e, c / 2.0)
    hk2 = c / 2.0
    hk = min(hk1, hk2)
    h = hk / k
    M = int(math.ceil(2.0 * math.pi / h - 1e-9))
    binding = Term("rho", r, e, hk) if hk1 <= hk2 else Term("hk", 1.0, 1.0, hk)
    return MeshPlan(
        rule="bem", k=float(k), p=int(p), c=float(c), h={"all": h}, dofs=float(M),
        guarantee=KQO, terms=(binding,), budget=c / 2.0, extra={"M": M, "slack_term": float(r * hk**e + hk)},
    )
