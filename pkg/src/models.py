"""Shared parameter types, result records and exceptions."""

import itertools
from dataclasses import dataclass, field, asdict
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.config import (
    SERIES_TRUNCATION, PI_NODES, ZETA_PANELS, ZETA_POINTS, CONE_POINTS,
    XCHECK_TOL, AUDIT_LEVELS, REPORT_SCHEMA_VERSION,
)


class DunklError(Exception):
    """Base class for all errors raised by the package."""


class ParameterDomainError(DunklError, ValueError):
    """A parameter lies outside the domain of the formula."""


class PreconditionError(DunklError, ValueError):
    """Inputs violate an operation precondition (x = y, separation, stencil)."""


class DataError(DunklError, ValueError):
    """Sampled data is unusable (e.g. a nonpositive weight sample)."""


class UsageError(DunklError, ValueError):
    """Bad command-line flags or config values."""


@dataclass(frozen=True)
class AlphaVector:
    """Multiplicity parameters alpha in [-1/2, inf)^d."""

    entries: Tuple[float, ...]

    def __post_init__(self):
        entries = tuple(float(a) for a in self.entries)
        if not entries:
            raise ParameterDomainError("alpha must have at least one entry")
        for a in entries:
            if not np.isfinite(a) or a < -0.5:
                raise ParameterDomainError(f"alpha entries must be >= -1/2, got {a}")
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def of(cls, *values: float) -> 'AlphaVector':
        return cls(tuple(values))

    @classmethod
    def uniform(cls, value: float, d: int) -> 'AlphaVector':
        return cls((value,) * d)

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def total(self) -> float:
        """|alpha| = sum of the entries."""
        return float(sum(self.entries))

    def __getitem__(self, i: int) -> float:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def shifted(self, eps: 'EpsVector') -> Tuple[float, ...]:
        """Orders alpha + eps used by the component kernels."""
        return tuple(a + e for a, e in zip(self.entries, eps.entries))


@dataclass(frozen=True)
class EpsVector:
    """Parity selector eps in {0,1}^d."""

    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if not entries or any(e not in (0, 1) for e in entries):
            raise ParameterDomainError(f"eps entries must be 0 or 1, got {self.entries}")
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def zero(cls, d: int) -> 'EpsVector':
        return cls((0,) * d)

    @classmethod
    def unit(cls, d: int, j: int) -> 'EpsVector':
        return cls(tuple(1 if i == j else 0 for i in range(d)))

    @classmethod
    def parse(cls, text: str) -> 'EpsVector':
        """Parse '01', '0,1' or '0 1'."""
        digits = [c for c in text if c in '01']
        return cls(tuple(int(c) for c in digits))

    @staticmethod
    def all(d: int) -> Iterator['EpsVector']:
        for bits in itertools.product((0, 1), repeat=d):
            yield EpsVector(bits)

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def total(self) -> int:
        return sum(self.entries)

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __str__(self) -> str:
        return ''.join(str(e) for e in self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=int)


@dataclass(frozen=True)
class MultiIndex:
    """Multi-index m in N^d; ``entries=None`` is the invalid sentinel (m not in N^d)."""

    entries: Optional[Tuple[int, ...]]
    d: int = 0

    def __post_init__(self):
        if self.entries is None:
            return
        entries = tuple(int(m) for m in self.entries)
        object.__setattr__(self, 'd', len(entries))
        if any(m < 0 for m in entries):
            object.__setattr__(self, 'entries', None)
        else:
            object.__setattr__(self, 'entries', entries)

    @classmethod
    def of(cls, *values: int) -> 'MultiIndex':
        return cls(tuple(values))

    @classmethod
    def invalid(cls, d: int) -> 'MultiIndex':
        return cls(None, d)

    @property
    def valid(self) -> bool:
        return self.entries is not None

    @property
    def length(self) -> int:
        """|m|; -1 for the invalid sentinel."""
        return sum(self.entries) if self.valid else -1

    def shifted(self, j: int, step: int) -> 'MultiIndex':
        """m + step * e_j, invalid when a coordinate goes negative."""
        if not self.valid:
            return self
        entries = list(self.entries)
        entries[j] += step
        return MultiIndex(tuple(entries))

    def in_parity(self, eps: EpsVector) -> bool:
        """Membership in N_eps: m_i even iff eps_i = 0."""
        return self.valid and all(m % 2 == e for m, e in zip(self.entries, eps.entries))

    def parity(self) -> EpsVector:
        return EpsVector(tuple(m % 2 for m in self.entries))

    def __iter__(self):
        return iter(self.entries or ())

    def __getitem__(self, i: int) -> int:
        return self.entries[i]


def multi_indices(d: int, max_length: int) -> List[Tuple[int, ...]]:
    """All m in N^d with |m| <= max_length, ordered by length then lexicographically."""
    out = [m for m in itertools.product(range(max_length + 1), repeat=d) if sum(m) <= max_length]
    out.sort(key=lambda m: (sum(m), m))
    return out


@dataclass(frozen=True)
class KernelEvalConfig:
    """Representation selector and quadrature sizes for kernel evaluation."""

    representation: str = 'bessel'
    truncation: int = SERIES_TRUNCATION
    nodes: int = PI_NODES
    panels: int = ZETA_PANELS
    panel_points: int = ZETA_POINTS
    tolerance: float = XCHECK_TOL

    def __post_init__(self):
        if self.representation not in ('series', 'bessel', 'schlafli'):
            raise ParameterDomainError(f"unknown representation {self.representation!r}")
        if self.truncation < 1 or self.nodes < 1:
            raise ParameterDomainError("truncation and nodes must be >= 1")
        if self.panels < 2 or self.panels % 2 or self.panel_points < 2:
            raise ParameterDomainError("panels must be an even number >= 2 with >= 2 points each")

    def with_representation(self, representation: str) -> 'KernelEvalConfig':
        return KernelEvalConfig(representation, self.truncation, self.nodes,
                                self.panels, self.panel_points, self.tolerance)


@dataclass(frozen=True)
class ConeSpec:
    """Parabolic cone {(z,t): |z| < beta sqrt(t)} and its cross-section grid size."""

    beta: float = 1.0
    points: int = CONE_POINTS

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterDomainError(f"cone aperture must be positive, got {self.beta}")
        if self.points < 2:
            raise ParameterDomainError("cone cross-section needs at least 2 points per axis")


@dataclass(frozen=True)
class BallSpec:
    """Ball B(x, r) restricted to the positive orthant."""

    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        if not self.radius > 0:
            raise ParameterDomainError(f"ball radius must be positive, got {self.radius}")
        if any(c < 0 for c in center):
            raise ParameterDomainError("ball center must lie in the closed positive orthant")
        object.__setattr__(self, 'center', center)

    @property
    def d(self) -> int:
        return len(self.center)


VERTICAL_KINDS = ('gV', 'SV')
HORIZONTAL_KINDS = ('gH', 'gHstar', 'SH', 'SHstar')
AREA_KINDS = ('SV', 'SH', 'SHstar')


@dataclass(frozen=True)
class SquareFnKind:
    """One square function: operator x semigroup x variant."""

    operator: str
    j: int = 0
    semigroup: str = 'heat'
    eps: Optional[EpsVector] = None

    def __post_init__(self):
        if self.operator not in VERTICAL_KINDS + HORIZONTAL_KINDS:
            raise ParameterDomainError(f"unknown square function {self.operator!r}")
        if self.semigroup not in ('heat', 'poisson'):
            raise ParameterDomainError(f"unknown semigroup {self.semigroup!r}")
        if self.semigroup == 'poisson' and self.is_area:
            raise ParameterDomainError("Poisson-based area integrals are not supported")

    @property
    def is_area(self) -> bool:
        return self.operator in AREA_KINDS

    @property
    def fullspace(self) -> bool:
        return self.eps is None

    @property
    def derivative(self) -> str:
        """'t', 'delta' or 'delta_star'."""
        if self.operator in VERTICAL_KINDS:
            return 't'
        return 'delta_star' if self.operator.endswith('star') else 'delta'

    @property
    def time_weight(self) -> str:
        """'t' for L^2(t dt) norms, '1' for L^2(dt)."""
        if self.semigroup == 'poisson' or self.operator in VERTICAL_KINDS:
            return 't'
        return '1'

    @property
    def label(self) -> str:
        base = self.operator if self.operator in VERTICAL_KINDS else f"{self.operator}{self.j + 1}"
        variant = 'full' if self.fullspace else f"eps{self.eps}+"
        return f"{base}/{self.semigroup}/{variant}"


@dataclass
class AuditLevel:
    k: int
    constant: float
    constant_cube: float
    samples: int
    passed: bool = True


@dataclass
class EstimateAudit:
    """Empirical constants of one standard estimate across nested grid levels."""

    family: str
    space: str
    audit: str
    delta: Optional[float]
    levels: List[AuditLevel] = field(default_factory=list)
    passed: bool = False
    expect_failure: bool = False
    note: str = ''

    @property
    def ratios(self) -> List[float]:
        return [b.constant / a.constant for a, b in zip(self.levels, self.levels[1:])]

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> 'EstimateAudit':
        data = dict(data)
        data['levels'] = [AuditLevel(**lv) for lv in data.get('levels', [])]
        return cls(**data)


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    note: str = ''


@dataclass
class SuiteResult:
    suite: str
    checks: List[CheckResult] = field(default_factory=list)
    audits: List[EstimateAudit] = field(default_factory=list)
    data: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        checks_ok = all(c.passed for c in self.checks)
        # a negative control succeeds when its audit fails
        audits_ok = all(a.passed != a.expect_failure for a in self.audits)
        return checks_ok and audits_ok

    def add(self, name: str, value: float, threshold: float, passed: bool, note: str = '') -> CheckResult:
        check = CheckResult(name, float(value), float(threshold), bool(passed), note)
        self.checks.append(check)
        return check


@dataclass
class VerificationReport:
    """Aggregated suite results; serialized to report.json."""

    config: Dict[str, object]
    config_hash: str
    suites: List[SuiteResult] = field(default_factory=list)
    schema_version: int = REPORT_SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> Dict:
        return {
            'schema_version': self.schema_version,
            'config_hash': self.config_hash,
            'config': self.config,
            'passed': self.passed,
            'suites': [
                {
                    'suite': s.suite,
                    'passed': s.passed,
                    'checks': [asdict(c) for c in s.checks],
                    'audits': [a.to_dict() for a in s.audits],
                    'data': s.data,
                }
                for s in self.suites
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'VerificationReport':
        suites = []
        for s in data.get('suites', []):
            suites.append(SuiteResult(
                suite=s['suite'],
                checks=[CheckResult(**c) for c in s.get('checks', [])],
                audits=[EstimateAudit.from_dict(a) for a in s.get('audits', [])],
                data=s.get('data', {}),
            ))
        return cls(config=data['config'], config_hash=data['config_hash'], suites=suites,
                   schema_version=data.get('schema_version', REPORT_SCHEMA_VERSION))


@dataclass(frozen=True)
class RunConfig:
    """Validated command-line configuration."""

    suite: str
    d: int = 1
    alphas: Tuple[Tuple[float, ...], ...] = ((-0.5,), (0.0,), (1.3,))
    eps: Optional[Tuple[int, ...]] = None
    level: int = AUDIT_LEVELS
    beta: float = 1.0
    out: str = 'results'
    threads: int = 1
    kernel: KernelEvalConfig = KernelEvalConfig()
    cone_points: int = CONE_POINTS
    seed: int = 20240101
    options: Tuple[Tuple[str, object], ...] = ()

    def __post_init__(self):
        if self.d < 1 or self.d > 3:
            raise UsageError(f"--d must be 1, 2 or 3, got {self.d}")
        for alpha in self.alphas:
            if len(alpha) != self.d:
                raise UsageError(f"alpha {alpha} does not have d={self.d} entries")
            if any(a < -0.5 for a in alpha):
                raise UsageError(f"alpha entries must be >= -1/2, got {alpha}")
        if self.eps is not None and (len(self.eps) != self.d or any(e not in (0, 1) for e in self.eps)):
            raise UsageError(f"--eps must have d={self.d} binary digits")
        if self.level < 2:
            raise UsageError("--level must be >= 2 (refinement needs two levels)")
        if not self.beta > 0:
            raise UsageError("--beta must be positive")
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")

    @property
    def alpha_vectors(self) -> List[AlphaVector]:
        return [AlphaVector(a) for a in self.alphas]

    @property
    def eps_vectors(self) -> List[EpsVector]:
        if self.eps is None:
            return list(EpsVector.all(self.d))
        return [EpsVector(self.eps)]

    @property
    def cone(self) -> ConeSpec:
        return ConeSpec(self.beta, self.cone_points)

    def option(self, key: str, default=None):
        return dict(self.options).get(key, default)

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data['options'] = {k: v for k, v in self.options}
        return data
