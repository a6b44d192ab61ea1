"""Hamiltonian construction for the ferromagnetic Ising ring in transverse and
longitudinal fields, with three interaction variants and optional bond disorder.

H = -sum_bonds J_bond z_i z_j - g sum_i X_i + h sum_i z_i [- (beta*J/L)(sum_i z_i)^2]

In the computational basis every variant is a real operator with a stored
diagonal plus a uniform amplitude -g between configurations one spin flip
apart, so a single matvec kernel covers all of them.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels, lattice
from .errors import ResourceLimitError

NEAREST_NEIGHBOR = "nn"
POWER_LAW = "power_law"
SQUEEZE = "squeeze"


@dataclass(frozen=True)
class Interaction:
    """Ising-bond structure: nearest-neighbor, power-law tail, or NN plus a
    global squeezing term -(beta*J/L)(sum_i z_i)^2."""

    kind: str = NEAREST_NEIGHBOR
    exponent: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in (NEAREST_NEIGHBOR, POWER_LAW, SQUEEZE):
            raise ValueError(f"unknown interaction kind {self.kind!r}")
        if self.kind == POWER_LAW:
            if self.exponent is None or self.exponent <= 0:
                raise ValueError("power_law interaction requires exponent > 0")
        if self.kind == SQUEEZE and self.beta is None:
            raise ValueError("squeeze interaction requires beta")

    @classmethod
    def nn(cls):
        return cls(NEAREST_NEIGHBOR)

    @classmethod
    def power_law(cls, exponent=3.0):
        return cls(POWER_LAW, exponent=float(exponent))

    @classmethod
    def squeeze(cls, beta):
        return cls(SQUEEZE, beta=float(beta))

    def to_json(self):
        doc = {"kind": self.kind}
        if self.kind == POWER_LAW:
            doc["exponent"] = self.exponent
        if self.kind == SQUEEZE:
            doc["beta"] = self.beta
        return doc

    @classmethod
    def from_json(cls, doc):
        return cls(doc["kind"], exponent=doc.get("exponent"), beta=doc.get("beta"))


@dataclass(frozen=True)
class DisorderSpec:
    """Gaussian bond-coupling disorder: J_i ~ Normal(J, sigma^2), drawn from a
    counter-based stream so realization k is reproducible in any order."""

    sigma: float
    seed: int
    realization: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("disorder sigma must be >= 0")
        if self.realization < 0:
            raise ValueError("realization index must be >= 0")

    def to_json(self):
        return {"sigma": self.sigma, "seed": self.seed, "realization": self.realization}

    @classmethod
    def from_json(cls, doc):
        return cls(doc["sigma"], doc["seed"], doc.get("realization", 0))


@dataclass(frozen=True)
class ModelSpec:
    """Full description of one Hamiltonian instance."""

    L: int
    g: float
    h: float
    J: float = 1.0
    interaction: Interaction = field(default_factory=Interaction.nn)
    disorder: DisorderSpec | None = None

    def __post_init__(self):
        lattice.check_site_count(self.L)
        if self.J <= 0:
            raise ValueError("J must be > 0 (ferromagnetic regime)")
        if self.disorder is not None and self.interaction.kind != NEAREST_NEIGHBOR:
            raise ValueError("bond disorder is defined only for the NN interaction")

    @property
    def dim(self):
        return 1 << self.L

    def with_fields(self, **kw):
        return replace(self, **kw)

    def clean(self):
        """The same model with disorder removed."""
        return replace(self, disorder=None) if self.disorder else self

    def to_json(self):
        doc = {
            "L": self.L,
            "J": self.J,
            "g": self.g,
            "h": self.h,
            "interaction": self.interaction.to_json(),
        }
        if self.disorder is not None:
            doc["disorder"] = self.disorder.to_json()
        return doc

    @classmethod
    def from_json(cls, doc):
        disorder = doc.get("disorder")
        return cls(
            L=doc["L"],
            J=doc.get("J", 1.0),
            g=doc["g"],
            h=doc["h"],
            interaction=Interaction.from_json(doc.get("interaction", {"kind": "nn"})),
            disorder=DisorderSpec.from_json(disorder) if disorder else None,
        )


def sample_couplings(L, J, disorder):
    """Bond couplings J_0..J_{L-1} for one disorder realization.

    Uses a Philox counter-based generator keyed on (seed, realization), so the
    draw for realization k is independent of execution order; bond i is the
    i-th variate of the stream. sigma=0 returns exactly J everywhere.
    """
    if disorder is None or disorder.sigma == 0.0:
        return np.full(L, float(J))
    key = np.random.SeedSequence(
        entropy=int(disorder.seed) & ((1 << 64) - 1),
        spawn_key=(int(disorder.realization),),
    ).generate_state(2, np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.normal(loc=J, scale=disorder.sigma, size=L)


class SparseOperator:
    """Real Hermitian operator on 2^L configurations: explicit diagonal plus
    uniform amplitude -g between single-spin-flip neighbors (never stored)."""

    def __init__(self, L, diag, g):
        self.L = int(L)
        self.diag = np.ascontiguousarray(diag, dtype=np.float64)
        self.g = float(g)
        if self.diag.shape != (1 << self.L,):
            raise ValueError("diagonal length does not match 2^L")

    @property
    def dim(self):
        return 1 << self.L

    def apply(self, psi, out=None):
        """Matrix-vector product H @ psi (unnormalized)."""
        psi = np.asarray(psi)
        if psi.shape != (self.dim,):
            raise ValueError(f"state has dimension {psi.shape}, expected ({self.dim},)")
        return kernels.matvec(self.diag, self.g, self.L, psi, out)

    def expectation(self, psi):
        """<psi|H|psi> (real for Hermitian H; the real part is returned)."""
        return float(np.real(np.vdot(psi, self.apply(psi))))

    def halfwidth_bound(self):
        """Upper bound on the spectral half-width, for step-size control."""
        return 0.5 * (self.diag.max() - self.diag.min()) + abs(self.g) * self.L

    def dense(self):
        """Materialize the full matrix (small L only)."""
        if self.L > 14:
            raise ResourceLimitError(f"dense matrix at L={self.L} would exceed memory")
        n = self.dim
        m = np.zeros((n, n), dtype=np.float64)
        idx = np.arange(n)
        m[idx, idx] = self.diag
        for i in range(self.L):
            m[idx, idx ^ (1 << i)] = -self.g
        return m


def _distance_weights(L, J, interaction):
    """Per-distance bond weights w_d, d = 1..L//2, defining
    -sum_{i<j} w_{d(i,j)} z_i z_j under the minimal-image convention."""
    w = np.zeros(L // 2)
    if interaction.kind == POWER_LAW:
        d = np.arange(1, L // 2 + 1, dtype=np.float64)
        w[:] = J / d ** interaction.exponent
    else:
        w[0] = J
    return w


def build_hamiltonian(spec):
    """Construct the sparse Hamiltonian for a model spec."""
    lattice.check_site_count(spec.L)
    inter = spec.interaction
    if spec.disorder is not None and spec.disorder.sigma > 0.0:
        couplings = sample_couplings(spec.L, spec.J, spec.disorder)
        diag = kernels.bond_diagonal(spec.L, couplings, spec.h)
    else:
        weights = _distance_weights(spec.L, spec.J, inter)
        squeeze_coeff = 0.0
        if inter.kind == SQUEEZE:
            squeeze_coeff = inter.beta * spec.J / spec.L
        diag = kernels.distance_diagonal(spec.L, weights, spec.h, squeeze_coeff)
    return SparseOperator(spec.L, diag, spec.g)
