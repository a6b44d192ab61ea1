"""Initial-state preparation: the false vacuum and translation-symmetric
flip-pattern states (single bubbles, split bubbles, multi-bubble unions)."""

import re

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import lattice
from .errors import DegeneracyError
from .model import build_hamiltonian

DENSE_GROUND_STATE_L = 12
PREP_FIELD = -0.01
_DEGENERACY_GAP = 1e-10


def all_up_state(L):
    """Basis state with every spin up, as a normalized complex vector."""
    psi = np.zeros(1 << L, dtype=np.complex128)
    psi[lattice.all_up(L)] = 1.0
    return psi


def _fix_phase(psi, L):
    """Rotate the global phase so the all-up amplitude is real and >= 0
    (falling back to the largest-magnitude amplitude if it vanishes)."""
    a = psi[lattice.all_up(L)]
    if abs(a) < 1e-12:
        a = psi[int(np.argmax(np.abs(psi)))]
    psi = psi * (abs(a) / a) if a != 0 else psi
    return psi


def ground_state(spec):
    """Lowest eigenpair of the model, (energy, state).

    Dense diagonalization up to L=12; ARPACK Lanczos iteration beyond. Raises
    DegeneracyError if the gap to the second state is below 1e-10.
    """
    H = build_hamiltonian(spec)
    if spec.L <= DENSE_GROUND_STATE_L:
        energies, vectors = scipy.linalg.eigh(
            H.dense(), subset_by_index=(0, 1), driver="evr"
        )
        e0, e1 = energies
        vec = vectors[:, 0]
    else:
        op = scipy.sparse.linalg.LinearOperator(
            (H.dim, H.dim), matvec=H.apply, dtype=np.float64
        )
        v0 = np.zeros(H.dim)
        v0[lattice.all_up(spec.L)] = 1.0
        energies, vectors = scipy.sparse.linalg.eigsh(op, k=2, which="SA", v0=v0)
        e0, e1 = energies
        vec = vectors[:, 0]
    if e1 - e0 < _DEGENERACY_GAP:
        raise DegeneracyError(
            f"ground space degenerate: gap {e1 - e0:.3e} below {_DEGENERACY_GAP}"
        )
    psi = vec.astype(np.complex128)
    psi /= np.linalg.norm(psi)
    return float(e0), _fix_phase(psi, spec.L)


def false_vacuum(spec, prep_field=PREP_FIELD):
    """The metastable ferromagnetic state: ground state of the clean model at
    a tiny negative longitudinal field (default h = -0.01)."""
    if spec.disorder is not None and spec.disorder.sigma > 0:
        raise ValueError("false vacuum preparation requires a clean model")
    _, psi = ground_state(spec.with_fields(h=prep_field, disorder=None))
    return psi


def symmetric_pattern_state(L, pattern):
    """Equal superposition over all L translations of each offset set in the
    pattern, applied as spin flips to the all-up state, then normalized.

    ``pattern`` is an iterable of offset collections; offsets are taken mod L.
    A single set {0,..,n-1} gives the symmetric size-n bubble state.
    """
    lattice.check_site_count(L)
    offset_sets = [frozenset(int(o) % L for o in s) for s in pattern]
    if not offset_sets or any(not s for s in offset_sets):
        raise ValueError("pattern must contain non-empty offset sets")
    if len(set(offset_sets)) != len(offset_sets):
        raise ValueError("pattern offset sets must be distinct")
    full = lattice.all_up(L)
    psi = np.zeros(1 << L, dtype=np.complex128)
    for offsets in offset_sets:
        mask = 0
        for o in offsets:
            mask |= 1 << o
        for shift in range(L):
            psi[full ^ lattice.translate(mask, shift, L)] += 1.0
    norm = np.linalg.norm(psi)
    return psi / norm


def bubble_state(L, n):
    """The symmetric single-bubble state with n contiguous flipped spins."""
    if not 1 <= n < L:
        raise ValueError(f"bubble size must satisfy 1 <= n < L, got n={n}")
    return symmetric_pattern_state(L, [range(n)])


def overlap(a, b):
    """<a|b> with conjugation on a."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


_BUBBLE_RE = re.compile(r"^bubble:(\d+)$")
_OFFSETS_RE = re.compile(r"^offsets:(-?\d+(?:,-?\d+)*)$")
_UNION_RE = re.compile(r"^union:(\(-?\d+(?:,-?\d+)*\)(?:\|\(-?\d+(?:,-?\d+)*\))*)$")


def parse_pattern(text):
    """Parse the CLI pattern grammar into a tuple of offset tuples.

    Grammar: ``bubble:3`` (contiguous size-n bubble), ``offsets:0,2``
    (a single offset set), ``union:(0,1,2,4,5)|(0,1,2,-4,-3)`` (several
    offset sets). Negative offsets are taken mod L at construction time.
    """
    text = text.strip()
    m = _BUBBLE_RE.match(text)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise ValueError("bubble size must be >= 1")
        return (tuple(range(n)),)
    m = _OFFSETS_RE.match(text)
    if m:
        return (tuple(int(x) for x in m.group(1).split(",")),)
    m = _UNION_RE.match(text)
    if m:
        sets = []
        for chunk in m.group(1).split("|"):
            sets.append(tuple(int(x) for x in chunk.strip("()").split(",")))
        return tuple(sets)
    raise ValueError(
        f"cannot parse pattern {text!r}; expected 'bubble:<n>', 'offsets:a,b,..' "
        "or 'union:(a,b,..)|(c,d,..)'"
    )


def state_from_name(name, spec, prep_field=PREP_FIELD):
    """Resolve a CLI state name: 'fv', 'all-up', or 'pattern:<grammar>'."""
    if name == "fv":
        return false_vacuum(spec.clean(), prep_field)
    if name == "all-up":
        return all_up_state(spec.L)
    if name.startswith("pattern:"):
        return symmetric_pattern_state(spec.L, parse_pattern(name[len("pattern:"):]))
    raise ValueError(f"unknown state {name!r}; expected fv, all-up or pattern:<grammar>")
