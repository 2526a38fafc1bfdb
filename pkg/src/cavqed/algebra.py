"""Truncated Fock-space and two-level operator algebra.

Composite Hilbert spaces are ordered tensor products of bosonic modes
(photon-number cutoff N, basis |0>..|N-1>) and a two-level atom
(basis |g>, |e|).  The global ordering convention is factor 0 (x)
factor 1 (x) ... in ``numpy.kron`` order, i.e. the basis index of a
product state is row-major over the factor occupation numbers.  All
matrices are dense complex128: total dimensions in the scenarios of
interest stay below a few hundred, where dense kernels beat sparse
bookkeeping.
"""

from dataclasses import dataclass, field
from math import exp, sqrt

import numpy as np

from .errors import DimensionError, SpaceMismatchError

ATOM_LEVELS = {"g": 0, "e": 1}


@dataclass(frozen=True)
class Mode:
    """A bosonic mode truncated at ``dim`` Fock levels (|0>..|dim-1>)."""

    label: str
    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise DimensionError(
                f"mode {self.label!r} needs cutoff >= 2, got {self.dim}"
            )


@dataclass(frozen=True)
class Atom:
    """A two-level atom, basis |g> (index 0) and |e> (index 1)."""

    label: str = "atom"
    dim: int = field(default=2)

    def __post_init__(self):
        if self.dim != 2:
            raise DimensionError(f"atom dimension must be 2, got {self.dim}")


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of Mode/Atom factors."""

    factors: tuple

    def __post_init__(self):
        labels = [f.label for f in self.factors]
        if len(set(labels)) != len(labels):
            raise DimensionError(f"duplicate factor labels: {labels}")

    @property
    def total_dim(self):
        d = 1
        for f in self.factors:
            d *= f.dim
        return d

    @property
    def dims(self):
        return tuple(f.dim for f in self.factors)

    def slot(self, label):
        """Index of the factor carrying ``label``."""
        for i, f in enumerate(self.factors):
            if f.label == label:
                return i
        raise SpaceMismatchError(f"no factor labelled {label!r} in {self}")

    def factor(self, label):
        return self.factors[self.slot(label)]

    def has(self, label):
        return any(f.label == label for f in self.factors)

    def mode_labels(self):
        return [f.label for f in self.factors if isinstance(f, Mode)]

    def atom_label(self):
        for f in self.factors:
            if isinstance(f, Atom):
                return f.label
        return None

    def __repr__(self):
        parts = " (x) ".join(f"{f.label}[{f.dim}]" for f in self.factors)
        return f"HilbertSpace({parts})"


def space_of(*factors):
    """Build a HilbertSpace from Mode/Atom factors in tensor order."""
    return HilbertSpace(tuple(factors))


def single_mode_space(dim, label="mode"):
    return HilbertSpace((Mode(label, dim),))


def atom_space(label="atom"):
    return HilbertSpace((Atom(label),))


class Operator:
    """Dense complex operator tagged with its Hilbert space."""

    __slots__ = ("space", "matrix")

    def __init__(self, space, matrix):
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.shape != (space.total_dim, space.total_dim):
            raise DimensionError(
                f"matrix shape {matrix.shape} does not match space "
                f"dimension {space.total_dim}"
            )
        self.space = space
        self.matrix = matrix

    def _check(self, other):
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.space != self.space:
            raise SpaceMismatchError(
                f"operator spaces differ: {self.space} vs {other.space}"
            )

    def dagger(self):
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, tol=1e-12):
        return np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol

    def __add__(self, other):
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self):
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar):
        return Operator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def __repr__(self):
        return f"Operator(dim={self.space.total_dim})"


class State:
    """Pure (vector) or mixed (density matrix) state on a Hilbert space."""

    __slots__ = ("space", "data", "pure")

    def __init__(self, space, data, pure):
        data = np.asarray(data, dtype=np.complex128)
        d = space.total_dim
        if pure and data.shape != (d,):
            raise DimensionError(f"pure state needs shape ({d},), got {data.shape}")
        if not pure and data.shape != (d, d):
            raise DimensionError(
                f"density matrix needs shape ({d},{d}), got {data.shape}"
            )
        self.space = space
        self.data = data
        self.pure = pure

    @classmethod
    def from_vector(cls, space, vec):
        return cls(space, vec, pure=True)

    @classmethod
    def from_density(cls, space, rho):
        return cls(space, rho, pure=False)

    def norm(self):
        """Vector norm (pure) or trace (mixed)."""
        if self.pure:
            return float(np.linalg.norm(self.data))
        return float(np.real(np.trace(self.data)))

    def density_matrix(self):
        """Density matrix view: |psi><psi| for pure states."""
        if self.pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def as_mixed(self):
        return State.from_density(self.space, self.density_matrix())

    def copy(self):
        return State(self.space, self.data.copy(), self.pure)

    def __repr__(self):
        kind = "pure" if self.pure else "mixed"
        return f"State({kind}, dim={self.space.total_dim})"


def annihilation(dim):
    """Mode annihilation operator a with <n-1|a|n> = sqrt(n).

    Lives on a fresh single-mode space of the given cutoff; embed it
    into a composite space with :func:`embed`.
    """
    if dim < 2:
        raise DimensionError(f"annihilation needs dim >= 2, got {dim}")
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for n in range(1, dim):
        mat[n - 1, n] = sqrt(n)
    return Operator(single_mode_space(dim), mat)


def creation(dim):
    return annihilation(dim).dagger()


def number(dim):
    a = annihilation(dim)
    return a.dagger() @ a


def atomic_projector(from_level, to_level):
    """2x2 transition operator |to><from| on a fresh atom space.

    Levels are the strings 'g' and 'e' (or the indices 0 and 1).
    sigma_eg = atomic_projector('g', 'e') sends |g> to |e>.
    """
    i = ATOM_LEVELS.get(to_level, to_level)
    j = ATOM_LEVELS.get(from_level, from_level)
    if i not in (0, 1) or j not in (0, 1):
        raise DimensionError(f"atomic levels must be g/e, got {from_level!r}, {to_level!r}")
    mat = np.zeros((2, 2), dtype=np.complex128)
    mat[i, j] = 1.0
    return Operator(atom_space(), mat)


def identity(space):
    return Operator(space, np.eye(space.total_dim, dtype=np.complex128))


def embed(op, slot, space):
    """Lift a single-factor operator into ``space`` at factor index ``slot``.

    Identity on every other factor; Kronecker order follows the factor
    ordering (factor 0 (x) factor 1 (x) ...).
    """
    if not 0 <= slot < len(space.factors):
        raise SpaceMismatchError(f"slot {slot} out of range for {space}")
    target = space.factors[slot]
    if op.space.total_dim != target.dim:
        raise SpaceMismatchError(
            f"operator dimension {op.space.total_dim} does not match factor "
            f"{target.label!r} (dim {target.dim})"
        )
    mat = np.eye(1, dtype=np.complex128)
    for i, f in enumerate(space.factors):
        block = op.matrix if i == slot else np.eye(f.dim, dtype=np.complex128)
        mat = np.kron(mat, block)
    return Operator(space, mat)


def embed_on(op, label, space):
    """Embed on the factor identified by ``label``."""
    return embed(op, space.slot(label), space)


def mode_annihilation(space, label):
    """Annihilation operator of the named mode, embedded in ``space``."""
    return embed_on(annihilation(space.factor(label).dim), label, space)


def atom_transition(space, from_level, to_level):
    """|to><from| on the atom factor, embedded in ``space``."""
    label = space.atom_label()
    if label is None:
        raise SpaceMismatchError(f"no atom factor in {space}")
    return embed_on(atomic_projector(from_level, to_level), label, space)


def expectation(state, op):
    """<psi|A|psi> for pure states, Tr(rho A) for mixed states."""
    if state.space != op.space:
        raise SpaceMismatchError(
            f"state space {state.space} does not match operator space {op.space}"
        )
    if state.pure:
        return complex(np.vdot(state.data, op.matrix @ state.data))
    return complex(np.sum(state.data * op.matrix.T))


def partial_trace(state, keep):
    """Reduced state on the factors listed in ``keep`` (indices).

    Kept factors stay in their original relative order.  The result is
    always a Mixed state.
    """
    nf = len(state.space.factors)
    keep = sorted(set(keep))
    if not keep or any(k < 0 or k >= nf for k in keep):
        raise SpaceMismatchError(f"invalid keep indices {keep} for {state.space}")
    dims = state.space.dims
    drop = [i for i in range(nf) if i not in keep]
    kept_dim = 1
    for k in keep:
        kept_dim *= dims[k]

    if state.pure:
        psi = state.data.reshape(dims)
        # contract the dropped axes of psi against conj(psi)
        rho = np.tensordot(psi, psi.conj(), axes=(drop, drop))
        rho = rho.reshape(kept_dim, kept_dim)
    else:
        rho_t = state.data.reshape(dims + dims)
        for k in sorted(drop, reverse=True):
            rho_t = np.trace(rho_t, axis1=k, axis2=k + rho_t.ndim // 2)
        rho = rho_t.reshape(kept_dim, kept_dim)

    sub = HilbertSpace(tuple(state.space.factors[k] for k in keep))
    return State.from_density(sub, rho)


def partial_trace_keep_labels(state, labels):
    return partial_trace(state, [state.space.slot(lb) for lb in labels])


# -- state constructors -------------------------------------------------

def basis_vector(dim, n):
    if not 0 <= n < dim:
        raise DimensionError(f"basis index {n} out of range for dim {dim}")
    v = np.zeros(dim, dtype=np.complex128)
    v[n] = 1.0
    return v


def coherent_vector(dim, alpha):
    """Truncated coherent-state amplitudes, renormalized after the cut.

    Built from the explicit Fock series alpha^n / sqrt(n!); accurate when
    the cutoff comfortably exceeds |alpha|^2 + a few standard deviations.
    """
    alpha = complex(alpha)
    v = np.zeros(dim, dtype=np.complex128)
    term = exp(-0.5 * abs(alpha) ** 2)
    v[0] = term
    amp = complex(term)
    for n in range(1, dim):
        amp = amp * alpha / sqrt(n)
        v[n] = amp
    nrm = np.linalg.norm(v)
    return v / nrm


def product_state(space, parts):
    """Pure product state from per-factor specs, in factor order.

    ``parts`` maps factor label to a spec: an int Fock level, 'g'/'e'
    for the atom, a ('coherent', alpha) pair, or an explicit amplitude
    vector.  Factors left unspecified default to their ground level.
    """
    unknown = set(parts) - {f.label for f in space.factors}
    if unknown:
        raise SpaceMismatchError(f"unknown factor labels {sorted(unknown)} in {space}")
    vec = np.ones(1, dtype=np.complex128)
    for f in space.factors:
        spec = parts.get(f.label, 0)
        if isinstance(spec, str):
            if spec not in ATOM_LEVELS:
                raise DimensionError(f"unknown atom level {spec!r}")
            block = basis_vector(f.dim, ATOM_LEVELS[spec])
        elif isinstance(spec, tuple) and len(spec) == 2 and spec[0] == "coherent":
            block = coherent_vector(f.dim, spec[1])
        elif np.ndim(spec) == 1:
            block = np.asarray(spec, dtype=np.complex128)
            if block.shape != (f.dim,):
                raise DimensionError(
                    f"amplitude vector for {f.label!r} has shape {block.shape}, "
                    f"expected ({f.dim},)"
                )
        else:
            block = basis_vector(f.dim, int(spec))
        vec = np.kron(vec, block)
    return State.from_vector(space, vec)


def vacuum_state(space):
    """All modes in |0>, atom (if any) in |g>."""
    return product_state(space, {})
