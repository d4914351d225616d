"""Real linear algebra for qubit states lying in the span of |0> and |1>.

All states handled by the package are real, so a single-qubit pure state is
fully described by one angle: ``cos(a)|0> + sin(a)|1>``.  Products of such
states never need to be expanded into 2**n vectors; overlaps factorise.

The dense routines (``eigen_sym``, ``trace_distance``) exist to serve as an
independent oracle for the closed forms in :mod:`qcointoss.discrimination`.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 1024
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when operands have incompatible sizes."""


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi iteration exhausts its sweep budget."""


@dataclass(frozen=True)
class PureState:
    """The real qubit state ``cos(half_angle)|0> + sin(half_angle)|1>``."""

    half_angle: float

    def vector(self) -> np.ndarray:
        return np.array([math.cos(self.half_angle), math.sin(self.half_angle)])


def psi(bit: int, theta: float) -> PureState:
    """Coding state for ``bit``; psi(0) and psi(1) sit at angle ``theta``.

    psi(0) = c|0> + s|1> and psi(1) = c|0> - s|1> with c = cos(theta/2),
    s = sin(theta/2).
    """
    return PureState(theta / 2 if bit == 0 else -theta / 2)


@dataclass(frozen=True)
class ProductState:
    factors: tuple[PureState, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def __len__(self) -> int:
        return len(self.factors)

    @classmethod
    def repeated(cls, state: PureState, n: int) -> "ProductState":
        return cls((state,) * n)

    def vector(self) -> np.ndarray:
        """Explicit 2**n amplitude vector (first factor is the most significant qubit)."""
        if len(self.factors) > 10:
            raise DimensionError("explicit vectors are limited to 10 qubits")
        v = np.ones(1)
        for f in self.factors:
            v = np.kron(v, f.vector())
        return v


def overlap(u: PureState, v: PureState) -> float:
    return math.cos(u.half_angle - v.half_angle)


def _log_product(cosines: Iterable[tuple[float, int]]) -> float:
    # product of c**k over (c, k) pairs; exact zero if any c is zero
    sign = 1.0
    log_abs = 0.0
    for x, k in cosines:
        if x == 0.0:
            return 0.0
        if x < 0 and k % 2:
            sign = -sign
        log_abs += k * math.log(abs(x))
    return sign * math.exp(log_abs)


def product_overlap(p: ProductState, q: ProductState) -> float:
    """Inner product of two product states, accumulated in log space.

    Repeated factor pairs are grouped first, so products of a handful of
    distinct states cost O(distinct pairs) transcendental calls.
    """
    if len(p) != len(q):
        raise DimensionError(f"factor counts differ: {len(p)} vs {len(q)}")
    pairs = Counter(zip([f.half_angle for f in p.factors], [f.half_angle for f in q.factors]))
    return _log_product((math.cos(a - b), k) for (a, b), k in pairs.items())


def born_probability(state: ProductState, target: ProductState) -> float:
    """Probability that the rank-1 test ``|target><target|`` accepts ``state``."""
    return product_overlap(state, target) ** 2


# ---------------------------------------------------------------------------
# dense symmetric matrices


def check_symmetric(m: np.ndarray | Sequence[Sequence[float]]) -> np.ndarray:
    """Return ``m`` as a float array after checking it is square and symmetric."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {a.shape[0]} exceeds {MAX_DIM}")
    if a.size == 0:
        return a
    asym = np.max(np.abs(a - a.T))
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(a))):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    return a


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # circle method: n - 1 rounds of n/2 disjoint pairs cover every pair once
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def eigen_sym(m, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Rotations are applied in round-robin order so that each round is a set of
    disjoint plane rotations, applied together with array operations.

    Parameters
    ----------
    m : array_like, shape (d, d)
        Real symmetric matrix, ``d <= 1024``.
    tol : float
        Stop once the off-diagonal Frobenius norm is below
        ``tol * max(1, ||m||_F)``.
    max_sweeps : int
        Sweep budget; :class:`ConvergenceError` is raised when exhausted.

    Returns
    -------
    w : ndarray, shape (d,)
        Eigenvalues in ascending order.
    v : ndarray, shape (d, d)
        Orthonormal eigenvectors, column ``v[:, k]`` pairs with ``w[k]``.
    """
    a = check_symmetric(m).copy()
    d = a.shape[0]
    if d == 0:
        return np.zeros(0), np.zeros((0, 0))
    size = d + (d % 2)
    if size != d:
        # decoupled zero row/column; never rotated because its couplings stay 0
        a = np.pad(a, ((0, 1), (0, 1)))
    v = np.eye(size)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    def off_norm() -> float:
        off = a.copy()
        np.fill_diagonal(off, 0.0)
        return float(np.linalg.norm(off))

    rounds = _round_robin(size) if size > 1 else []
    for _ in range(max_sweeps):
        if off_norm() <= threshold:
            break
        for p, q in rounds:
            apq = a[p, q]
            if not np.any(apq):
                continue
            app = a[p, p]
            aqq = a[q, q]
            nz = apq != 0.0
            safe = np.where(nz, apq, 1.0)
            tau = (aqq - app) / (2.0 * safe)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            ap = a[:, p].copy()
            aq = a[:, q]
            a[:, p] = ap * c - aq * s
            a[:, q] = ap * s + aq * c
            ap = a[p, :].copy()
            aq = a[q, :]
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0

            vp = v[:, p].copy()
            vq = v[:, q]
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
    else:
        if off_norm() > threshold:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diag(a)[:d].copy()
    v = v[:d, :d]
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigvalsh(m) -> np.ndarray:
    return eigen_sym(m)[0]


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    return np.outer(vec, vec)


def trace_distance(rho0, rho1) -> float:
    """Half the trace norm of ``rho0 - rho1``."""
    r0 = check_symmetric(rho0)
    r1 = check_symmetric(rho1)
    if r0.shape != r1.shape:
        raise DimensionError(f"shapes differ: {r0.shape} vs {r1.shape}")
    return 0.5 * float(np.sum(np.abs(eigvalsh(r0 - r1))))


# ---------------------------------------------------------------------------
# POVMs


@dataclass(frozen=True)
class Povm:
    """Labelled positive operators that should sum to the identity."""

    elements: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        elements = []
        for lbl, e in self.elements:
            e = np.array(e, dtype=float)
            e.flags.writeable = False
            elements.append((lbl, e))
        object.__setattr__(self, "elements", tuple(elements))

    @property
    def labels(self) -> list[str]:
        return [lbl for lbl, _ in self.elements]

    @property
    def dim(self) -> int:
        return self.elements[0][1].shape[0]

    def __getitem__(self, label: str) -> np.ndarray:
        for lbl, e in self.elements:
            if lbl == label:
                return e
        raise KeyError(label)

    def probabilities(self, state: np.ndarray) -> dict[str, float]:
        """Outcome probabilities for a pure state given as an amplitude vector."""
        state = np.asarray(state, dtype=float)
        return {lbl: float(state @ e @ state) for lbl, e in self.elements}


@dataclass(frozen=True)
class PovmViolation:
    label: str | None
    condition: str
    residual: float

    def __str__(self) -> str:
        who = f"element {self.label!r}" if self.label is not None else "POVM"
        return f"{who}: {self.condition} violated (residual {self.residual:.3g})"


def validate_povm(povm: Povm, psd_tol: float = PSD_TOL, sum_tol: float = COMPLETENESS_TOL) -> list[PovmViolation]:
    """Check positivity and completeness; an empty list means the POVM is valid."""
    problems = []
    if not povm.elements:
        return [PovmViolation(None, "non-empty", 1.0)]
    dim = povm.dim
    total = np.zeros((dim, dim))
    for label, e in povm.elements:
        if e.shape != (dim, dim):
            problems.append(PovmViolation(label, "shape", float(abs(e.shape[0] - dim))))
            continue
        asym = float(np.max(np.abs(e - e.T)))
        if asym > SYMMETRY_TOL:
            problems.append(PovmViolation(label, "symmetry", asym))
            continue
        lowest = float(eigvalsh(e)[0])
        if lowest < -psd_tol:
            problems.append(PovmViolation(label, "positivity", lowest))
        total += e
    resid = float(np.max(np.abs(total - np.eye(dim))))
    if resid > sum_tol:
        problems.append(PovmViolation(None, "completeness", resid))
    return problems
