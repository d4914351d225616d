"""Optimal discrimination of two real pure states and of the parity of m of them.

Closed forms are checked against ``parity_error_oracle``, which builds the
two parity density matrices explicitly and takes their trace distance with
the Jacobi eigensolver from :mod:`qcointoss.qmath`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as cartesian

import numpy as np

from .qmath import (
    ProductState,
    Povm,
    product_overlap,
    projector,
    psi,
    trace_distance,
)

HALF_PI = math.pi / 2
MAX_ORACLE_M = 10
_ANGLE_SLACK = 1e-12

CONCLUSIVE_0 = "conclusive-0"
CONCLUSIVE_1 = "conclusive-1"
INCONCLUSIVE = "inconclusive"


def _check_angle(omega: float) -> float:
    if not (-_ANGLE_SLACK <= omega <= HALF_PI + _ANGLE_SLACK):
        raise ValueError(f"angle {omega!r} outside [0, pi/2]")
    return min(max(omega, 0.0), HALF_PI)


def _check_m(m: int) -> int:
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return int(m)


def helstrom_error(omega: float) -> float:
    """Minimum error probability for guessing a uniform bit coded in two pure states at angle ``omega``."""
    omega = _check_angle(omega)
    return 0.5 * (1.0 - math.sin(omega))


def conclusive_rate(omega: float) -> float:
    """Optimal probability of an unambiguous (never wrong) identification."""
    omega = _check_angle(omega)
    return 1.0 - math.cos(omega)


def false_claim_pass(omega: float) -> float:
    """Pass probability of the rank-1 test for one state when the other was sent."""
    omega = _check_angle(omega)
    return math.cos(omega) ** 2


@lru_cache(maxsize=512)
def build_unambiguous_povm(omega: float) -> Povm:
    """Three-outcome unambiguous discrimination POVM for ``psi(0)``, ``psi(1)`` at angle ``omega``.

    The conclusive-a element is the projector onto the vector orthogonal to
    psi(1 - a), scaled by ``1 / (1 + cos omega)``.  At ``omega = pi/2`` this
    is the projective measurement in the {psi(0), psi(1)} basis.

    Raises
    ------
    ValueError
        For ``omega = 0``, where no conclusive outcome exists, or for angles
        outside ``(0, pi/2]``.
    """
    omega = _check_angle(omega)
    if omega == 0.0:
        raise ValueError("degenerate angle 0: identical states admit no conclusive outcome")
    h = omega / 2
    scale = 1.0 / (1.0 + math.cos(omega))
    # psi(0) = (cos h, sin h), psi(1) = (cos h, -sin h)
    not_psi1 = np.array([math.sin(h), math.cos(h)])
    not_psi0 = np.array([math.sin(h), -math.cos(h)])
    e0 = scale * projector(not_psi1)
    e1 = scale * projector(not_psi0)
    rest = np.eye(2) - e0 - e1
    rest = 0.5 * (rest + rest.T)
    if omega == HALF_PI:
        rest = np.zeros((2, 2))
    return Povm(((CONCLUSIVE_0, e0), (CONCLUSIVE_1, e1), (INCONCLUSIVE, rest)))


def span_coordinates(state: ProductState, ref0: ProductState, ref1: ProductState) -> tuple[float, float, float]:
    """Coordinates of ``state`` projected onto span{ref0, ref1}.

    The basis is chosen so that ref0 and ref1 sit at half-angles +/- Omega/2
    where ``cos(Omega) = <ref0|ref1>``; this is the frame used by
    :func:`build_unambiguous_povm`.  Returns ``(x, y, omega)``.
    """
    g = product_overlap(ref0, ref1)
    omega = math.acos(min(max(g, -1.0), 1.0))
    o0 = product_overlap(state, ref0)
    o1 = product_overlap(state, ref1)
    x = (o0 + o1) / (2.0 * math.cos(omega / 2))
    y = (o0 - o1) / (2.0 * math.sin(omega / 2)) if omega > 0 else 0.0
    return x, y, omega


def unambiguous_probabilities(state: ProductState, ref0: ProductState, ref1: ProductState) -> dict[str, float]:
    """Outcome distribution of unambiguous discrimination of ref0/ref1 applied to ``state``.

    The measurement acts as :func:`build_unambiguous_povm` on the span of the
    two references; the orthogonal complement is assigned to "inconclusive".
    """
    x, y, omega = span_coordinates(state, ref0, ref1)
    if omega == 0.0:
        return {CONCLUSIVE_0: 0.0, CONCLUSIVE_1: 0.0, INCONCLUSIVE: 1.0}
    probs = build_unambiguous_povm(omega).probabilities(np.array([x, y]))
    probs[CONCLUSIVE_0] = max(probs[CONCLUSIVE_0], 0.0)
    probs[CONCLUSIVE_1] = max(probs[CONCLUSIVE_1], 0.0)
    probs[INCONCLUSIVE] = max(1.0 - probs[CONCLUSIVE_0] - probs[CONCLUSIVE_1], 0.0)
    return probs


# ---------------------------------------------------------------------------
# parity of m coded bits


@dataclass(frozen=True)
class ParityBlock:
    """One 2x2 block type of the parity density matrices.

    ``block_plus`` belongs to parity 0 and ``block_minus`` to parity 1; there
    are ``multiplicity`` identical blocks of this type.
    """

    k: int
    multiplicity: int
    trace: float
    block_plus: np.ndarray
    block_minus: np.ndarray
    angle: float

    @property
    def helstrom_error(self) -> float:
        a = math.cos(self.angle / 2)
        b = math.sin(self.angle / 2)
        return 0.5 * (a - b) ** 2


def parity_blocks(m: int, omega: float) -> list[ParityBlock]:
    """Block decomposition of the two parity density matrices.

    Basis strings x and their complements pair up into 2x2 blocks; a block
    whose lighter string has weight k occurs C(m, k) times.  For even m the
    self-paired weight m/2 strings give C(m, m/2)/2 extra blocks with k = m/2.
    """
    m = _check_m(m)
    omega = _check_angle(omega)
    c = math.cos(omega / 2)
    s = math.sin(omega / 2)
    off = (c * s) ** m
    blocks = []
    for k in range(m // 2 + 1):
        if 2 * k == m:
            mult = math.comb(m, k) // 2
        else:
            mult = math.comb(m, k)
        if 2 * k > m:
            break
        hi = c ** (2 * (m - k)) * s ** (2 * k)
        lo = c ** (2 * k) * s ** (2 * (m - k))
        plus = np.array([[hi, off], [off, lo]])
        minus = np.array([[hi, -off], [-off, lo]])
        angle = 2.0 * math.atan2(c**k * s ** (m - k), c ** (m - k) * s**k)
        blocks.append(ParityBlock(k, mult, hi + lo, plus, minus, angle))
    return blocks


def parity_error_exact(m: int, omega: float) -> float:
    """Minimum error for guessing the parity of m bits, each coded at angle ``omega``."""
    m = _check_m(m)
    omega = _check_angle(omega)
    return 0.5 * (1.0 - math.sin(omega) ** m)


def parity_error_from_blocks(m: int, omega: float) -> float:
    """Same quantity as :func:`parity_error_exact`, averaged block by block."""
    return math.fsum(b.multiplicity * b.trace * b.helstrom_error for b in parity_blocks(m, omega))


def parity_conclusive_bound(m: int, omega: float) -> float:
    """Upper bound ``1 - 2 PE(m) = sin(omega)**m`` on a conclusive parity outcome."""
    m = _check_m(m)
    omega = _check_angle(omega)
    return math.sin(omega) ** m


def product_conclusive_rate(m: int, omega: float) -> float:
    """Rate achieved by m independent unambiguous measurements: ``(1 - cos omega)**m``."""
    m = _check_m(m)
    return conclusive_rate(omega) ** m


def parity_density_matrix(parity: int, m: int, omega: float) -> np.ndarray:
    """Uniform mixture of the product states psi(a_1)...psi(a_m) with the given parity."""
    m = _check_m(m)
    if m > MAX_ORACLE_M:
        raise MemoryError(f"m = {m} exceeds the dense oracle limit {MAX_ORACLE_M}")
    if parity not in (0, 1):
        raise ValueError(f"parity must be 0 or 1, got {parity!r}")
    omega = _check_angle(omega)
    states = [psi(0, omega), psi(1, omega)]
    rows = []
    for bits in cartesian((0, 1), repeat=m):
        if sum(bits) % 2 == parity:
            rows.append(ProductState(tuple(states[b] for b in bits)).vector())
    vecs = np.array(rows)
    rho = vecs.T @ vecs / len(rows)
    return 0.5 * (rho + rho.T)


def parity_error_oracle(m: int, omega: float) -> float:
    """Brute-force parity error: ``(1 - D(rho_0, rho_1)) / 2`` with explicit density matrices."""
    rho0 = parity_density_matrix(0, m, omega)
    rho1 = parity_density_matrix(1, m, omega)
    return 0.5 * (1.0 - trace_distance(rho0, rho1))


def parity_guess_probabilities(coords: list[tuple[float, float]]) -> tuple[float, float]:
    """Outcome probabilities of the optimal parity measurement on a product of effective qubits.

    Each entry of ``coords`` is the (x, y) amplitude pair of one position in
    the frame where the two coding states sit at +/- Omega/2.  Within every
    block {x, complement(x)} the measurement projects onto
    (|x> +/- |x_bar>)/sqrt(2); "+" reports parity 0.  Mass outside the
    coding span is reported as parity 0.

    Returns ``(p_guess_0, p_guess_1)``.
    """
    m = len(coords)
    amp = np.ones(1)
    for x, y in coords:
        amp = np.kron(amp, np.array([x, y]))
    half = amp.size // 2
    head = amp[:half]
    tail = amp[::-1][:half]
    p0 = 0.5 * float(np.sum((head + tail) ** 2))
    p1 = 0.5 * float(np.sum((head - tail) ** 2))
    if m == 0:
        return 1.0, 0.0
    outside = max(1.0 - p0 - p1, 0.0)
    return p0 + outside, p1
