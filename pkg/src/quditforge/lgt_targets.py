"""Lattice-gauge-theory primitive gate targets and permutation metrics.

Group elements are stored in qudit levels ``|0>, ..., |G|-1>``.  A
permutation is written as a tuple ``p`` where ``p[i] = j`` means the gate
sends ``|j>`` to ``|i>``; its matrix has a 1 at row ``i``, column ``p[i]``.

Givens-style building blocks act on two levels ``(a, b)`` of a ``d``-level
qudit and as the identity elsewhere.  Angle vectors for the composite
rotations are consumed left to right in product order:

* ``u2``: ``[z0, x1, z2]`` for ``RZ(z0) RX(x1) RZ(z2)``  (3 angles)
* ``u3``: ``[u2 (3), rx_bc (1), u2 (3), rz_bc (1)]``      (8 angles)
* ``u6``: ``[u3_abc (8), u3_def (8), u2_ad (3), u2_be (3), u2_cf (3)]``  (25 angles)
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, MissingRepresentation, WrongAngleCount
from .operator_core import FockSpace

# ---------------------------------------------------------------------------
# Groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupTable:
    order: int
    mult: np.ndarray
    inv: np.ndarray
    classes: tuple
    rep2: np.ndarray | None = None
    labels: tuple = field(default=())

    @property
    def elements(self) -> list[int]:
        return list(range(self.order))

    @property
    def identity(self) -> int:
        ar = np.arange(self.order)
        return next(g for g in range(self.order) if np.array_equal(self.mult[g], ar))


def _conjugacy_classes(mult: np.ndarray, inv: np.ndarray) -> tuple:
    n = len(inv)
    seen = np.zeros(n, dtype=bool)
    classes = []
    for g in range(n):
        if seen[g]:
            continue
        orbit = sorted({int(mult[mult[h, g], inv[h]]) for h in range(n)})
        seen[orbit] = True
        classes.append(tuple(orbit))
    return tuple(classes)


def _table_from_mult(mult, rep2=None, labels=()) -> GroupTable:
    mult = np.asarray(mult, dtype=int)
    n = mult.shape[0]
    e = next(g for g in range(n) if np.array_equal(mult[g], np.arange(n)))
    inv = np.array([int(np.flatnonzero(mult[g] == e)[0]) for g in range(n)])
    return GroupTable(n, mult, inv, _conjugacy_classes(mult, inv), rep2, tuple(labels))


def _qmul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def quaternion_su2(q) -> np.ndarray:
    """w + xi + yj + zk  ->  [[w + ix, y + iz], [-y + iz, w - ix]]."""
    w, x, y, z = q
    return np.array([[w + 1j * x, y + 1j * z], [-y + 1j * z, w - 1j * x]])


def binary_tetrahedral() -> GroupTable:
    """The 24 unit quaternions {+-1, +-i, +-j, +-k, (+-1 +-i +-j +-k)/2}.

    Elements are sorted in descending lexicographic order of their
    (w, x, y, z) components, which puts the identity at index 0.
    """
    quats = set()
    for axis in range(4):
        for s in (1.0, -1.0):
            v = [0.0] * 4
            v[axis] = s
            quats.add(tuple(v))
    for signs in itertools.product((0.5, -0.5), repeat=4):
        quats.add(signs)
    quats = sorted(quats, reverse=True)
    index = {q: i for i, q in enumerate(quats)}
    mult = np.array([[index[_qmul(p, q)] for q in quats] for p in quats])
    rep2 = np.array([quaternion_su2(q) for q in quats])
    return _table_from_mult(mult, rep2, labels=tuple(quats))


def cyclic_group(n: int) -> GroupTable:
    """Z_n with rep2(g) = diag(w^g, w^-g), w = exp(2 pi i / n)."""
    mult = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    w = np.exp(2j * np.pi * np.arange(n) / n)
    rep2 = np.array([np.diag([wg, wg.conjugate()]) for wg in w])
    return _table_from_mult(mult, rep2, labels=tuple(range(n)))


# ---------------------------------------------------------------------------
# Permutations
# ---------------------------------------------------------------------------


def _check_perm(p) -> tuple:
    p = tuple(int(x) for x in p)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"{p} is not a permutation of 0..{len(p) - 1}")
    return p


def inverse_permutation(G: GroupTable) -> tuple:
    """Tuple of the gate |g> -> |g^-1> (an involution, so p = inv)."""
    return tuple(int(x) for x in G.inv)


def multiplication_permutations(G: GroupTable) -> list[tuple]:
    """Target-register permutation |h> -> |g h> for every control g.

    Under the tuple convention entry i holds the source level, i.e.
    p[g h] = h, so p[i] = g^-1 i.
    """
    return [tuple(int(G.mult[G.inv[g], i]) for i in range(G.order)) for g in range(G.order)]


def multiplication_gate(G: GroupTable) -> np.ndarray:
    """|g>|h> -> |g>|g h> on the |G|^2 product space (small groups only)."""
    n = G.order
    if n > 6:
        raise ValueError(f"controlled multiplication matrices are built only for |G| <= 6, got {n}")
    U = np.zeros((n * n, n * n), dtype=complex)
    for g in range(n):
        for h in range(n):
            U[g * n + G.mult[g, h], g * n + h] = 1.0
    return U


def permutation_matrix(p) -> np.ndarray:
    p = _check_perm(p)
    M = np.zeros((len(p), len(p)), dtype=complex)
    M[np.arange(len(p)), p] = 1.0
    return M


def permutation_inverse(p) -> tuple:
    p = _check_perm(p)
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def trace_phase_gate(G: GroupTable, theta: float) -> np.ndarray:
    """diag(exp(i theta Re Tr rep2(g)))."""
    if G.rep2 is None:
        raise MissingRepresentation("group table has no defining representation")
    re_tr = np.real(np.trace(G.rep2, axis1=1, axis2=2))
    return np.diag(np.exp(1j * theta * re_tr))


def kendall_from_identity(p) -> float:
    """(n_c - n_d) / (n_c + n_d) of the tuple against (0, 1, ..., d-1)."""
    p = _check_perm(p)
    n_c = n_d = 0
    for i, j in itertools.combinations(range(len(p)), 2):
        if p[i] < p[j]:
            n_c += 1
        else:
            n_d += 1
    if n_c + n_d == 0:
        return 1.0
    return (n_c - n_d) / (n_c + n_d)


def adjacent_transposition_distance(p) -> int:
    """Fewest adjacent swaps turning the identity into ``p`` (inversion count)."""
    seq = list(_check_perm(p))

    def count(lo, hi):
        if hi - lo <= 1:
            return 0
        mid = (lo + hi) // 2
        n = count(lo, mid) + count(mid, hi)
        merged, i, j = [], lo, mid
        while i < mid and j < hi:
            if seq[i] <= seq[j]:
                merged.append(seq[i])
                i += 1
            else:
                merged.append(seq[j])
                n += mid - i
                j += 1
        seq[lo:hi] = merged + seq[i:mid] + seq[j:hi]
        return n

    return count(0, len(seq))


# ---------------------------------------------------------------------------
# Two-level embeddings and Givens-style rotations
# ---------------------------------------------------------------------------


def _check_pair(a, b, d):
    if a == b:
        raise ValueError(f"levels must differ, got a = b = {a}")
    if not (0 <= a < d and 0 <= b < d):
        raise IndexOutOfRange(f"levels ({a}, {b}) outside 0..{d - 1}")


def _embed(a, b, block, d) -> np.ndarray:
    _check_pair(a, b, d)
    U = np.eye(d, dtype=complex)
    idx = [a, b]
    U[np.ix_(idx, idx)] = block
    return U


def pauli_x_embed(a: int, b: int, d: int) -> np.ndarray:
    return _embed(a, b, np.array([[0, 1], [1, 0]]), d)


def rz_embed(a: int, b: int, theta: float, d: int) -> np.ndarray:
    """exp(-i theta sigma_z / 2) on levels (a, b)."""
    return _embed(a, b, np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]), d)


def rx_embed(a: int, b: int, theta: float, d: int) -> np.ndarray:
    """exp(-i theta sigma_x / 2) on levels (a, b)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return _embed(a, b, np.array([[c, -1j * s], [-1j * s, c]]), d)


def _angles(thetas, n):
    thetas = np.asarray(thetas, dtype=float).ravel()
    if thetas.size != n:
        raise WrongAngleCount(f"expected {n} angles, got {thetas.size}")
    return thetas


def u2(a: int, b: int, thetas, d: int) -> np.ndarray:
    t = _angles(thetas, 3)
    return rz_embed(a, b, t[0], d) @ rx_embed(a, b, t[1], d) @ rz_embed(a, b, t[2], d)


def u3(a: int, b: int, c: int, thetas, d: int) -> np.ndarray:
    if len({a, b, c}) != 3:
        raise ValueError(f"levels must be distinct, got {(a, b, c)}")
    t = _angles(thetas, 8)
    return u2(a, b, t[0:3], d) @ rx_embed(b, c, t[3], d) @ u2(a, b, t[4:7], d) @ rz_embed(b, c, t[7], d)


def u6(levels, thetas, d: int) -> np.ndarray:
    """U3(a,b,c) U3(d,e,f) U2(a,d) U2(b,e) U2(c,f) for levels = (a, b, c, d, e, f)."""
    if len(levels) != 6 or len(set(levels)) != 6:
        raise ValueError(f"u6 needs six distinct levels, got {levels}")
    for lv in levels:
        if not 0 <= lv < d:
            raise IndexOutOfRange(f"level {lv} outside 0..{d - 1}")
    a, b, c, e, f, g = levels
    t = _angles(thetas, 25)
    return (
        u3(a, b, c, t[0:8], d)
        @ u3(e, f, g, t[8:16], d)
        @ u2(a, e, t[16:19], d)
        @ u2(b, f, t[19:22], d)
        @ u2(c, g, t[22:25], d)
    )


V9_LEVELS = (
    (0, 9, 16, 1, 8, 17),
    (2, 14, 20, 3, 15, 21),
    (4, 11, 23, 5, 10, 22),
    (6, 12, 19, 7, 13, 18),
)


def v1_bt(thetas, d: int = 24) -> np.ndarray:
    """Product of U2 on the pairs (2a, 2a+1), a = 0..11; 36 angles."""
    if d != 24:
        raise ValueError("v1_bt is defined on the 24-level qudit")
    t = _angles(thetas, 36).reshape(12, 3)
    U = np.eye(d, dtype=complex)
    for a in range(12):
        U = U @ u2(2 * a, 2 * a + 1, t[a], d)
    return U


def v9_bt(theta_lists, d: int = 24) -> np.ndarray:
    """Product of four U6 factors on the fixed level tuples; 4 x 25 angles."""
    if d != 24:
        raise ValueError("v9_bt is defined on the 24-level qudit")
    t = _angles(theta_lists, 100).reshape(4, 25)
    U = np.eye(d, dtype=complex)
    for levels, angles in zip(V9_LEVELS, t):
        U = U @ u6(levels, angles, d)
    return U


# ---------------------------------------------------------------------------
# Prototype states
# ---------------------------------------------------------------------------


def fock_state(n: int, space: FockSpace) -> np.ndarray:
    if not 0 <= n < space.d:
        raise IndexOutOfRange(f"Fock level {n} outside computational range 0..{space.d - 1}")
    psi = np.zeros((space.N, 1), dtype=complex)
    psi[n, 0] = 1.0
    return psi


def hadamard_state(d: int, space: FockSpace) -> np.ndarray:
    if d != space.d:
        raise ValueError(f"d = {d} does not match the space (d = {space.d})")
    psi = np.zeros((space.N, 1), dtype=complex)
    psi[:d, 0] = 1 / np.sqrt(d)
    return psi


# ---------------------------------------------------------------------------
# Named targets
# ---------------------------------------------------------------------------

_TERM = re.compile(r"(X|RX|RZ|U2)\(([^()]*)\)", re.IGNORECASE)


def parse_angle(text: str) -> float:
    """Angles like ``pi/10``, ``2pi/15``, ``0.3``."""
    text = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"([-+]?[0-9.]*)\*?pi(?:/([0-9.]+))?", text)
    if m:
        coef = m.group(1)
        coef = -1.0 if coef == "-" else (1.0 if coef in ("", "+") else float(coef))
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * np.pi / den
    return float(text)


def gate_target(name: str, d: int) -> np.ndarray:
    """Build a d x d target from a name.

    Accepted forms: ``X(a,b)``, ``RX(a,b,theta)``, ``RZ(a,b,theta)``,
    ``U2(a,b,t0,t1,t2)``, products written by juxtaposition such as
    ``X(2,3)X(4,5)`` (leftmost factor acts last), ``perm(1,0,2)``,
    ``identity``, ``inverse:BT``, ``trace:BT:theta``.
    """
    key = name.strip()
    low = key.lower()
    if low in ("identity", "id", "i"):
        return np.eye(d, dtype=complex)
    if low.startswith("perm"):
        p = tuple(int(x) for x in re.findall(r"-?\d+", key))
        if len(p) != d:
            raise ValueError(f"{key} has length {len(p)}, qudit has d = {d}")
        return permutation_matrix(p)
    if low.startswith(("inverse:", "trace:")):
        parts = key.split(":")
        group = _named_group(parts[1])
        if group.order != d:
            raise ValueError(f"group of order {group.order} needs d = {group.order}, got {d}")
        if parts[0].lower() == "inverse":
            return permutation_matrix(inverse_permutation(group))
        return trace_phase_gate(group, parse_angle(parts[2]))
    terms = _TERM.findall(key)
    if not terms or "".join(f"{k}({a})" for k, a in terms).replace(" ", "").lower() != low.replace(" ", ""):
        raise ValueError(f"unrecognised target {name!r}")
    U = np.eye(d, dtype=complex)
    for kind, args in terms:
        parts = [s for s in args.split(",")]
        a, b = int(parts[0]), int(parts[1])
        kind = kind.upper()
        if kind == "X":
            U = U @ pauli_x_embed(a, b, d)
        elif kind == "RX":
            U = U @ rx_embed(a, b, parse_angle(parts[2]), d)
        elif kind == "RZ":
            U = U @ rz_embed(a, b, parse_angle(parts[2]), d)
        else:
            U = U @ u2(a, b, [parse_angle(s) for s in parts[2:5]], d)
    return U


def _named_group(name: str) -> GroupTable:
    name = name.strip().upper()
    if name in ("BT", "2T", "BINARY_TETRAHEDRAL"):
        return binary_tetrahedral()
    m = re.fullmatch(r"Z(\d+)", name)
    if m:
        return cyclic_group(int(m.group(1)))
    raise ValueError(f"unknown group {name!r}")


def state_target(name: str, space: FockSpace) -> np.ndarray:
    """``fock:n`` or ``hadamard``."""
    low = name.strip().lower()
    if low == "hadamard":
        return hadamard_state(space.d, space)
    m = re.fullmatch(r"fock[:(]?(\d+)\)?", low)
    if m:
        return fock_state(int(m.group(1)), space)
    raise ValueError(f"unrecognised state {name!r}")
