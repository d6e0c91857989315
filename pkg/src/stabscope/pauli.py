"""Bit-level Pauli-string algebra and Clifford tableaus.

A Pauli string on ``n`` qubits is stored as two integer bit masks (bit ``j``
is qubit ``j``) plus a global sign.  Site letters are encoded by the
(x, z) bit pair: I=(0,0), X=(1,0), Z=(0,1) and Y=(1,1), where Y means the
Hermitian Pauli Y, not the product XZ.  All phase bookkeeping therefore
lives in the global sign/phase fields and conjugation by a Clifford only
ever toggles a sign.

A Clifford element is represented by its conjugation action alone: the
images of the X_j and Z_j generators (a tableau).  Phases of the unitary
itself are irrelevant for every quantity computed in this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Letter codes shared by all snapshot formats: lexicographic I < X < Y < Z.
I, X, Y, Z = 0, 1, 2, 3

_LETTER_NAMES = "IXYZ"
# letter -> (x bit, z bit)
_LETTER_BITS = {I: (0, 0), X: (1, 0), Y: (1, 1), Z: (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


def _check_same_n(a, b):
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} != {b.n}")


@dataclass(frozen=True)
class PauliString:
    """Hermitian n-qubit Pauli operator: sign * (letter_0 ⊗ ... ⊗ letter_{n-1})."""

    n: int
    x_mask: int
    z_mask: int
    sign: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        full = (1 << self.n) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask has bits outside the qubit range")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 1)

    @classmethod
    def from_letters(cls, letters, sign: int = 1) -> "PauliString":
        letters = list(letters)
        x = z = 0
        for j, let in enumerate(letters):
            xb, zb = _LETTER_BITS[int(let)]
            x |= xb << j
            z |= zb << j
        return cls(len(letters), x, z, sign)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse e.g. ``"XIZ"`` or ``"-YY"`` (site 0 first)."""
        sign = 1
        if label.startswith("-"):
            sign, label = -1, label[1:]
        elif label.startswith("+"):
            label = label[1:]
        return cls.from_letters([_LETTER_NAMES.index(c) for c in label], sign)

    @classmethod
    def single(cls, n: int, site: int, letter: int, sign: int = 1) -> "PauliString":
        if not 0 <= site < n:
            raise ValueError("site out of range")
        xb, zb = _LETTER_BITS[letter]
        return cls(n, xb << site, zb << site, sign)

    def letter(self, j: int) -> int:
        return _BITS_LETTER[((self.x_mask >> j) & 1, (self.z_mask >> j) & 1)]

    def letters(self) -> tuple[int, ...]:
        return tuple(self.letter(j) for j in range(self.n))

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def __str__(self):
        body = "".join(_LETTER_NAMES[let] for let in self.letters())
        return ("-" if self.sign < 0 else "+") + body


@dataclass(frozen=True)
class PhasedPauli:
    """A Pauli string with an overall phase i**phase.

    The embedded string always carries sign +1; the phase exponent holds the
    entire prefactor (so ``-Z`` is ``string=+Z, phase=2``).
    """

    string: PauliString
    phase: int  # exponent of i, mod 4

    def __post_init__(self):
        if self.phase not in (0, 1, 2, 3):
            raise ValueError("phase exponent must be in {0,1,2,3}")
        if self.string.sign != 1:
            raise ValueError("embedded string must carry sign +1")

    def hermitian(self) -> PauliString:
        """Collapse the phase into a ±1 sign; requires phase in {0, 2}."""
        if self.phase % 2:
            raise ValueError("phase is imaginary; operator is not Hermitian")
        sign = 1 if self.phase == 0 else -1
        s = self.string
        return PauliString(s.n, s.x_mask, s.z_mask, sign)


def _mul_masks(x1: int, z1: int, x2: int, z2: int) -> tuple[int, int, int]:
    """Multiply two sign-free Hermitian strings; returns (x, z, phase exponent).

    Phase derivation: each site letter is i^{xz} X^x Z^z, so the product picks
    up i^{x1z1 + x2z2 - x3z3} from re-normalising letters and (-1)^{z1·x2}
    from commuting Z past X.
    """
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    k = (
        (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (z1 & x2).bit_count()
    )
    return x3, z3, k % 4


def pauli_mul(a: PauliString, b: PauliString) -> PhasedPauli:
    """Product a·b with the exact phase."""
    _check_same_n(a, b)
    x3, z3, k = _mul_masks(a.x_mask, a.z_mask, b.x_mask, b.z_mask)
    if a.sign < 0:
        k += 2
    if b.sign < 0:
        k += 2
    return PhasedPauli(PauliString(a.n, x3, z3, 1), k % 4)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic form <a.x,b.z> + <a.z,b.x> is even."""
    _check_same_n(a, b)
    return ((a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()) % 2 == 0


@dataclass(frozen=True)
class CliffordTableau:
    """Conjugation action of a Clifford unitary: images of X_j and Z_j."""

    n: int
    x_images: tuple[PauliString, ...]
    z_images: tuple[PauliString, ...]

    def __post_init__(self):
        if len(self.x_images) != self.n or len(self.z_images) != self.n:
            raise ValueError("need exactly n X-images and n Z-images")
        for p in self.x_images + self.z_images:
            if p.n != self.n:
                raise DimensionError("image qubit count mismatch")

    def is_symplectic(self) -> bool:
        """Generator images anticommute exactly where X_j, Z_j do."""
        gens = self.x_images + self.z_images
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                should_commute = j != i + self.n
                if commutes(gens[i], gens[j]) != should_commute:
                    return False
        return True


def identity_tableau(n: int) -> CliffordTableau:
    xs = tuple(PauliString.single(n, j, X) for j in range(n))
    zs = tuple(PauliString.single(n, j, Z) for j in range(n))
    return CliffordTableau(n, xs, zs)


def conjugate(t: CliffordTableau, p: PauliString) -> PauliString:
    """U p U† for the Clifford U represented by the tableau.

    Decomposes p into i^{x_j z_j} X_j^{x_j} Z_j^{z_j} per site and substitutes
    the generator images; the accumulated phase must come out real.
    """
    if t.n != p.n:
        raise DimensionError(f"qubit counts differ: {t.n} != {p.n}")
    x_acc = z_acc = 0
    # each Y letter decomposes as i * X Z before substituting images
    k = (p.x_mask & p.z_mask).bit_count()
    if p.sign < 0:
        k += 2
    for j in range(p.n):
        if (p.x_mask >> j) & 1:
            img = t.x_images[j]
            x_acc, z_acc, dk = _mul_masks(x_acc, z_acc, img.x_mask, img.z_mask)
            k += dk + (0 if img.sign > 0 else 2)
        if (p.z_mask >> j) & 1:
            img = t.z_images[j]
            x_acc, z_acc, dk = _mul_masks(x_acc, z_acc, img.x_mask, img.z_mask)
            k += dk + (0 if img.sign > 0 else 2)
    k %= 4
    if k % 2:
        raise AssertionError("conjugation produced a non-Hermitian phase")
    return PauliString(p.n, x_acc, z_acc, 1 if k == 0 else -1)


def compose(outer: CliffordTableau, inner: CliffordTableau) -> CliffordTableau:
    """Tableau of outer∘inner, i.e. conjugation by (U_outer · U_inner)."""
    if outer.n != inner.n:
        raise DimensionError(f"qubit counts differ: {outer.n} != {inner.n}")
    xs = tuple(conjugate(outer, p) for p in inner.x_images)
    zs = tuple(conjugate(outer, p) for p in inner.z_images)
    return CliffordTableau(outer.n, xs, zs)


def gate_tableau(gate: str, n: int, *qubits: int) -> CliffordTableau:
    """Tableau of a generator gate: "H", "S" (one qubit) or "CNOT" (control, target)."""
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for n={n}")
    xs = [PauliString.single(n, j, X) for j in range(n)]
    zs = [PauliString.single(n, j, Z) for j in range(n)]
    if gate == "H":
        (j,) = qubits
        xs[j] = PauliString.single(n, j, Z)
        zs[j] = PauliString.single(n, j, X)
    elif gate == "S":
        (j,) = qubits
        xs[j] = PauliString.single(n, j, Y)
    elif gate == "CNOT":
        c, t = qubits
        if c == t:
            raise ValueError("control and target must differ")
        xs[c] = PauliString.from_letters(
            [X if j in (c, t) else I for j in range(n)]
        )
        zs[t] = PauliString.from_letters(
            [Z if j in (c, t) else I for j in range(n)]
        )
    else:
        raise ValueError(f"unknown gate {gate!r}")
    return CliffordTableau(n, tuple(xs), tuple(zs))


def embed_tableau(t: CliffordTableau, qubits: tuple[int, ...], n: int) -> CliffordTableau:
    """Embed a small tableau acting on the given qubits into n qubits."""
    if len(qubits) != t.n:
        raise DimensionError("qubit tuple length must match tableau size")
    if len(set(qubits)) != len(qubits) or not all(0 <= q < n for q in qubits):
        raise ValueError("invalid qubit placement")

    def lift(p: PauliString) -> PauliString:
        x = z = 0
        for local, q in enumerate(qubits):
            x |= ((p.x_mask >> local) & 1) << q
            z |= ((p.z_mask >> local) & 1) << q
        return PauliString(n, x, z, p.sign)

    xs = [PauliString.single(n, j, X) for j in range(n)]
    zs = [PauliString.single(n, j, Z) for j in range(n)]
    for local, q in enumerate(qubits):
        xs[q] = lift(t.x_images[local])
        zs[q] = lift(t.z_images[local])
    return CliffordTableau(n, tuple(xs), tuple(zs))


# ---------------------------------------------------------------------------
# Uniform sampling over the Clifford group mod phases.
#
# A tableau is a uniformly random binary symplectic matrix plus independent
# uniform ±1 signs on the 2n generator images.  The symplectic matrix is
# drawn by the canonical-form construction: pick the image of X_0 uniformly
# among nonzero vectors, the image of Z_0 uniformly among vectors that
# anticommute with it, map the standard pair onto them with at most four
# transvections and recurse on the symplectic complement.  Every group
# element is produced by exactly one digit sequence, so the draw is exact.
# ---------------------------------------------------------------------------


def _sympl_inner(u: np.ndarray, v: np.ndarray) -> int:
    # interleaved layout: components (x_0, z_0, x_1, z_1, ...)
    return int((u[0::2] @ v[1::2] + u[1::2] @ v[0::2]) % 2)


def _transvect(h: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Apply the symplectic transvection v -> v + <v,h> h to every row."""
    if not h.any():
        return rows
    ips = (rows[:, 0::2] @ h[1::2] + rows[:, 1::2] @ h[0::2]) % 2
    return (rows + np.outer(ips, h)) % 2


def _find_transvection(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectors h1, h2 with Z_h2 Z_h1 x = y, for nonzero x and y."""
    zero = np.zeros_like(x)
    if np.array_equal(x, y):
        return zero, zero
    if _sympl_inner(x, y) == 1:
        return (x + y) % 2, zero
    # disjoint commuting case: route through a z with <x,z> = <z,y> = 1
    z = np.zeros_like(x)
    for q in range(len(x) // 2):
        ii = 2 * q
        if (x[ii] or x[ii + 1]) and (y[ii] or y[ii + 1]):
            z[ii] = (x[ii] + y[ii]) % 2
            z[ii + 1] = (x[ii + 1] + y[ii + 1]) % 2
            if z[ii] == 0 and z[ii + 1] == 0:
                z[ii + 1] = 1
                if x[ii] != x[ii + 1]:
                    z[ii] = 1
            return (x + z) % 2, (y + z) % 2
    for q in range(len(x) // 2):
        ii = 2 * q
        if (x[ii] or x[ii + 1]) and not (y[ii] or y[ii + 1]):
            if x[ii] == x[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = x[ii]
                z[ii] = x[ii + 1]
            break
    for q in range(len(x) // 2):
        ii = 2 * q
        if not (x[ii] or x[ii + 1]) and (y[ii] or y[ii + 1]):
            if y[ii] == y[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = y[ii]
                z[ii] = y[ii + 1]
            break
    return (x + z) % 2, (y + z) % 2


def _random_symplectic_rows(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform element of Sp(2n, F2); rows are generator images, interleaved."""
    nn = 2 * n
    f1 = rng.integers(0, 2, size=nn, dtype=np.int64)
    while not f1.any():
        f1 = rng.integers(0, 2, size=nn, dtype=np.int64)
    e1 = np.zeros(nn, dtype=np.int64)
    e1[0] = 1
    t1, t2 = _find_transvection(e1, f1)
    bits = rng.integers(0, 2, size=nn - 1, dtype=np.int64)
    eprime = e1.copy()
    eprime[2:] = bits[1:]
    h0 = _transvect(t2, _transvect(t1, eprime[None, :]))[0]
    if bits[0]:
        f1 = np.zeros_like(f1)
    if n == 1:
        g = np.eye(2, dtype=np.int64)
    else:
        g = np.zeros((nn, nn), dtype=np.int64)
        g[:2, :2] = np.eye(2, dtype=np.int64)
        g[2:, 2:] = _random_symplectic_rows(n - 1, rng)
    for h in (t1, t2, h0, f1):
        g = _transvect(h, g)
    return g


def _row_to_string(row: np.ndarray, sign: int) -> PauliString:
    n = len(row) // 2
    x = z = 0
    for q in range(n):
        x |= int(row[2 * q]) << q
        z |= int(row[2 * q + 1]) << q
    return PauliString(n, x, z, sign)


def random_clifford(n: int, rng: np.random.Generator) -> CliffordTableau:
    """Uniform draw from the n-qubit Clifford group modulo global phase."""
    if n < 1:
        raise ValueError("need at least one qubit")
    rows = _random_symplectic_rows(n, rng)
    signs = 1 - 2 * rng.integers(0, 2, size=2 * n)
    xs = tuple(_row_to_string(rows[2 * j], int(signs[2 * j])) for j in range(n))
    zs = tuple(_row_to_string(rows[2 * j + 1], int(signs[2 * j + 1])) for j in range(n))
    return CliffordTableau(n, xs, zs)


def enumerate_cliffords_1q() -> list[CliffordTableau]:
    """All 24 single-qubit tableaus (6 symplectic maps × 4 sign pairs)."""
    nonzero = [PauliString.from_letters([let]) for let in (X, Y, Z)]
    out = []
    for xi in nonzero:
        for zi in nonzero:
            if xi.letters() == zi.letters():
                continue
            for sx in (1, -1):
                for sz in (1, -1):
                    out.append(
                        CliffordTableau(
                            1,
                            (PauliString(1, xi.x_mask, xi.z_mask, sx),),
                            (PauliString(1, zi.x_mask, zi.z_mask, sz),),
                        )
                    )
    return out


def tableau_key(t: CliffordTableau) -> tuple:
    """Hashable identity of a tableau (for counting / set membership)."""
    return tuple(
        (p.x_mask, p.z_mask, p.sign) for p in (t.x_images + t.z_images)
    )
