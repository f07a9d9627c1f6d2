"""Disk-model Moebius geometry and Fuchsian group word enumeration.

An orientation preserving isometry of the Poincare disk is stored as the pair
``(a, b)`` of the SU(1,1) matrix ``[[a, b], [conj(b), conj(a)]]``.  Group
elements are only ever defined up to an overall sign (PSU(1,1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree

DEFAULT_WORD_CAP = 10


@dataclass(frozen=True)
class MobiusTransform:
    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls(1.0, 0.0)

    @classmethod
    def rotation(cls, phi: float) -> "MobiusTransform":
        """Rotation ``z -> exp(i phi) z``."""
        return cls(complex(math.cos(phi / 2), math.sin(phi / 2)), 0.0)

    @classmethod
    def translation_to(cls, p: complex) -> "MobiusTransform":
        """Hyperbolic translation sending 0 to ``p`` along the diameter."""
        p = complex(p)
        if abs(p) >= 1:
            raise ValueError("translation target must lie in the open disk")
        s = 1.0 / math.sqrt(1.0 - abs(p) ** 2)
        return cls(s, s * p)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b.conjugate(), self.a.conjugate()]])

    @property
    def det(self) -> float:
        return abs(self.a) ** 2 - abs(self.b) ** 2

    @property
    def trace(self) -> float:
        return 2.0 * self.a.real

    def __matmul__(self, other: "MobiusTransform") -> "MobiusTransform":
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return MobiusTransform(a1 * a2 + b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())

    def inverse(self) -> "MobiusTransform":
        return MobiusTransform(self.a.conjugate(), -self.b)

    def distance(self, other: "MobiusTransform") -> float:
        """Frobenius distance in PSU(1,1), i.e. minimised over the sign of ``other``."""
        plus = math.sqrt(2 * (abs(self.a - other.a) ** 2 + abs(self.b - other.b) ** 2))
        minus = math.sqrt(2 * (abs(self.a + other.a) ** 2 + abs(self.b + other.b) ** 2))
        return min(plus, minus)

    def __call__(self, z):
        return mobius_apply(self, z)


def _check_disk(z) -> np.ndarray:
    zz = np.asarray(z, dtype=complex)
    if np.any(~np.isfinite(zz)) or np.any(np.abs(zz) >= 1.0):
        raise ValueError("point(s) outside the open unit disk")
    return zz


def mobius_apply(T: MobiusTransform, z):
    """Evaluate ``(a z + b) / (conj(b) z + conj(a))`` for ``|z| < 1``.

    Accepts scalars or arrays; scalars come back as Python complex.
    """
    zz = _check_disk(z)
    w = (T.a * zz + T.b) / (T.b.conjugate() * zz + T.a.conjugate())
    return complex(w) if w.ndim == 0 else w


def mobius_derivative(T: MobiusTransform, z):
    """Complex derivative ``1 / (conj(b) z + conj(a))**2`` (unit determinant)."""
    zz = _check_disk(z)
    d = 1.0 / (T.b.conjugate() * zz + T.a.conjugate()) ** 2
    return complex(d) if d.ndim == 0 else d


Word = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class FuchsianGroup:
    """Finitely presented Fuchsian group.

    ``relation`` is a word of ``(generator_index, +1 | -1)`` letters that
    should evaluate to the identity; it is only used for verification.
    """

    generators: tuple[MobiusTransform, ...]
    relation: Word = ()
    label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relation", tuple((int(i), int(s)) for i, s in self.relation))

    @property
    def symmetric_generators(self) -> tuple[MobiusTransform, ...]:
        """Generators followed by their inverses, in generator order."""
        return self.generators + tuple(g.inverse() for g in self.generators)

    def evaluate(self, word: Word) -> MobiusTransform:
        out = MobiusTransform.identity()
        for idx, sign in word:
            g = self.generators[idx]
            out = out @ (g if sign > 0 else g.inverse())
        return out

    def relation_residual(self) -> float:
        """Max-entry distance of the relation word from +-identity."""
        if not self.relation:
            return 0.0
        w = self.evaluate(self.relation)
        return min(max(abs(w.a - s), abs(w.b)) for s in (1.0, -1.0))

    def determinant_residual(self) -> float:
        return max(abs(g.det - 1.0) for g in self.generators)

    def all_hyperbolic(self, tol: float = 1e-9) -> bool:
        return all(abs(g.trace) > 2.0 + tol for g in self.generators)


def bolza_group() -> FuchsianGroup:
    """The genus-2 Bolza group: rotated copies of one translation of the octagon."""
    a0 = 1.0 + math.sqrt(2.0)
    b0 = math.sqrt(2.0 + 2.0 * math.sqrt(2.0))
    g0 = MobiusTransform(a0, b0)
    gens = []
    for k in range(4):
        r = MobiusTransform.rotation(k * math.pi / 4)
        gens.append(r @ g0 @ r.inverse())
    # g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3
    relation = ((0, 1), (1, -1), (2, 1), (3, -1), (0, -1), (1, 1), (2, -1), (3, 1))
    return FuchsianGroup(tuple(gens), relation, "bolza")


def load_group(path: str | Path) -> FuchsianGroup:
    """Read a group file: one generator per line as ``Re(a) Im(a) Re(b) Im(b)``.

    Comment lines start with ``#``.  A comment of the form
    ``# relation: 1 -2 3 ...`` (1-based, negative = inverse) and
    ``# label: name`` are honoured.  No invariant checking happens here so that
    callers can report broken groups instead of crashing on them.
    """
    path = Path(path)
    gens: list[MobiusTransform] = []
    relation: list[tuple[int, int]] = []
    label = path.stem
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            key, _, rest = body.partition(":")
            if key.strip().lower() == "relation" and rest.strip():
                for tok in rest.split():
                    k = int(tok)
                    if k == 0:
                        raise ValueError(f"{path}:{lineno}: relation letters are 1-based")
                    relation.append((abs(k) - 1, 1 if k > 0 else -1))
            elif key.strip().lower() == "label" and rest.strip():
                label = rest.strip()
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(fields)}")
        ra, ia, rb, ib = (float(f) for f in fields)
        gens.append(MobiusTransform(complex(ra, ia), complex(rb, ib)))
    if not gens:
        raise ValueError(f"{path}: no generators")
    for idx, _ in relation:
        if idx >= len(gens):
            raise ValueError(f"{path}: relation refers to generator {idx + 1} of {len(gens)}")
    return FuchsianGroup(tuple(gens), tuple(relation), label)


def write_group(G: FuchsianGroup, path: str | Path) -> None:
    lines = [f"# label: {G.label}"]
    if G.relation:
        lines.append("# relation: " + " ".join(str((i + 1) * s) for i, s in G.relation))
    for g in G.generators:
        lines.append(f"{g.a.real!r} {g.a.imag!r} {g.b.real!r} {g.b.imag!r}")
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class GroupElements:
    """Array-backed list of group elements in breadth-first (word length) order."""

    a: np.ndarray
    b: np.ndarray
    word_length: np.ndarray
    rotation_order: int = 1

    def __len__(self) -> int:
        return len(self.a)

    def __getitem__(self, i: int) -> MobiusTransform:
        return MobiusTransform(self.a[i], self.b[i])

    def __iter__(self) -> Iterator[MobiusTransform]:
        for i in range(len(self)):
            yield self[i]

    def truncate(self, max_word_length: int) -> "GroupElements":
        n = int(np.searchsorted(self.word_length, max_word_length, side="right"))
        return GroupElements(self.a[:n], self.b[:n], self.word_length[:n], self.rotation_order)


def _orbit_coords(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hyperboloid coordinates of the orbit point gamma(0); sign independent."""
    ab = a * b
    return np.column_stack([np.abs(a) ** 2 + np.abs(b) ** 2, 2 * ab.real, 2 * ab.imag])


def _same_element(a1, b1, a2, b2, rtol: float = 1e-9) -> np.ndarray:
    scale = np.maximum(1.0, np.sqrt(2 * (np.abs(a1) ** 2 + np.abs(b1) ** 2)))
    plus = np.sqrt(2 * (np.abs(a1 - a2) ** 2 + np.abs(b1 - b2) ** 2))
    minus = np.sqrt(2 * (np.abs(a1 + a2) ** 2 + np.abs(b1 + b2) ** 2))
    return np.minimum(plus, minus) < rtol * scale


def rotation_order(G: FuchsianGroup, max_order: int = 12, tol: float = 1e-9) -> int:
    """Largest N such that conjugation by the rotation 2*pi/N permutes the
    symmetric generating set (so every word-length ball is N-fold symmetric)."""
    gens = G.symmetric_generators
    for n in range(max_order, 1, -1):
        r = MobiusTransform.rotation(2 * math.pi / n)
        ok = True
        for g in gens:
            c = r @ g @ r.inverse()
            if min(c.distance(h) for h in gens) > tol * max(1.0, abs(g.a)):
                ok = False
                break
        if ok:
            return n
    return 1


def enumerate_group(
    G: FuchsianGroup, max_word_length: int, cap: int = DEFAULT_WORD_CAP
) -> GroupElements:
    """All distinct elements given by words of length <= ``max_word_length``.

    Breadth-first over the Cayley graph; a candidate built from a level-L
    element can only coincide with elements at levels L-1, L or L+1, so only
    those are compared.  Coincidence is decided by PSU(1,1) matrix distance
    (relative to the matrix norm); a KD-tree on orbit points of 0 restricts
    the pairs that need comparing.
    """
    if max_word_length < 0:
        raise ValueError("max_word_length must be >= 0")
    if max_word_length > cap:
        raise ValueError(f"max_word_length {max_word_length} exceeds cap {cap}")
    gens = G.symmetric_generators
    ga = np.array([g.a for g in gens])
    gb = np.array([g.b for g in gens])

    levels_a = [np.array([1.0 + 0j])]
    levels_b = [np.array([0j])]
    for _ in range(max_word_length):
        la, lb = levels_a[-1], levels_b[-1]
        ca = (la[:, None] * ga[None, :] + lb[:, None] * gb.conj()[None, :]).ravel()
        cb = (la[:, None] * gb[None, :] + lb[:, None] * ga.conj()[None, :]).ravel()
        flip = ca.real < 0
        ca[flip] *= -1
        cb[flip] *= -1
        prev_a = np.concatenate(levels_a[-2:])
        prev_b = np.concatenate(levels_b[-2:])
        off = len(prev_a)
        all_a = np.concatenate([prev_a, ca])
        all_b = np.concatenate([prev_b, cb])
        pairs = cKDTree(_orbit_coords(all_a, all_b)).query_pairs(1.0, output_type="ndarray")
        dup = np.zeros(len(ca), dtype=bool)
        if len(pairs):
            i, j = pairs.min(axis=1), pairs.max(axis=1)
            keep = j >= off
            i, j = i[keep], j[keep]
            same = _same_element(all_a[i], all_b[i], all_a[j], all_b[j])
            dup[j[same] - off] = True
        levels_a.append(ca[~dup])
        levels_b.append(cb[~dup])
    lengths = np.concatenate([np.full(len(x), k) for k, x in enumerate(levels_a)])
    return GroupElements(
        np.concatenate(levels_a), np.concatenate(levels_b), lengths, rotation_order(G)
    )


def free_group_bound(n_symmetric_generators: int, L: int) -> int:
    """Ball size of the free group: 1 + n * sum_{k=1..L} (n-1)^(k-1)."""
    n = n_symmetric_generators
    return 1 + n * sum((n - 1) ** (k - 1) for k in range(1, L + 1))


def as_words(G: FuchsianGroup, word: Sequence[int]) -> Word:
    """Translate signed 1-based integers (``-2`` = second generator inverted)."""
    return tuple((abs(k) - 1, 1 if k > 0 else -1) for k in word)
