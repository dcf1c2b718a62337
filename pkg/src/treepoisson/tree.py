"""Combinatorics of the homogeneous tree T_q.

A vertex is a word over edge labels read from the root ``o``: the first
label ranges over ``0..q`` (the root has q+1 children), every later label
over ``0..q-1`` (a non-root vertex has one parent and q children). The
empty word is the root. Words are exact, canonical and need no stored
graph.

Boundary points are infinite words. Only eventually-constant words are
represented (:class:`BoundaryRay`), which is enough for every quantity
here since the horospherical index only looks at a finite prefix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Union

from .errors import RadiusCapError, RootHasNoParentError

DEFAULT_RADIUS_CAP = 16


class Vertex(tuple):
    """A vertex of T_q as an immutable tuple of edge labels."""

    __slots__ = ()

    def __new__(cls, word: Sequence[int] = ()):
        return super().__new__(cls, (int(a) for a in word))

    @property
    def length(self) -> int:
        """Distance to the root, ``|x|``."""
        return len(self)

    def __str__(self) -> str:
        return ".".join(str(a) for a in self)

    def __repr__(self) -> str:
        return f"Vertex({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "Vertex":
        text = text.strip()
        if not text:
            return ROOT
        try:
            return cls(int(a) for a in text.split("."))
        except ValueError:
            raise ValueError(f"malformed vertex {text!r}") from None

    def child(self, label: int) -> "Vertex":
        return Vertex(self + (label,))


ROOT = Vertex()


@dataclass(frozen=True)
class BoundaryRay:
    """Infinite geodesic from the root: ``prefix`` followed by ``repeat`` forever.

    Construction canonicalizes by absorbing trailing copies of ``repeat``
    into the tail, so two rays compare equal iff their infinite words do.
    """

    prefix: Vertex
    repeat: int

    def __post_init__(self):
        prefix = tuple(self.prefix)
        while prefix and prefix[-1] == self.repeat:
            prefix = prefix[:-1]
        object.__setattr__(self, "prefix", Vertex(prefix))
        object.__setattr__(self, "repeat", int(self.repeat))

    def label(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.repeat

    def truncate(self, n: int) -> Vertex:
        """The vertex at distance ``n`` from the root along the ray."""
        p = len(self.prefix)
        if n <= p:
            return Vertex(self.prefix[:n])
        return Vertex(self.prefix + (self.repeat,) * (n - p))

    def __str__(self) -> str:
        return f"{self.prefix}({self.repeat})*"

    def to_json(self) -> dict:
        return {"prefix": str(self.prefix), "repeat": self.repeat}

    @classmethod
    def from_json(cls, obj: dict) -> "BoundaryRay":
        return cls(Vertex.parse(obj["prefix"]), int(obj["repeat"]))


def parent(x: Vertex) -> Vertex:
    if not x:
        raise RootHasNoParentError("the root has no parent")
    return Vertex(x[:-1])


def _common_prefix_length(x: Sequence[int], y: Sequence[int]) -> int:
    n = 0
    for a, b in zip(x, y):
        if a != b:
            break
        n += 1
    return n


def confluent(x: Vertex, y: Vertex) -> Vertex:
    """Last common vertex of the geodesics from the root to ``x`` and ``y``."""
    return Vertex(x[:_common_prefix_length(x, y)])


def dist(x: Vertex, y: Vertex) -> int:
    return len(x) + len(y) - 2 * _common_prefix_length(x, y)


def confluent_length(x: Vertex, xi: BoundaryRay) -> int:
    """``|x ∧ ξ|``, the length of the common prefix of ``x`` and the ray."""
    n = 0
    for i, a in enumerate(x):
        if a != xi.label(i):
            break
        n += 1
    return n


def hor(x: Vertex, xi: BoundaryRay) -> int:
    """Horospherical index ``2|x ∧ ξ| - |x|``; lies in ``[-|x|, |x|]``."""
    return 2 * confluent_length(x, xi) - len(x)


def sector_contains(u: Vertex, target: Union[Vertex, BoundaryRay]) -> bool:
    """Whether ``target`` lies in the sector ``S_u``."""
    if isinstance(target, BoundaryRay):
        return target.truncate(len(u)) == u
    return tuple(target[:len(u)]) == tuple(u)


@dataclass(frozen=True)
class HomogeneousTree:
    """The degree-``q`` tree: every vertex has q+1 neighbours.

    Vertices in a sphere are ordered lexicographically, which coincides
    with the mixed-radix :meth:`sphere_index`; balls are ordered by
    (length, word). Both orders are relied on for array layouts.
    """

    q: int
    radius_cap: int = DEFAULT_RADIUS_CAP

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 2:
            raise ValueError(f"tree degree must be an integer >= 2, got {self.q!r}")

    def is_valid(self, x: Sequence[int]) -> bool:
        for i, a in enumerate(x):
            hi = self.q if i == 0 else self.q - 1
            if not 0 <= a <= hi:
                return False
        return True

    def check_vertex(self, x: Sequence[int]) -> Vertex:
        if not self.is_valid(x):
            raise ValueError(f"{Vertex(x)} is not a vertex of T_{self.q}")
        return Vertex(x)

    def check_ray(self, xi: BoundaryRay) -> BoundaryRay:
        if not self.is_valid(xi.prefix) or not 0 <= xi.repeat < self.q:
            raise ValueError(f"{xi} is not a boundary ray of T_{self.q}")
        return xi

    def children(self, x: Vertex) -> list[Vertex]:
        n = self.q + 1 if not x else self.q
        return [x.child(a) for a in range(n)]

    def neighbors(self, x: Vertex) -> list[Vertex]:
        if not x:
            return self.children(x)
        return [parent(x)] + self.children(x)

    def sphere_size(self, n: int) -> int:
        return 1 if n == 0 else (self.q + 1) * self.q ** (n - 1)

    def ball_size(self, radius: int) -> int:
        return sum(self.sphere_size(n) for n in range(radius + 1))

    def _check_radius(self, radius: int) -> None:
        if radius < 0:
            raise ValueError(f"radius must be >= 0, got {radius}")
        if radius > self.radius_cap:
            raise RadiusCapError(
                f"radius {radius} exceeds the cap {self.radius_cap} "
                f"({self.ball_size(radius)} vertices)"
            )

    def iter_sphere(self, n: int) -> Iterator[Vertex]:
        self._check_radius(n)
        if n == 0:
            yield ROOT
            return
        last = [self.q] + [self.q - 1] * (n - 1)
        word = [0] * n
        while True:
            yield Vertex(word)
            i = n - 1
            while i >= 0 and word[i] == last[i]:
                word[i] = 0
                i -= 1
            if i < 0:
                return
            word[i] += 1

    def sphere(self, n: int) -> list[Vertex]:
        return list(self.iter_sphere(n))

    def ball(self, radius: int) -> list[Vertex]:
        self._check_radius(radius)
        out: list[Vertex] = []
        for n in range(radius + 1):
            out.extend(self.iter_sphere(n))
        return out

    def sphere_index(self, x: Sequence[int]) -> int:
        """Position of ``x`` in :meth:`sphere` of its own length."""
        idx = 0
        for i, a in enumerate(x):
            idx = a if i == 0 else idx * self.q + a
        return idx

    def ball_index(self, x: Sequence[int]) -> int:
        """Position of ``x`` in :meth:`ball` of any radius >= ``|x|``."""
        return self.ball_size(len(x) - 1) + self.sphere_index(x) if x else 0
