"""Variable registry, bitmask subsets and dictionaries of subsets.

Every subset of candidate variables is a 64-bit mask indexed against a
:class:`VarRegistry`. A :class:`Dictionary` is a canonically sorted, duplicate
free array of such masks, so set algebra on dictionaries reduces to numpy's
sorted-array set routines.
"""

from __future__ import annotations

import hashlib
import json
import re
import struct
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapExceeded, RegistryMismatch, UnknownVariable

MAX_VARIABLES = 63
DEFAULT_CAP = 25

NAME_RE = re.compile(r"^[A-Za-z0-9_.:-]+$")

_MAGIC = b"SDIC"
_VERSION = 1
_HEADER = struct.Struct("<4sH8sQ")


@dataclass(frozen=True)
class VarRegistry:
    """Ordered, immutable list of candidate variable names.

    ``bundles`` lists groups of variables (dummy codings of one categorical
    variable) that roadmap synthesis treats as a single unit.
    """

    names: tuple[str, ...]
    bundles: tuple[tuple[str, ...], ...] = ()
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) > MAX_VARIABLES:
            raise CapExceeded(
                f"registry holds {len(names)} variables; masks are limited to {MAX_VARIABLES}"
            )
        index = {}
        for i, name in enumerate(names):
            if not isinstance(name, str) or not NAME_RE.match(name):
                raise ValueError(f"invalid variable name {name!r}")
            if name in index:
                raise ValueError(f"duplicate variable name {name!r}")
            index[name] = i
        object.__setattr__(self, "_index", index)
        bundles = tuple(tuple(b) for b in self.bundles)
        seen = set()
        for b in bundles:
            if len(b) < 2:
                raise ValueError("a bundle needs at least two variables")
            for name in b:
                if name not in index:
                    raise UnknownVariable(f"bundle member {name!r} is not registered")
                if name in seen:
                    raise ValueError(f"{name!r} appears in more than one bundle")
                seen.add(name)
        object.__setattr__(self, "bundles", bundles)

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    @property
    def full_mask(self) -> int:
        return (1 << len(self.names)) - 1

    def universe(self) -> VarSet:
        return VarSet(self, self.full_mask)

    def varset(self, names: Iterable[str] = ()) -> VarSet:
        if isinstance(names, str):
            names = [names]
        mask = 0
        for name in names:
            mask |= 1 << self.index(name)
        return VarSet(self, mask)

    def bundle_masks(self) -> list[int]:
        return [self.varset(b).mask for b in self.bundles]

    def digest(self) -> bytes:
        """8-byte fingerprint used in the binary dictionary header."""
        h = hashlib.sha256("\n".join(self.names).encode("utf-8"))
        return h.digest()[:8]

    @classmethod
    def from_text(cls, text: str) -> VarRegistry:
        """Parse a registry file: one name per line, ``#`` comments.

        A line listing several comma-separated names registers all of them and
        declares them a bundle.
        """
        names, bundles = [], []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",") if p.strip()]
            names.extend(parts)
            if len(parts) > 1:
                bundles.append(tuple(parts))
        return cls(tuple(names), tuple(bundles))

    def to_text(self) -> str:
        bundled = {n for b in self.bundles for n in b}
        lines, emitted = [], set()
        for name in self.names:
            if name in emitted:
                continue
            if name in bundled:
                b = next(b for b in self.bundles if name in b)
                lines.append(", ".join(b))
                emitted.update(b)
            else:
                lines.append(name)
                emitted.add(name)
        return "\n".join(lines) + "\n"


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class VarSet:
    registry: VarRegistry
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask > self.registry.full_mask:
            raise ValueError("mask refers to indices outside the registry")

    def _check(self, other: VarSet):
        if other.registry != self.registry:
            raise RegistryMismatch("VarSets belong to different registries")

    def __or__(self, other: VarSet) -> VarSet:
        self._check(other)
        return VarSet(self.registry, self.mask | other.mask)

    def __and__(self, other: VarSet) -> VarSet:
        self._check(other)
        return VarSet(self.registry, self.mask & other.mask)

    def __sub__(self, other: VarSet) -> VarSet:
        self._check(other)
        return VarSet(self.registry, self.mask & ~other.mask)

    def __le__(self, other: VarSet) -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def __ge__(self, other: VarSet) -> bool:
        return other <= self

    def complement(self) -> VarSet:
        return VarSet(self.registry, self.registry.full_mask & ~self.mask)

    def isdisjoint(self, other: VarSet) -> bool:
        self._check(other)
        return self.mask & other.mask == 0

    def __len__(self):
        return popcount(self.mask)

    def __bool__(self):
        return self.mask != 0

    def __iter__(self) -> Iterator[str]:
        names = self.registry.names
        return (names[i] for i in mask_bits(self.mask))

    def __contains__(self, name: str) -> bool:
        return bool(self.mask >> self.registry.index(name) & 1)

    def indices(self) -> list[int]:
        return mask_bits(self.mask)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self)

    def __repr__(self):
        return "{" + ", ".join(self) + "}"


def subset_masks(mask: int) -> np.ndarray:
    """All submasks of ``mask`` as a uint64 array (not sorted)."""
    out = np.zeros(1, dtype=np.uint64)
    for bit in mask_bits(mask):
        out = np.concatenate([out, out | np.uint64(1 << bit)])
    return out


def _as_masks(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.uint64).ravel()
    return np.unique(arr)


class Dictionary:
    """Deduplicated collection of variable subsets over one registry."""

    __slots__ = ("registry", "_masks")

    def __init__(self, registry: VarRegistry, masks=()):
        if not isinstance(masks, np.ndarray):
            masks = [m.mask if isinstance(m, VarSet) else int(m) for m in masks]
        arr = _as_masks(masks)
        if arr.size and int(arr[-1]) > registry.full_mask:
            raise ValueError("dictionary member outside the registry universe")
        arr.setflags(write=False)
        self.registry = registry
        self._masks = arr

    @classmethod
    def from_sorted(cls, registry: VarRegistry, masks: np.ndarray) -> Dictionary:
        """Wrap an array already known to be sorted and unique."""
        d = cls.__new__(cls)
        masks = np.ascontiguousarray(masks, dtype=np.uint64)
        masks.setflags(write=False)
        d.registry = registry
        d._masks = masks
        return d

    @classmethod
    def from_names(cls, registry: VarRegistry, members: Iterable[Iterable[str]]) -> Dictionary:
        return cls(registry, [registry.varset(m).mask for m in members])

    @property
    def masks(self) -> np.ndarray:
        return self._masks

    def __len__(self):
        return int(self._masks.size)

    def __iter__(self) -> Iterator[VarSet]:
        reg = self.registry
        return (VarSet(reg, int(m)) for m in self._masks)

    def __contains__(self, item) -> bool:
        if isinstance(item, VarSet):
            if item.registry != self.registry:
                raise RegistryMismatch("VarSet belongs to a different registry")
            item = item.mask
        m = np.uint64(item)
        i = np.searchsorted(self._masks, m)
        return bool(i < self._masks.size and self._masks[i] == m)

    def contains_many(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.uint64)
        if self._masks.size == 0:
            return np.zeros(masks.shape, dtype=bool)
        i = np.searchsorted(self._masks, masks)
        i = np.minimum(i, self._masks.size - 1)
        return self._masks[i] == masks

    def __eq__(self, other):
        if not isinstance(other, Dictionary):
            return NotImplemented
        return self.registry == other.registry and np.array_equal(self._masks, other._masks)

    def __hash__(self):
        return hash((self.registry.names, self._masks.tobytes()))

    def __repr__(self):
        if len(self) <= 8:
            body = ", ".join(repr(s) for s in self)
            return f"Dictionary([{body}])"
        return f"Dictionary(<{len(self)} members over {len(self.registry)} variables>)"

    def _check(self, other: Dictionary):
        if other.registry != self.registry:
            raise RegistryMismatch("dictionaries belong to different registries")

    def union(self, other: Dictionary) -> Dictionary:
        self._check(other)
        return Dictionary.from_sorted(self.registry, np.union1d(self._masks, other._masks))

    def intersection(self, other: Dictionary) -> Dictionary:
        self._check(other)
        return Dictionary.from_sorted(
            self.registry, np.intersect1d(self._masks, other._masks, assume_unique=True)
        )

    def difference(self, other: Dictionary) -> Dictionary:
        self._check(other)
        return Dictionary.from_sorted(
            self.registry, np.setdiff1d(self._masks, other._masks, assume_unique=True)
        )

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def map_or(self, mask: int) -> Dictionary:
        """Add the variables of ``mask`` to every member."""
        return Dictionary(self.registry, self._masks | np.uint64(mask))

    def complement_sets(self, universe: VarSet | None = None) -> Dictionary:
        """Replace each member ``s`` by ``universe - s``."""
        u = self.registry.full_mask if universe is None else universe.mask
        return Dictionary(self.registry, np.uint64(u) & ~self._masks)

    def restrict(self, scope: VarSet) -> Dictionary:
        """Project every member onto ``scope`` (deduplicated)."""
        return Dictionary(self.registry, self._masks & np.uint64(scope.mask))

    def is_union_closed(self) -> bool:
        """True when the union of any two members is again a member."""
        m = self._masks
        if m.size > 4096:
            raise CapExceeded("union-closure check is quadratic; limited to 4096 members")
        unions = (m[:, None] | m[None, :]).ravel()
        return bool(self.contains_many(unions).all())

    def names(self) -> list[list[str]]:
        return [list(s) for s in self]

    # -- serialization -------------------------------------------------

    def to_ndjson(self) -> str:
        return "".join(json.dumps(list(s)) + "\n" for s in self)

    @classmethod
    def from_ndjson(cls, registry: VarRegistry, text: str) -> Dictionary:
        members = [json.loads(line) for line in text.splitlines() if line.strip()]
        return cls.from_names(registry, members)

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(_MAGIC, _VERSION, self.registry.digest(), len(self))
        return header + self._masks.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, registry: VarRegistry, data: bytes) -> Dictionary:
        magic, version, digest, count = _HEADER.unpack_from(data)
        if magic != _MAGIC or version != _VERSION:
            raise ValueError("not a binary dictionary file")
        if digest != registry.digest():
            raise RegistryMismatch("binary dictionary was written against another registry")
        body = np.frombuffer(data, dtype="<u8", offset=_HEADER.size, count=count)
        return cls(registry, body.astype(np.uint64))


def power_set(universe: VarSet, cap: int = DEFAULT_CAP) -> Dictionary:
    n = len(universe)
    if n > cap:
        raise CapExceeded(f"power set of {n} variables exceeds the cap of {cap}")
    return Dictionary(universe.registry, subset_masks(universe.mask))


def set_ops(a: Dictionary, b: Dictionary, op: str) -> Dictionary:
    if op == "union":
        return a.union(b)
    if op == "intersect":
        return a.intersection(b)
    if op == "difference":
        return a.difference(b)
    raise ValueError(f"unknown set operation {op!r}")


def varsets_from_masks(registry: VarRegistry, masks: Sequence[int]) -> list[VarSet]:
    return [VarSet(registry, int(m)) for m in masks]
