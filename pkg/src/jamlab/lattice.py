"""Config geometry, lattice regions and the blocking relation.

A config type is a finite set of integer offsets (its *footprint*) that
contains the origin, together with the subset of those offsets it fills on
arrival (its *occupancy*).  A config ``b`` blocks a config ``c`` when a
successful arrival of ``b`` fills a site in the footprint of ``c``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ModelError

Offset = tuple[int, ...]

TORUS = "torus"
FREE = "free"


@dataclass(frozen=True)
class ConfigType:
    name: str
    footprint: frozenset[Offset]
    occupancy: frozenset[Offset]

    @classmethod
    def make(
        cls,
        name: str,
        footprint: Iterable[Sequence[int]],
        occupancy: Iterable[Sequence[int]] | None = None,
    ) -> ConfigType:
        fp = frozenset(tuple(int(x) for x in o) for o in footprint)
        occ = fp if occupancy is None else frozenset(tuple(int(x) for x in o) for o in occupancy)
        ct = cls(name, fp, occ)
        ct.validate()
        return ct

    @property
    def dimension(self) -> int:
        return len(next(iter(self.footprint)))

    def validate(self, dimension: int | None = None) -> None:
        if not self.footprint:
            raise ModelError(f"type {self.name!r}: footprint must be nonempty")
        dims = {len(o) for o in self.footprint | self.occupancy}
        if len(dims) != 1:
            raise ModelError(f"type {self.name!r}: offsets have mixed dimensions {sorted(dims)}")
        d = dims.pop()
        if dimension is not None and d != dimension:
            raise ModelError(
                f"type {self.name!r}: offsets have dimension {d}, model dimension is {dimension}"
            )
        if (0,) * d not in self.footprint:
            raise ModelError(f"type {self.name!r}: footprint must contain the origin anchor")
        if not self.occupancy:
            raise ModelError(f"type {self.name!r}: occupancy must be nonempty")
        if not self.occupancy <= self.footprint:
            raise ModelError(f"type {self.name!r}: occupancy must be a subset of footprint")


@dataclass(frozen=True)
class Region:
    """A finite set of lattice sites with a boundary rule.

    ``sites`` is sorted lexicographically; a site's position in it is its
    index.  Torus regions wrap coordinate-wise modulo ``shape``.
    """

    dimension: int
    boundary: str
    shape: tuple[int, ...] | None
    sites: tuple[Offset, ...]

    @classmethod
    def torus(cls, shape: Sequence[int]) -> Region:
        shape = tuple(int(s) for s in shape)
        if not shape:
            raise ModelError("torus shape must have at least one dimension")
        if any(s < 1 for s in shape):
            raise ModelError(f"torus box dimensions must be >= 1, got {list(shape)}")
        sites = tuple(itertools.product(*(range(s) for s in shape)))
        return cls(len(shape), TORUS, shape, sites)

    @classmethod
    def box(cls, shape: Sequence[int]) -> Region:
        shape = tuple(int(s) for s in shape)
        if not shape:
            raise ModelError("box shape must have at least one dimension")
        if any(s < 0 for s in shape):
            raise ModelError(f"box dimensions must be >= 0, got {list(shape)}")
        sites = tuple(itertools.product(*(range(s) for s in shape)))
        return cls(len(shape), FREE, shape, sites)

    @classmethod
    def from_sites(cls, sites: Iterable[Sequence[int]], dimension: int | None = None) -> Region:
        pts = sorted({tuple(int(x) for x in s) for s in sites})
        dims = {len(p) for p in pts}
        if len(dims) > 1:
            raise ModelError("sites have mixed dimensions")
        d = dims.pop() if dims else dimension
        if d is None or d < 1:
            raise ModelError("cannot infer region dimension")
        if dimension is not None and d != dimension:
            raise ModelError(f"sites have dimension {d}, expected {dimension}")
        return cls(d, FREE, None, tuple(pts))

    @property
    def n(self) -> int:
        return len(self.sites)

    @cached_property
    def _index(self) -> dict[Offset, int]:
        return {s: i for i, s in enumerate(self.sites)}

    def index_of(self, coord: Offset) -> int | None:
        if self.boundary == TORUS:
            idx = 0
            for x, s in zip(coord, self.shape):
                idx = idx * s + (x % s)
            return idx
        return self._index.get(coord)

    def translate(self, site: int, offset: Offset) -> int | None:
        """Index of ``sites[site] + offset``, or None if it falls outside."""
        base = self.sites[site]
        return self.index_of(tuple(b + o for b, o in zip(base, offset)))


@dataclass(frozen=True)
class ConfigInstance:
    type_index: int
    anchor: int
    footprint: frozenset[int]
    occupancy: frozenset[int]


def blocks(b: ConfigInstance, c: ConfigInstance) -> bool:
    """True when a successful arrival of ``b`` forbids ``c``."""
    return not b.occupancy.isdisjoint(c.footprint)


def neighbors(b: ConfigInstance, c: ConfigInstance) -> bool:
    return blocks(b, c) or blocks(c, b)


@dataclass(frozen=True)
class ConflictGraph:
    """CSR adjacency: ``indices[indptr[i]:indptr[i+1]]`` are the instances ``i`` blocks.

    Self edges are omitted.
    """

    indptr: np.ndarray
    indices: np.ndarray

    @property
    def size(self) -> int:
        return len(self.indptr) - 1

    def targets(self, i: int) -> list[int]:
        return self.indices[self.indptr[i]:self.indptr[i + 1]].tolist()

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.size)

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return int(self.indptr[-1])


@dataclass(frozen=True)
class Model:
    region: Region
    types: tuple[ConfigType, ...]
    name: str = "model"

    def __post_init__(self):
        if not self.types:
            raise ModelError("a model needs at least one config type (k >= 1)")
        for t in self.types:
            t.validate(self.region.dimension)

    @property
    def dimension(self) -> int:
        return self.region.dimension

    @property
    def n(self) -> int:
        return self.region.n

    @property
    def k(self) -> int:
        return len(self.types)

    @property
    def N(self) -> int:
        return len(self.instances)

    @cached_property
    def instances(self) -> tuple[ConfigInstance, ...]:
        return tuple(enumerate_configs(self))

    @cached_property
    def graph(self) -> ConflictGraph:
        return conflict_graph(self)

    @cached_property
    def occupancy_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Occupied site lists per instance, CSR-packed."""
        counts = [len(c.occupancy) for c in self.instances]
        indptr = np.zeros(len(counts) + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = np.fromiter(
            (s for c in self.instances for s in sorted(c.occupancy)), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    @cached_property
    def type_indices(self) -> np.ndarray:
        return np.array([c.type_index for c in self.instances], dtype=np.int64)

    def instance_at(self, type_index: int, anchor: int) -> int | None:
        for i, c in enumerate(self.instances):
            if c.type_index == type_index and c.anchor == anchor:
                return i
        return None


def enumerate_configs(model: Model) -> list[ConfigInstance]:
    """All config instances, type-major then anchor order.

    On a torus every (type, site) pair yields one instance.  With a free
    boundary, instances whose footprint overhangs the region are dropped.
    """
    region = model.region
    out = []
    for ti, ctype in enumerate(model.types):
        fp_offsets = sorted(ctype.footprint)
        occ_offsets = set(ctype.occupancy)
        for anchor in range(region.n):
            fp, occ = set(), set()
            for off in fp_offsets:
                s = region.translate(anchor, off)
                if s is None:
                    break
                fp.add(s)
                if off in occ_offsets:
                    occ.add(s)
            else:
                out.append(ConfigInstance(ti, anchor, frozenset(fp), frozenset(occ)))
    return out


def conflict_graph(model: Model) -> ConflictGraph:
    """For every instance, the sorted list of other instances it blocks.

    Uses a site -> footprint-holders index, so the cost is proportional to
    the number of (occupied site, footprint holder) incidences.
    """
    instances = model.instances
    holders: list[list[int]] = [[] for _ in range(model.n)]
    for i, c in enumerate(instances):
        for s in c.footprint:
            holders[s].append(i)
    indptr = np.zeros(len(instances) + 1, dtype=np.int64)
    chunks = []
    for i, c in enumerate(instances):
        targets = set()
        for s in c.occupancy:
            targets.update(holders[s])
        targets.discard(i)
        row = sorted(targets)
        chunks.append(row)
        indptr[i + 1] = indptr[i] + len(row)
    indices = np.fromiter(itertools.chain.from_iterable(chunks), dtype=np.int64, count=int(indptr[-1]))
    return ConflictGraph(indptr, indices)


# -- builtins ---------------------------------------------------------------

def _unit_vectors(d: int) -> list[Offset]:
    out = []
    for axis in range(d):
        for sign in (-1, 1):
            v = [0] * d
            v[axis] = sign
            out.append(tuple(v))
    return out


def builtin_types(name: str, dimension: int | None = None) -> tuple[ConfigType, ...]:
    if name == "dimer-1d":
        return (ConfigType.make("dimer", [(0,), (1,)]),)
    if name == "monomer":
        d = dimension or 1
        return (ConfigType.make("monomer", [(0,) * d]),)
    if name == "monomer-excl-1d":
        return (ConfigType.make("monomer-excl", [(-1,), (0,), (1,)], [(0,)]),)
    if name == "monomer-excl-2d":
        origin = (0, 0)
        return (ConfigType.make("monomer-excl", [origin, *_unit_vectors(2)], [origin]),)
    if name == "anni-pair":
        return (
            ConfigType.make("hole-left", [(0,), (1,)], [(0,)]),
            ConfigType.make("hole-right", [(0,), (1,)], [(1,)]),
        )
    raise ModelError(f"unknown builtin model {name!r}; choose from {sorted(BUILTINS)}")


BUILTINS = ("dimer-1d", "monomer", "monomer-excl-1d", "monomer-excl-2d", "anni-pair")
_BUILTIN_DIMENSION = {"dimer-1d": 1, "monomer-excl-1d": 1, "monomer-excl-2d": 2, "anni-pair": 1}


def builtin_model(name: str, shape: Sequence[int] | int, boundary: str = TORUS) -> Model:
    if isinstance(shape, int):
        shape = (shape,)
    shape = tuple(shape)
    expected = _BUILTIN_DIMENSION.get(name, len(shape))
    if len(shape) != expected:
        raise ModelError(f"builtin {name!r} is {expected}-dimensional, got shape {list(shape)}")
    if boundary == TORUS:
        region = Region.torus(shape)
    elif boundary == FREE:
        region = Region.box(shape)
    else:
        raise ModelError(f"boundary must be 'torus' or 'free', got {boundary!r}")
    return Model(region, builtin_types(name, len(shape)), name=name)


# -- JSON model files -------------------------------------------------------

_TOP_KEYS = {"dimension", "region", "types", "name"}
_REGION_KEYS = {"kind", "shape", "sites"}
_TYPE_KEYS = {"name", "footprint", "occupancy"}


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ModelError(f"{where}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ModelError(f"{where}: unknown key(s) {extra}; allowed {sorted(allowed)}")


def model_from_dict(data: dict, name: str = "model") -> Model:
    _reject_unknown(data, _TOP_KEYS, "model")
    for key in ("dimension", "region", "types"):
        if key not in data:
            raise ModelError(f"model: missing required key {key!r}")
    d = data["dimension"]
    if not isinstance(d, int) or d < 1:
        raise ModelError(f"dimension: must be a positive integer, got {d!r}")
    reg = data["region"]
    _reject_unknown(reg, _REGION_KEYS, "region")
    kind = reg.get("kind")
    if kind == TORUS:
        if "sites" in reg:
            raise ModelError("region.sites: only allowed for kind 'free'")
        region = Region.torus(reg.get("shape", []))
    elif kind == FREE:
        if "sites" in reg:
            if "shape" in reg:
                raise ModelError("region: give either shape or sites, not both")
            region = Region.from_sites(reg["sites"], d)
        else:
            region = Region.box(reg.get("shape", []))
    else:
        raise ModelError(f"region.kind: must be 'torus' or 'free', got {kind!r}")
    if region.dimension != d:
        raise ModelError(f"region.shape: has {region.dimension} entries, dimension is {d}")
    raw_types = data["types"]
    if not isinstance(raw_types, list) or not raw_types:
        raise ModelError("types: must be a nonempty list")
    types = []
    for i, t in enumerate(raw_types):
        _reject_unknown(t, _TYPE_KEYS, f"types[{i}]")
        if "footprint" not in t:
            raise ModelError(f"types[{i}]: missing footprint")
        try:
            types.append(ConfigType.make(t.get("name", f"type{i}"), t["footprint"], t.get("occupancy")))
        except TypeError as exc:
            raise ModelError(f"types[{i}]: offsets must be arrays of integers ({exc})") from None
    return Model(region, tuple(types), name=data.get("name", name))


def model_to_dict(model: Model) -> dict:
    reg: dict = {"kind": model.region.boundary}
    if model.region.shape is not None:
        reg["shape"] = list(model.region.shape)
    else:
        reg["sites"] = [list(s) for s in model.region.sites]
    return {
        "name": model.name,
        "dimension": model.dimension,
        "region": reg,
        "types": [
            {
                "name": t.name,
                "footprint": [list(o) for o in sorted(t.footprint)],
                "occupancy": [list(o) for o in sorted(t.occupancy)],
            }
            for t in model.types
        ],
    }


def load_model(path: str | Path) -> Model:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(data, name=path.stem)
