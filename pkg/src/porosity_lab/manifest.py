"""JSON manifests holding a point sample, named subsets and named measures."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ManifestError
from .space import MetricSpace, SubsetRef, WeightedMeasure

VERSION = "porosity-lab/1"


@dataclass
class Manifest:
    metric: str
    epsilon: float
    points: np.ndarray
    subsets: dict = field(default_factory=dict)
    measures: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    region: str = "unit_cube"
    version: str = VERSION

    @property
    def dim(self):
        return int(self.points.shape[1])

    @classmethod
    def from_space(cls, space, subsets=None, measures=None, meta=None):
        return cls(
            metric=space.metric,
            epsilon=space.epsilon,
            points=np.asarray(space.points),
            subsets={k: np.asarray(getattr(v, "ids", v), dtype=np.int64)
                     for k, v in (subsets or {}).items()},
            measures={k: np.asarray(getattr(v, "weights", v), dtype=float)
                      for k, v in (measures or {}).items()},
            meta=dict(meta or {}),
            region=space.region,
        )

    def space(self):
        return MetricSpace(self.points, self.epsilon, self.metric, self.region)

    def subset(self, name):
        if name not in self.subsets:
            raise ManifestError(f"manifest has no subset {name!r}", name=name)
        return SubsetRef(self.subsets[name])

    def measure(self, name, allow_null=False):
        if name not in self.measures:
            raise ManifestError(f"manifest has no measure {name!r}", name=name)
        return WeightedMeasure(self.measures[name], allow_null=allow_null)

    def validate(self):
        if self.version != VERSION:
            raise ManifestError(f"unrecognised manifest version {self.version!r}")
        pts = self.points
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ManifestError("points must be a non-empty (n, d) array")
        n = pts.shape[0]
        for name, ids in self.subsets.items():
            if ids.size and (ids.min() < 0 or ids.max() >= n):
                raise ManifestError(f"subset {name!r} has ids outside 0..{n - 1}", name=name)
        for name, w in self.measures.items():
            if w.shape != (n,):
                raise ManifestError(
                    f"measure {name!r} has {w.size} weights for {n} points", name=name)
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise ManifestError(f"measure {name!r} has invalid weights", name=name)
        return self

    def to_dict(self):
        return {
            "version": self.version,
            "metric": self.metric,
            "dim": self.dim,
            "epsilon": self.epsilon,
            "region": self.region,
            "points": [[float(c) for c in p] for p in self.points],
            "subsets": {k: [int(i) for i in v] for k, v in self.subsets.items()},
            # repr gives the shortest decimal string that round-trips exactly
            "measures": {k: [repr(float(x)) for x in v] for k, v in self.measures.items()},
            "meta": self.meta,
        }

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"),
                          allow_nan=False) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ManifestError("manifest must be a JSON object")
        missing = {"version", "metric", "dim", "epsilon", "points"} - raw.keys()
        if missing:
            raise ManifestError(f"manifest lacks fields {sorted(missing)}")
        try:
            pts = np.asarray(raw["points"], dtype=float)
            if pts.ndim == 1:
                pts = pts.reshape(-1, int(raw["dim"]))
            m = cls(
                metric=raw["metric"],
                epsilon=float(raw["epsilon"]),
                points=pts,
                subsets={k: np.asarray(v, dtype=np.int64)
                         for k, v in raw.get("subsets", {}).items()},
                measures={k: np.array([float(x) for x in v], dtype=float)
                          for k, v in raw.get("measures", {}).items()},
                meta=raw.get("meta", {}),
                region=raw.get("region", "unit_cube"),
                version=raw["version"],
            )
        except (TypeError, ValueError) as exc:
            raise ManifestError(f"malformed manifest: {exc}") from None
        if m.dim != int(raw["dim"]):
            raise ManifestError("dim does not match the point coordinates")
        if not math.isfinite(m.epsilon) or m.epsilon <= 0:
            raise ManifestError("epsilon must be a positive real")
        return m.validate()

    @classmethod
    def read(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())
