"""Synthetic workloads, CSV ingestion, and canonical CSV writers.

Task CSV: ``id,lon,lat[,reward]``.
Worker CSV (trajectory points): ``driver_id,timestamp,lon,lat[,ability]``.
The canonical worker file written here has one row per worker.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .clustering import Task, Worker, trajectory_to_location
from .config import DEFAULT_BOX, check_box, derive_seed, in_box, parse_kv
from .errors import EmptyAfterFilter, ParseError
from .geometry import PlanarPoint, Projection

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Component:
    """Gaussian blob of entities: center (lat, lon), spread in meters, mixture weight."""

    lat: float
    lon: float
    spread_m: float
    weight: float

    @classmethod
    def parse(cls, text: str) -> "Component":
        lat, lon, spread, weight = (float(v) for v in text.split(":"))
        return cls(lat, lon, spread, weight)

    def __str__(self):
        return f"{self.lat!r}:{self.lon!r}:{self.spread_m!r}:{self.weight!r}"


# Heterogeneous default: all workers live in one western district while the
# tasks sit in three compact eastern hot spots, so supply and demand barely
# overlap and many worker clusters compete for the same task cluster.
DEFAULT_TASK_MIX = (
    Component(30.685, 104.100, 15.0, 0.4),
    Component(30.685, 104.115, 15.0, 0.4),
    Component(30.665, 104.100, 15.0, 0.2),
)
DEFAULT_WORKER_MIX = (Component(30.685, 104.055, 300.0, 1.0),)


@dataclass(frozen=True)
class SyntheticSpec:
    n_tasks: int = 5000
    n_workers: int = 2000
    task_components: tuple = DEFAULT_TASK_MIX
    worker_components: tuple = DEFAULT_WORKER_MIX
    # remaining mass (1 - sum of weights) is spread uniformly over the box
    reward_mean: float = 10.0
    reward_std: float = 2.0
    ability_mean: float = 5.0
    ability_std: float = 1.0
    box: tuple = DEFAULT_BOX
    seed: int = 0
    # >1 emits raw trajectories (home blob plus far excursions) instead of one row per worker
    trajectory_points: int = 1
    trajectory_spread_m: float = 60.0

    def __post_init__(self):
        object.__setattr__(self, "box", check_box(self.box))
        if self.n_tasks <= 0 or self.n_workers <= 0:
            raise ValueError("counts must be positive")
        if min(self.reward_std, self.ability_std) <= 0:
            raise ValueError("standard deviations must be positive")
        for mix in (self.task_components, self.worker_components):
            if sum(c.weight for c in mix) > 1 + 1e-12 or any(c.weight < 0 or c.spread_m <= 0 for c in mix):
                raise ValueError("mixture weights must be >= 0 and sum to <= 1; spreads > 0")

    @classmethod
    def from_text(cls, text: str) -> "SyntheticSpec":
        mix_keys = ("task_components", "worker_components")
        plain = "\n".join(line for line in text.splitlines()
                          if line.split("=", 1)[0].strip().replace("-", "_") not in mix_keys)
        kw = parse_kv(plain, cls)
        for key in mix_keys:
            try:
                raw = text_value(text, key)
            except KeyError:
                continue
            kw[key] = tuple(Component.parse(c) for c in raw.split(";") if c.strip())
        for key in ("n_tasks", "n_workers", "seed", "trajectory_points"):
            if key in kw:
                kw[key] = int(kw[key])
        return cls(**kw)

    def to_text(self) -> str:
        out = []
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            if name.endswith("_components"):
                v = ";".join(str(c) for c in v)
            elif isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            out.append(f"{name} = {v}")
        return "\n".join(out) + "\n"


def text_value(text: str, key: str) -> str:
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        if "=" in line and line.split("=", 1)[0].strip().replace("-", "_") == key:
            return line.split("=", 1)[1].strip()
    raise KeyError(key)


def truncated_normal(rng: np.random.Generator, mean: float, std: float, n: int) -> np.ndarray:
    """Normal draws with non-positive values re-sampled."""
    out = rng.normal(mean, std, n)
    bad = out <= 0
    while bad.any():
        out[bad] = rng.normal(mean, std, int(bad.sum()))
        bad = out <= 0
    return out


def _draw_locations(rng, mix, n, box, proj: Projection, taken: set) -> list[PlanarPoint]:
    weights = [c.weight for c in mix]
    rest = max(0.0, 1.0 - sum(weights))
    probs = np.array(weights + [rest], dtype=float)
    probs /= probs.sum()
    kx = math.cos(math.radians(proj.lat0)) * 111320.0
    pts = []
    while len(pts) < n:
        comp = rng.choice(len(probs), p=probs)
        if comp == len(mix):
            lat = rng.uniform(box[0], box[2])
            lon = rng.uniform(box[1], box[3])
        else:
            c = mix[comp]
            dx, dy = rng.normal(0.0, c.spread_m, 2)
            lat = c.lat + dy / 110540.0
            lon = c.lon + dx / kx
        if not in_box(box, lon, lat):
            continue
        p = proj.quantize(lon, lat)
        if p.xy in taken:
            continue
        taken.add(p.xy)
        pts.append(p)
    return pts


def generate(spec: SyntheticSpec = SyntheticSpec()):
    """Draw ``(tasks, workers)``; fully determined by ``spec.seed``."""
    proj = Projection.for_box(spec.box)
    rng_t = np.random.default_rng(derive_seed(spec.seed, "synthetic-tasks"))
    rng_w = np.random.default_rng(derive_seed(spec.seed, "synthetic-workers"))
    t_loc = _draw_locations(rng_t, spec.task_components, spec.n_tasks, spec.box, proj, set())
    w_loc = _draw_locations(rng_w, spec.worker_components, spec.n_workers, spec.box, proj, set())
    rewards = truncated_normal(rng_t, spec.reward_mean, spec.reward_std, spec.n_tasks)
    abilities = truncated_normal(rng_w, spec.ability_mean, spec.ability_std, spec.n_workers)
    tasks = [Task(f"t{i}", PlanarPoint(p.x, p.y, f"t{i}"), float(r)) for i, (p, r) in enumerate(zip(t_loc, rewards))]
    workers = [Worker(f"w{i}", PlanarPoint(p.x, p.y, f"w{i}"), float(a))
               for i, (p, a) in enumerate(zip(w_loc, abilities))]
    return tasks, workers


def trajectories(spec: SyntheticSpec, workers) -> list[tuple[str, int, int, int]]:
    """Raw trajectory rows ``(driver, timestamp, x, y)``: a tight home blob plus a few far trips."""
    rng = np.random.default_rng(derive_seed(spec.seed, "synthetic-trajectories"))
    rows = []
    n = spec.trajectory_points
    n_far = max(0, n // 10)
    for w in workers:
        for k in range(n):
            if k == 0:
                x, y = w.location.x, w.location.y
            elif k <= n - n_far:
                dx, dy = rng.normal(0.0, spec.trajectory_spread_m * 100, 2)
                x, y = w.location.x + int(round(dx)), w.location.y + int(round(dy))
            else:
                ang = rng.uniform(0, 2 * math.pi)
                x = w.location.x + int(round(math.cos(ang) * 300000))
                y = w.location.y + int(round(math.sin(ang) * 300000))
            rows.append((str(w.id), k, x, y))
    return rows


# ---------------------------------------------------------------------------
# writers

def _lonlat(proj: Projection, p: PlanarPoint) -> tuple[str, str]:
    lon, lat = proj.to_lonlat(p.x, p.y)
    return repr(lon), repr(lat)


def tasks_csv(tasks, box=DEFAULT_BOX) -> str:
    proj = Projection.for_box(box)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "lon", "lat", "reward"])
    for t in tasks:
        w.writerow([t.id, *_lonlat(proj, t.location), repr(t.reward)])
    return buf.getvalue()


def workers_csv(workers, box=DEFAULT_BOX) -> str:
    proj = Projection.for_box(box)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["driver_id", "timestamp", "lon", "lat", "ability"])
    for wk in workers:
        w.writerow([wk.id, 0, *_lonlat(proj, wk.location), repr(wk.ability)])
    return buf.getvalue()


def trajectories_csv(rows, abilities: dict, box=DEFAULT_BOX) -> str:
    proj = Projection.for_box(box)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["driver_id", "timestamp", "lon", "lat", "ability"])
    for driver, ts, x, y in rows:
        lon, lat = proj.to_lonlat(x, y)
        w.writerow([driver, ts, repr(lon), repr(lat), repr(abilities[driver])])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# ingestion

@dataclass
class IngestResult:
    items: list
    rows: int = 0
    outside: int = 0
    duplicates: int = 0
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {"rows": self.rows, "kept": len(self.items), "outside_box": self.outside,
                "duplicates": self.duplicates, **self.extra}


def _reader(path_or_text, required):
    if hasattr(path_or_text, "read"):
        text = path_or_text.read()
    elif isinstance(path_or_text, str) and "\n" in path_or_text:
        text = path_or_text
    else:
        with open(path_or_text, encoding="utf-8", newline="") as fh:
            text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ParseError("empty file", 1)
    header = [h.strip() for h in reader.fieldnames]
    reader.fieldnames = header
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError(f"missing columns {missing}; header is {header}", 1)
    return reader


def _num(row, key, line) -> float:
    try:
        v = float(row[key])
    except (TypeError, ValueError):
        raise ParseError(f"bad {key} value {row.get(key)!r}", line) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite {key} value {row[key]!r}", line)
    return v


def ingest_tasks(path, box=DEFAULT_BOX, *, reward_mean=10.0, reward_std=2.0, seed=0) -> IngestResult:
    """Parse, box-filter, project, quantize and deduplicate task rows.

    Rows without a reward get one drawn from a normal distribution truncated
    at zero, in file order, from a seed derived from ``seed``.
    """
    box = check_box(box)
    proj = Projection.for_box(box)
    reader = _reader(path, ("id", "lon", "lat"))
    has_reward = "reward" in reader.fieldnames
    res = IngestResult([])
    seen: set = set()
    pending = []
    for line, row in enumerate(reader, start=2):
        res.rows += 1
        lon, lat = _num(row, "lon", line), _num(row, "lat", line)
        if not (-90 <= lat <= 90 and -180 <= lon <= 180):
            raise ParseError(f"coordinate out of range ({lon}, {lat})", line)
        reward = None
        if has_reward and (row.get("reward") or "").strip():
            reward = _num(row, "reward", line)
            if reward <= 0:
                raise ParseError(f"reward must be positive, got {reward}", line)
        if not in_box(box, lon, lat):
            res.outside += 1
            continue
        tid = (row["id"] or "").strip()
        if not tid:
            raise ParseError("empty id", line)
        p = proj.quantize(lon, lat, tid)
        if p.xy in seen:
            res.duplicates += 1
            continue
        seen.add(p.xy)
        pending.append((tid, p, reward))
    if not pending:
        raise EmptyAfterFilter(f"no tasks left after filtering {res.rows} rows to {box}")
    n_draw = sum(r is None for _, _, r in pending)
    draws = iter(truncated_normal(np.random.default_rng(derive_seed(seed, "ingest-rewards")),
                                  reward_mean, reward_std, n_draw))
    res.items = [Task(tid, p, float(next(draws)) if r is None else r) for tid, p, r in pending]
    log.info("ingested tasks: %s", res.summary())
    return res


def ingest_workers(path, box=DEFAULT_BOX, *, traj_eps=500.0, traj_min_pts=5,
                   ability_mean=5.0, ability_std=1.0, seed=0) -> IngestResult:
    """Reduce each driver's trajectory to one location and keep drivers inside the box."""
    box = check_box(box)
    proj = Projection.for_box(box)
    reader = _reader(path, ("driver_id", "timestamp", "lon", "lat"))
    has_ability = "ability" in reader.fieldnames
    res = IngestResult([])
    traj: dict[str, list[PlanarPoint]] = {}
    seen: dict[str, set] = {}
    given: dict[str, Optional[float]] = {}
    dup = 0
    for line, row in enumerate(reader, start=2):
        res.rows += 1
        lon, lat = _num(row, "lon", line), _num(row, "lat", line)
        if not (-90 <= lat <= 90 and -180 <= lon <= 180):
            raise ParseError(f"coordinate out of range ({lon}, {lat})", line)
        driver = (row["driver_id"] or "").strip()
        if not driver:
            raise ParseError("empty driver_id", line)
        if not (row["timestamp"] or "").strip():
            raise ParseError("empty timestamp", line)
        ab = None
        if has_ability and (row.get("ability") or "").strip():
            ab = _num(row, "ability", line)
            if ab <= 0:
                raise ParseError(f"ability must be positive, got {ab}", line)
        p = proj.quantize(lon, lat)
        pts = traj.setdefault(driver, [])
        s = seen.setdefault(driver, set())
        if driver not in given or given[driver] is None:
            given[driver] = ab
        if p.xy in s:
            dup += 1
            continue
        s.add(p.xy)
        pts.append(p)
    res.duplicates = dup
    kept = []
    for driver, pts in traj.items():
        loc = trajectory_to_location(pts, traj_eps, traj_min_pts)
        lon, lat = proj.to_lonlat(loc.x, loc.y)
        if not in_box(box, lon, lat):
            res.outside += 1
            continue
        kept.append((driver, PlanarPoint(loc.x, loc.y, driver), given[driver]))
    if not kept:
        raise EmptyAfterFilter(f"no workers left after filtering {len(traj)} drivers to {box}")
    n_draw = sum(a is None for _, _, a in kept)
    draws = iter(truncated_normal(np.random.default_rng(derive_seed(seed, "ingest-abilities")),
                                  ability_mean, ability_std, n_draw))
    res.items = [Worker(d, p, float(next(draws)) if a is None else a) for d, p, a in kept]
    res.extra["drivers"] = len(traj)
    log.info("ingested workers: %s", res.summary())
    return res
