"""Run configuration and its flat ``key = value`` file format."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from .clustering import DEFAULT_TASK_EPS_M, DEFAULT_TASK_MIN_PTS
from .evaluation import EvalBasis, EvalWeights
from .matching import DEFAULT_CAP, Convention, TraversalOrder
from .metrics import PayoffModel

# study region: lat 30.65-30.72 N, lon 104.04-104.12 E
DEFAULT_BOX = (30.65, 104.04, 30.72, 104.12)


def derive_seed(root: int, label: str) -> int:
    """Independent child seed for one stage of the experiment tree."""
    ss = np.random.SeedSequence([int(root) & 0xFFFFFFFF, zlib.crc32(label.encode())])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def check_box(box) -> tuple[float, float, float, float]:
    box = tuple(float(v) for v in box)
    if len(box) != 4 or not (box[0] < box[2] and box[1] < box[3]):
        raise ValueError(f"bounding box must be min_lat,min_lon,max_lat,max_lon with min < max, got {box}")
    return box


def in_box(box, lon: float, lat: float) -> bool:
    return box[0] <= lat <= box[2] and box[1] <= lon <= box[3]


@dataclass(frozen=True)
class RunConfig:
    box: tuple = DEFAULT_BOX
    # downsizing
    task_eps: float = DEFAULT_TASK_EPS_M
    task_min_pts: int = DEFAULT_TASK_MIN_PTS
    worker_k: Optional[int] = None  # None -> ceil(sqrt(n_workers))
    ability_weight: float = 1.0
    traj_eps: float = 500.0
    traj_min_pts: int = 5
    # reconfiguration
    layers: int = 2
    # evaluation
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    task_alpha: Optional[float] = None
    task_beta: Optional[float] = None
    task_gamma: Optional[float] = None
    worker_alpha: Optional[float] = None
    worker_beta: Optional[float] = None
    worker_gamma: Optional[float] = None
    basis: str = "AVG-AVG"
    # matching
    order: str = "AVG"
    w: float = 0.5
    cap: float = DEFAULT_CAP
    passes: int = 1
    convention: str = Convention.TASK.value
    # metrics
    payoff_share: str = "even"
    payoff_quality: str = "mean"
    # simulated attributes for ingested data lacking them
    reward_mean: float = 10.0
    reward_std: float = 2.0
    ability_mean: float = 5.0
    ability_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "box", check_box(self.box))
        object.__setattr__(self, "cap", float(self.cap))
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("w must lie in [0, 1]")
        if not (self.cap == math.inf or (self.cap >= 1 and float(self.cap).is_integer())):
            raise ValueError("cap must be a positive integer or inf")
        if self.task_eps <= 0 or self.task_min_pts < 1:
            raise ValueError("task_eps must be > 0 and task_min_pts >= 1")
        if self.worker_k is not None and self.worker_k < 1:
            raise ValueError("worker_k must be positive")
        if self.ability_weight < 0:
            raise ValueError("ability_weight must be non-negative")
        if self.passes < 1:
            raise ValueError("passes must be >= 1")
        EvalBasis.parse(self.basis)
        TraversalOrder.parse(self.order)
        Convention(self.convention)
        PayoffModel(self.payoff_share, self.payoff_quality)
        self.task_weights, self.worker_weights  # validates

    # -- derived views --------------------------------------------------
    @property
    def eval_basis(self) -> EvalBasis:
        return EvalBasis.parse(self.basis)

    @property
    def traversal(self) -> TraversalOrder:
        return TraversalOrder.parse(self.order, derive_seed(self.seed, "traversal"))

    @property
    def effective_cap(self) -> float:
        return self.cap if self.traversal.capped else math.inf

    @property
    def task_weights(self) -> EvalWeights:
        pick = lambda o, d: d if o is None else o
        return EvalWeights(pick(self.task_alpha, self.alpha), pick(self.task_beta, self.beta),
                           pick(self.task_gamma, self.gamma))

    @property
    def worker_weights(self) -> EvalWeights:
        pick = lambda o, d: d if o is None else o
        return EvalWeights(pick(self.worker_alpha, self.alpha), pick(self.worker_beta, self.beta),
                           pick(self.worker_gamma, self.gamma))

    @property
    def payoff_model(self) -> PayoffModel:
        return PayoffModel(self.payoff_share, self.payoff_quality)

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    # -- text form ------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {_fmt(v)}")
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {f.name: _fmt(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**parse_kv(text, cls))

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return ",".join(repr(x) for x in v)
    if isinstance(v, float):
        return "inf" if v == math.inf else repr(v)
    return str(v)


def _coerce(name: str, raw: str, default):
    raw = raw.strip()
    if raw.lower() in ("none", ""):
        return None
    if isinstance(default, tuple):
        return tuple(float(x) for x in raw.split(","))
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int) and not name.startswith("cap"):
        return int(raw)
    if isinstance(default, (int, float)) or default is None:
        val = float(raw)
        if default is None and name in ("worker_k",):
            return int(val)
        return val
    return raw


def parse_kv(text: str, cls) -> dict:
    """Parse ``key = value`` lines (``#`` comments) into keyword arguments for ``cls``."""
    known = {f.name: f.default for f in fields(cls)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, val, known[key])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {exc}") from None
    return out
