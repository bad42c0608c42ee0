"""Pipeline configuration: one flat key=value sections file, one master seed.

Every stage derives its randomness from the master seed and its own stage
name, so a whole pipeline run is reproducible from the config alone.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .calibrate import DeConfig
from .ingest import DEFAULT_BUCKET_MINUTES, DEFAULT_CELL_M, GeoBox

ENV_CONFIG_VAR = "PIPELINE_CONFIG"

DEFAULT_BOX = GeoBox(lon_min=-74.03, lon_max=-73.96, lat_min=40.70, lat_max=40.78)


@dataclass(frozen=True)
class HotspotSettings:
    relevance_fraction: float = 0.3
    min_area_km2: float = 0.05
    cone_base_radius_m: float = 150.0
    cone_top_radius_m: float = 50.0
    smooth_alpha: float = 12.0
    smooth_beta: float = 0.5
    count_cap: float = 10.0
    trail_delta: float = 0.5
    trail_cell_m: float = 50.0


@dataclass(frozen=True)
class TrainingSettings:
    day_length: int = 144
    per_class: int = 10
    noise: float = 0.05
    max_shift: int = 4
    pattern_per_class: int = 10
    representatives: int = 5


@dataclass(frozen=True)
class PipelineConfig:
    out_dir: Path = Path("out")
    trips_path: Path | None = None
    box: GeoBox = DEFAULT_BOX
    bucket_cell_m: float = DEFAULT_CELL_M
    bucket_minutes: int = DEFAULT_BUCKET_MINUTES
    resolution_minutes: int = 10
    hotspots: HotspotSettings = field(default_factory=HotspotSettings)
    training: TrainingSettings = field(default_factory=TrainingSettings)
    de: DeConfig = field(default_factory=DeConfig)
    de_overrides: dict = field(default_factory=dict)
    master_seed: int = 17

    def stage_seed(self, stage: str) -> int:
        digest = hashlib.sha256(f"{self.master_seed}:{stage}".encode()).digest()
        return int.from_bytes(digest[:4], "big")

    def de_for(self, stage: str) -> DeConfig:
        cfg = dataclasses.replace(self.de, seed=self.stage_seed(f"de:{stage}"))
        overrides = self.de_overrides.get(stage, {})
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        return cfg


def _get(section, key, cast, default):
    if section is None or key not in section:
        return default
    return cast(section[key])


def load_config(path=None) -> PipelineConfig:
    """Read a config file; every key is optional and falls back to defaults."""
    base = PipelineConfig()
    if path is None:
        return base
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    parser = configparser.ConfigParser()
    parser.read(path, encoding="utf-8")

    def section(name):
        return parser[name] if parser.has_section(name) else None

    paths = section("paths")
    box_s = section("box")
    grid = section("grid")
    hs = section("hotspots")
    tr = section("training")
    de = section("de")
    seeds = section("seeds")

    box = GeoBox(
        _get(box_s, "lon_min", float, base.box.lon_min),
        _get(box_s, "lon_max", float, base.box.lon_max),
        _get(box_s, "lat_min", float, base.box.lat_min),
        _get(box_s, "lat_max", float, base.box.lat_max))
    hotspots = HotspotSettings(
        _get(hs, "relevance_fraction", float, 0.3),
        _get(hs, "min_area_km2", float, 0.05),
        _get(hs, "cone_base_radius_m", float, 150.0),
        _get(hs, "cone_top_radius_m", float, 50.0),
        _get(hs, "smooth_alpha", float, 12.0),
        _get(hs, "smooth_beta", float, 0.5),
        _get(hs, "count_cap", float, 10.0),
        _get(hs, "trail_delta", float, 0.5),
        _get(hs, "trail_cell_m", float, 50.0))
    training = TrainingSettings(
        _get(tr, "day_length", int, 144),
        _get(tr, "per_class", int, 10),
        _get(tr, "noise", float, 0.05),
        _get(tr, "max_shift", int, 4),
        _get(tr, "pattern_per_class", int, 10),
        _get(tr, "representatives", int, 5))
    de_cfg = DeConfig(
        _get(de, "population_size", int, 30),
        _get(de, "generations", int, 150),
        _get(de, "differential_weight", float, 0.7),
        _get(de, "crossover_rate", float, 0.9))

    overrides = {}
    for name in parser.sections():
        if not name.startswith("de."):
            continue
        stage = name.split(".", 1)[1]
        block = parser[name]
        stage_kv = {}
        for key, cast in (("population_size", int), ("generations", int),
                          ("differential_weight", float), ("crossover_rate", float)):
            if key in block:
                stage_kv[key] = cast(block[key])
        overrides[stage] = stage_kv

    trips = _get(paths, "trips", Path, None)
    if trips is not None and not trips.is_absolute():
        trips = path.parent / trips
    return PipelineConfig(
        out_dir=Path(_get(paths, "out", str, str(base.out_dir))),
        trips_path=trips,
        box=box,
        bucket_cell_m=_get(grid, "bucket_cell_m", float, base.bucket_cell_m),
        bucket_minutes=_get(grid, "bucket_minutes", int, base.bucket_minutes),
        resolution_minutes=_get(grid, "resolution_minutes", int, 10),
        hotspots=hotspots,
        training=training,
        de=de_cfg,
        de_overrides=overrides,
        master_seed=_get(seeds, "master", int, 17))


def write_history_csv(path, history) -> None:
    lines = ["generation,best_fitness"]
    lines.extend(f"{g},{v:.12g}" for g, v in enumerate(history))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
