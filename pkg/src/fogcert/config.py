"""Run configuration: flat ``key=value`` text with dotted keys.

Every key has a typed default. ``RunConfig.resolved()`` fills in the
architecture-dependent defaults (loss probability, strategy); dumping a
resolved config and parsing it back yields an equal config.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ConfigError

ARCHITECTURES = ("fixed", "assigned-cls", "assigned-nls", "collaborative")


def parse_seeds(text):
    """'1..5' or '1,2,9' (or a mix: '1..3,7') -> list of ints."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError("no seeds given")
    return out


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    t = str(text).strip()
    return None if t in ("", "auto") else float(t)


# key -> (parser, default)
SCHEMA = {
    "architecture": (str, "fixed"),
    "seeds": (parse_seeds, [1, 2, 3, 4, 5]),
    "pf": (float, 0.0),
    "producers": (int, 100),
    "duration_ms": (int, 3_600_000),
    "notification_interval_ms": (int, 60_000),
    "trace": (str, ""),
    "workers": (int, 1),
    "grid.width_m": (float, 1200.0),
    "grid.height_m": (float, 1200.0),
    "mobility.speed_min": (float, 0.9),
    "mobility.speed_max": (float, 1.5),
    "mobility.pause_min_s": (float, 10.0),
    "mobility.pause_max_s": (float, 50.0),
    "radio.range_m": (float, 100.0),
    "radio.loss_prob": (_opt_float, None),
    "uplink.latency_ms": (int, 50),
    "engine.sample_interval_ms": (int, 0),
    "publish.tail_ms": (int, 60_000),
    "fixed.cell_size_m": (float, 200.0),
    "fixed.beacon_interval_ms": (int, 2000),
    "fixed.max_connection_ms": (int, 2000),
    "assigned.strategy": (str, "cls"),
    "assigned.cell_size_m": (float, 100.0),
    "assigned.notification_interval_ms": (int, 2000),
    "assigned.sample_every": (int, 30),
    "assigned.warmup_ms": (int, 30_000),
    "assigned.warmup_certify": (_bool, True),
    "assigned.beacon_interval_ms": (int, 2000),
    "assigned.neighbor_ttl_ms": (int, 2000),
    "assigned.registry_ttl_ms": (int, 6000),
    "assigned.exchange_interval_ms": (int, 2000),
    "assigned.exchange_offset_ms": (int, 1000),
    "assigned.reconnect_threshold": (int, 2),
    "assigned.hoard_neighbors": (_bool, False),
    "collab.cell_size_m": (float, 200.0),
    "collab.poll_wait_ms": (int, 2000),
    "collab.broker_count": (int, 4),
}

DEFAULT_LOSS = {"fixed": 0.01}

_POSITIVE = (
    "producers", "duration_ms", "notification_interval_ms", "workers", "grid.width_m", "grid.height_m",
    "radio.range_m", "fixed.cell_size_m", "fixed.beacon_interval_ms", "assigned.cell_size_m",
    "assigned.notification_interval_ms", "assigned.sample_every", "assigned.beacon_interval_ms",
    "assigned.exchange_interval_ms", "assigned.registry_ttl_ms", "assigned.reconnect_threshold",
    "collab.cell_size_m", "collab.broker_count",
)
_NON_NEGATIVE = (
    "uplink.latency_ms", "engine.sample_interval_ms", "publish.tail_ms", "fixed.max_connection_ms",
    "assigned.warmup_ms", "assigned.neighbor_ttl_ms", "assigned.exchange_offset_ms", "collab.poll_wait_ms",
    "mobility.pause_min_s",
)


def _convert(key, value):
    if key not in SCHEMA:
        raise ConfigError(key, "unknown key")
    parser, _ = SCHEMA[key]
    if not isinstance(value, str):
        if parser is parse_seeds:
            value = ",".join(str(v) for v in value) if isinstance(value, (list, tuple)) else str(value)
        else:
            value = str(value) if value is not None else ""
    try:
        return parser(value.strip())
    except ValueError as e:
        raise ConfigError(key, str(e)) from None


def _format(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k: d for k, (_, d) in SCHEMA.items()})

    def __getitem__(self, key):
        return self.values[key]

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values

    @property
    def architecture(self):
        return self.values["architecture"]

    @property
    def seeds(self):
        return list(self.values["seeds"])

    def with_overrides(self, overrides: dict) -> "RunConfig":
        vals = dict(self.values)
        for k, v in overrides.items():
            if v is None:
                continue
            vals[k] = _convert(k, v)
        return RunConfig(vals)

    def resolved(self) -> "RunConfig":
        """Fill architecture-dependent defaults, then validate."""
        vals = dict(self.values)
        arch = vals["architecture"]
        if arch == "assigned":
            arch = "assigned-" + vals["assigned.strategy"]
        if arch.startswith("assigned-"):
            vals["assigned.strategy"] = arch.split("-", 1)[1]
        vals["architecture"] = arch
        if vals["radio.loss_prob"] is None:
            vals["radio.loss_prob"] = DEFAULT_LOSS.get(arch.split("-")[0], 0.0)
        cfg = RunConfig(vals)
        cfg.validate()
        return cfg

    def validate(self):
        v = self.values
        arch = v["architecture"]
        if arch not in ARCHITECTURES and arch != "assigned":
            raise ConfigError("architecture", f"must be one of {', '.join(ARCHITECTURES)}")
        if v["assigned.strategy"] not in ("cls", "nls"):
            raise ConfigError("assigned.strategy", "must be cls or nls")
        if not 0.0 <= v["pf"] <= 1.0:
            raise ConfigError("pf", "must lie in [0, 1]")
        lp = v["radio.loss_prob"]
        if lp is not None and not 0.0 <= lp <= 1.0:
            raise ConfigError("radio.loss_prob", "must lie in [0, 1]")
        if not v["seeds"]:
            raise ConfigError("seeds", "must not be empty")
        for k in _POSITIVE:
            if v[k] <= 0:
                raise ConfigError(k, "must be positive")
        for k in _NON_NEGATIVE:
            if v[k] < 0:
                raise ConfigError(k, "must not be negative")
        if not 0 < v["mobility.speed_min"] <= v["mobility.speed_max"]:
            raise ConfigError("mobility.speed_min", "need 0 < speed_min <= speed_max")
        if v["mobility.pause_min_s"] > v["mobility.pause_max_s"]:
            raise ConfigError("mobility.pause_min_s", "need pause_min_s <= pause_max_s")
        if arch.startswith("assigned") and v["duration_ms"] <= v["assigned.warmup_ms"]:
            raise ConfigError("duration_ms", "must exceed assigned.warmup_ms")
        if v["publish.tail_ms"] >= v["duration_ms"]:
            raise ConfigError("publish.tail_ms", "must be shorter than duration_ms")

    def dump(self) -> str:
        return "".join(f"{k}={_format(self.values[k])}\n" for k in SCHEMA)


def parse_config(text, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key=value`` lines on top of ``base`` (defaults if None)."""
    vals = dict((base or RunConfig()).values)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        vals[key] = _convert(key, value)
    return RunConfig(vals)


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base)


def dump_config(cfg: RunConfig) -> str:
    return cfg.dump()
