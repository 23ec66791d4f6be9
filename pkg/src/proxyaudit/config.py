"""Run configuration: one declarative JSON file, overridable by flags.

Relative paths in the file resolve against the file's own directory, so
a config can travel with its fixtures.  Section-by-section schema is
documented in the README; unknown keys are rejected to catch typos.
"""

from __future__ import annotations

import json
import os
from typing import Optional

from .errors import ConfigError
from .synthworld import PlantedInterest, WorldConfig

KNOWN_SECTIONS = {"seed", "out", "world", "audiences", "estimate", "skew",
                  "pageskew", "ingest", "analyze"}


class RunConfig:
    def __init__(self, data: dict, base_dir: str):
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(data) - KNOWN_SECTIONS
        if unknown:
            raise ConfigError("unknown config sections: %s" % ", ".join(sorted(unknown)))
        self.data = data
        self.base_dir = base_dir

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc)) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config %s is not valid JSON: %s" % (path, exc)) from exc
        return cls(data, os.path.dirname(os.path.abspath(path)))

    def section(self, name: str) -> dict:
        value = self.data.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError("config section %r must be an object" % name)
        return value

    def resolve(self, path: Optional[str]) -> Optional[str]:
        if path is None:
            return None
        return os.path.normpath(os.path.join(self.base_dir, path))

    def require_file(self, path: Optional[str], what: str) -> str:
        if not path:
            raise ConfigError("missing path for %s" % what)
        resolved = self.resolve(path)
        if not os.path.isfile(resolved):
            raise ConfigError("%s not found: %s" % (what, resolved))
        return resolved

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))


def world_config_from_section(section: dict, default_seed: int = 0) -> WorldConfig:
    """Build a WorldConfig from the ``world`` config section."""
    try:
        interests = [
            PlantedInterest(
                interest_id=entry["interest_id"],
                base_rate=float(entry["base_rate"]),
                planted_skew_per_pair={k: float(v)
                                       for k, v in entry.get("skews", {}).items()},
            )
            for entry in section.get("interests", [])
        ]
        joint = None
        if section.get("joint_mix") is not None:
            joint = {(party, race): float(fraction)
                     for party, row in section["joint_mix"].items()
                     for race, fraction in row.items()}
        return WorldConfig(
            population_size=int(section["population_size"]),
            party_mix={k: float(v) for k, v in section["party_mix"].items()},
            race_mix={k: float(v) for k, v in section["race_mix"].items()},
            interests=interests,
            activity_rate=float(section.get("activity_rate", 1.0)),
            rng_seed=int(section.get("rng_seed", default_seed)),
            joint_mix=joint,
        )
    except KeyError as exc:
        raise ConfigError("world config is missing field %s" % exc) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError("world config has a malformed field: %s" % exc) from exc
