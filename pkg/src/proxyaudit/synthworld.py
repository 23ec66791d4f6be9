"""Synthetic populations with planted interest skews.

This module is the ground-truth side of the toolkit: it generates
populations whose per-group interest rates are planted by construction,
and evaluates the skew statistic by exhaustive counting so that every
estimate-based computation elsewhere can be checked against an exact
oracle.

Planting scheme: an interest with base rate p and a planted skew S for a
pair (A, B) gives group A the rate p*(1+S) and group B the rate p*(1-S),
which makes the expected value of the skew statistic equal S by
construction.  Party and race act as independent multiplicative factors;
several race pairs at once are reconciled in log-ratio space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DataError
from .skew import DEFAULT_MIN_RELIABLE_COUNT, PAIR_AUDIENCES, SkewScore

log = logging.getLogger(__name__)

PARTIES = ("REP", "DEM", "OTH")
RACES = ("WHITE", "BLACK", "HISPANIC", "OTHER")

# States whose voter records carry self-reported race.
SELF_REPORT_STATES = ("AL", "FL", "GA", "LA", "NC", "SC", "TN")

_PARTY_PAIRS = {p for p, (a, b) in PAIR_AUDIENCES.items() if a in PARTIES}
_RACE_PAIRS = {p for p, (a, b) in PAIR_AUDIENCES.items() if a in RACES}


def _pair_ratio_log(s: float) -> float:
    return float(np.log1p(s) - np.log1p(-s))


def _race_factors(planted: Dict[str, float]) -> Dict[str, float]:
    """Per-race rate multipliers realizing the planted race-pair skews.

    A single pair maps directly to (1+S, 1-S).  Multiple pairs are solved
    jointly: least squares on log-multipliers with the pairwise ratio
    constraints, then rescaled so the involved multipliers average 1
    (which reproduces 1 +/- S exactly in the single-pair case).
    """
    race_pairs = {p: s for p, s in planted.items() if p in _RACE_PAIRS}
    factors = {race: 1.0 for race in RACES}
    if not race_pairs:
        return factors
    if len(race_pairs) == 1:
        (pair, s), = race_pairs.items()
        a, b = PAIR_AUDIENCES[pair]
        factors[a] = 1.0 + s
        factors[b] = 1.0 - s
        return factors

    involved = sorted({g for p in race_pairs for g in PAIR_AUDIENCES[p]})
    index = {g: i for i, g in enumerate(involved)}
    rows, rhs = [], []
    for pair in sorted(race_pairs):
        a, b = PAIR_AUDIENCES[pair]
        row = [0.0] * len(involved)
        row[index[a]] = 1.0
        row[index[b]] = -1.0
        rows.append(row)
        rhs.append(_pair_ratio_log(race_pairs[pair]))
    rows.append([1.0] * len(involved))
    rhs.append(0.0)
    solution, residual, _rank, _sv = np.linalg.lstsq(
        np.asarray(rows), np.asarray(rhs), rcond=None)
    if residual.size and residual[0] > 1e-12:
        log.warning("planted race skews %r are mutually inconsistent; "
                    "using least-squares compromise", race_pairs)
    g = np.exp(solution)
    g = g / g.mean()
    for race, value in zip(involved, g):
        factors[race] = float(value)
    return factors


def _party_factors(planted: Dict[str, float]) -> Dict[str, float]:
    factors = {party: 1.0 for party in PARTIES}
    if "RD" in planted:
        factors["REP"] = 1.0 + planted["RD"]
        factors["DEM"] = 1.0 - planted["RD"]
    return factors


@dataclass
class PlantedInterest:
    """An interest to plant, with target skews per audience pair.

    Skews must lie in the open interval (-1, 1) and the implied per-group
    membership probabilities must stay inside [0, 1]; infeasible
    combinations are rejected at construction.
    """

    interest_id: str
    base_rate: float
    planted_skew_per_pair: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.interest_id:
            raise ConfigError("interest_id must be non-empty")
        if not 0.0 <= self.base_rate <= 1.0:
            raise ConfigError("interest %r: base_rate %r outside [0, 1]"
                              % (self.interest_id, self.base_rate))
        for pair, s in self.planted_skew_per_pair.items():
            if pair not in PAIR_AUDIENCES:
                raise ConfigError("interest %r: unknown pair %r" % (self.interest_id, pair))
            if not -1.0 < s < 1.0:
                raise ConfigError("interest %r: planted skew %r for %s outside (-1, 1)"
                                  % (self.interest_id, s, pair))
        self._party_factor = _party_factors(self.planted_skew_per_pair)
        self._race_factor = _race_factors(self.planted_skew_per_pair)
        worst = self.base_rate * max(self._party_factor.values()) * max(self._race_factor.values())
        if worst > 1.0 + 1e-12:
            raise ConfigError(
                "interest %r: planted skews imply a membership probability of %.4f > 1"
                % (self.interest_id, worst))

    def membership_probability(self, party: str, race: str) -> float:
        return min(1.0, self.base_rate * self._party_factor[party] * self._race_factor[race])


@dataclass
class WorldConfig:
    """Recipe for one synthetic world.

    ``joint_mix``, when given, overrides the independent party and race
    mixes with an explicit party x race joint table (fractions sum to 1),
    so correlated structure such as Black voters skewing Democratic can
    be planted.
    """

    population_size: int
    party_mix: Dict[str, float]
    race_mix: Dict[str, float]
    interests: List[PlantedInterest] = field(default_factory=list)
    activity_rate: float = 1.0
    rng_seed: int = 0
    joint_mix: Optional[Dict[Tuple[str, str], float]] = None

    def __post_init__(self):
        if self.population_size < 0:
            raise ConfigError("population_size must be >= 0")
        if not 0.0 <= self.activity_rate <= 1.0:
            raise ConfigError("activity_rate %r outside [0, 1]" % self.activity_rate)
        for label in self.party_mix:
            if label not in PARTIES:
                raise ConfigError("unknown party label %r" % label)
        for label in self.race_mix:
            if label not in RACES:
                raise ConfigError("unknown race label %r" % label)
        if abs(sum(self.party_mix.values()) - 1.0) > 1e-9:
            raise ConfigError("party_mix fractions must sum to 1")
        if abs(sum(self.race_mix.values()) - 1.0) > 1e-9:
            raise ConfigError("race_mix fractions must sum to 1")
        if self.joint_mix is not None:
            if abs(sum(self.joint_mix.values()) - 1.0) > 1e-9:
                raise ConfigError("joint_mix fractions must sum to 1")
            for party, race in self.joint_mix:
                if party not in PARTIES or race not in RACES:
                    raise ConfigError("joint_mix has unknown cell (%r, %r)" % (party, race))
        seen = set()
        for interest in self.interests:
            if interest.interest_id in seen:
                raise ConfigError("duplicate interest_id %r" % interest.interest_id)
            seen.add(interest.interest_id)

    def cell_probabilities(self) -> Dict[Tuple[str, str], float]:
        if self.joint_mix is not None:
            return dict(self.joint_mix)
        return {
            (party, race): self.party_mix[party] * self.race_mix[race]
            for party in self.party_mix
            for race in self.race_mix
        }


@dataclass(frozen=True)
class Member:
    id: str
    party: str
    race: str
    active: bool
    interests: frozenset


@dataclass(frozen=True)
class Population:
    members: Tuple[Member, ...]
    interest_ids: Tuple[str, ...]

    def __len__(self):
        return len(self.members)


def _cell_counts(config: WorldConfig) -> List[Tuple[str, str, int]]:
    """Largest-remainder apportionment of members to (party, race) cells.

    Exact composition (rather than iid draws) keeps group totals
    deterministic, which the estimate-vs-oracle tests rely on.
    """
    probs = config.cell_probabilities()
    cells = sorted(probs)  # deterministic tie-breaking order
    n = config.population_size
    floors = {c: int(np.floor(probs[c] * n)) for c in cells}
    remainder = n - sum(floors.values())
    by_fraction = sorted(cells, key=lambda c: (-(probs[c] * n - floors[c]), c))
    for c in by_fraction[:remainder]:
        floors[c] += 1
    return [(party, race, floors[(party, race)]) for party, race in cells]


def generate_population(config: WorldConfig) -> Population:
    """Generate one world; deterministic for a fixed rng_seed."""
    rng = np.random.default_rng(config.rng_seed)
    n = config.population_size

    party_arr = np.empty(n, dtype=object)
    race_arr = np.empty(n, dtype=object)
    pos = 0
    for party, race, count in _cell_counts(config):
        party_arr[pos:pos + count] = party
        race_arr[pos:pos + count] = race
        pos += count
    order = rng.permutation(n)
    party_arr = party_arr[order]
    race_arr = race_arr[order]

    active = rng.random(n) < config.activity_rate

    member_interests: List[List[str]] = [[] for _ in range(n)]
    for interest in config.interests:
        p = np.empty(n, dtype=float)
        for party in PARTIES:
            for race in RACES:
                mask = (party_arr == party) & (race_arr == race)
                if mask.any():
                    p[mask] = interest.membership_probability(party, race)
        holders = np.nonzero(rng.random(n) < p)[0]
        for i in holders:
            member_interests[i].append(interest.interest_id)

    width = max(len(str(max(n - 1, 0))), 6)
    members = tuple(
        Member(
            id="v%0*d" % (width, i),
            party=party_arr[i],
            race=race_arr[i],
            active=bool(active[i]),
            interests=frozenset(member_interests[i]),
        )
        for i in range(n)
    )
    return Population(members=members,
                      interest_ids=tuple(i.interest_id for i in config.interests))


def _group_selector(label: str):
    if label in PARTIES:
        return lambda m: m.party == label
    if label in RACES:
        return lambda m: m.race == label
    raise ConfigError("unknown group label %r" % label)


def true_skew(pop: Population, interest: str, pair: str,
              min_reliable_count=DEFAULT_MIN_RELIABLE_COUNT) -> SkewScore:
    """Exact skew of ``interest`` between the two groups of ``pair``.

    Counts active members exhaustively; the ratio is evaluated with
    integer cross-products and a single division, so the result is exact
    up to one final rounding and exactly antisymmetric in the pair.
    """
    if interest not in pop.interest_ids:
        raise DataError("interest %r not present in this world" % interest)
    if pair not in PAIR_AUDIENCES:
        raise ConfigError("unknown audience pair %r" % pair)
    label_a, label_b = PAIR_AUDIENCES[pair]
    in_a = _group_selector(label_a)
    in_b = _group_selector(label_b)

    n_a = n_b = n_a_i = n_b_i = 0
    for m in pop.members:
        if not m.active:
            continue
        if in_a(m):
            n_a += 1
            if interest in m.interests:
                n_a_i += 1
        elif in_b(m):
            n_b += 1
            if interest in m.interests:
                n_b_i += 1
    if n_a == 0 or n_b == 0:
        raise DataError("pair %s has an empty active group (%s=%d, %s=%d)"
                        % (pair, label_a, n_a, label_b, n_b))

    reliable = min(n_a_i, n_b_i) >= min_reliable_count
    numerator = n_a_i * n_b - n_b_i * n_a
    denominator = n_a_i * n_b + n_b_i * n_a
    if denominator == 0:
        return SkewScore(None, pair, n_a_i, n_a, n_b_i, n_b,
                         reliable=reliable, reason="no coverage in either audience")
    return SkewScore(numerator / denominator, pair, n_a_i, n_a, n_b_i, n_b,
                     reliable=reliable)


def population_to_json(pop: Population, destination) -> None:
    """Persist a population (platform-side knowledge) for later use by
    the synthetic reach backend.  Interests are stored as indices into
    the interest_ids list to keep the file small."""
    import json

    index = {interest: i for i, interest in enumerate(pop.interest_ids)}
    members = [
        [m.id, m.party, m.race, 1 if m.active else 0,
         sorted(index[i] for i in m.interests)]
        for m in pop.members
    ]
    with open(destination, "w", encoding="utf-8") as fh:
        json.dump({"interest_ids": list(pop.interest_ids), "members": members},
                  fh, separators=(",", ":"))
        fh.write("\n")


def population_from_json(source) -> Population:
    import json

    try:
        with open(source, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError("cannot read population %s: %s" % (source, exc)) from exc
    interest_ids = tuple(payload["interest_ids"])
    members = tuple(
        Member(id=m[0], party=m[1], race=m[2], active=bool(m[3]),
               interests=frozenset(interest_ids[i] for i in m[4]))
        for m in payload["members"]
    )
    return Population(members=members, interest_ids=interest_ids)


def export_voter_file(pop: Population, destination,
                      states: Sequence[str] = SELF_REPORT_STATES) -> int:
    """Write the voter-record file consumed by the audience builder.

    Interest memberships are deliberately not exported: they are
    platform-side knowledge, visible only to the synthetic reach backend.
    States are assigned round-robin from ``states``.  Returns the number
    of data rows written.
    """
    try:
        with open(destination, "w", newline="", encoding="utf-8") as fh:
            fh.write("voter_id,state,party,race\n")
            for i, m in enumerate(pop.members):
                fh.write("%s,%s,%s,%s\n" % (m.id, states[i % len(states)], m.party, m.race))
    except OSError as exc:
        raise DataError("cannot write voter file %s: %s" % (destination, exc)) from exc
    return len(pop.members)
