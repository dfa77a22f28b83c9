"""Synthetic single-pass scenarios.

A simplified kinematic picture: spherical Earth, one ascending pass, the
ground track crossing the equator at ``t = 0``. A target at latitude ``lat``
is overflown at ``t0 = R_earth * lat / ground_speed``; it can be imaged while
the along-track pitch stays within ``pitch_half_angle``. Roll is fixed by the
target's cross-track offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .model import (
    AcquisitionRequest,
    ImagingAttempt,
    InstanceMetadata,
    ModelError,
    ProblemInstance,
    forbidden_pairs,
)
from .rng import SplitMix64, substream_seed

EARTH_RADIUS_KM = 6371.0


class GenerationError(ModelError):
    pass


@dataclass(frozen=True)
class KinematicsConfig:
    altitude: float = 700.0  # km
    ground_speed: float = 6.76  # km/s
    pitch_half_angle: float = 25.0  # deg
    roll_half_angle: float = 30.0  # deg
    slew_rate: float = 1.5  # deg/s
    settle_time: float = 4.0  # s
    acq_duration: float = 8.0  # s

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if not getattr(self, name) > 0:
                raise GenerationError(f"kinematics.{name} must be > 0")
        for name in ("pitch_half_angle", "roll_half_angle"):
            if not getattr(self, name) < 60:
                raise GenerationError(f"kinematics.{name} must be < 60 deg")


@dataclass(frozen=True)
class GenerationParams:
    n_requests: int
    delta_t: float
    latitude_range: float
    seed: int = 0
    kinematics: KinematicsConfig = field(default_factory=KinematicsConfig)

    def __post_init__(self):
        if self.n_requests < 1:
            raise GenerationError("n_requests must be >= 1")
        if not self.delta_t > 0:
            raise GenerationError("delta_t must be > 0")
        if not self.latitude_range > 0:
            raise GenerationError("latitude_range must be > 0")
        if self.seed < 0:
            raise GenerationError("seed must be >= 0")


def nadir_time(latitude: float, kin: KinematicsConfig) -> float:
    return EARTH_RADIUS_KM * math.radians(latitude) / kin.ground_speed


def access_window(target_latitude: float, kinematics: KinematicsConfig) -> tuple[float, float]:
    t0 = nadir_time(target_latitude, kinematics)
    half = kinematics.altitude * math.tan(math.radians(kinematics.pitch_half_angle)) / kinematics.ground_speed
    return t0 - half, t0 + half


def attitude(target: tuple[float, float], t: float, kinematics: KinematicsConfig) -> tuple[float, float]:
    """(roll, pitch) in degrees needed to point at ``target = (lat, cross_track_km)`` at time ``t``."""
    lat, offset = target
    t0 = nadir_time(lat, kinematics)
    pitch = math.degrees(math.atan(kinematics.ground_speed * (t0 - t) / kinematics.altitude))
    roll = math.degrees(math.atan(offset / kinematics.altitude))
    return roll, pitch


def manoeuvre_duration(
    from_attitude: tuple[float, float], to_attitude: tuple[float, float], kinematics: KinematicsConfig
) -> float:
    slew = max(abs(to_attitude[0] - from_attitude[0]), abs(to_attitude[1] - from_attitude[1]))
    return slew / kinematics.slew_rate + kinematics.settle_time


def generate_instance(params: GenerationParams) -> ProblemInstance:
    kin = params.kinematics
    max_offset = kin.altitude * math.tan(math.radians(kin.roll_half_angle))
    requests = []
    for r in range(params.n_requests):
        rng = SplitMix64.stream(params.seed, r)
        lat = rng.uniform(-params.latitude_range, params.latitude_range)
        offset = rng.uniform(-max_offset, max_offset)
        lon = math.degrees(offset / (EARTH_RADIUS_KM * math.cos(math.radians(lat))))
        t_start, t_end = access_window(lat, kin)
        n_att = math.floor((t_end - t_start) / params.delta_t) + 1
        rid = f"r{r}"
        if n_att < 1:
            raise GenerationError(f"request {rid} has zero imaging attempts")
        attempts = []
        for k in range(n_att):
            t = t_start + k * params.delta_t
            roll0, pitch0 = attitude((lat, offset), t, kin)
            roll1, pitch1 = attitude((lat, offset), t + kin.acq_duration, kin)
            attempts.append(ImagingAttempt(rid, k, t, kin.acq_duration, 1.0, roll0, pitch0, roll1, pitch1))
        requests.append(AcquisitionRequest(rid, lat, lon, 1.0, tuple(attempts)))

    flat = [a for req in requests for a in req.attempts]
    end_att = np.array([(a.roll_end, a.pitch_end) for a in flat])
    start_att = np.array([(a.roll_start, a.pitch_start) for a in flat])
    slew = np.maximum(
        np.abs(start_att[None, :, 0] - end_att[:, None, 0]),
        np.abs(start_att[None, :, 1] - end_att[:, None, 1]),
    )
    table = slew / kin.slew_rate + kin.settle_time
    table.flags.writeable = False

    offsets = np.cumsum([0] + [len(req.attempts) for req in requests])
    position = {req.id: r for r, req in enumerate(requests)}

    def d_man(a: ImagingAttempt, b: ImagingAttempt) -> float:
        u = offsets[position[a.request_id]] + a.attempt_index
        v = offsets[position[b.request_id]] + b.attempt_index
        return float(table[u, v])

    pairs = set()
    for r, a in enumerate(requests):
        for s, b in enumerate(requests):
            if r == s:
                continue
            # quick reject: access windows too far apart for any conflict
            if b.attempts[0].start_time >= a.attempts[-1].start_time + kin.acq_duration + float(table.max()):
                continue
            if b.attempts[-1].start_time < a.attempts[0].start_time:
                continue
            pairs |= {((r, i), (s, j)) for i, j in forbidden_pairs(a, b, d_man)}
    meta = InstanceMetadata(params.n_requests, float(params.delta_t), float(params.latitude_range), params.seed)
    return ProblemInstance(tuple(requests), frozenset(pairs), meta, manoeuvre=table)


@dataclass(frozen=True)
class SetEntry:
    """``count`` instances sharing ``params`` (seeds derived from ``params.seed``).

    With ``target_n`` set, ``n_requests`` is searched per instance so that
    the number of attempts lands within 10 % of ``target_n``.
    """

    params: GenerationParams
    count: int
    target_n: int | None = None


def derived_seed(master: int, index: int) -> int:
    return substream_seed(master, index) >> 32


def _search_requests(params: GenerationParams, target_n: int, max_requests: int = 500) -> ProblemInstance:
    best = None
    for n_req in range(1, max_requests + 1):
        inst = generate_instance(replace(params, n_requests=n_req))
        n = inst.n_vars
        if best is None or abs(n - target_n) < abs(best.n_vars - target_n):
            best = inst
        if n > 1.1 * target_n:
            break
    if best is None or abs(best.n_vars - target_n) > 0.1 * target_n:
        nearest = None if best is None else best.n_vars
        raise GenerationError(f"target N={target_n} unreachable; nearest achievable N={nearest}")
    return best


def generate_problem_set(entries: Iterable[SetEntry | tuple]) -> list[ProblemInstance]:
    out = []
    for entry in entries:
        if not isinstance(entry, SetEntry):
            entry = SetEntry(*entry)
        if entry.count < 1:
            raise GenerationError("count must be >= 1")
        for c in range(entry.count):
            params = replace(entry.params, seed=derived_seed(entry.params.seed, c))
            if entry.target_n is None:
                out.append(generate_instance(params))
            else:
                out.append(_search_requests(params, entry.target_n))
    return out


P_HARD_TARGETS = (30, 40, 50, 60, 70)


def p_hard_entries(seed: int = 2020, kinematics: KinematicsConfig | None = None) -> list[SetEntry]:
    """Ten high-constraint instances per target size, dt = 15 s, latitude range 2 deg."""
    kin = kinematics or KinematicsConfig()
    return [
        SetEntry(GenerationParams(1, 15.0, 2.0, derived_seed(seed, target), kin), 10, target)
        for target in P_HARD_TARGETS
    ]


def p_broad_entries(seed: int = 2020, kinematics: KinematicsConfig | None = None) -> list[SetEntry]:
    """720 instances over a grid of request counts, discretisations and latitude ranges."""
    kin = kinematics or KinematicsConfig()
    grid = [
        (n_req, dt, lam)
        for n_req in (4, 6, 8, 10, 12, 14)
        for dt in (10.0, 12.0, 15.0, 20.0, 25.0)
        for lam in (1.0, 2.0, 5.0, 10.0)
    ]
    return [
        SetEntry(GenerationParams(n_req, dt, lam, derived_seed(seed, k), kin), 6)
        for k, (n_req, dt, lam) in enumerate(grid)
    ]


def preset_names(name: str, seed: int) -> list[tuple[str, ProblemInstance]]:
    """Generate a named preset as ``(file_stem, instance)`` pairs."""
    if name == "p-hard":
        out = []
        for entry in p_hard_entries(seed):
            insts = generate_problem_set([entry])
            out += [(f"phard_N{entry.target_n}_{c:02d}", inst) for c, inst in enumerate(insts)]
        return out
    if name == "p-broad":
        insts = generate_problem_set(p_broad_entries(seed))
        return [(f"p_{k:03d}", inst) for k, inst in enumerate(insts)]
    raise GenerationError(f"unknown preset {name!r}")
