import math
import statistics

import pytest

from eosplan.model import ModelError, constraint_ratio, dumps_instance
from eosplan.rng import SplitMix64, mix64, substream_seed
from eosplan.scenario import (
    GenerationError,
    GenerationParams,
    KinematicsConfig,
    SetEntry,
    access_window,
    attitude,
    generate_instance,
    generate_problem_set,
    manoeuvre_duration,
    p_hard_entries,
    preset_names,
)

KIN = KinematicsConfig()


def test_splitmix_reference_values():
    # first outputs of SplitMix64 seeded with 0 (widely published reference)
    rng = SplitMix64(0)
    assert rng.next_u64() == 0xE220A8397B1DCDAF
    assert rng.next_u64() == 0x6E789E6AA1B965F4
    assert 0.0 <= SplitMix64(1).random() < 1.0
    assert substream_seed(5, 0) != substream_seed(5, 1)
    assert mix64(0) == 0


def test_access_window():
    lo, hi = access_window(0.0, KIN)
    assert (lo + hi) / 2 == pytest.approx(0.0, abs=1e-12)
    assert (hi - lo) / 2 == pytest.approx(700 * math.tan(math.radians(25)) / 6.76)
    assert (hi - lo) / 2 == pytest.approx(48.3, abs=0.05)


def test_access_window_scales_with_tangent():
    wide = KinematicsConfig(pitch_half_angle=math.degrees(math.atan(2 * math.tan(math.radians(25)))))
    lo1, hi1 = access_window(3.0, KIN)
    lo2, hi2 = access_window(3.0, wide)
    assert hi2 - lo2 == pytest.approx(2 * (hi1 - lo1))


def test_attitude():
    t0 = sum(access_window(4.0, KIN)) / 2
    assert attitude((4.0, 0.0), t0, KIN) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert attitude((4.0, 700.0), t0, KIN)[0] == pytest.approx(45.0)
    assert attitude((4.0, 0.0), t0 - 700 / 6.76, KIN)[1] == pytest.approx(45.0)


def test_manoeuvre_duration():
    assert manoeuvre_duration((3.0, 2.0), (3.0, 2.0), KIN) == KIN.settle_time
    assert manoeuvre_duration((0.0, 0.0), (3.0, 1.5), KIN) == pytest.approx(6.0)
    a, b = (1.0, -7.0), (-2.5, 4.0)
    assert manoeuvre_duration(a, b, KIN) == manoeuvre_duration(b, a, KIN)


def test_config_validation():
    with pytest.raises(GenerationError):
        KinematicsConfig(altitude=0)
    with pytest.raises(GenerationError):
        KinematicsConfig(pitch_half_angle=60)
    with pytest.raises(GenerationError):
        GenerationParams(0, 15.0, 2.0, 1)
    with pytest.raises(ModelError):
        GenerationParams(3, -1.0, 2.0, 1)


@pytest.mark.parametrize("seed", [0, 1, 99])
def test_generation_is_deterministic(seed):
    p = GenerationParams(6, 12.0, 5.0, seed)
    assert dumps_instance(generate_instance(p)) == dumps_instance(generate_instance(p))


def test_different_seeds_differ():
    a = generate_instance(GenerationParams(6, 12.0, 5.0, 1))
    b = generate_instance(GenerationParams(6, 12.0, 5.0, 2))
    assert dumps_instance(a) != dumps_instance(b)


@pytest.mark.parametrize("dt", [7.0, 12.0, 15.0, 25.0])
def test_attempt_layout(dt):
    inst = generate_instance(GenerationParams(8, dt, 5.0, 3))
    for req in inst.requests:
        lo, hi = access_window(req.latitude, KIN)
        assert len(req.attempts) == math.floor((hi - lo) / dt) + 1
        for a in req.attempts:
            assert lo - 1e-9 <= a.start_time <= hi + 1e-9
            assert a.acq_duration == KIN.acq_duration


def test_manoeuvre_table_bounded_below():
    inst = generate_instance(GenerationParams(8, 12.0, 2.0, 4))
    assert inst.manoeuvre.shape == (inst.n_vars, inst.n_vars)
    assert inst.manoeuvre.min() >= KIN.settle_time


def test_reference_configuration_size():
    ns = [generate_instance(GenerationParams(11, 12.0, 10.0, s)).n_vars for s in range(20)]
    assert 50 <= statistics.mean(ns) <= 100


def test_density_non_increasing_in_latitude_range():
    means = []
    for lam in (1.0, 2.0, 5.0, 10.0):
        means.append(statistics.mean(
            generate_instance(GenerationParams(12, 16.0, lam, s)).graph.n_constraints for s in range(20)
        ))
    assert all(a >= b for a, b in zip(means, means[1:])), means


def test_problem_set_counts():
    assert generate_problem_set([]) == []
    insts = generate_problem_set([SetEntry(GenerationParams(3, 15.0, 2.0, 11), 4)])
    assert len(insts) == 4
    assert len({dumps_instance(i) for i in insts}) == 4
    assert generate_problem_set([(GenerationParams(3, 15.0, 2.0, 11), 4)]) == insts


def test_unreachable_target_names_nearest():
    params = GenerationParams(1, 15.0, 2.0, 5)
    with pytest.raises(GenerationError, match="nearest achievable N=7"):
        generate_problem_set([SetEntry(params, 1, target_n=3)])


def test_p_hard_preset():
    named = preset_names("p-hard", 2020)
    assert len(named) == 50
    for stem, inst in named:
        target = int(stem.split("_")[1][1:])
        assert abs(inst.n_vars - target) <= 0.1 * target
        assert inst.metadata.delta_t == 15.0
        assert inst.metadata.latitude_range == 2.0
    assert len(p_hard_entries()) == 5


def test_p_broad_preset_size():
    named = preset_names("p-broad", 2020)
    assert len(named) == 720
    assert {i.metadata.delta_t for _, i in named} == {10.0, 12.0, 15.0, 20.0, 25.0}
    assert all(0 <= constraint_ratio(i) <= 100 for _, i in named[:50])


def test_unknown_preset():
    with pytest.raises(GenerationError):
        preset_names("nope", 1)
