import math

import numpy as np
import pytest

from dynas.config import parse_config_name
from dynas.ga import Population, run_ga
from dynas.problems import make_problem
from dynas.runlog import format_block
from dynas.switching import (EvaluationCounter, PolicyError, SwitchPolicy, handoff_counts,
                             handoff_population, run_dyn_ga)

EA = parse_config_name("(1+1) EA_{>0}")
GA = parse_config_name("(10+10)-uniform-GA")


def random_pop(problem, mu, rng):
    return Population.evaluated(problem, rng.integers(0, 2, (mu, problem.dimension), dtype=np.uint8))


@pytest.mark.parametrize("mu1, mu2, expected", [
    (10, 100, (10, 40, 50)),
    (50, 100, (50, 0, 50)),
    (10, 10, (10, 0, 0)),
    (100, 10, (10, 0, 0)),
    (1, 2, (1, 0, 1)),
    (1, 3, (1, 0, 2)),
    (1, 4, (1, 1, 2)),
])
def test_handoff_counts(mu1, mu2, expected):
    assert handoff_counts(mu1, mu2) == expected


def test_grow_keeps_everyone_and_counts_fresh():
    problem = make_problem(1, 40)
    rng = np.random.default_rng(1)
    pop = random_pop(problem, 10, rng)
    counter = EvaluationCounter()
    new, report = handoff_population(pop, 10, 100, problem, rng, counter)
    assert (report.carried, report.best_copies, report.fresh) == (10, 40, 50)
    assert counter.count == 50 and len(new) == 100
    assert np.array_equal(new.genomes[:10], pop.genomes)
    best = pop.genomes[pop.fitness.argmax()]
    assert sum(np.array_equal(g, best) for g in new.genomes[10:50]) == 40
    # fresh individuals carry their true fitness
    assert np.array_equal(new.fitness, Population.evaluated(problem, new.genomes).fitness)


def test_same_size_is_identity():
    problem = make_problem(2, 30)
    rng = np.random.default_rng(2)
    pop = random_pop(problem, 10, rng)
    counter = EvaluationCounter()
    new, _ = handoff_population(pop, 10, 10, problem, rng, counter)
    assert np.array_equal(new.genomes, pop.genomes) and counter.count == 0


def test_shrink_keeps_the_best():
    problem = make_problem(1, 30)
    rng = np.random.default_rng(3)
    for _ in range(50):
        pop = random_pop(problem, 50, rng)
        new, report = handoff_population(pop, 50, 5, problem, rng)
        assert sorted(new.fitness) == sorted(pop.fitness)[-5:]
        assert report.fresh == 0 and report.carried == 5


def test_handoff_errors():
    problem = make_problem(1, 10)
    rng = np.random.default_rng(0)
    pop = random_pop(problem, 3, rng)
    with pytest.raises(PolicyError):
        handoff_population(pop, 4, 5, problem, rng)
    with pytest.raises(PolicyError):
        handoff_population(pop, 3, 0, problem, rng)


def test_policy_text_roundtrip(tmp_path):
    policy = SwitchPolicy.switch_once(EA, GA, 96.0)
    assert policy.name == "(1+1) EA_{>0} | 96.0 | (10+10)-uniform-GA"
    assert policy.to_text() == "-inf (1+1) EA_{>0}\n96.0 (10+10)-uniform-GA\n"
    policy.write(tmp_path / "p.txt")
    assert SwitchPolicy.read(tmp_path / "p.txt") == policy
    text = "# comment\n\n-inf (1+1) EA_{>0}\n  \n96 (10+10)-uniform-GA\n"
    assert SwitchPolicy.from_text(text) == policy


@pytest.mark.parametrize("text", [
    "",
    "0 (1+1) EA_{>0}\n",
    "-inf (1+1) EA_{>0}\n5 (1+1) EA_{>0}\n5 (1+1) EA_{>0}\n",
    "-inf (1+1) EA_{>0}\n5 (1+1) EA_{>0}\n4 (1+1) EA_{>0}\n",
    "-inf (1+1) EA\n",
    "abc (1+1) EA_{>0}\n",
])
def test_bad_policies(text):
    with pytest.raises(PolicyError):
        SwitchPolicy.from_text(text)


def test_single_config_policy_equals_static_run():
    problem = make_problem(2, 60)
    for seed in range(5):
        a = run_dyn_ga(SwitchPolicy(((-math.inf, GA),)), problem, 20_000, 60, seed)
        b = run_ga(GA, problem, 20_000, 60, seed)
        assert format_block(a) == format_block(b)


def test_unreached_threshold_equals_static_run():
    problem = make_problem(1, 50)
    policy = SwitchPolicy.switch_once(GA, EA, 1000.0)
    for seed in range(5):
        a, stats = run_dyn_ga(policy, problem, 20_000, 50, seed, with_stats=True)
        assert format_block(a) == format_block(run_ga(GA, problem, 20_000, 50, seed))
        assert stats.stage == 0 and stats.switches[1][0] == -1


def test_switch_happens_once_threshold_reached():
    problem = make_problem(1, 100)
    policy = SwitchPolicy.switch_once(EA, GA, 80.0)
    for seed in range(10):
        log, stats = run_dyn_ga(policy, problem, 100_000, 100, seed, with_stats=True)
        at = stats.switches[1][0]
        assert stats.stage == 1 and at > 0
        # the switch follows the generation in which 80 was first reached
        first = next(e for e, f in zip(log.evaluations, log.best_f) if f >= 80)
        # one offspring per (1+1) generation; only the 5 fresh individuals are evaluated
        assert at == first + 5
        assert tuple(stats.switches[1][1:]) == (1, 4, 5)
        assert log.hit_final_target and log.config_name == policy.name


def test_switch_right_after_initialisation():
    problem = make_problem(1, 50)
    policy = SwitchPolicy.switch_once(parse_config_name("(10+10) EA_{>0}"),
                                      parse_config_name("(100+100) EA_{>0}"), -1e9)
    _, stats = run_dyn_ga(policy, problem, 50_000, 50, 0, with_stats=True)
    assert stats.switches[1][0] == 10 + 50
    assert tuple(stats.switches[1][1:]) == (10, 40, 50)
