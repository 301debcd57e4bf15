import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalcodes.adversary import (BackLoad, FrontLoad, GreedyConfuser, StrategyError, TrajectoryFollower,
                                   Uniform, adversary_step, parse_strategy, run_channel)
from causalcodes.code import ERASURE, CodeSpec, encode, sample_secrets


class Eager:
    """Always asks to corrupt, to exercise the budget guard."""

    name = "eager"

    def reset(self, *a):
        pass

    def wants_corruption(self, i, x, y, remaining):
        return True


def test_step_respects_zero_budget():
    x = np.array([1, 0, 1], dtype=np.uint8)
    y = np.array([1, 0], dtype=np.uint8)
    assert adversary_step(Eager(), 2, x, y, 0, "flip") == (1, False)
    assert adversary_step(Eager(), 2, x, y, 1, "flip") == (0, True)
    assert adversary_step(Eager(), 2, x, y, 1, "erase") == (ERASURE, True)
    with pytest.raises(ValueError):
        adversary_step(Eager(), 2, x, y, -1, "flip")
    with pytest.raises(ValueError):
        adversary_step(Eager(), 1, x, y, 1, "flip")


def test_eager_is_capped():
    word = np.zeros(16, dtype=np.uint8)
    y, traj = run_channel(word, Eager(), 16, 4, 5, "flip")
    assert traj.total == 5 and y.sum() == 5


def test_front_load_flip():
    word = np.random.default_rng(0).integers(0, 2, 16).astype(np.uint8)
    y, traj = run_channel(word, FrontLoad(), 16, 4, 4, "flip")
    assert np.array_equal(y[:4], 1 - word[:4])
    assert np.array_equal(y[4:], word[4:])
    assert traj.counts == (4, 4, 4, 4)


def test_back_load():
    word = np.zeros(16, dtype=np.uint8)
    y, traj = run_channel(word, BackLoad(), 16, 4, 3, "erase")
    assert list(y[-3:]) == [ERASURE] * 3 and traj.counts == (0, 0, 0, 3)


def test_zero_budget_passthrough():
    word = np.random.default_rng(1).integers(0, 2, 32).astype(np.uint8)
    for strat in (FrontLoad(), BackLoad(), Uniform()):
        y, traj = run_channel(word, strat, 32, 8, 0, "flip")
        assert np.array_equal(y, word) and traj.total == 0


def test_uniform_erasure_balance():
    word = np.zeros(400, dtype=np.uint8)
    y, traj = run_channel(word, Uniform(), 400, 20, 83, "erase")
    per = np.diff(np.concatenate([[0], traj.counts]))
    assert per.max() - per.min() <= 1 and traj.total == 83


def test_trajectory_follower():
    target = [2, 2, 6, 7]
    y, traj = run_channel(np.zeros(16, dtype=np.uint8), TrajectoryFollower(target), 16, 4, 10, "flip")
    assert list(traj.counts) == target
    # infeasible targets are clipped: 9 in the first chunk is impossible, then the budget binds
    y, traj = run_channel(np.zeros(16, dtype=np.uint8), TrajectoryFollower([9, 9, 9, 9]), 16, 4, 6, "flip")
    assert list(traj.counts) == [4, 6, 6, 6]
    with pytest.raises(StrategyError):
        run_channel(np.zeros(16, dtype=np.uint8), TrajectoryFollower([1, 2]), 16, 4, 6, "flip")


def test_greedy_moves_toward_other_message(desk_flip_spec):
    spec = desk_flip_spec
    cw = encode(spec, 3, [0] * spec.num_chunks)
    y, traj = run_channel(cw, GreedyConfuser(spec, 3), spec.n, spec.chunk_len, 4, "flip")
    assert 0 < traj.total <= 4
    assert np.all((y == cw) | (y == 1 - cw))


def _strategies(spec, m, rng):
    target = np.minimum(np.cumsum(rng.integers(0, spec.chunk_len + 1, spec.num_chunks)), 10)
    return [FrontLoad(), BackLoad(), Uniform(), TrajectoryFollower(target), GreedyConfuser(spec, m)]


@pytest.mark.parametrize("channel", ["flip", "erase"])
def test_causality_suffix_perturbation(desk_flip_spec, channel):
    spec = desk_flip_spec
    rng = np.random.default_rng(123)
    for case in range(20):
        m = int(rng.integers(0, spec.num_messages))
        cw = encode(spec, m, sample_secrets(rng, spec.num_chunks, spec.secret_bits))
        i = int(rng.integers(0, spec.n - 1))
        other = cw.copy()
        other[i + 1:] = rng.integers(0, 2, spec.n - i - 1)
        for a, b in zip(_strategies(spec, m, np.random.default_rng(case)),
                        _strategies(spec, m, np.random.default_rng(case))):
            y1, _ = run_channel(cw, a, spec.n, spec.chunk_len, 6, channel)
            y2, _ = run_channel(other, b, spec.n, spec.chunk_len, 6, channel)
            assert np.array_equal(y1[:i + 1], y2[:i + 1]), (a.name, i)


@given(st.integers(0, 2**32 - 1), st.integers(0, 20), st.sampled_from(["flip", "erase"]))
@settings(max_examples=40, deadline=None)
def test_channel_faithful_and_budgeted(seed, budget, channel):
    rng = np.random.default_rng(seed)
    word = rng.integers(0, 2, 32).astype(np.uint8)
    for strat in (FrontLoad(), BackLoad(), Uniform()):
        y, traj = run_channel(word, strat, 32, 8, budget, channel)
        hit = y != word
        assert traj.total == hit.sum() <= budget
        if channel == "flip":
            assert np.all(y[hit] == 1 - word[hit]) and not np.any(y == ERASURE)
        else:
            assert np.all(y[hit] == ERASURE)


def test_parse_strategy(tmp_path, desk_flip_spec):
    assert isinstance(parse_strategy("front")(desk_flip_spec, 0), FrontLoad)
    assert isinstance(parse_strategy("greedy")(desk_flip_spec, 0), GreedyConfuser)
    f = tmp_path / "t.csv"
    f.write_text("# comment\nt,count\n8,1\n16,2\n24,2\n32,3\n40,3\n48,4\n56,4\n64,4\n")
    strat = parse_strategy(f"traj:{f}")(desk_flip_spec, 0)
    assert strat.target == [1, 2, 2, 3, 3, 4, 4, 4]
    for bad in ("sideways", "traj:", "frontload"):
        with pytest.raises(StrategyError):
            parse_strategy(bad)
    with pytest.raises(StrategyError):
        GreedyConfuser(CodeSpec(0, 40, 2, 30, 1, "affine"), 0)
