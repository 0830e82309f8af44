"""
Tests for candidate control laws, release tests, the zero-order hold and the strategy registry
"""
import math
import os
import sys

import numpy as np
import pytest
from pydantic import ValidationError

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from shared.errors import ConfigError, EventOrderError
from shared.schema import TriggerBranch, TriggerSection, TriggerStrategy
from triggers import (
    TriggerState,
    apply_event,
    candidate_fixed,
    candidate_relative,
    get_trigger,
    list_triggers,
    should_fire,
)


def config(strategy="fixed", **overrides):
    return TriggerSection(strategy=strategy, **overrides)


def released(state, w, t, branch=TriggerBranch.FIXED):
    return apply_event(state, w, t, branch)


def fresh_state(u=0.0, agent=0):
    """Trigger state that has already released u at t = 0"""
    return apply_event(TriggerState(agent=agent), u, 0.0, TriggerBranch.INIT)


# ============================================================================
# Candidates
# ============================================================================

def test_fixed_candidate_values():
    cfg = config()
    assert candidate_fixed(cfg, 3.3, 0.0) == pytest.approx(3.3)
    z = cfg.mu / cfg.pi_bar
    assert candidate_fixed(cfg, 0.0, z) == pytest.approx(-4.0 * math.tanh(1.0))
    assert candidate_fixed(cfg, 0.0, z) == pytest.approx(-3.0464, abs=1e-4)
    assert candidate_fixed(cfg, 1.0, 1e6) == pytest.approx(1.0 - cfg.pi_bar)


def test_relative_candidate_values():
    cfg = config("relative")
    assert candidate_relative(cfg, 7.0, 0.0) == 0.0
    assert candidate_relative(cfg, 0.0, 1e6) == pytest.approx(-4.98)


def test_relative_candidate_opposes_error():
    """Test that z·w < 0 for every nonzero z and any α"""
    cfg = config("relative")
    rng = np.random.default_rng(2)
    for _ in range(1000):
        z = rng.uniform(-3, 3)
        if z == 0.0:
            continue
        alpha = rng.uniform(-50, 50)
        assert z * candidate_relative(cfg, alpha, z) < 0.0


def test_strategy_candidates_through_registry():
    cfg = config("switch")
    switch = get_trigger(TriggerStrategy.SWITCH)
    assert switch.candidate(cfg, 2.0, 0.3, u_applied=1.0) == candidate_fixed(cfg, 2.0, 0.3)
    assert get_trigger("periodic").candidate(cfg, 2.5, 0.3, u_applied=0.0) == 2.5


def test_switch_keeps_one_control_law_across_the_gate():
    """Test that the held magnitude changes the release test but never the candidate"""
    cfg = config("switch")
    switch = get_trigger(TriggerStrategy.SWITCH)
    for u_applied in (0.0, 1.0, 5.99, 6.0, -8.0, 250.0):
        for alpha, z in ((2.0, 0.3), (-40.0, -1.2), (0.0, 0.0)):
            assert switch.candidate(cfg, alpha, z, u_applied) == candidate_fixed(cfg, alpha, z)


# ============================================================================
# Release tests
# ============================================================================

def test_first_call_always_initializes():
    for strategy in TriggerStrategy:
        state = TriggerState(agent=0)
        assert should_fire(config(strategy.value), state, 0.0, 0.0) == TriggerBranch.INIT


def test_fixed_threshold_examples():
    cfg = config()
    assert should_fire(cfg, fresh_state(1.0), 3.6, 0.01) == TriggerBranch.FIXED
    assert should_fire(cfg, fresh_state(1.0), 3.4, 0.01) is None
    assert should_fire(cfg, fresh_state(1.0), 1.0 - 2.5, 0.01) == TriggerBranch.FIXED


def test_relative_threshold_examples():
    cfg = config("relative")
    assert should_fire(cfg, fresh_state(10.0), 14.0, 0.01) is None
    assert should_fire(cfg, fresh_state(10.0), 14.5, 0.01) == TriggerBranch.RELATIVE


def test_switch_gate_selects_branch():
    cfg = config("switch")
    # |u| = 5 < G: fixed test with π = 2.5
    assert should_fire(cfg, fresh_state(5.0), 7.6, 0.01) == TriggerBranch.FIXED
    assert should_fire(cfg, fresh_state(5.0), 7.4, 0.01) is None
    # |u| = 10 ≥ G: relative test with threshold 4.45
    assert should_fire(cfg, fresh_state(10.0), 13.0, 0.01) is None
    assert should_fire(cfg, fresh_state(-10.0), -14.5, 0.01) == TriggerBranch.RELATIVE


def test_periodic_release_with_step_tolerance():
    cfg = config("periodic", period=0.001)
    dt = 0.001
    state = fresh_state()
    assert should_fire(cfg, state, 0.0, 0.0009999999, step_tolerance=dt / 2) == TriggerBranch.PERIODIC
    assert should_fire(cfg, state, 0.0, 0.0004, step_tolerance=dt / 2) is None


def test_counters_follow_branches():
    state = TriggerState(agent=2)
    apply_event(state, 1.0, 0.0, TriggerBranch.INIT)
    apply_event(state, 2.0, 0.1, TriggerBranch.FIXED)
    apply_event(state, 3.0, 0.2, TriggerBranch.RELATIVE)
    apply_event(state, 4.0, 0.3, TriggerBranch.RELATIVE)
    assert state.update_count == 3
    assert state.event_count_fixed_branch == 1
    assert state.event_count_relative_branch == 2
    assert len(state.event_log) == 4
    assert all(e.agent == 3 for e in state.event_log)
    assert state.event_log[0].branch == TriggerBranch.INIT


# ============================================================================
# Zero-order hold
# ============================================================================

def test_event_times_strictly_increase():
    state = fresh_state()
    released(state, 1.0, 0.01)
    with pytest.raises(EventOrderError):
        released(state, 2.0, 0.01)
    with pytest.raises(EventOrderError):
        released(state, 2.0, 0.005)


def test_held_value_between_events():
    state = TriggerState(agent=0)
    apply_event(state, 0.7, 0.0, TriggerBranch.INIT)
    released(state, -1.2, 0.25)
    for t in np.linspace(0.0, 0.249, 25):
        assert state.u_at(t) == 0.7
    assert state.u_at(0.25) == -1.2
    assert state.u_at(3.0) == -1.2
    with pytest.raises(EventOrderError):
        state.u_at(-0.1)


def test_vartheta_is_candidate_minus_applied():
    state = fresh_state(1.0)
    state.w_current = 3.6
    assert state.vartheta == pytest.approx(2.6)


# ============================================================================
# Registry and configuration
# ============================================================================

def test_registry_lists_every_strategy():
    assert sorted(list_triggers()) == ["fixed", "periodic", "relative", "switch"]
    assert get_trigger("fixed").floor(config()) == 2.5
    assert get_trigger("switch").floor(config()) == 2.5
    assert get_trigger("switch").floor(config("switch", pi_star=3.0)) == 3.0
    assert get_trigger("periodic").floor(config()) is None


def test_unknown_strategy_lists_valid_names():
    with pytest.raises(ConfigError) as err:
        get_trigger("ripple")
    message = str(err.value)
    for name in ("fixed", "relative", "switch", "periodic"):
        assert name in message
    assert err.value.field_path == "trigger.strategy"


def test_side_conditions():
    with pytest.raises(ValidationError) as err:
        TriggerSection(pi=2.5, pi_bar=2.0)
    assert "π̄ > π" in str(err.value)
    with pytest.raises(ValidationError):
        TriggerSection(delta=1.0)
    conditions = {c.name: c for c in TriggerSection().side_conditions()}
    assert conditions["π̄* > π*/(1−Δ)"].passed
    assert 4.0 > 2.0 / (1.0 - 0.245)
