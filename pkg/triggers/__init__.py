# Controller-update strategies
from .base_trigger import (
    BaseTrigger,
    TriggerConfig,
    TriggerState,
    apply_event,
    get_trigger,
    list_triggers,
    register_trigger,
    should_fire,
)
from .strategies import candidate_fixed, candidate_relative
