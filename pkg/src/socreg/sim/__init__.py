"""Wind scenarios and one-shot / rolling-window market studies."""

from .harness import (
    CaseTemplate,
    RunOutcome,
    StudyConfig,
    StudyResult,
    aggregate,
    long_format,
    mip_agreement,
    run_one_shot,
    run_rolling,
    run_scenario,
    run_study,
)
from .scenarios import DEFAULT_MU, PowerCurve, Scenario, gen_scenarios

__all__ = [
    "DEFAULT_MU",
    "CaseTemplate",
    "PowerCurve",
    "RunOutcome",
    "Scenario",
    "StudyConfig",
    "StudyResult",
    "aggregate",
    "gen_scenarios",
    "long_format",
    "mip_agreement",
    "run_one_shot",
    "run_rolling",
    "run_scenario",
    "run_study",
]
