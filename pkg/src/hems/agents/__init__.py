from .calendar import InfeasibleDeadlineError, derive_calendar_deadline
from .orchestrator import (
    DispatchResult,
    Providers,
    SessionContext,
    dispatch,
    run_orchestration,
)
from .specialists import SpecialistFailureError, build_specialist_task, run_specialist
from .trace import (
    DEFAULT_ITERATION_CAP,
    Iteration,
    OUTCOME_ABORTED,
    OUTCOME_FINISHED,
    OUTCOME_ITERATION_CAP,
    OUTCOME_REJECTED,
    OUTCOME_RUNNING,
    RunTrace,
)

__all__ = [
    "DEFAULT_ITERATION_CAP",
    "DispatchResult",
    "InfeasibleDeadlineError",
    "Iteration",
    "OUTCOME_ABORTED",
    "OUTCOME_FINISHED",
    "OUTCOME_ITERATION_CAP",
    "OUTCOME_REJECTED",
    "OUTCOME_RUNNING",
    "Providers",
    "RunTrace",
    "SessionContext",
    "SpecialistFailureError",
    "build_specialist_task",
    "derive_calendar_deadline",
    "dispatch",
    "run_orchestration",
    "run_specialist",
]
