"""Versioned prompt assets for the orchestrator and the specialist agents.

The orchestrator prompt comes in three stages that differ only in how much
analytical-query guidance they add on top of the shared template:

- ``baseline``: no analytical guidance
- ``minimal_guidance``: one added instruction line
- ``explicit_workflow``: the full three-line analytical block
"""

from __future__ import annotations

from importlib import resources

STAGE_BASELINE = "baseline"
STAGE_MINIMAL = "minimal_guidance"
STAGE_EXPLICIT = "explicit_workflow"
STAGES = (STAGE_BASELINE, STAGE_MINIMAL, STAGE_EXPLICIT)

MINIMAL_GUIDANCE_LINE = (
    "For price analysis queries, use CALCULATE_WINDOW_SUMS rather than "
    "estimation.\n\n"
)

EXPLICIT_WORKFLOW_BLOCK = (
    "Analytical Queries: For price analysis, use CALCULATE_WINDOW_SUMS with\n"
    "an appropriate window_size (e.g., 1 hour = 4 slots at 15min resolution).\n"
    "To identify expensive periods, use the MAXIMUM sum; to find cheap "
    "periods, use the MINIMUM sum.\n\n"
)

AGENT_NAMES = {
    "washing_machine_agent": "washing_machine",
    "dishwasher_agent": "dishwasher",
    "ev_charger_agent": "ev_charger",
}

APPLIANCE_AGENTS = {v: k for k, v in AGENT_NAMES.items()}


def _read_asset(name: str) -> str:
    return resources.files("hems.prompts").joinpath(f"assets/{name}").read_text(encoding="utf-8")


class PromptLibrary:
    """Loads prompt assets once and renders stage variants on demand."""

    def __init__(self):
        self._orchestrator_template = _read_asset("orchestrator.md")
        self._specialists = {
            agent_name: _read_asset(f"{agent_name}.md") for agent_name in AGENT_NAMES
        }

    def orchestrator(self, stage: str = STAGE_EXPLICIT) -> str:
        if stage == STAGE_BASELINE:
            guidance = ""
        elif stage == STAGE_MINIMAL:
            guidance = MINIMAL_GUIDANCE_LINE
        elif stage == STAGE_EXPLICIT:
            guidance = EXPLICIT_WORKFLOW_BLOCK
        else:
            raise ValueError(f"unknown prompt stage: {stage!r}")
        return self._orchestrator_template.format(analytical_guidance=guidance)

    def specialist(self, agent_name: str) -> str:
        try:
            return self._specialists[agent_name]
        except KeyError:
            raise ValueError(f"unknown specialist agent: {agent_name!r}") from None

    def specialist_for_appliance(self, appliance_id: str) -> str:
        return self.specialist(APPLIANCE_AGENTS[appliance_id])
