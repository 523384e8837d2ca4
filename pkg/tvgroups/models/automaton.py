"""Automaton file models (JSON, UTF-8)."""

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt


class StepTableFile(BaseModel):
    """One step of the schedule as stored on disk."""

    model_config = ConfigDict(extra="forbid")

    delta: list[list[NonNegativeInt]] = Field(
        description="n x k transition table; delta[q][x] is the next state index"
    )
    rho: list[list[NonNegativeInt]] = Field(
        description="n x k output table; rho[q] is the image list of the labeling of q"
    )


class AutomatonFile(BaseModel):
    """Automaton document with an eventually periodic schedule."""

    model_config = ConfigDict(extra="forbid")

    alphabet: int = Field(ge=2, description="Alphabet size k; letters are 0..k-1")
    states: list[str] = Field(min_length=1, description="State names, in index order")
    prefix: list[StepTableFile] = Field(
        default_factory=list, description="Steps 1..|prefix| of the schedule"
    )
    cycle: list[StepTableFile] = Field(
        min_length=1, description="Steps repeated forever after the prefix"
    )
