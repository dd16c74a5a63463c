# schemas.py
# Report models shared by the CLI, the oracle and the tests

from typing import List, Optional

from pydantic import BaseModel, Field


class StateVerdict(BaseModel):
    name: str
    holds: bool
    witness: Optional[str] = None


class CheckReport(BaseModel):
    """JSON shape of `check --json`; witnesses are decimal strings."""

    formula: str
    states: List[StateVerdict]
    time_ms: float

    def verdict(self, name: str) -> StateVerdict:
        for entry in self.states:
            if entry.name == name:
                return entry
        raise KeyError(name)


class FuzzMismatch(BaseModel):
    trial: int
    seed: int
    digest: str
    formula: str
    state: str
    checker: bool
    oracle: bool


class FuzzReport(BaseModel):
    trials: int = 0
    mismatches: List[FuzzMismatch] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


class BlockMap(BaseModel):
    """Which quotient state each original state was merged into."""

    blocks: List[List[str]]
    state_to_block: dict[str, str]
