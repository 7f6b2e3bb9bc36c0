from typing import Tuple

from pydantic import BaseModel, Field


class EngineSettings(BaseModel):
    """Knobs shared by the engine services. No environment variables are read."""

    seed: int = 0
    max_resamples: int = Field(default=8, ge=1)
    sample_bound: int = Field(default=97, ge=2)
    max_workers: int = Field(default=1, ge=1)
    check_substitutions: int = Field(default=0, ge=0)
    calibration_ranks: Tuple[int, ...] = (2, 3)


DEFAULT_SETTINGS = EngineSettings()
