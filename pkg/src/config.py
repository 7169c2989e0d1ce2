"""
Process-level settings.

Values come from the environment (optionally a .env file), with defaults that
reproduce every documented scenario. Nothing here is required.
"""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()

VERSION = '1.0.0'


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    return float(raw)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    return int(raw)


@dataclass(frozen=True)
class Settings:
    log_level: str = os.getenv('LAB_LOG_LEVEL', 'WARNING')
    out_dir: str = os.getenv('LAB_OUT_DIR', 'out')
    integrator_rtol: float = _env_float('LAB_INTEGRATOR_RTOL', 1e-10)
    integrator_atol: float = _env_float('LAB_INTEGRATOR_ATOL', 1e-10)
    fd_step: float = _env_float('LAB_FD_STEP', 1e-6)
    # check-point spacing for segment validation, relative to segment length
    segment_spacing: float = _env_float('LAB_SEGMENT_SPACING', 1e-3)
    refine_rounds: int = _env_int('LAB_REFINE_ROUNDS', 3)
    t_grid_points: int = 20
    schedule_floor: float = 1e-7
    closed_form_tolerance: float = 1e-9


settings = Settings()
