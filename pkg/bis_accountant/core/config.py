"""
Configuration module for the BIS accountant
Handles environment variables and accounting defaults
"""
import math
from typing import Optional

import joblib
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Accountant settings loaded from environment variables (prefix BIS_)"""

    model_config = SettingsConfigDict(
        env_prefix="BIS_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = Field(default="INFO")
    show_progress: bool = Field(default=False)

    # Parallelism; None means every available core
    threads: Optional[int] = Field(default=None, ge=1)

    # Sampling layout. Both values change which draws land in which stream,
    # so they are echoed into every run record.
    chunk_size: int = Field(default=65536, ge=1)
    block_elements: int = Field(default=2**21, ge=1)

    # Shape and oracle limits
    max_iterations: int = Field(default=1_000_000, ge=1)
    enumeration_cap: int = Field(default=1_000_000, ge=1)

    # Noise search
    sigma_ceiling: float = Field(default=1e3, gt=0)
    sigma_floor: float = Field(default=1e-3, gt=0)
    bracket_rtol: float = Field(default=0.01, gt=0)
    bracket_max_bisections: int = Field(default=30, ge=0)
    ascent_factor: float = Field(default=1.05, gt=1)

    # Accounting defaults
    default_delta: float = Field(default=1e-5, gt=0, lt=1)
    default_delta_split: float = Field(default=0.1, gt=0, lt=1)
    min_samples: int = Field(default=1000, ge=2)
    min_coarse_samples: int = Field(default=10_000, ge=1)
    max_samples: int = Field(default=10_000_000, ge=1)
    samples_factor: float = Field(default=50.0, gt=0)
    coarse_samples_factor: float = Field(default=5.0, gt=0)


# Global settings instance
settings = Settings()


def resolve_worker_count(threads: Optional[int] = None) -> int:
    """Worker count for a run: explicit flag, then BIS_THREADS, then all cores"""
    if threads is None:
        threads = settings.threads
    if threads is None:
        threads = joblib.cpu_count()
    return max(1, int(threads))


def default_sample_count(delta_target: float, max_samples: Optional[int] = None) -> int:
    """Samples needed to resolve delta: samples_factor * ln(1/delta) / delta, capped"""
    cap = max_samples if max_samples is not None else settings.max_samples
    wanted = math.ceil(settings.samples_factor * math.log(1.0 / delta_target) / delta_target)
    return max(settings.min_samples, min(wanted, cap))


def default_coarse_sample_count(delta_target: float, max_samples: Optional[int] = None) -> int:
    """Low-precision sample count used while bracketing sigma"""
    cap = max_samples if max_samples is not None else settings.max_samples
    wanted = math.ceil(settings.coarse_samples_factor / delta_target)
    return min(max(settings.min_coarse_samples, wanted), max(cap, settings.min_coarse_samples))


def get_sampling_config() -> dict:
    """Settings that determine the stream layout of a Monte Carlo run"""
    return {
        "chunk_size": settings.chunk_size,
        "block_elements": settings.block_elements,
    }


def get_search_config() -> dict:
    """Settings that shape the noise multiplier search"""
    return {
        "sigma_ceiling": settings.sigma_ceiling,
        "sigma_floor": settings.sigma_floor,
        "bracket_rtol": settings.bracket_rtol,
        "bracket_max_bisections": settings.bracket_max_bisections,
        "ascent_factor": settings.ascent_factor,
    }
