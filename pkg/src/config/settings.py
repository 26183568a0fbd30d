"""
Configuration settings for the transposable N:M mask toolkit.
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

# Load environment variables from .env file
try:
    from dotenv import load_dotenv

    # Look for .env file in the project root
    env_path = Path(__file__).parent.parent.parent / ".env"
    if env_path.exists():
        load_dotenv(env_path)
except ImportError:
    pass  # dotenv not installed, will use system environment variables


def _optional_float(name: str) -> Optional[float]:
    value = os.getenv(name)
    return float(value) if value not in (None, "") else None


def _optional_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    return int(value) if value not in (None, "") else None


@dataclass
class AppSettings:
    """Application-wide settings."""

    # Parallelism (0 = all CPUs)
    threads: int = 1

    # Solver overrides; None leaves the preset value in place
    tau_scale: Optional[float] = None
    max_iters: Optional[int] = None
    local_search_steps: Optional[int] = None

    # Directories
    output_dir: Path = Path("./outputs")

    # Debug Options
    verbose_logging: bool = False

    @classmethod
    def from_env(cls) -> "AppSettings":
        """Create settings from environment variables."""
        return cls(
            threads=int(os.getenv("TNM_THREADS", "1")),
            tau_scale=_optional_float("TNM_TAU_SCALE"),
            max_iters=_optional_int("TNM_MAX_ITERS"),
            local_search_steps=_optional_int("TNM_LS_STEPS"),
            output_dir=Path(os.getenv("TNM_OUTPUT_DIR", "./outputs")),
            verbose_logging=os.getenv("TNM_VERBOSE_LOGGING", "false").lower() == "true",
        )

    def validate(self) -> None:
        """Validate settings and raise errors if invalid."""
        if self.threads < 0:
            raise ValueError(f"TNM_THREADS must be >= 0, got {self.threads}")

        if self.tau_scale is not None and not self.tau_scale > 0:
            raise ValueError(f"TNM_TAU_SCALE must be positive, got {self.tau_scale}")

        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError(f"TNM_MAX_ITERS must be >= 1, got {self.max_iters}")

        if self.local_search_steps is not None and self.local_search_steps < 0:
            raise ValueError(f"TNM_LS_STEPS must be >= 0, got {self.local_search_steps}")
