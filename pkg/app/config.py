"""
cifsim – Application configuration.
Reads environment variables from a .env file via pydantic-settings.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Central configuration loaded from environment / .env."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # ── App ──
    APP_NAME: str = "cifsim"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # ── Database (run registry) ──
    DATABASE_URL: str = "sqlite+aiosqlite:///./cifsim.db"

    # ── Bus ──
    BUS_FREQUENCY_HZ: float = 50e6
    FIFO_LINES: int = 2

    # ── Pipeline ──
    BUFFER_MS_PER_MPIXEL: float = 42.0
    EVENT_TICK_US: int = 1
    STREAM_FRAMES: int = 5

    # ── VPU workers ──
    N_WORKERS: int = 12
    BINNING_BANDS: int = 36
    RENDER_BANDS: int = 32

    # ── Depth rendering ──
    RENDER_NEAR: float = 0.1
    RENDER_FAR: float = 100.0

    # ── Files ──
    FIXTURE_ROOT: str = "fixtures"
    OUTPUT_DIR: str = "out"
    TABLE2_DATASET: str = ""

    # ── Determinism ──
    SEED: int = 2023


settings = Settings()
