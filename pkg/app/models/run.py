"""RunRecord model — one executed scenario and its headline numbers."""

from datetime import datetime
from typing import Optional

from sqlalchemy import Boolean, DateTime, Float, String, Text, func
from sqlalchemy.orm import Mapped, mapped_column

from app.database import Base


class RunRecord(Base):
    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(primary_key=True, index=True)
    scenario: Mapped[str] = mapped_column(String(200), nullable=False, index=True)
    benchmark: Mapped[str] = mapped_column(String(50), nullable=False)
    mode: Mapped[str] = mapped_column(String(20), nullable=False)
    crc_ok_cif: Mapped[bool] = mapped_column(Boolean, default=False)
    crc_ok_lcd: Mapped[bool] = mapped_column(Boolean, default=False)
    golden_match: Mapped[Optional[bool]] = mapped_column(Boolean)
    latency_ms: Mapped[float] = mapped_column(Float, nullable=False)
    throughput_fps: Mapped[float] = mapped_column(Float, nullable=False)
    checksum: Mapped[str] = mapped_column(String(64), nullable=False)
    report_json: Mapped[str] = mapped_column(Text, nullable=False)
    created_at: Mapped[datetime] = mapped_column(
        DateTime(timezone=True), server_default=func.now()
    )
