"""
cifsim – run registry storage.

Every scenario executed through the API is stored as one `runs` row: the
scenario name, benchmark and mode, both CRC verdicts, the golden verdict, the
simulated latency/throughput, the output checksum and the full JSON report.
The registry is an async SQLite database (aiosqlite); tables are created when
the app starts.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from sqlalchemy.engine import make_url
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine
from sqlalchemy.orm import DeclarativeBase

from app.config import settings


def sqlite_file(url: str) -> Optional[Path]:
    """Database file behind a SQLite URL; None for other backends or in-memory databases."""
    parsed = make_url(url)
    if not parsed.drivername.startswith("sqlite") or parsed.database in (None, "", ":memory:"):
        return None
    return Path(parsed.database)


# ── Engine ──
_db_file = sqlite_file(settings.DATABASE_URL)
if _db_file is not None:
    _db_file.parent.mkdir(parents=True, exist_ok=True)

engine = create_async_engine(settings.DATABASE_URL, echo=settings.DEBUG, future=True)

# ── Session factory ──
async_session = async_sessionmaker(
    bind=engine,
    class_=AsyncSession,
    expire_on_commit=False,
)


# ── Declarative base ──
class Base(DeclarativeBase):
    """Base class for registry tables."""
    pass


async def init_registry() -> None:
    """Create the `runs` table if it does not exist yet."""
    from app import models  # noqa: F401  registers RunRecord on Base.metadata

    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)


# ── Dependency for FastAPI routes ──
async def get_db() -> AsyncSession:  # type: ignore[misc]
    """Yield a registry session; commits on success, rolls back on error."""
    async with async_session() as session:
        try:
            yield session
            await session.commit()
        except Exception:
            await session.rollback()
            raise
