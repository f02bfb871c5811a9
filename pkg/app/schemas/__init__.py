"""Pydantic schemas package."""

from app.schemas.bus import BusConfig  # noqa: F401
from app.schemas.geometry import CameraIntrinsics, Pose6D  # noqa: F401
from app.schemas.scenario import FunctionalResult, GoldenReport, RunReport, Scenario  # noqa: F401
from app.schemas.table2 import Table2, Table2Row  # noqa: F401
from app.schemas.timing import BufferRate, ComponentTimes, PipelineMode, PipelineReport  # noqa: F401
