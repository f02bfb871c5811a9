"""Bus Pydantic schemas — pixel clock, bit depth and wire geometry."""

from typing import Literal

from pydantic import BaseModel, Field

# Reference points exercised on the bench.
REFERENCE_FREQUENCIES_HZ = (50e6, 100e6)


class BusConfig(BaseModel):
    """Configuration of one CIF or LCD link.

    `height` counts every line on the wire, the CRC trailer included.
    """

    frequency: float = Field(50e6, gt=0, description="Pixel clock in Hz")
    bpp: Literal[8, 16, 24] = 8
    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)

    model_config = {"frozen": True}

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    @property
    def period_s(self) -> float:
        return 1.0 / self.frequency
