"""Module containing photon-stream domain models."""

from enum import Enum, IntEnum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from emitterkit.core.domain.arrays import ChannelArray, FloatArray, TimestampArray

PS_PER_S = 1_000_000_000_000


class Channel(IntEnum):
    """Detector channels of the HBT set-up."""
    A = 0
    B = 1
    SYNC = 2


class ExcitationMode(str, Enum):
    """Laser operation modes."""
    CW = "cw"
    PULSED = "pulsed"


class EmitterRates(BaseModel):
    """Model representing the three-level transition rates (hertz)."""
    excitation_rate: float = Field(ge=0)
    radiative_rate: float = Field(gt=0)
    intersystem_rate: float = Field(default=0.0, ge=0)
    deshelving_rate: float = Field(default=0.0, ge=0)
    quantum_efficiency: float = Field(default=1.0, ge=0, le=1)

    model_config = ConfigDict(frozen=True, extra="ignore")


class DetectorConfig(BaseModel):
    """Model representing a single-photon detector pair."""
    efficiency: float = Field(default=1.0, ge=0, le=1)
    dark_rate: float = Field(default=20.0, ge=0)
    dead_time: float = Field(default=0.0, ge=0)
    timing_jitter_sigma: float = Field(default=0.0, ge=0)

    model_config = ConfigDict(frozen=True, extra="ignore")

    @classmethod
    def ideal(cls) -> "DetectorConfig":
        """A method returning a detector without any imperfection.

        Returns:
            DetectorConfig: Unit efficiency, no darks, dead time or jitter.
        """

        return cls(efficiency=1.0, dark_rate=0.0, dead_time=0.0, timing_jitter_sigma=0.0)


class ExcitationConfig(BaseModel):
    """Model representing the excitation source."""
    mode: ExcitationMode = ExcitationMode.PULSED
    power: Optional[float] = Field(default=None, ge=0)
    excitation_probability: float = Field(default=1.0, ge=0, le=1)
    pulse_length: float = Field(default=300e-15, ge=0)
    rep_rate: float = Field(default=20.8e6, gt=0)

    model_config = ConfigDict(frozen=True, extra="ignore")

    @model_validator(mode="after")
    def _check_duty(self) -> "ExcitationConfig":
        if self.mode is ExcitationMode.PULSED and self.pulse_length * self.rep_rate >= 1:
            raise ValueError("pulsed excitation requires pulse_length x rep_rate < 1")
        return self

    @property
    def period_ps(self) -> int:
        """int: Pulse period rounded to whole picoseconds."""
        return int(round(PS_PER_S / self.rep_rate))


class StreamMetadata(BaseModel):
    """Model representing provenance of a tag stream."""
    seed: Optional[int] = None
    configs: dict[str, Any] = Field(default_factory=dict)


class TimeTagStream(BaseModel):
    """Model representing an ordered sequence of detector time tags.

    Timestamps are integer picoseconds, channels follow `Channel`.
    """
    timestamps: TimestampArray
    channels: ChannelArray
    duration: int = Field(ge=0)
    metadata: StreamMetadata = Field(default_factory=StreamMetadata)

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="ignore")

    @model_validator(mode="after")
    def _check_records(self) -> "TimeTagStream":
        self.timestamps = np.ascontiguousarray(self.timestamps, dtype=np.uint64)
        self.channels = np.ascontiguousarray(self.channels, dtype=np.uint8)

        if self.timestamps.shape != self.channels.shape or self.timestamps.ndim != 1:
            raise ValueError("timestamps and channels must be equal-length vectors")
        if self.timestamps.size:
            if np.any(self.timestamps[1:] < self.timestamps[:-1]):
                raise ValueError("timestamps must be non-decreasing")
            if int(self.timestamps[-1]) >= self.duration:
                raise ValueError("every timestamp must precede the stream duration")
            if int(self.channels.max()) > Channel.SYNC:
                raise ValueError("unknown channel label")
        return self

    def __len__(self) -> int:
        return int(self.timestamps.size)

    @property
    def duration_s(self) -> float:
        """float: Stream duration in seconds."""
        return self.duration / PS_PER_S

    def channel(self, channel: Channel) -> np.ndarray:
        """A method selecting the tags of one channel.

        Args:
            channel (Channel): The channel label.

        Returns:
            np.ndarray: Sorted int64 picosecond timestamps.
        """

        return self.timestamps[self.channels == channel].astype(np.int64)

    def count(self, channel: Channel) -> int:
        """A method counting the tags of one channel.

        Args:
            channel (Channel): The channel label.

        Returns:
            int: Number of tags.
        """

        return int(np.count_nonzero(self.channels == channel))

    def rate(self, channel: Channel) -> float:
        """A method returning the mean count rate of a channel.

        Args:
            channel (Channel): The channel label.

        Returns:
            float: Counts per second, 0 for an empty stream.
        """

        if self.duration == 0:
            return 0.0
        return self.count(channel) / self.duration_s

    def same_records(self, other: "TimeTagStream") -> bool:
        """A method comparing records and duration bit for bit.

        Args:
            other (TimeTagStream): The stream to compare with.

        Returns:
            bool: True when both streams carry identical records.
        """

        return (
            self.duration == other.duration
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.channels, other.channels)
        )


class IdealTags(BaseModel):
    """Model representing detector-free arrivals in continuous time (ps)."""
    times: FloatArray
    channels: ChannelArray
    duration: int = Field(ge=0)

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="ignore")

    @model_validator(mode="after")
    def _check_records(self) -> "IdealTags":
        self.times = np.ascontiguousarray(self.times, dtype=np.float64)
        self.channels = np.ascontiguousarray(self.channels, dtype=np.uint8)
        if self.times.shape != self.channels.shape:
            raise ValueError("times and channels must have equal length")
        if self.times.size and np.any(np.diff(self.times) < 0):
            raise ValueError("ideal tags must be time ordered")
        return self

    @classmethod
    def from_stream(cls, stream: TimeTagStream) -> "IdealTags":
        """A method lifting a tag stream into continuous time.

        Args:
            stream (TimeTagStream): The source stream.

        Returns:
            IdealTags: Same records as float picoseconds.
        """

        return cls(
            times=stream.timestamps.astype(np.float64),
            channels=stream.channels.copy(),
            duration=stream.duration,
        )
