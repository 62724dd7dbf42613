"""Module containing time-tag repository abstractions."""

from abc import ABC, abstractmethod
from pathlib import Path

from emitterkit.core.domain.photons import TimeTagStream


class ITimeTagRepository(ABC):
    """An abstract class representing protocol of time-tag repository."""

    @abstractmethod
    def save(self, stream: TimeTagStream, path: Path) -> Path:
        """The abstract storing a stream with its metadata sidecar.

        Args:
            stream (TimeTagStream): The stream to store.
            path (Path): Target file.

        Returns:
            Path: The written file.
        """

    @abstractmethod
    def load(self, path: Path) -> TimeTagStream:
        """The abstract reading a stored stream.

        Args:
            path (Path): Source file.

        Returns:
            TimeTagStream: The stream, duration and metadata restored.
        """
