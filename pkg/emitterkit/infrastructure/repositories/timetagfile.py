"""Module containing the ETT1 time-tag file repository."""

import json
import logging
import struct
from pathlib import Path

import numpy as np

from emitterkit.config import config
from emitterkit.core.domain.photons import StreamMetadata, TimeTagStream
from emitterkit.core.errors import FormatError, StorageError
from emitterkit.core.repositories.itimetag import ITimeTagRepository
from emitterkit.infrastructure.utils.consts import (
    ETT_CHANNELS,
    ETT_HEADER_FORMAT,
    ETT_MAGIC,
    ETT_RECORD_DTYPE,
    ETT_VERSION,
)

logger = logging.getLogger(__name__)

HEADER_SIZE = struct.calcsize(ETT_HEADER_FORMAT)


def sidecar_path(path: Path) -> Path:
    """A function returning the JSON sidecar next to a stream file."""
    path = Path(path)
    return path.with_name(path.name + ".json")


def encode(stream: TimeTagStream) -> bytes:
    """A function encoding a stream as ETT1 bytes.

    Args:
        stream (TimeTagStream): The stream.

    Returns:
        bytes: 16-byte header followed by 9-byte records.
    """

    records = np.empty(len(stream), dtype=ETT_RECORD_DTYPE)
    records["timestamp"] = stream.timestamps
    records["channel"] = stream.channels
    header = struct.pack(ETT_HEADER_FORMAT, ETT_MAGIC, ETT_VERSION, ETT_CHANNELS, len(stream))
    return header + records.tobytes()


def decode(payload: bytes) -> tuple[np.ndarray, np.ndarray]:
    """A function decoding ETT1 bytes.

    Args:
        payload (bytes): File contents.

    Raises:
        FormatError: On a bad magic, version or length.

    Returns:
        tuple[np.ndarray, np.ndarray]: Timestamps and channels.
    """

    if len(payload) < HEADER_SIZE:
        raise FormatError("truncated ETT1 header", size=len(payload))

    magic, version, n_channels, n_records = struct.unpack_from(ETT_HEADER_FORMAT, payload)
    if magic != ETT_MAGIC:
        raise FormatError("not an ETT1 file", magic=magic)
    if version != ETT_VERSION:
        raise FormatError("unsupported ETT1 version", version=version)

    expected = HEADER_SIZE + n_records * ETT_RECORD_DTYPE.itemsize
    if len(payload) != expected:
        raise FormatError("record count does not match file length", expected=expected, size=len(payload))

    records = np.frombuffer(payload, dtype=ETT_RECORD_DTYPE, offset=HEADER_SIZE, count=n_records)
    if records.size and int(records["channel"].max()) >= n_channels:
        raise FormatError("channel label beyond declared channel count", n_channels=n_channels)

    return records["timestamp"].astype(np.uint64), records["channel"].astype(np.uint8)


class TimeTagFileRepository(ITimeTagRepository):
    """A class representing the flat-file time-tag repository."""

    def save(self, stream: TimeTagStream, path: Path) -> Path:
        """The method storing a stream with its metadata sidecar.

        Args:
            stream (TimeTagStream): The stream to store.
            path (Path): Target file.

        Returns:
            Path: The written file.
        """

        path = Path(path)
        sidecar = {
            "schema_version": config.SCHEMA_VERSION,
            "duration_ps": stream.duration,
            "n_records": len(stream),
            "seed": stream.metadata.seed,
            "configs": stream.metadata.configs,
        }
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(encode(stream))
            sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True))
        except OSError as error:
            raise StorageError(f"cannot write {path}", error=error) from error

        logger.info("wrote %d tags to %s", len(stream), path)
        return path

    def load(self, path: Path) -> TimeTagStream:
        """The method reading a stored stream.

        A missing sidecar leaves the duration one picosecond past the
        last tag.

        Args:
            path (Path): Source file.

        Returns:
            TimeTagStream: The stream, duration and metadata restored.
        """

        path = Path(path)
        try:
            timestamps, channels = decode(path.read_bytes())
            sidecar_file = sidecar_path(path)
            sidecar = json.loads(sidecar_file.read_text()) if sidecar_file.exists() else {}
        except OSError as error:
            raise StorageError(f"cannot read {path}", error=error) from error
        except json.JSONDecodeError as error:
            raise FormatError(f"bad sidecar of {path}", error=error) from error

        last = int(timestamps[-1]) + 1 if timestamps.size else 0
        stream = TimeTagStream(
            timestamps=timestamps,
            channels=channels,
            duration=int(sidecar.get("duration_ps", last)),
            metadata=StreamMetadata(
                seed=sidecar.get("seed"),
                configs=sidecar.get("configs", {}),
            ),
        )

        logger.info("read %d tags from %s", len(stream), path)
        return stream
