import json
import struct

import pytest

from emitterkit.core.domain.photons import StreamMetadata, TimeTagStream
from emitterkit.core.errors import FormatError, StorageError
from emitterkit.infrastructure.repositories.timetagfile import TimeTagFileRepository, decode, encode, sidecar_path


@pytest.fixture
def repository() -> TimeTagFileRepository:
    return TimeTagFileRepository()


@pytest.fixture
def stream() -> TimeTagStream:
    return TimeTagStream(
        timestamps=[0, 10, 10, 2**40],
        channels=[2, 0, 1, 0],
        duration=2**40 + 5,
        metadata=StreamMetadata(seed=42, configs={"mode": "pulsed", "rep_rate": 20.8e6}),
    )


def test_saved_stream_loads_bit_identical(repository, stream, tmp_path):
    path = repository.save(stream, tmp_path / "run.ett")
    loaded = repository.load(path)

    assert loaded.same_records(stream)
    assert loaded.metadata.seed == 42
    assert loaded.metadata.configs["rep_rate"] == 20.8e6


def test_layout_is_header_plus_nine_byte_records(stream):
    payload = encode(stream)
    magic, version, n_channels, n_records = struct.unpack_from("<4sHHQ", payload)

    assert (magic, version, n_channels, n_records) == (b"ETT1", 1, 3, 4)
    assert len(payload) == 16 + 9 * 4


def test_sidecar_carries_duration_and_schema(repository, stream, tmp_path):
    path = repository.save(stream, tmp_path / "run.ett")
    sidecar = json.loads(sidecar_path(path).read_text())

    assert sidecar["duration_ps"] == stream.duration
    assert sidecar["schema_version"] == 1


def test_missing_sidecar_ends_after_last_tag(repository, stream, tmp_path):
    path = repository.save(stream, tmp_path / "run.ett")
    sidecar_path(path).unlink()

    assert repository.load(path).duration == 2**40 + 1


def test_bad_magic_is_a_format_error(stream):
    payload = bytearray(encode(stream))
    payload[:4] = b"NOPE"
    with pytest.raises(FormatError):
        decode(bytes(payload))


def test_truncated_file_is_a_format_error(stream):
    with pytest.raises(FormatError):
        decode(encode(stream)[:-3])


def test_missing_file_is_a_storage_error(repository, tmp_path):
    with pytest.raises(StorageError):
        repository.load(tmp_path / "absent.ett")
