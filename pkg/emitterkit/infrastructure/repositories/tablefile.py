"""Module containing the CSV/JSON table repository."""

import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Any, Iterable, Optional

import pandas as pd
from pydantic import BaseModel

from emitterkit.config import config
from emitterkit.core.domain.fit import Spectrum
from emitterkit.core.domain.survey import EmitterRecord
from emitterkit.core.errors import FormatError, StorageError
from emitterkit.core.repositories.itable import ITableRepository
from emitterkit.infrastructure.dto.surveydto import EmitterRecordDTO

logger = logging.getLogger(__name__)


class TableFileRepository(ITableRepository):
    """A class representing the flat-file table repository."""

    def _read_csv(self, path: Path, required: list[str], dtype: Optional[dict[str, type]] = None) -> pd.DataFrame:
        try:
            frame = pd.read_csv(path, comment="#", skipinitialspace=True, dtype=dtype)
        except (OSError, pd.errors.EmptyDataError) as error:
            raise StorageError(f"cannot read {path}", error=error) from error
        except pd.errors.ParserError as error:
            raise FormatError(f"malformed table {path}", error=error) from error

        frame.columns = [str(column).strip() for column in frame.columns]
        missing = [column for column in required if column not in frame.columns]
        if missing:
            raise FormatError(f"{path} lacks columns {missing}", columns=list(frame.columns))

        logger.info("read %d rows from %s", len(frame), path)
        return frame

    def read_spectrum(self, path: Path) -> Spectrum:
        """The method reading a `wavelength_nm,counts` table.

        Args:
            path (Path): Source file.

        Returns:
            Spectrum: The spectrum in SI units, sorted by wavelength.
        """

        frame = self._read_csv(path, ["wavelength_nm", "counts"]).sort_values("wavelength_nm")
        try:
            return Spectrum(
                wavelength=frame["wavelength_nm"].to_numpy(dtype=float) * 1e-9,
                counts=frame["counts"].to_numpy(dtype=float),
                label=Path(path).stem,
            )
        except ValueError as error:
            raise FormatError(f"invalid spectrum {path}", error=error) from error

    def read_saturation(self, path: Path) -> tuple[list[float], list[float]]:
        """The method reading a `power_w,intensity_cps` table.

        Args:
            path (Path): Source file.

        Returns:
            tuple[list[float], list[float]]: Powers and intensities.
        """

        frame = self._read_csv(path, ["power_w", "intensity_cps"])
        return frame["power_w"].astype(float).tolist(), frame["intensity_cps"].astype(float).tolist()

    def read_calibration(self, path: Path) -> list[tuple[float, float]]:
        """The method reading an `afm_thickness_nm,opl_nm` table.

        Args:
            path (Path): Source file.

        Returns:
            list[tuple[float, float]]: (thickness, OPL) pairs in meters.
        """

        frame = self._read_csv(path, ["afm_thickness_nm", "opl_nm"])
        return [
            (float(t) * 1e-9, float(opl) * 1e-9)
            for t, opl in zip(frame["afm_thickness_nm"], frame["opl_nm"])
        ]

    def read_records(self, path: Path) -> list[EmitterRecord]:
        """The method reading survey records.

        Args:
            path (Path): Source file.

        Returns:
            list[EmitterRecord]: The records in SI units.
        """

        frame = self._read_csv(path, ["flake_id"], dtype={"flake_id": str, "defect_id": str})
        frame = frame.astype(object).where(frame.notna(), None)
        try:
            return [
                EmitterRecordDTO.from_record(row).to_domain()
                for row in frame.to_dict(orient="records")
            ]
        except ValueError as error:
            raise FormatError(f"invalid survey record in {path}", error=error) from error

    def read_anneal(self, path: Path) -> dict[float, list[float]]:
        """The method reading an `anneal_temp,brightness` table.

        Args:
            path (Path): Source file.

        Returns:
            dict[float, list[float]]: Brightness samples per temperature.
        """

        frame = self._read_csv(path, ["anneal_temp", "brightness"])
        groups: dict[float, list[float]] = defaultdict(list)
        for temperature, brightness in zip(frame["anneal_temp"], frame["brightness"]):
            groups[float(temperature)].append(float(brightness))
        return dict(groups)

    def write_rows(self, rows: Iterable[dict[str, Any]], path: Path, columns: list[str]) -> Path:
        """The method writing rows as a versioned CSV table.

        Args:
            rows (Iterable[dict[str, Any]]): The rows.
            path (Path): Target file.
            columns (list[str]): Column order.

        Returns:
            Path: The written file.
        """

        path = Path(path)
        frame = pd.DataFrame(list(rows), columns=columns)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", newline="") as handle:
                handle.write(f"# schema_version: {config.SCHEMA_VERSION}\n")
                frame.to_csv(handle, index=False, float_format="%.10g")
        except OSError as error:
            raise StorageError(f"cannot write {path}", error=error) from error

        logger.info("wrote %d rows to %s", len(frame), path)
        return path

    def write_json(self, data: BaseModel | dict, path: Path) -> Path:
        """The method writing a versioned JSON document.

        Args:
            data (BaseModel | dict): The document.
            path (Path): Target file.

        Returns:
            Path: The written file.
        """

        path = Path(path)
        document = data.model_dump(mode="json") if isinstance(data, BaseModel) else dict(data)
        document.setdefault("schema_version", config.SCHEMA_VERSION)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(document, indent=2, sort_keys=True))
        except OSError as error:
            raise StorageError(f"cannot write {path}", error=error) from error

        logger.info("wrote %s", path)
        return path

    def read_json(self, path: Path) -> dict:
        """The method reading a JSON document.

        Args:
            path (Path): Source file.

        Returns:
            dict: The parsed document.
        """

        try:
            return json.loads(Path(path).read_text())
        except OSError as error:
            raise StorageError(f"cannot read {path}", error=error) from error
        except json.JSONDecodeError as error:
            raise FormatError(f"malformed JSON {path}", error=error) from error
