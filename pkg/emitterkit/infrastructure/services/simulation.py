"""Module containing photon simulation service implementation."""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from emitterkit.config import AppConfig
from emitterkit.core.domain.photons import (
    PS_PER_S,
    Channel,
    DetectorConfig,
    EmitterRates,
    ExcitationConfig,
    ExcitationMode,
    IdealTags,
    StreamMetadata,
    TimeTagStream,
)
from emitterkit.core.errors import CapacityExceeded, DomainValidationError
from emitterkit.core.physics.photophysics import steady_state_populations
from emitterkit.infrastructure.services.isimulation import ISimulationService
from emitterkit.infrastructure.utils.kernels import dead_time_mask, pulsed_emission
from emitterkit.infrastructure.utils.rng import derive_seed, substream

logger = logging.getLogger(__name__)

PHOTON_CHANNELS = (Channel.A, Channel.B)


class SimulationService(ISimulationService):
    """A class implementing the photon simulation service.

    Kinetics are drawn as independent emission cycles: ground → excited,
    then either radiative decay or a detour through the shelf, repeated
    until a photon leaves. Detector effects draw from their own
    sub-streams of the master seed.
    """

    _config: AppConfig

    def __init__(self, config: AppConfig) -> None:
        """The initializer of the `simulation service`.

        Args:
            config (AppConfig): The toolkit configuration.
        """

        self._config = config

    def simulate_cw(
        self,
        rates: EmitterRates,
        det: DetectorConfig,
        duration: float,
        seed: int,
    ) -> TimeTagStream:
        """The method simulating an HBT measurement under CW excitation.

        Args:
            rates (EmitterRates): The emitter rates.
            det (DetectorConfig): The detector pair.
            duration (float): Measurement time in seconds.
            seed (int): The master seed.

        Raises:
            DomainValidationError: For a non-positive duration.
            CapacityExceeded: When the run would exceed the tag cap.

        Returns:
            TimeTagStream: Channel A/B detections.
        """

        if duration <= 0:
            raise DomainValidationError("duration must be positive", duration=duration)
        self._check_capacity(self.expected_tag_count(rates, det, duration))

        duration_ps = int(round(duration * PS_PER_S))
        emissions = self._cw_emissions(rates, duration_ps, seed)
        ideal = self._route(emissions, rates.quantum_efficiency, duration_ps, seed)

        stream = self.apply_detector(ideal, det, seed)
        stream.metadata = StreamMetadata(
            seed=seed,
            configs={
                "mode": ExcitationMode.CW.value,
                "rates": rates.model_dump(mode="json"),
                "detector": det.model_dump(mode="json"),
                "duration_s": duration,
            },
        )

        logger.info(
            "simulated cw stream: %d tags over %.3g s (seed %d)",
            len(stream), duration, seed,
        )
        return stream

    def simulate_pulsed(
        self,
        rates: EmitterRates,
        det: DetectorConfig,
        exc: ExcitationConfig,
        n_pulses: int,
        seed: int,
    ) -> TimeTagStream:
        """The method simulating a TRPL measurement.

        Excitation is instantaneous at each pulse.

        Args:
            rates (EmitterRates): The emitter rates.
            det (DetectorConfig): The detector pair.
            exc (ExcitationConfig): The pulsed source.
            n_pulses (int): Number of laser pulses.
            seed (int): The master seed.

        Raises:
            DomainValidationError: For a CW source or negative pulse count.
            CapacityExceeded: When the run would exceed the tag cap.

        Returns:
            TimeTagStream: SYNC and photon detections.
        """

        match self.validate_excitation(exc):
            case "excitation-not-pulsed":
                raise DomainValidationError("pulsed simulation needs a pulsed source")
        if n_pulses < 0:
            raise DomainValidationError("pulse count must not be negative", n_pulses=n_pulses)

        period = PS_PER_S / exc.rep_rate
        duration = n_pulses * period / PS_PER_S
        self._check_capacity(self.expected_tag_count(rates, det, duration, exc, n_pulses))

        metadata = StreamMetadata(
            seed=seed,
            configs={
                "mode": ExcitationMode.PULSED.value,
                "rates": rates.model_dump(mode="json"),
                "detector": det.model_dump(mode="json"),
                "excitation": exc.model_dump(mode="json"),
                "n_pulses": n_pulses,
                "rep_rate": exc.rep_rate,
            },
        )
        if n_pulses == 0:
            return TimeTagStream(timestamps=[], channels=[], duration=0, metadata=metadata)

        duration_ps = int(math.ceil(n_pulses * period))
        kinetics = substream(seed, "kinetics")
        emissions = pulsed_emission(
            period,
            exc.excitation_probability,
            (rates.radiative_rate + rates.intersystem_rate) / PS_PER_S,
            rates.radiative_rate / (rates.radiative_rate + rates.intersystem_rate),
            rates.deshelving_rate / PS_PER_S,
            substream(seed, "excitation").random(n_pulses),
            kinetics.standard_exponential(n_pulses),
            kinetics.random(n_pulses),
            kinetics.standard_exponential(n_pulses),
        )

        photons = self._route(emissions, rates.quantum_efficiency, duration_ps, seed)
        sync_times = np.rint(np.arange(n_pulses) * period)
        times = np.concatenate((sync_times, photons.times))
        channels = np.concatenate((np.full(n_pulses, Channel.SYNC, dtype=np.uint8), photons.channels))
        order = np.argsort(times, kind="stable")
        ideal = IdealTags(times=times[order], channels=channels[order], duration=duration_ps)

        stream = self.apply_detector(ideal, det, seed)
        stream.metadata = metadata

        logger.info(
            "simulated pulsed stream: %d pulses, %d photon tags (seed %d)",
            n_pulses, len(stream) - stream.count(Channel.SYNC), seed,
        )
        return stream

    def apply_detector(
        self,
        ideal_tags: IdealTags,
        det: DetectorConfig,
        seed: int,
    ) -> TimeTagStream:
        """The method passing ideal arrivals through imperfect detectors.

        Steps: efficiency thinning, Gaussian jitter rounded half to even,
        re-sort, per-channel non-paralyzable dead time, then dark counts.
        SYNC tags pass untouched.

        Args:
            ideal_tags (IdealTags): Time-ordered arrivals.
            det (DetectorConfig): The detector pair.
            seed (int): The master seed.

        Returns:
            TimeTagStream: The detected stream.
        """

        duration = ideal_tags.duration
        times = ideal_tags.times
        channels = ideal_tags.channels
        photon = channels != Channel.SYNC

        # drawn for every tag so each imperfection keeps its own draws
        u_keep = substream(seed, "thinning").random(times.size)
        jitter = substream(seed, "jitter").standard_normal(times.size) * det.timing_jitter_sigma * PS_PER_S

        keep = ~photon | (u_keep < det.efficiency)
        stamps = np.rint(np.where(photon, times + jitter, times))
        keep &= (stamps >= 0) & (stamps < duration)

        stamps = stamps[keep].astype(np.int64)
        channels = channels[keep]
        order = np.lexsort((channels, stamps))
        stamps, channels = stamps[order], channels[order]

        dead_ps = int(round(det.dead_time * PS_PER_S))
        if dead_ps > 0:
            accepted = np.ones(stamps.size, dtype=bool)
            for channel in PHOTON_CHANNELS:
                index = np.flatnonzero(channels == channel)
                accepted[index] = dead_time_mask(stamps[index], dead_ps)
            stamps, channels = stamps[accepted], channels[accepted]

        dark_stamps = [stamps]
        dark_channels = [channels]
        if det.dark_rate > 0 and duration > 0:
            for channel in PHOTON_CHANNELS:
                rng = substream(seed, "darks", int(channel))
                n_dark = rng.poisson(det.dark_rate * duration / PS_PER_S)
                dark_stamps.append(rng.integers(0, duration, n_dark, dtype=np.int64))
                dark_channels.append(np.full(n_dark, channel, dtype=np.uint8))

        stamps = np.concatenate(dark_stamps)
        channels = np.concatenate(dark_channels)
        order = np.lexsort((channels, stamps))

        return TimeTagStream(
            timestamps=stamps[order].astype(np.uint64),
            channels=channels[order],
            duration=duration,
            metadata=StreamMetadata(seed=seed, configs={"detector": det.model_dump(mode="json")}),
        )

    def simulate_saturation_series(
        self,
        rates: EmitterRates,
        det: DetectorConfig,
        powers: Sequence[float],
        excitation_per_watt: float,
        duration: float,
        seed: int,
    ) -> list[tuple[float, float]]:
        """The method measuring detected count rate versus CW power.

        Args:
            rates (EmitterRates): The emitter rates; excitation is overridden.
            det (DetectorConfig): The detector pair.
            powers (Sequence[float]): Laser powers in watts.
            excitation_per_watt (float): Excitation rate per watt.
            duration (float): Measurement time per power, seconds.
            seed (int): The master seed.

        Returns:
            list[tuple[float, float]]: (power, counts per second) pairs.
        """

        series = []
        for i, power in enumerate(powers):
            pumped = rates.model_copy(update={"excitation_rate": excitation_per_watt * power})
            stream = self.simulate_cw(pumped, det, duration, derive_seed(seed, "series", i))
            detected = stream.count(Channel.A) + stream.count(Channel.B)
            series.append((float(power), detected / duration))

        logger.info("simulated saturation series over %d powers", len(series))
        return series

    def expected_tag_count(
        self,
        rates: EmitterRates,
        det: DetectorConfig,
        duration: float,
        exc: Optional[ExcitationConfig] = None,
        n_pulses: int = 0,
    ) -> float:
        """The method estimating how many records a run allocates.

        Args:
            rates (EmitterRates): The emitter rates.
            det (DetectorConfig): The detector pair.
            duration (float): Measurement time in seconds.
            exc (Optional[ExcitationConfig]): The pulsed source, if any.
            n_pulses (int): Number of pulses for pulsed runs.

        Returns:
            float: Expected number of records.
        """

        darks = 2.0 * det.dark_rate * duration
        if exc is not None and exc.mode is ExcitationMode.PULSED:
            return n_pulses * (1.0 + exc.excitation_probability) + darks

        _, excited, _ = steady_state_populations(rates)
        return rates.radiative_rate * excited * duration + darks

    def validate_excitation(self, exc: ExcitationConfig) -> str | None:
        """The method responsible for validating excitation settings.

        Args:
            exc (ExcitationConfig): The source.

        Returns:
            str | None: Validation status.
        """

        if exc.mode is not ExcitationMode.PULSED:
            return "excitation-not-pulsed"

        if exc.pulse_length * exc.rep_rate >= 1:
            return "excitation-duty-invalid"

        return None

    def _check_capacity(self, expected: float) -> None:
        if expected > self._config.MAX_TAGS:
            raise CapacityExceeded(
                "expected tag count exceeds the memory cap",
                expected=int(expected),
                cap=self._config.MAX_TAGS,
            )

    def _cw_emissions(self, rates: EmitterRates, duration_ps: int, seed: int) -> np.ndarray:
        k_exc = rates.excitation_rate / PS_PER_S
        k_decay = (rates.radiative_rate + rates.intersystem_rate) / PS_PER_S
        k_back = rates.deshelving_rate / PS_PER_S
        radiative_branch = rates.radiative_rate / (rates.radiative_rate + rates.intersystem_rate)
        trapping = rates.intersystem_rate > 0 and k_back == 0

        if k_exc == 0 or duration_ps == 0:
            return np.empty(0)

        detour_time = 1.0 / k_back if k_back > 0 else 0.0
        mean_detours = rates.intersystem_rate / rates.radiative_rate
        mean_cycle = 1.0 / k_exc + 1.0 / k_decay + mean_detours * (detour_time + 1.0 / k_exc + 1.0 / k_decay)

        rng = substream(seed, "kinetics")
        chunks = []
        clock = 0.0

        while clock < duration_ps:
            n_cycles = int((duration_ps - clock) / mean_cycle * 1.05) + 64
            detours = rng.geometric(radiative_branch, n_cycles) - 1
            visits = detours + 1
            cycle = rng.gamma(visits, 1.0 / k_exc) + rng.gamma(visits, 1.0 / k_decay)
            shelf = rng.gamma(np.maximum(detours, 1), detour_time or 1.0, n_cycles)
            cycle = cycle + np.where(detours > 0, shelf, 0.0)

            if trapping and np.any(detours > 0):
                cycle = cycle[:int(np.argmax(detours > 0))]
                times = clock + np.cumsum(cycle)
                chunks.append(times[times < duration_ps])
                break

            times = clock + np.cumsum(cycle)
            chunks.append(times[times < duration_ps])
            clock = float(times[-1])

        return np.concatenate(chunks) if chunks else np.empty(0)

    def _route(self, emissions: np.ndarray, quantum_efficiency: float, duration_ps: int, seed: int) -> IdealTags:
        u_emit = substream(seed, "emission").random(emissions.size)
        u_route = substream(seed, "routing").random(emissions.size)
        emitted = u_emit < quantum_efficiency
        channels = np.where(u_route < 0.5, Channel.A, Channel.B).astype(np.uint8)

        return IdealTags(
            times=emissions[emitted],
            channels=channels[emitted],
            duration=duration_ps,
        )
