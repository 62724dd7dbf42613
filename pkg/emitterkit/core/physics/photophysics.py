"""Module containing analytic photophysics models and derived quantities."""

import math
from typing import Literal, Optional

import numpy as np

from emitterkit.core.domain.emitter import (
    LineshapeParams,
    Peak,
    PowerLawParams,
    SaturationParams,
    ThreeLevelParams,
)
from emitterkit.core.domain.photons import EmitterRates
from emitterkit.core.errors import DegenerateRates, DomainValidationError
from emitterkit.core.physics.curves import G2Model, PseudoVoigtModel, SaturationModel
from emitterkit.infrastructure.utils.consts import (
    ELEMENTARY_CHARGE,
    PLANCK,
    SPEED_OF_LIGHT,
)

DEGENERACY_TOLERANCE = 1e-9

AreaConvention = Literal["diameter", "textbook"]


def g2_model(tau: np.ndarray | float, p: ThreeLevelParams) -> np.ndarray | float:
    """A function evaluating the three-level g²(τ).

    Args:
        tau (np.ndarray | float): Delay in seconds.
        p (ThreeLevelParams): Model parameters.

    Returns:
        np.ndarray | float: 1 − A·exp(−|τ−μ|/t1) + B·exp(−|τ−μ|/t2).
    """

    theta = np.array([
        p.antibunch_amp,
        p.bunch_amp,
        p.excited_lifetime,
        p.shelving_lifetime,
        p.delay_offset,
    ])
    values = G2Model().evaluate(np.atleast_1d(tau), theta)
    return values if np.ndim(tau) else float(values[0])


def saturation_model(power: np.ndarray | float, p: SaturationParams) -> np.ndarray | float:
    """A function evaluating the saturation curve I_sat·P/(P + P_sat) + I_d.

    Args:
        power (np.ndarray | float): Excitation power in watts.
        p (SaturationParams): Model parameters.

    Returns:
        np.ndarray | float: Count rate in counts per second.
    """

    theta = np.array([p.sat_intensity, p.sat_power, p.dark_intensity])
    values = SaturationModel().evaluate(np.atleast_1d(power), theta)
    return values if np.ndim(power) else float(values[0])


def power_law_model(power: np.ndarray | float, p: PowerLawParams) -> np.ndarray | float:
    """A function evaluating exp(c)·P^α.

    Args:
        power (np.ndarray | float): Excitation power in watts.
        p (PowerLawParams): Model parameters.

    Returns:
        np.ndarray | float: Intensity.
    """

    return np.exp(p.log_prefactor) * np.power(power, p.slope)


def pseudo_voigt(wavelength: np.ndarray, peak: Peak) -> np.ndarray:
    """A function evaluating one area-normalized pseudo-Voigt peak.

    Args:
        wavelength (np.ndarray): Wavelengths in meters.
        peak (Peak): The peak.

    Returns:
        np.ndarray: Counts per unit wavelength times the area.
    """

    return lineshape_model(wavelength, LineshapeParams(peaks=(peak,), baseline=0.0))


def lineshape_model(wavelength: np.ndarray, p: LineshapeParams) -> np.ndarray:
    """A function evaluating a multi-peak spectrum.

    Args:
        wavelength (np.ndarray): Wavelengths in meters.
        p (LineshapeParams): Peaks and baseline.

    Returns:
        np.ndarray: Modelled counts.
    """

    model = PseudoVoigtModel(len(p.peaks), fit_gauss_fraction=True)
    theta = np.array(
        [value for peak in p.peaks for value in (peak.center, peak.fwhm, peak.area, peak.gauss_fraction)]
        + [p.baseline]
    )
    return model.evaluate(np.asarray(wavelength, dtype=np.float64), theta)


def linewidth_to_bandwidth(center: float, fwhm: float) -> float:
    """A function converting a spectral linewidth into a frequency bandwidth.

    Args:
        center (float): Line center λ0 in meters.
        fwhm (float): Linewidth Δλ in meters.

    Returns:
        float: Δν = c·Δλ/λ0² in hertz.
    """

    return SPEED_OF_LIGHT * fwhm / center**2


def lifetime_bandwidth_product(center: float, fwhm: float, lifetime: float) -> float:
    """A function returning Δν·τ.

    Args:
        center (float): Line center in meters.
        fwhm (float): Linewidth in meters.
        lifetime (float): Excited state lifetime in seconds.

    Returns:
        float: The dimensionless product.
    """

    return linewidth_to_bandwidth(center, fwhm) * lifetime


def lifetime_for_product(center: float, fwhm: float, product: float) -> float:
    """A function inverting the lifetime-bandwidth product for τ.

    Args:
        center (float): Line center in meters.
        fwhm (float): Linewidth in meters.
        product (float): Target Δν·τ.

    Returns:
        float: Lifetime in seconds.
    """

    return product / linewidth_to_bandwidth(center, fwhm)


def transform_limit_ratio(product: float) -> float:
    """A function returning how far Δν·τ lies above the Fourier limit 1/(2π)."""
    return product * 2.0 * math.pi


def photon_energy(wavelength: float) -> float:
    """A function returning the photon energy in electronvolts.

    Args:
        wavelength (float): Vacuum wavelength in meters.

    Returns:
        float: hc/(λe).
    """

    return PLANCK * SPEED_OF_LIGHT / (wavelength * ELEMENTARY_CHARGE)


def duty_cycle(pulse_length: float, rep_rate: float) -> float:
    """A function returning the fraction of time the laser is on.

    Args:
        pulse_length (float): Pulse length in seconds.
        rep_rate (float): Repetition rate in hertz.

    Raises:
        DomainValidationError: When the pulses overlap.

    Returns:
        float: pulse_length × rep_rate.
    """

    duty = pulse_length * rep_rate
    if duty >= 1:
        raise DomainValidationError("pulse_length x rep_rate must stay below 1", duty=duty)
    return duty


def peak_intensity(
    average_power: float,
    duty: float,
    spot_diameter: float,
    convention: AreaConvention = "diameter",
) -> float:
    """A function returning the peak intensity of a pulsed laser focus.

    The default spot area is π·d². The textbook disc area π·d²/4 is
    selected with `convention="textbook"` and yields four times more.

    Args:
        average_power (float): Time averaged power in watts.
        duty (float): Duty cycle.
        spot_diameter (float): Focal spot diameter in meters.
        convention (AreaConvention): Spot area convention.

    Returns:
        float: Peak intensity in W/m².
    """

    if not 0 < duty <= 1:
        raise DomainValidationError("duty cycle must lie in (0, 1]", duty=duty)

    area = math.pi * spot_diameter**2
    if convention == "textbook":
        area /= 4.0
    return average_power / (duty * area)


def _rate_matrix(rates: EmitterRates, excitation_rate: float) -> np.ndarray:
    return np.array([
        [-(excitation_rate + rates.radiative_rate + rates.intersystem_rate), -excitation_rate],
        [rates.intersystem_rate, -rates.deshelving_rate],
    ])


def steady_state_populations(
    rates: EmitterRates,
    excitation_rate: Optional[float] = None,
) -> tuple[float, float, float]:
    """A function returning the stationary ground, excited and shelf populations.

    Args:
        rates (EmitterRates): The transition rates.
        excitation_rate (Optional[float]): Overrides `rates.excitation_rate`.

    Returns:
        tuple[float, float, float]: (g, e, s), summing to one.
    """

    k_exc = rates.excitation_rate if excitation_rate is None else excitation_rate
    k_isc = rates.intersystem_rate
    k_back = rates.deshelving_rate

    if k_exc == 0:
        return 1.0, 0.0, 0.0
    if k_isc > 0 and k_back == 0:
        return 0.0, 0.0, 1.0

    shelf_ratio = k_isc / k_back if k_isc > 0 else 0.0
    excited = 1.0 / (1.0 + (rates.radiative_rate + k_isc) / k_exc + shelf_ratio)
    shelf = excited * shelf_ratio
    return 1.0 - excited - shelf, excited, shelf


def emission_rate(rates: EmitterRates, excitation_rate: Optional[float] = None) -> float:
    """A function returning the stationary photon emission rate.

    Args:
        rates (EmitterRates): The transition rates.
        excitation_rate (Optional[float]): Overrides `rates.excitation_rate`.

    Returns:
        float: k_rad·e∞·QE in photons per second.
    """

    _, excited, _ = steady_state_populations(rates, excitation_rate)
    return rates.radiative_rate * excited * rates.quantum_efficiency


def saturation_from_rates(rates: EmitterRates, excitation_per_watt: float) -> SaturationParams:
    """A function predicting the saturation curve of a rate model.

    Args:
        rates (EmitterRates): The transition rates.
        excitation_per_watt (float): Excitation rate per watt of laser power.

    Returns:
        SaturationParams: I_sat and P_sat, with no dark intensity.
    """

    k_rad = rates.radiative_rate
    k_isc = rates.intersystem_rate
    k_back = rates.deshelving_rate
    shelf_factor = 1.0 if k_isc == 0 else k_back / (k_back + k_isc)

    return SaturationParams(
        sat_intensity=rates.quantum_efficiency * k_rad * shelf_factor,
        sat_power=(k_rad + k_isc) * shelf_factor / excitation_per_watt,
        dark_intensity=0.0,
    )


def g2_from_rates(
    rates: EmitterRates,
    excitation_rate: Optional[float] = None,
    signal_fraction: float = 1.0,
) -> ThreeLevelParams:
    """A function deriving g² parameters from the three-level rate matrix.

    The excited population after a detection relaxes with the two
    eigenvalues of the reduced rate matrix; its ratio to the stationary
    value gives the amplitudes. Uncorrelated background with signal
    fraction ρ per channel scales both amplitudes by ρ².

    Args:
        rates (EmitterRates): The transition rates.
        excitation_rate (Optional[float]): Overrides `rates.excitation_rate`.
        signal_fraction (float): ρ in [0, 1].

    Raises:
        DegenerateRates: When the relaxation times coincide or the
            kinetics are under-damped.

    Returns:
        ThreeLevelParams: A, B, t1, t2 with μ = 0.
    """

    k_exc = rates.excitation_rate if excitation_rate is None else excitation_rate
    if k_exc <= 0:
        raise DegenerateRates("excitation rate must be positive", excitation_rate=k_exc)
    if not 0 <= signal_fraction <= 1:
        raise DomainValidationError("signal fraction must lie in [0, 1]", signal_fraction=signal_fraction)

    rho2 = signal_fraction**2
    k_two_level = k_exc + rates.radiative_rate

    if rates.intersystem_rate == 0:
        slow = rates.deshelving_rate
        shelving_lifetime = 1.0 / slow if 0 < slow < k_two_level else math.inf
        return ThreeLevelParams(
            antibunch_amp=rho2,
            bunch_amp=0.0,
            excited_lifetime=1.0 / k_two_level,
            shelving_lifetime=shelving_lifetime,
        )
    if rates.deshelving_rate == 0:
        raise DegenerateRates("a shelf without exit traps the emitter")

    matrix = _rate_matrix(rates, k_exc)
    (a, b), (c, d) = matrix
    # (λ1 − λ2)² without the cancellation of trace² − 4·det
    discriminant = (a - d) ** 2 + 4.0 * b * c
    resolution = max(
        (DEGENERACY_TOLERANCE * (a + d)) ** 2,
        16.0 * np.finfo(float).eps * max((a - d) ** 2, abs(4.0 * b * c)),
    )
    if discriminant < -resolution:
        raise DegenerateRates("under-damped kinetics are not bi-exponential", discriminant=discriminant)
    if discriminant <= resolution:
        raise DegenerateRates("relaxation times coincide", discriminant=discriminant)

    eigenvalues, vectors = np.linalg.eig(matrix)
    eigenvalues = eigenvalues.real
    vectors = vectors.real
    fast, slow = np.argsort(eigenvalues)
    t1 = -1.0 / eigenvalues[fast]
    t2 = -1.0 / eigenvalues[slow]
    if abs(t2 - t1) <= DEGENERACY_TOLERANCE * t2:
        raise DegenerateRates("relaxation times coincide", t1=t1, t2=t2)

    # x(τ) − x∞ = V·diag(exp(λτ))·V⁻¹·(x0 − x∞), starting from the ground state
    stationary = np.linalg.solve(matrix, -np.array([k_exc, 0.0]))
    coefficients = np.linalg.solve(vectors, -stationary)
    excited = stationary[0]
    amp_b = max(float(vectors[0, slow] * coefficients[slow] / excited), 0.0)
    # an emitter just detected sits in the ground state, so A = 1 + B exactly
    amp_a = 1.0 + amp_b

    return ThreeLevelParams(
        antibunch_amp=rho2 * amp_a,
        bunch_amp=rho2 * amp_b,
        excited_lifetime=float(t1),
        shelving_lifetime=float(t2),
    )


def signal_fraction_for_g2_zero(target: float) -> float:
    """A function returning the per-channel signal fraction giving g²(0) = target.

    Args:
        target (float): Desired g²(0) in [0, 1].

    Returns:
        float: ρ = sqrt(1 − target).
    """

    if not 0 <= target <= 1:
        raise DomainValidationError("g2(0) target must lie in [0, 1]", target=target)
    return math.sqrt(1.0 - target)


def background_rate_for_signal_fraction(signal_rate: float, signal_fraction: float) -> float:
    """A function returning the background rate per channel that dilutes a signal to ρ.

    Args:
        signal_rate (float): Detected emitter rate per channel.
        signal_fraction (float): ρ in (0, 1].

    Returns:
        float: S·(1 − ρ)/ρ.
    """

    if not 0 < signal_fraction <= 1:
        raise DomainValidationError("signal fraction must lie in (0, 1]", signal_fraction=signal_fraction)
    return signal_rate * (1.0 - signal_fraction) / signal_fraction
