"""Module containing the parametric curve models used by the fitter.

Every model works on a flat parameter vector `theta` in the units of the
abscissa it is evaluated on and provides an analytic Jacobian.
"""

from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from emitterkit.core.domain.thinfilm import LayerStack
from emitterkit.core.physics.transfer import film_opl

LN2 = np.log(2.0)
GAUSS_NORM = 2.0 * np.sqrt(LN2 / np.pi)


class CurveModel(ABC):
    """A class representing a model y = f(x; theta)."""

    model_id: str = "curve"
    param_names: tuple[str, ...] = ()

    @property
    def n_params(self) -> int:
        """int: Length of the parameter vector."""
        return len(self.param_names)

    @abstractmethod
    def evaluate(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """The abstract evaluating the model.

        Args:
            x (np.ndarray): Abscissa.
            theta (np.ndarray): Parameter vector.

        Returns:
            np.ndarray: Model values.
        """

    @abstractmethod
    def jacobian(self, x: np.ndarray, theta: np.ndarray) -> Optional[np.ndarray]:
        """The abstract returning d f / d theta.

        Args:
            x (np.ndarray): Abscissa.
            theta (np.ndarray): Parameter vector.

        Returns:
            Optional[np.ndarray]: (len(x), n_params) matrix, None for
                models differentiated numerically.
        """


class G2Model(CurveModel):
    """A class implementing the three-level g² curve."""

    model_id = "g2_three_level"
    param_names = ("antibunch_amp", "bunch_amp", "excited_lifetime", "shelving_lifetime", "delay_offset")

    def evaluate(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        amp_a, amp_b, t1, t2, mu = theta
        u = np.abs(np.asarray(x, dtype=np.float64) - mu)
        return 1.0 - amp_a * np.exp(-u / t1) + amp_b * np.exp(-u / t2)

    def jacobian(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        amp_a, amp_b, t1, t2, mu = theta
        shifted = np.asarray(x, dtype=np.float64) - mu
        u = np.abs(shifted)
        sign = np.sign(shifted)
        e1 = np.exp(-u / t1)
        e2 = np.exp(-u / t2)

        return np.column_stack((
            -e1,
            e2,
            -amp_a * e1 * u / t1**2,
            amp_b * e2 * u / t2**2,
            -amp_a * e1 * sign / t1 + amp_b * e2 * sign / t2,
        ))


class DecayModel(CurveModel):
    """A class implementing c·exp(−t/τ) + baseline."""

    model_id = "single_exponential"
    param_names = ("amplitude", "lifetime", "baseline")

    def evaluate(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        amplitude, tau, baseline = theta
        return amplitude * np.exp(-np.asarray(x, dtype=np.float64) / tau) + baseline

    def jacobian(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        amplitude, tau, _ = theta
        x = np.asarray(x, dtype=np.float64)
        e = np.exp(-x / tau)
        return np.column_stack((e, amplitude * e * x / tau**2, np.ones_like(x)))


class ConstantModel(CurveModel):
    """A class implementing a flat baseline."""

    model_id = "constant"
    param_names = ("baseline",)

    def evaluate(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x), theta[0], dtype=np.float64)

    def jacobian(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        return np.ones((np.size(x), 1))


class SaturationModel(CurveModel):
    """A class implementing I_sat·P/(P + P_sat) + I_d."""

    model_id = "saturation"
    param_names = ("sat_intensity", "sat_power", "dark_intensity")

    def evaluate(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        sat_intensity, sat_power, dark = theta
        x = np.asarray(x, dtype=np.float64)
        return sat_intensity * x / (x + sat_power) + dark

    def jacobian(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        sat_intensity, sat_power, _ = theta
        x = np.asarray(x, dtype=np.float64)
        denominator = x + sat_power
        return np.column_stack((
            x / denominator,
            -sat_intensity * x / denominator**2,
            np.ones_like(x),
        ))


class PowerLawModel(CurveModel):
    """A class implementing log I = c + α·log P, evaluated on log P."""

    model_id = "power_law"
    param_names = ("slope", "log_prefactor")

    def evaluate(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        slope, log_prefactor = theta
        return log_prefactor + slope * np.asarray(x, dtype=np.float64)

    def jacobian(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.column_stack((x, np.ones_like(x)))


def lorentzian(x: np.ndarray, center: float, fwhm: float) -> np.ndarray:
    """Unit-area Lorentzian."""
    z = (np.asarray(x, dtype=np.float64) - center) / fwhm
    return 2.0 / (np.pi * fwhm) / (1.0 + 4.0 * z**2)


def gaussian(x: np.ndarray, center: float, fwhm: float) -> np.ndarray:
    """Unit-area Gaussian parameterized by its FWHM."""
    z = (np.asarray(x, dtype=np.float64) - center) / fwhm
    return GAUSS_NORM / fwhm * np.exp(-4.0 * LN2 * z**2)


class PseudoVoigtModel(CurveModel):
    """A class implementing a sum of area-normalized pseudo-Voigt peaks.

    Per peak the vector holds (center, fwhm, area) and, when the Gaussian
    fraction is fitted, eta; the constant baseline comes last. With a
    fixed fraction every peak uses `gauss_fraction`.
    """

    model_id = "pseudo_voigt"

    def __init__(self, n_peaks: int, fit_gauss_fraction: bool = False, gauss_fraction: float = 0.0) -> None:
        """The initializer of the model.

        Args:
            n_peaks (int): Number of peaks.
            fit_gauss_fraction (bool): Whether eta is a free parameter.
            gauss_fraction (float): Fixed eta when not fitted.
        """

        self.n_peaks = n_peaks
        self.fit_gauss_fraction = fit_gauss_fraction
        self.gauss_fraction = gauss_fraction
        per_peak = ("center", "fwhm", "area", "gauss_fraction") if fit_gauss_fraction \
            else ("center", "fwhm", "area")
        self.param_names = tuple(
            f"peak{i}_{name}" for i in range(n_peaks) for name in per_peak
        ) + ("baseline",)

    @property
    def stride(self) -> int:
        """int: Parameters per peak."""
        return 4 if self.fit_gauss_fraction else 3

    def peaks(self, theta: np.ndarray) -> list[tuple[float, float, float, float]]:
        """A method splitting theta into (center, fwhm, area, eta) tuples.

        Args:
            theta (np.ndarray): Parameter vector.

        Returns:
            list[tuple[float, float, float, float]]: One tuple per peak.
        """

        result = []
        for i in range(self.n_peaks):
            chunk = theta[i * self.stride:(i + 1) * self.stride]
            eta = chunk[3] if self.fit_gauss_fraction else self.gauss_fraction
            result.append((float(chunk[0]), float(chunk[1]), float(chunk[2]), float(eta)))
        return result

    def evaluate(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        total = np.full_like(x, theta[-1])
        for center, fwhm, area, eta in self.peaks(theta):
            total += area * (eta * gaussian(x, center, fwhm) + (1.0 - eta) * lorentzian(x, center, fwhm))
        return total

    def jacobian(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        columns = np.empty((x.size, self.n_params))

        for i, (center, fwhm, area, eta) in enumerate(self.peaks(theta)):
            z = (x - center) / fwhm
            lor = lorentzian(x, center, fwhm)
            gau = gaussian(x, center, fwhm)
            q = 1.0 + 4.0 * z**2
            lor_scale = 2.0 / (np.pi * fwhm)

            d_lor_center = lor_scale * 8.0 * z / (fwhm * q**2)
            d_lor_fwhm = -lor / fwhm + lor_scale * 8.0 * z**2 / (fwhm * q**2)
            d_gau_center = gau * 8.0 * LN2 * z / fwhm
            d_gau_fwhm = -gau / fwhm + gau * 8.0 * LN2 * z**2 / fwhm

            base = i * self.stride
            columns[:, base] = area * (eta * d_gau_center + (1.0 - eta) * d_lor_center)
            columns[:, base + 1] = area * (eta * d_gau_fwhm + (1.0 - eta) * d_lor_fwhm)
            columns[:, base + 2] = eta * gau + (1.0 - eta) * lor
            if self.fit_gauss_fraction:
                columns[:, base + 3] = area * (gau - lor)

        columns[:, -1] = 1.0
        return columns


class FilmIndexModel(CurveModel):
    """A class implementing the excess OPL of a film versus its index.

    Abscissa and values are nanometers; the only parameter is the real
    film index. Each evaluation unwraps the phase on a grid from zero
    that contains every abscissa.
    """

    model_id = "film_index"
    param_names = ("n",)

    def __init__(self, stack: LayerStack, max_step: float) -> None:
        """The initializer of the model.

        Args:
            stack (LayerStack): The bare stack the film sits on.
            max_step (float): Largest unwrap grid step in meters.
        """

        self.stack = stack
        self.max_step = max_step

    def evaluate(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        thickness = np.asarray(x, dtype=np.float64) * 1e-9
        top = float(thickness.max(initial=0.0))
        fine = np.linspace(0.0, top, int(np.ceil(top / self.max_step)) + 1)
        grid = np.union1d(fine, thickness)
        opl = film_opl(self.stack, complex(theta[0], 0.0), grid)
        return opl[np.searchsorted(grid, thickness)] * 1e9

    def jacobian(self, x: np.ndarray, theta: np.ndarray) -> None:
        return None
