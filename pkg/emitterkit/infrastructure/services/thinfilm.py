"""Module containing thin-film service implementation."""

import logging
import math
from typing import Any, Optional, Sequence

import numpy as np

from emitterkit.config import AppConfig
from emitterkit.core.domain.fit import CurveData, NoiseModel
from emitterkit.core.domain.thinfilm import (
    IndexEstimate,
    Layer,
    LayerStack,
    OplCurve,
    ThicknessEstimate,
)
from emitterkit.core.errors import (
    DomainValidationError,
    MismatchedStacks,
    OutOfRange,
    RangeOrder,
    UncalibratableRegion,
    UnstableBootstrap,
    UnwrapStep,
)
from emitterkit.core.physics import transfer
from emitterkit.core.physics.curves import FilmIndexModel
from emitterkit.infrastructure.dto.curvedto import OplCurveDTO
from emitterkit.infrastructure.services.ifitting import IFittingService
from emitterkit.infrastructure.services.ithinfilm import IThinFilmService
from emitterkit.infrastructure.utils.consts import N_HBN, N_SI, N_SIO2, SIO2_THICKNESS

logger = logging.getLogger(__name__)

FINE_STEPS_PER_WAVE = 40
COARSE_STEPS_PER_WAVE = 20
DEFAULT_STEP = 1e-9


def injectivity_limit(grid: np.ndarray, values: np.ndarray) -> float:
    """A function returning the largest thickness up to which a curve is monotone.

    The direction is taken from the first step; a flat first step
    leaves only the first grid point.

    Args:
        grid (np.ndarray): Ascending thicknesses.
        values (np.ndarray): OPL values on the grid.

    Returns:
        float: The injectivity limit.
    """

    steps = np.diff(values)
    if steps.size == 0 or steps[0] == 0:
        return float(grid[0])

    reversed_ = np.nonzero(steps * np.sign(steps[0]) <= 0)[0]
    return float(grid[reversed_[0]] if reversed_.size else grid[-1])


class ThinFilmService(IThinFilmService):
    """A class implementing the thin-film service.

    Stacks are solved at normal incidence with characteristic matrices,
    which is what coupled-wave analysis reduces to for unpatterned films.
    """

    _fitting_service: IFittingService
    _config: AppConfig

    def __init__(self, fitting_service: IFittingService, config: AppConfig) -> None:
        """The initializer of the `thin-film service`.

        Args:
            fitting_service (IFittingService): Reference to fitting service.
            config (AppConfig): The toolkit configuration.
        """

        self._fitting_service = fitting_service
        self._config = config

    def default_stack(self, wavelength: Optional[float] = None) -> LayerStack:
        """The method returning the SiO₂(280 nm)/Si substrate at 522 nm indices.

        Args:
            wavelength (Optional[float]): Probe wavelength in meters.

        Returns:
            LayerStack: The bare stack.
        """

        return LayerStack(
            layers=(Layer(n=N_SIO2, thickness=SIO2_THICKNESS, name="SiO2"),),
            substrate_n=N_SI.real,
            substrate_k=N_SI.imag,
            wavelength=wavelength or self._config.WAVELENGTH,
            stack_id="SiO2(280nm)/Si",
        )

    def reflect(self, stack: LayerStack) -> complex:
        """The method returning the amplitude reflectance.

        Args:
            stack (LayerStack): The stack.

        Returns:
            complex: r, phase referenced to the top surface.
        """

        return transfer.reflect(stack)

    def psi_opl(
        self,
        stack_with_flake: LayerStack,
        stack_bare: LayerStack,
        wavelength: Optional[float] = None,
    ) -> float:
        """The method returning the excess optical path of the top film.

        OPL = λ/4π · unwrap(arg r_flake − arg r_bare) − n_ambient · t, the
        phase unwrapped from zero thickness on a grid finer than λ/(40·n).

        Args:
            stack_with_flake (LayerStack): Bare stack plus the flake on top.
            stack_bare (LayerStack): The bare stack.
            wavelength (Optional[float]): Probe wavelength in meters.

        Raises:
            MismatchedStacks: When the stacks below the flake differ.

        Returns:
            float: OPL in meters.
        """

        if wavelength is not None:
            stack_with_flake = stack_with_flake.with_wavelength(wavelength)
            stack_bare = stack_bare.with_wavelength(wavelength)

        if (
            not stack_with_flake.layers
            or stack_with_flake.layers[1:] != stack_bare.layers
            or stack_with_flake.substrate_index != stack_bare.substrate_index
            or stack_with_flake.ambient_index != stack_bare.ambient_index
            or stack_with_flake.wavelength != stack_bare.wavelength
        ):
            raise MismatchedStacks("flake stack must be the bare stack plus one top film")

        flake = stack_with_flake.layers[0]
        grid = self._unwrap_grid(flake.thickness, flake.n, stack_bare.wavelength)
        return float(transfer.film_opl(stack_bare, flake.index, grid)[-1])

    def build_opl_curve(
        self,
        stack_template: LayerStack,
        flake_index: complex,
        thickness_range: tuple[float, float],
        wavelength: Optional[float] = None,
        step: Optional[float] = None,
    ) -> OplCurve:
        """The method tabulating OPL against flake thickness.

        Args:
            stack_template (LayerStack): The bare stack.
            flake_index (complex): The flake's index.
            thickness_range (tuple[float, float]): First and last thickness.
            wavelength (Optional[float]): Probe wavelength in meters.
            step (Optional[float]): Grid step, 1 nm or λ/(40·n) by default.

        Raises:
            RangeOrder: When the range is not ascending.
            UnwrapStep: When the step exceeds λ/(20·n).

        Returns:
            OplCurve: The curve with its injectivity limit.
        """

        start, stop = float(thickness_range[0]), float(thickness_range[1])
        if stop <= start:
            raise RangeOrder("thickness range must be ascending", start=start, stop=stop)
        if start < 0:
            raise DomainValidationError("thicknesses must be non-negative", start=start)

        stack = stack_template.with_wavelength(wavelength) if wavelength else stack_template
        index = complex(flake_index)
        n = index.real
        if n <= 0:
            raise DomainValidationError("flake index must have a positive real part", n=n)

        largest = stack.wavelength / (COARSE_STEPS_PER_WAVE * n)
        step = step or min(DEFAULT_STEP, stack.wavelength / (FINE_STEPS_PER_WAVE * n))
        if step > largest:
            raise UnwrapStep("grid too coarse for phase unwrapping", step=step, largest=largest)

        # tolerance keeps whole-step ranges from gaining a sliver interval
        grid = np.linspace(start, stop, int(math.ceil((stop - start) / step - 1e-9)) + 1)
        prefix = self._unwrap_grid(start, n, stack.wavelength)[:-1] if start > 0 else np.empty(0)
        opl = transfer.film_opl(stack, index, np.concatenate((prefix, grid)))[prefix.size:]

        curve = OplCurve(
            thickness_grid=grid.tolist(),
            opl_values=opl.tolist(),
            wavelength=stack.wavelength,
            stack_id=stack.stack_id,
            injectivity_limit=injectivity_limit(grid, opl),
        )

        logger.info(
            "opl curve %s: %d points, injective below %.2f nm",
            stack.stack_id or "stack", grid.size, curve.injectivity_limit * 1e9,
        )
        return curve

    def invert_opl(self, curve: OplCurve, opl: float) -> ThicknessEstimate:
        """The method converting a measured OPL into thickness.

        Every grid segment the value crosses yields a candidate. A single
        candidate inside the injective region is the thickness; anything
        else comes back ambiguous with all candidates.

        Args:
            curve (OplCurve): The conversion curve.
            opl (float): Measured OPL in meters.

        Raises:
            OutOfRange: When the curve never reaches the value.

        Returns:
            ThicknessEstimate: Thickness or ambiguous candidates.
        """

        grid = np.asarray(curve.thickness_grid)
        values = np.asarray(curve.opl_values)
        tolerance = 1e-12 * float(np.abs(values).max(initial=0.0)) + 1e-18
        if opl < values.min() - tolerance or opl > values.max() + tolerance:
            raise OutOfRange("OPL outside the simulated range", opl=opl)

        candidates: list[float] = []
        for k in range(grid.size - 1):
            lo, hi = values[k], values[k + 1]
            if min(lo, hi) - tolerance <= opl <= max(lo, hi) + tolerance:
                if hi == lo:
                    thickness = grid[k]
                else:
                    fraction = min(max((opl - lo) / (hi - lo), 0.0), 1.0)
                    thickness = grid[k] + fraction * (grid[k + 1] - grid[k])
                if not candidates or thickness - candidates[-1] > 1e-13:
                    candidates.append(float(thickness))

        if len(candidates) == 1 and candidates[0] <= curve.injectivity_limit:
            return ThicknessEstimate(opl=opl, thickness=candidates[0], candidates=candidates)

        logger.info("OPL %.2f nm is ambiguous, %d candidates", opl * 1e9, len(candidates))
        return ThicknessEstimate(opl=opl, ambiguous=True, candidates=candidates)

    def fit_index(
        self,
        calibration: Sequence[tuple[float, float]],
        stack_template: LayerStack,
        wavelength: Optional[float] = None,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> IndexEstimate:
        """The method calibrating the flake index from AFM thicknesses.

        Points beyond the injective region of the nominal hBN curve are
        dropped. The index minimizes Σ(OPL(n, t_i) − OPL_i)²; its interval
        comes from a Gaussian bootstrap whose σ is the residual scatter,
        at least the configured OPL noise.

        Args:
            calibration (Sequence[tuple[float, float]]): (thickness, OPL)
                pairs in meters.
            stack_template (LayerStack): The bare stack.
            wavelength (Optional[float]): Probe wavelength in meters.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.

        Raises:
            UncalibratableRegion: When no point lies in the injective region.

        Returns:
            IndexEstimate: The index; `unstable` for a single point or an
                unstable bootstrap.
        """

        points = [(float(t), float(v)) for t, v in calibration]
        if not points:
            raise DomainValidationError("calibration holds no point")
        if any(t < 0 for t, _ in points):
            raise DomainValidationError("calibration thicknesses must be non-negative")

        stack = stack_template.with_wavelength(wavelength) if wavelength else stack_template
        top = max(max(t for t, _ in points), DEFAULT_STEP)
        nominal = self.build_opl_curve(stack, N_HBN, (0.0, top))

        used = [(t, v) for t, v in points if t <= nominal.injectivity_limit]
        if not used:
            raise UncalibratableRegion(
                "every calibration point lies beyond the injective region",
                injectivity_limit=nominal.injectivity_limit,
            )
        if len(used) < len(points):
            logger.warning("dropped %d calibration points beyond %.1f nm", len(points) - len(used),
                           nominal.injectivity_limit * 1e9)

        model = FilmIndexModel(stack, max_step=stack.wavelength / (2 * FINE_STEPS_PER_WAVE * N_HBN))
        data = CurveData(x=[t * 1e9 for t, _ in used], y=[v * 1e9 for _, v in used])
        result = self._fitting_service.fit_curve(model, data, [N_HBN], n_samples=0)
        n_hat = result.params["n"]

        residuals = data.y - model.evaluate(data.x, np.array([n_hat]))
        unstable = len(used) < 2
        sigma = self._config.OPL_SIGMA * 1e9
        if not unstable:
            sigma = max(sigma, float(np.sqrt(residuals @ residuals / (len(used) - 1))))

        ci95 = result.cov_ci95.get("n", (n_hat, n_hat))
        n_mc = 0
        n_samples = self._config.MC_SAMPLES if n_samples is None else n_samples
        if n_samples:
            try:
                ci95 = self._fitting_service.mc_confidence(
                    model, data, np.array([n_hat]), n_samples, seed,
                    noise=NoiseModel(kind="gaussian", sigma=sigma),
                )["n"]
                n_mc = n_samples
            except UnstableBootstrap as error:
                logger.warning("index bootstrap unstable: %s", error)
                unstable = True

        if unstable:
            logger.warning("index interval from %d point(s) is unreliable", len(used))

        logger.info("index fit: n=%.4f [%.4f, %.4f] from %d points", n_hat, *ci95, len(used))
        return IndexEstimate(
            n=n_hat,
            ci95=ci95,
            used_points=len(used),
            unstable=unstable,
            fit=result.model_copy(update={"ci95": {"n": ci95}, "n_mc_samples": n_mc}),
        )

    def curve_rows(self, curve: OplCurve) -> list[dict[str, Any]]:
        """The method rendering `thickness_nm,opl_nm` rows.

        Args:
            curve (OplCurve): The curve.

        Returns:
            list[dict[str, Any]]: One row per grid point.
        """

        return OplCurveDTO.rows(curve)

    @staticmethod
    def _unwrap_grid(thickness: float, n: float, wavelength: float) -> np.ndarray:
        step = wavelength / (FINE_STEPS_PER_WAVE * n)
        return np.linspace(0.0, thickness, int(math.ceil(thickness / step)) + 1)
