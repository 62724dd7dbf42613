"""Module containing the characteristic-matrix solver for planar stacks.

For laterally uniform films, coupled-wave analysis with a single Fourier
order reduces to this transfer matrix at normal incidence. Indices follow
N = n + ik with k ≥ 0 absorbing.
"""

import numpy as np

from emitterkit.core.domain.thinfilm import LayerStack


def layer_matrix(index: complex, thickness: np.ndarray | float, wavelength: float) -> np.ndarray:
    """A function returning the characteristic matrix of one film.

    Args:
        index (complex): Complex refractive index.
        thickness (np.ndarray | float): Thickness(es) in meters.
        wavelength (float): Vacuum wavelength in meters.

    Returns:
        np.ndarray: (..., 2, 2) complex matrices.
    """

    phase = 2.0 * np.pi * index * np.asarray(thickness, dtype=np.float64) / wavelength
    cos = np.cos(phase)
    sin = np.sin(phase)
    matrix = np.empty(np.shape(phase) + (2, 2), dtype=np.complex128)
    matrix[..., 0, 0] = cos
    matrix[..., 0, 1] = -1j * sin / index
    matrix[..., 1, 0] = -1j * index * sin
    matrix[..., 1, 1] = cos
    return matrix


def stack_matrix(stack: LayerStack) -> np.ndarray:
    """A function multiplying the layer matrices top to bottom.

    Args:
        stack (LayerStack): The stack.

    Returns:
        np.ndarray: 2×2 complex matrix.
    """

    total = np.eye(2, dtype=np.complex128)
    for layer in stack.layers:
        total = total @ layer_matrix(layer.index, layer.thickness, stack.wavelength)
    return total


def _amplitudes(matrix: np.ndarray, ambient: complex, substrate: complex) -> tuple[np.ndarray, np.ndarray]:
    b = matrix[..., 0, 0] + matrix[..., 0, 1] * substrate
    c = matrix[..., 1, 0] + matrix[..., 1, 1] * substrate
    denominator = ambient * b + c
    return (ambient * b - c) / denominator, 2.0 * ambient / denominator


def reflect(stack: LayerStack) -> complex:
    """A function returning the complex amplitude reflectance of a stack.

    The phase is referenced to the top surface of the topmost film.

    Args:
        stack (LayerStack): The stack.

    Returns:
        complex: r.
    """

    r, _ = _amplitudes(stack_matrix(stack), stack.ambient_index, stack.substrate_index)
    return complex(r)


def transmittance(stack: LayerStack) -> float:
    """A function returning the power transmitted into the substrate.

    Args:
        stack (LayerStack): The stack.

    Returns:
        float: T = Re(n_s)/n_0 · |t|².
    """

    _, t = _amplitudes(stack_matrix(stack), stack.ambient_index, stack.substrate_index)
    return float(stack.substrate_index.real / stack.ambient_index * abs(complex(t)) ** 2)


def reflect_with_film(
    stack: LayerStack,
    index: complex,
    thickness: np.ndarray,
) -> np.ndarray:
    """A function returning r for a film of varying thickness on top of a stack.

    Args:
        stack (LayerStack): The bare stack.
        index (complex): Index of the added film.
        thickness (np.ndarray): Film thicknesses in meters.

    Returns:
        np.ndarray: Complex reflectances, one per thickness.
    """

    bare = stack_matrix(stack)
    matrices = layer_matrix(index, thickness, stack.wavelength) @ bare
    r, _ = _amplitudes(matrices, stack.ambient_index, stack.substrate_index)
    return r


def film_opl(stack: LayerStack, index: complex, thickness_grid: np.ndarray) -> np.ndarray:
    """A function returning the excess optical path of a film over ambient.

    The reflection phase of the covered stack, taken relative to the bare
    stack, is unwrapped along the grid and converted with the double-pass
    factor λ/4π; the path the film displaces in the ambient is
    subtracted. The grid must start at zero thickness and be fine enough
    for phase unwrapping.

    Args:
        stack (LayerStack): The bare stack.
        index (complex): Index of the film.
        thickness_grid (np.ndarray): Ascending thicknesses from 0, meters.

    Returns:
        np.ndarray: OPL per grid point in meters.
    """

    grid = np.asarray(thickness_grid, dtype=np.float64)
    bare = reflect(stack)
    covered = reflect_with_film(stack, index, grid)
    phase = np.unwrap(np.angle(covered * np.conj(bare)))
    return stack.wavelength / (4.0 * np.pi) * phase - stack.ambient_index * grid
