"""A module containing JIT-compiled hot loops of the toolkit."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def correlate_uniform(
    a: np.ndarray,
    b: np.ndarray,
    half_range: int,
    bin_width: int,
) -> np.ndarray:
    """A function histogramming delays b − a over [−L, L] in uniform bins.

    Both inputs are sorted int64 picoseconds. The window start pointer
    only moves forward, so one pass costs O(N + M + pairs).

    Args:
        a (np.ndarray): Start channel timestamps.
        b (np.ndarray): Stop channel timestamps.
        half_range (int): L, a multiple of `bin_width`.
        bin_width (int): Bin width in picoseconds.

    Returns:
        np.ndarray: int64 counts of 2L/bin_width bins.
    """

    n_bins = 2 * half_range // bin_width
    counts = np.zeros(n_bins, dtype=np.int64)
    n_b = b.size
    start = 0

    for i in range(a.size):
        low = a[i] - half_range
        high = a[i] + half_range
        while start < n_b and b[start] < low:
            start += 1
        j = start
        while j < n_b and b[j] <= high:
            index = (b[j] - low) // bin_width
            if index == n_bins:
                index = n_bins - 1
            counts[index] += 1
            j += 1

    return counts


@njit(cache=True, nogil=True)
def correlate_edges(a: np.ndarray, b: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """A function histogramming delays b − a into arbitrary ascending edges.

    Bins are half-open except the last one, which is closed.

    Args:
        a (np.ndarray): Start channel timestamps.
        b (np.ndarray): Stop channel timestamps.
        edges (np.ndarray): float64 bin edges in picoseconds.

    Returns:
        np.ndarray: int64 counts of len(edges) − 1 bins.
    """

    n_bins = edges.size - 1
    counts = np.zeros(n_bins, dtype=np.int64)
    low_lag = edges[0]
    high_lag = edges[-1]
    n_b = b.size
    start = 0

    for i in range(a.size):
        while start < n_b and b[start] - a[i] < low_lag:
            start += 1
        j = start
        while j < n_b and b[j] - a[i] <= high_lag:
            delay = float(b[j] - a[i])
            index = np.searchsorted(edges, delay, side="right") - 1
            if index == n_bins:
                index = n_bins - 1
            counts[index] += 1
            j += 1

    return counts


@njit(cache=True, nogil=True)
def start_stop_delays(a: np.ndarray, b: np.ndarray, max_lag: int) -> np.ndarray:
    """A function pairing every start with the first stop at or after it.

    Args:
        a (np.ndarray): Start channel timestamps.
        b (np.ndarray): Stop channel timestamps.
        max_lag (int): Longest delay kept, picoseconds.

    Returns:
        np.ndarray: int64 delays, one per matched start.
    """

    delays = np.empty(a.size, dtype=np.int64)
    n_found = 0
    n_b = b.size
    j = 0

    for i in range(a.size):
        while j < n_b and b[j] < a[i]:
            j += 1
        if j == n_b:
            break
        delay = b[j] - a[i]
        if delay <= max_lag:
            delays[n_found] = delay
            n_found += 1

    return delays[:n_found]


@njit(cache=True, nogil=True)
def dead_time_mask(times: np.ndarray, dead_time: int) -> np.ndarray:
    """A function applying a non-paralyzable dead-time veto.

    Args:
        times (np.ndarray): Sorted int64 timestamps of one channel.
        dead_time (int): Veto interval in picoseconds.

    Returns:
        np.ndarray: Boolean mask of accepted tags.
    """

    accepted = np.zeros(times.size, dtype=np.bool_)
    if times.size == 0:
        return accepted

    last = times[0]
    accepted[0] = True
    for i in range(1, times.size):
        if times[i] - last >= dead_time:
            accepted[i] = True
            last = times[i]

    return accepted


@njit(cache=True, nogil=True)
def pulsed_emission(
    period: float,
    excitation_probability: float,
    decay_rate: float,
    radiative_branch: float,
    deshelving_rate: float,
    u_excite: np.ndarray,
    decay_draws: np.ndarray,
    u_branch: np.ndarray,
    shelf_draws: np.ndarray,
) -> np.ndarray:
    """A function running three-level kinetics pulse by pulse.

    An emitter that is still excited or shelved when a pulse arrives
    ignores it. Draws are pre-generated, one per pulse.

    Args:
        period (float): Pulse period, picoseconds.
        excitation_probability (float): Per-pulse excitation probability.
        decay_rate (float): k_rad + k_isc in 1/ps.
        radiative_branch (float): k_rad / (k_rad + k_isc).
        deshelving_rate (float): k_back in 1/ps.
        u_excite (np.ndarray): Uniform draws deciding excitation.
        decay_draws (np.ndarray): Unit exponential draws for the decay.
        u_branch (np.ndarray): Uniform draws deciding the decay channel.
        shelf_draws (np.ndarray): Unit exponential draws for shelf exits.

    Returns:
        np.ndarray: float64 emission times in picoseconds.
    """

    n_pulses = u_excite.size
    emissions = np.empty(n_pulses, dtype=np.float64)
    n_emitted = 0
    free_at = 0.0

    for k in range(n_pulses):
        t0 = k * period
        if t0 < free_at or u_excite[k] >= excitation_probability:
            continue
        decay_time = t0 + decay_draws[k] / decay_rate
        if u_branch[k] < radiative_branch:
            emissions[n_emitted] = decay_time
            n_emitted += 1
            free_at = decay_time
        elif deshelving_rate > 0.0:
            free_at = decay_time + shelf_draws[k] / deshelving_rate
        else:
            break

    return emissions[:n_emitted]
