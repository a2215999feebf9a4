"""Shared builders for the test suite."""

import numpy as np

from otfs_jrc import DDGrid, Domain, FrameConfig, compute_rdm, spectral_product


def pilot_frame(config: FrameConfig) -> DDGrid:
    """Single-cell sensing frame with the same total energy as a data frame."""
    cells = np.zeros((config.m_bins, config.n_bins), dtype=np.complex128)
    cells[0, 0] = np.sqrt(config.m_bins * config.n_bins)
    return DDGrid(config, cells, Domain.DELAY_DOPPLER)


def rdms_from_dwells(dwells, x):
    """Map received grids to range-Doppler maps, no cancellation."""
    return [compute_rdm(spectral_product(y, x)) for y in dwells]
