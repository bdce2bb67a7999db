"""Quasicyclic principal component analysis for cyclostationary data."""

from .signal_core import (
    Dataset,
    NyquistCheck,
    autocorrelation,
    circular_shift,
    coset_energies,
    dft,
    energy_spectrum,
    idft,
    inner_product,
    is_shift_orthonormal,
)
from .pca import DegenerateDataError, PcaResult, components, first_component
from .qpca import PhasePolicy, QpcaConfig, QpcaResult, ShiftOrthonormalityError
from .resample import ResampleSpec, resample_dataset
from .estimate import PeriodSweepRow, bandwidth_period_estimate, sweep_period

__version__ = "0.1.0"
