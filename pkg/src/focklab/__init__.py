"""focklab: truncated Fock-space simulation and reconstruction toolkit.

Squeezed-state generation, beam-splitter loss channels, homodyne sampling,
maximum-likelihood tomography and phase-space analysis, with sklearn-style
estimators for the data-driven steps.
"""

from .analysis import (
    EtaSweepResult,
    LossChannelFit,
    NoiseCurve,
    WignerGrid,
    align_squeezing_axis,
    eta_sweep,
    fidelity,
    noise_curve_from_data,
    noise_curve_from_state,
    polarization_transmission,
    squeezing_metrics,
    wigner,
)
from .channel import (
    LossChannelSpec,
    apply_loss,
    apply_loss_kraus,
    apply_loss_unitary,
    beam_splitter_unitary,
    loss_kraus_operators,
    partial_trace,
)
from .exceptions import (
    DatasetFormatError,
    FocklabError,
    GridExhaustionError,
    HeisenbergViolationError,
    NumericalError,
    TruncationWarning,
)
from .fock import (
    SqueezedStateParams,
    annihilation,
    creation,
    db_to_variance,
    expectation,
    fock_state,
    mean_photon_number,
    number_operator,
    phase_rotate,
    purity,
    quadrature_operator,
    squeezed_thermal,
    squeezed_vacuum_pure,
    thermal_state,
    vacuum,
    variance,
    variance_extrema,
    variance_to_db,
)
from .homodyne import (
    PhaseSchedule,
    QuadratureDataset,
    detection_efficiency,
    digitize,
    hermite_functions,
    quadrature_pdf,
    sample,
)
from .io import (
    dumps_canonical,
    load_dataset,
    load_density_matrix,
    save_dataset,
    save_density_matrix,
    save_wigner_csv,
)
from .mle import (
    HomodyneTomography,
    QuadratureHistogram,
    ReconstructionResult,
    bin_dataset,
    log_likelihood,
    povm_element,
    r_operator,
    reconstruct,
)
from .validation import check_density_matrix, check_state_vector

__version__ = "0.1.0"

__all__ = [
    "EtaSweepResult", "LossChannelFit", "NoiseCurve", "WignerGrid",
    "align_squeezing_axis", "eta_sweep", "fidelity", "noise_curve_from_data",
    "noise_curve_from_state", "polarization_transmission", "squeezing_metrics",
    "wigner",
    "LossChannelSpec", "apply_loss", "apply_loss_kraus", "apply_loss_unitary",
    "beam_splitter_unitary", "loss_kraus_operators", "partial_trace",
    "DatasetFormatError", "FocklabError", "GridExhaustionError",
    "HeisenbergViolationError", "NumericalError", "TruncationWarning",
    "SqueezedStateParams", "annihilation", "creation", "db_to_variance",
    "expectation", "fock_state", "mean_photon_number", "number_operator",
    "phase_rotate", "purity", "quadrature_operator", "squeezed_thermal",
    "squeezed_vacuum_pure", "thermal_state", "vacuum", "variance",
    "variance_extrema", "variance_to_db",
    "PhaseSchedule", "QuadratureDataset", "detection_efficiency", "digitize",
    "hermite_functions", "quadrature_pdf", "sample",
    "dumps_canonical", "load_dataset", "load_density_matrix", "save_dataset",
    "save_density_matrix", "save_wigner_csv",
    "HomodyneTomography", "QuadratureHistogram", "ReconstructionResult",
    "bin_dataset", "log_likelihood", "povm_element", "r_operator", "reconstruct",
    "check_density_matrix", "check_state_vector",
]
