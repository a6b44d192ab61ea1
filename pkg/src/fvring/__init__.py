"""Quench dynamics, overlap spectroscopy, and effective two-level models for
false-vacuum physics on periodic Ising rings."""

__version__ = "0.1.0"

from .analytics import (
    opposite_pair_count,
    predicted_correlator,
    predicted_magnetization,
)
from .dynamics import (
    TimeGrid,
    TimeSeries,
    evolve,
    loschmidt_series,
    min_return,
    observable_series,
    quench_series,
)
from .effective import (
    EffectiveTwoLevel,
    effective_two_level,
    kappa,
    predicted_period,
    projected_h0,
    projected_h1,
    resonance_field,
    swt_generators,
)
from .errors import (
    BracketingError,
    DegeneracyError,
    FvringError,
    NotTwoLevelError,
    PoleError,
    PropagationError,
    ResolutionWarning,
    ResourceLimitError,
)
from .model import (
    DisorderSpec,
    Interaction,
    ModelSpec,
    SparseOperator,
    build_hamiltonian,
    sample_couplings,
)
from .scan import (
    Axis,
    EnsembleSpec,
    MinReturnMetric,
    ScanGrid,
    SubLeadingMetric,
    disorder_ensemble,
    find_resonance,
    grid_scan,
)
from .spectra import (
    EigenSystem,
    OverlapSpectrum,
    TwoLevelFit,
    eigen_decompose,
    overlap_spectrum,
    spectral_weights_fft,
    sub_leading,
    two_level_fit,
)
from .states import (
    all_up_state,
    bubble_state,
    false_vacuum,
    ground_state,
    overlap,
    parse_pattern,
    symmetric_pattern_state,
)
