"""OTFS joint radar-communication simulation toolkit."""

from .channel import (
    ChannelConfig,
    TargetSpec,
    VitalMotion,
    apply_dd_channel,
    apply_dt_channel,
    channel_config_from_dict,
    channel_config_to_dict,
    effective_gain,
    noise_power_for_snr_db,
    self_interference_target,
    simulate_dwells,
    target_pattern,
)
from .classify import (
    ClassifierParams,
    ConfusionCounts,
    Label,
    LabeledTrace,
    Verdict,
    classify_sp,
    evaluate,
    generate_dataset,
    load_dataset,
    save_dataset,
)
from .errors import (
    DimensionMismatchError,
    DomainMismatchError,
    GridFileError,
    InsufficientDataError,
    JrcError,
    NoSignalError,
    ValidationError,
)
from .faor import (
    Detection,
    DetectorParams,
    Rdm,
    SpectralProduct,
    bins_to_physical,
    cancel_self_interference,
    compute_rdm,
    detect,
    extract_peaks,
    signed_doppler_bin,
    spectral_product,
)
from .grid import (
    C_LIGHT,
    AlphabetKind,
    DDGrid,
    Domain,
    FrameConfig,
    Resolutions,
    SymbolAlphabet,
    demodulate,
    generate_frame,
    modulate,
    resolutions,
)
from .gridfile import read_grid, write_grid
from .vitals import (
    BREATH_BAND,
    HEART_BAND,
    BandSpec,
    PhaseTrace,
    VitalEstimate,
    band_bins,
    band_spectrum,
    bandpass,
    estimate_vitals,
    extract_phase_trace,
    trace_from_csv,
    trace_to_csv,
)

__version__ = "0.1.0"
