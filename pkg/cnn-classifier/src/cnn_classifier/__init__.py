"""1D CNN human-presence classifier over shared phase-trace datasets."""

from .dataset import TraceDataset, load_dataset, read_trace_csv, standardize, stratified_split
from .errors import CnnClassifierError, DatasetError, ValidationError
from .infer import infer_file, infer_trace
from .model import CnnSpec, PresenceCnn, load_model, save_model
from .train import ConfusionCounts, SplitReport, TrainParams, confusion, train

__version__ = "0.1.0"
