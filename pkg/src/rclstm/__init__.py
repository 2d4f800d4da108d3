"""Sparse randomly-connected LSTM engine and time-series experiment harness.

The memory-block gate weights are sparsified once at construction by a
random connectivity mask; forward passes route through CSR kernels below a
density threshold and dense BLAS above it.
"""

from .cell import (ConnectivityMask, LstmLayerParams, cell_backward,
                   cell_forward, generate_mask, init_layer)
from .checkpoint import (load_checkpoint, load_checkpoint_file,
                         save_checkpoint, save_checkpoint_file)
from .data import (LocationCodebook, NormalizationParams, PreparedData,
                   TimeSeries, WindowedDataset, chronological_split,
                   denormalize, load_mobility_csv, load_traffic_csv,
                   log_minmax_normalize, one_hot_encode, sliding_window)
from .metrics import MetricsReport, accuracy, rmse
from .network import (Prediction, StackedRclstm, backward_sequence,
                      build_model, cross_entropy_loss, forward_sequence,
                      mse_loss, softmax)
from .training import TrainingConfig, TrainingHistory, clip_gradients, fit

__version__ = "0.1.0"
