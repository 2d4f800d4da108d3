"""The sparsely connected LSTM memory block.

A layer owns one fixed boolean connectivity mask over its stacked gate
weight matrix (shape 4H x (D+H), gate order [forget; input; candidate;
output]).  The mask is sampled once from per-connection uniform draws and
never changes; masked weights and their gradients are exactly zero for the
life of the model.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DivergenceError, ShapeError
from .linalg import CsrMatrix, csr_from_masked

GATE_ORDER = ("forget", "input", "candidate", "output")

#: below this mask density the single-sample forward switches to the CSR kernel
DEFAULT_KERNEL_THRESHOLD = 0.2


@dataclass(frozen=True)
class ConnectivityMask:
    """Fixed boolean connection pattern over one gate weight matrix."""

    rows: int
    cols: int
    bits: np.ndarray
    density: float  # realized fraction of true bits
    seed: int
    mode: str
    target_density: float


def generate_mask(rows, cols, target_density, seed, mode="probabilistic"):
    """Sample a connectivity mask.

    ``probabilistic``: each connection is kept independently when its
    uniform draw lands at or above the threshold ``1 - target_density``, so
    the expected density equals the target.  ``exact``: exactly
    ``round(target_density * rows * cols)`` connections, positions chosen
    uniformly without replacement.  Deterministic given ``seed``.
    """
    if not 0.0 <= target_density <= 1.0:
        raise ValueError(f"target_density must be in [0, 1], got {target_density}")
    if mode not in ("probabilistic", "exact"):
        raise ValueError(f"unknown mask mode: {mode!r}")
    rng = np.random.default_rng(seed)
    if mode == "probabilistic":
        bits = rng.random((rows, cols)) >= 1.0 - target_density
    else:
        n_true = round(target_density * rows * cols)
        flat = rng.choice(rows * cols, size=n_true, replace=False)
        bits = np.zeros(rows * cols, dtype=bool)
        bits[flat] = True
        bits = bits.reshape(rows, cols)
    density = float(bits.mean()) if bits.size else 0.0
    return ConnectivityMask(rows, cols, bits, density, seed, mode, target_density)


@dataclass
class LstmLayerParams:
    """Weights, biases and mask for one memory-block layer.

    ``w`` is 4H x (D+H) with masked positions held at exactly zero; biases
    are dense (connectivity applies to neuron pairs, not biases).
    """

    input_dim: int
    hidden_dim: int
    w: np.ndarray
    b: np.ndarray
    mask: ConnectivityMask
    kernel_threshold: float = DEFAULT_KERNEL_THRESHOLD
    _csr: CsrMatrix | None = field(default=None, repr=False, compare=False)

    @property
    def uses_sparse(self):
        return self.mask.density < self.kernel_threshold

    def csr(self):
        """CSR view of the masked weights, cached until invalidated."""
        if self._csr is None:
            self._csr = csr_from_masked(self.w, self.mask.bits)
        return self._csr

    def invalidate(self):
        self._csr = None

    def apply_mask(self):
        self.w[~self.mask.bits] = 0.0
        self.invalidate()


def init_layer(input_dim, hidden_dim, density=1.0, seed=0, mode="probabilistic",
               kernel_threshold=DEFAULT_KERNEL_THRESHOLD):
    """Create a layer with fan-in uniform init, then apply a fresh mask."""
    mask_seed, w_seed = (int(s) for s in np.random.SeedSequence(seed).generate_state(2))
    fan_in = input_dim + hidden_dim
    mask = generate_mask(4 * hidden_dim, fan_in, density, mask_seed, mode)
    scale = 1.0 / math.sqrt(fan_in)
    rng = np.random.default_rng(w_seed)
    w = rng.uniform(-scale, scale, size=(4 * hidden_dim, fan_in))
    w[~mask.bits] = 0.0
    b = np.zeros(4 * hidden_dim)
    return LstmLayerParams(input_dim, hidden_dim, w, b, mask, kernel_threshold)


@dataclass
class CellState:
    """Hidden activation and memory cell for one layer at one timestep."""

    h: np.ndarray
    c: np.ndarray


def zero_state(hidden_dim, batch=None):
    shape = (hidden_dim,) if batch is None else (batch, hidden_dim)
    return CellState(np.zeros(shape), np.zeros(shape))


@dataclass
class StepCache:
    """Everything the backward pass needs from one forward step."""

    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    f: np.ndarray
    i: np.ndarray
    z: np.ndarray
    o: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray
    h: np.ndarray


@dataclass
class CellGrads:
    grad_w: np.ndarray
    grad_b: np.ndarray
    grad_x: np.ndarray
    grad_h_prev: np.ndarray
    grad_c_prev: np.ndarray


def cell_forward(p, x, prev):
    """One timestep of the memory block.

    ``x`` may be a single input vector (D,) or a batch (B, D) with matching
    batched ``prev`` state.  Single vectors take the hybrid kernel path
    (CSR below the density threshold, dense BLAS otherwise); batches always
    use the dense path.  Both routes agree to ~1e-15.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != p.input_dim:
        raise ShapeError(f"input dim {x.shape[-1]} != layer input dim {p.input_dim}")
    if prev.h.shape != prev.c.shape or prev.h.shape[-1] != p.hidden_dim:
        raise ShapeError("previous state does not match layer hidden dim")
    xh = np.concatenate([x, prev.h], axis=-1)
    if x.ndim == 1:
        if p.uses_sparse:
            csr = p.csr()
            a = kernels.csr_matvec(csr.row_offsets, csr.col_indices, csr.values,
                                   xh, csr.rows) + p.b
        else:
            a = p.w @ xh + p.b
        f, i, z, o, c, tanh_c, h = kernels.lstm_pointwise(a, prev.c)
    else:
        a = xh @ p.w.T + p.b
        f, i, z, o, c, tanh_c, h = kernels.lstm_pointwise_numpy(a, prev.c)
    if not math.isfinite(float(np.sum(h)) + float(np.sum(c))):
        raise DivergenceError("non-finite cell state")
    state = CellState(h, c)
    cache = StepCache(x, prev.h, prev.c, f, i, z, o, c, tanh_c, h)
    return state, cache


def cell_backward(p, cache, grad_h, grad_c):
    """Exact gradients for one timestep.

    ``grad_h``/``grad_c`` are the loss gradients flowing into this step's
    outputs.  For batched caches the weight and bias gradients are summed
    over the batch while the state/input gradients stay per-sample.
    ``grad_w`` is projected onto the mask, so masked weights never move.
    """
    if grad_h.shape != cache.h.shape or grad_c.shape != cache.c.shape:
        raise ShapeError("gradient shapes do not match cached state")
    do = grad_h * cache.tanh_c
    dc = grad_c + grad_h * cache.o * (1.0 - cache.tanh_c ** 2)
    da_f = dc * cache.c_prev * cache.f * (1.0 - cache.f)
    da_i = dc * cache.z * cache.i * (1.0 - cache.i)
    da_z = dc * cache.i * (1.0 - cache.z ** 2)
    da_o = do * cache.o * (1.0 - cache.o)
    grad_c_prev = dc * cache.f
    da = np.concatenate([da_f, da_i, da_z, da_o], axis=-1)
    xh = np.concatenate([cache.x, cache.h_prev], axis=-1)
    if da.ndim == 1:
        grad_w = np.outer(da, xh)
        grad_b = da.copy()
    else:
        grad_w = da.T @ xh
        grad_b = da.sum(axis=0)
    grad_w *= p.mask.bits
    grad_xh = da @ p.w
    grad_x = grad_xh[..., : p.input_dim]
    grad_h_prev = grad_xh[..., p.input_dim :]
    return CellGrads(grad_w, grad_b, grad_x, grad_h_prev, grad_c_prev)
