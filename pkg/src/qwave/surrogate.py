"""From-scratch LSTM with a linear head, trained by BPTT and Adam.

Gate recurrence per step t, with h_0 = c_0 = 0:

    i_t = sigmoid(W_i x_t + U_i h_{t-1} + b_i)      input gate
    f_t = sigmoid(W_f x_t + U_f h_{t-1} + b_f)      forget gate
    g_t = tanh   (W_c x_t + U_c h_{t-1} + b_c)      cell candidate
    o_t = sigmoid(W_o x_t + U_o h_{t-1} + b_o)      output gate
    c_t = f_t * c_{t-1} + i_t * g_t
    h_t = o_t * tanh(c_t)

The prediction is W_out h_L + b_out with no output nonlinearity;
densities are scaled to [0, 1] before training and negative outputs are
only clamped at reporting time.  All gradients are exact reverse-mode
accumulation through every timestep.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import SplitDataset
from .errors import NonFiniteError

log = logging.getLogger(__name__)

GATES = ("i", "f", "c", "o")

# fixed parameter order: gate weights, then the dense head
PARAM_KEYS = tuple(f"{kind}_{g}" for g in GATES for kind in ("W", "U", "b")) + ("W_out", "b_out")


@dataclass
class SurrogateModel:
    """LSTM gate parameters plus the dense output head.

    params maps each name in PARAM_KEYS to its tensor: W_g is
    (hidden, input), U_g is (hidden, hidden), b_g is (hidden,), W_out is
    (input, hidden), b_out is (input,).
    """

    input_dim: int
    hidden_dim: int
    seed: int
    params: dict[str, np.ndarray]


@dataclass
class AdamState:
    """Per-parameter first/second moments and the shared step counter."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 1  # one window per update, per the training protocol
    rng_seed: int = 42
    lr: float = 1e-3
    clip_norm: float | None = None
    eval_test: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size != 1:
            raise ValueError(f"batch_size is fixed at 1, got {self.batch_size}")
        if not self.lr >= 0:
            raise ValueError(f"lr must be >= 0, got {self.lr}")
        if self.clip_norm is not None and not self.clip_norm > 0:
            raise ValueError(f"clip_norm must be positive when set, got {self.clip_norm}")


@dataclass
class LossHistory:
    """Per-epoch mean training MSE (scaled units), optional test MSE."""

    train_mse: list[float] = field(default_factory=list)
    test_mse: list[float] | None = None


@dataclass
class Tape:
    """Per-step activations cached by forward for exact BPTT."""

    inputs: list[np.ndarray]
    gates: dict[str, list[np.ndarray]]  # i, f, c (candidate), o per step
    cells: list[np.ndarray]
    hiddens: list[np.ndarray]  # h_0 .. h_L, so hiddens[t] is the state BEFORE step t+1
    prediction: np.ndarray


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # piecewise form avoids overflow in exp for large negative inputs
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_model(input_dim: int, hidden_dim: int, rng_seed: int) -> SurrogateModel:
    """Seeded uniform init in [-1/sqrt(hidden), 1/sqrt(hidden)].

    Biases start at zero except the forget gate, whose bias of 1 keeps
    the cell state open early in training.
    """
    if input_dim < 1 or hidden_dim < 1:
        raise ValueError(f"dimensions must be >= 1, got input={input_dim}, hidden={hidden_dim}")
    rng = np.random.default_rng(rng_seed)
    bound = 1.0 / np.sqrt(hidden_dim)
    params: dict[str, np.ndarray] = {}
    for g in GATES:
        params[f"W_{g}"] = rng.uniform(-bound, bound, size=(hidden_dim, input_dim))
        params[f"U_{g}"] = rng.uniform(-bound, bound, size=(hidden_dim, hidden_dim))
        params[f"b_{g}"] = np.full(hidden_dim, 1.0) if g == "f" else np.zeros(hidden_dim)
    params["W_out"] = rng.uniform(-bound, bound, size=(input_dim, hidden_dim))
    params["b_out"] = np.zeros(input_dim)
    return SurrogateModel(int(input_dim), int(hidden_dim), int(rng_seed), params)


def forward(model: SurrogateModel, window: np.ndarray) -> tuple[np.ndarray, Tape]:
    """Run the recurrence over a (L, input_dim) window; return prediction and tape."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[1] != model.input_dim:
        raise ValueError(f"window shape {window.shape} does not match input_dim {model.input_dim}")
    if window.shape[0] < 1:
        raise ValueError("window must contain at least one frame")

    p = model.params
    h = np.zeros(model.hidden_dim)
    c = np.zeros(model.hidden_dim)
    tape = Tape(
        inputs=[],
        gates={g: [] for g in GATES},
        cells=[],
        hiddens=[h],
        prediction=np.empty(0),
    )
    for x in window:
        i = _sigmoid(p["W_i"] @ x + p["U_i"] @ h + p["b_i"])
        f = _sigmoid(p["W_f"] @ x + p["U_f"] @ h + p["b_f"])
        g = np.tanh(p["W_c"] @ x + p["U_c"] @ h + p["b_c"])
        o = _sigmoid(p["W_o"] @ x + p["U_o"] @ h + p["b_o"])
        c = f * c + i * g
        h = o * np.tanh(c)
        tape.inputs.append(x)
        tape.gates["i"].append(i)
        tape.gates["f"].append(f)
        tape.gates["c"].append(g)
        tape.gates["o"].append(o)
        tape.cells.append(c)
        tape.hiddens.append(h)

    prediction = p["W_out"] @ h + p["b_out"]
    if not np.all(np.isfinite(prediction)):
        raise NonFiniteError("non-finite activation in forward pass")
    tape.prediction = prediction
    return prediction, tape


def mse(prediction: np.ndarray, target: np.ndarray) -> float:
    """(1/N) sum (p_i - y_i)^2."""
    prediction = np.asarray(prediction, dtype=float)
    target = np.asarray(target, dtype=float)
    if prediction.shape != target.shape:
        raise ValueError(f"shape mismatch: prediction {prediction.shape}, target {target.shape}")
    diff = prediction - target
    with np.errstate(over="ignore"):  # inf is caught by the caller's finiteness check
        return float(diff @ diff) / prediction.shape[0]


def backward(model: SurrogateModel, tape: Tape, target: np.ndarray) -> dict[str, np.ndarray]:
    """Exact gradients of mse(prediction, target) for every parameter."""
    target = np.asarray(target, dtype=float)
    n_steps = len(tape.inputs)
    if n_steps == 0 or len(tape.hiddens) != n_steps + 1:
        raise ValueError("tape does not come from a completed forward pass")
    if tape.prediction.shape != (model.input_dim,) or target.shape != (model.input_dim,):
        raise ValueError(
            f"tape/target width mismatch: prediction {tape.prediction.shape}, "
            f"target {target.shape}, input_dim {model.input_dim}"
        )
    if tape.inputs[0].shape != (model.input_dim,) or tape.hiddens[0].shape != (model.hidden_dim,):
        raise ValueError("tape shapes do not match this model")

    p = model.params
    grads = {k: np.zeros_like(p[k]) for k in PARAM_KEYS}

    d_pred = 2.0 * (tape.prediction - target) / model.input_dim
    grads["W_out"] = np.outer(d_pred, tape.hiddens[-1])
    grads["b_out"] = d_pred

    dh = p["W_out"].T @ d_pred
    dc_carry = np.zeros(model.hidden_dim)
    for t in range(n_steps - 1, -1, -1):
        i = tape.gates["i"][t]
        f = tape.gates["f"][t]
        g = tape.gates["c"][t]
        o = tape.gates["o"][t]
        c = tape.cells[t]
        c_prev = tape.cells[t - 1] if t > 0 else np.zeros(model.hidden_dim)
        h_prev = tape.hiddens[t]
        x = tape.inputs[t]

        tanh_c = np.tanh(c)
        dc = dh * o * (1.0 - tanh_c**2) + dc_carry

        d_pre = {
            "o": dh * tanh_c * o * (1.0 - o),
            "f": dc * c_prev * f * (1.0 - f),
            "i": dc * g * i * (1.0 - i),
            "c": dc * i * (1.0 - g**2),
        }
        dh = np.zeros(model.hidden_dim)
        for gate, d in d_pre.items():
            grads[f"W_{gate}"] += np.outer(d, x)
            grads[f"U_{gate}"] += np.outer(d, h_prev)
            grads[f"b_{gate}"] += d
            dh += p[f"U_{gate}"].T @ d
        dc_carry = dc * f

    return grads


def init_adam(params: dict[str, np.ndarray], lr: float = 1e-3) -> AdamState:
    state = AdamState(lr=lr)
    state.m = {k: np.zeros_like(v) for k, v in params.items()}
    state.v = {k: np.zeros_like(v) for k, v in params.items()}
    return state


def adam_step(
    state: AdamState,
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns fresh params and state."""
    for k, g in grads.items():
        if g.shape != params[k].shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {k}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for parameter {k}")
    state.step += 1
    k_t = state.step
    bc1 = 1.0 - state.beta1**k_t
    bc2 = 1.0 - state.beta2**k_t
    new_params = {}
    for k, theta in params.items():
        g = grads[k]
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g**2
        m_hat = state.m[k] / bc1
        v_hat = state.v[k] / bc2
        new_params[k] = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, state


def _clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> bool:
    total = np.sqrt(sum(float(np.sum(g**2)) for g in grads.values()))
    if total <= max_norm:
        return False
    factor = max_norm / total
    for k in grads:
        grads[k] = grads[k] * factor
    return True


def train(
    model: SurrogateModel,
    data: SplitDataset,
    cfg: TrainConfig,
) -> tuple[SurrogateModel, LossHistory]:
    """Adam updates over epochs x train pairs, chronological order.

    The per-pair loss is recorded before its update, so each history
    entry is the mean MSE the parameters of that epoch actually saw.
    Deterministic: no shuffling, no dropout, no RNG draws.
    """
    if len(data.train) == 0:
        raise ValueError("training set is empty")
    work = SurrogateModel(
        model.input_dim, model.hidden_dim, model.seed, {k: v.copy() for k, v in model.params.items()}
    )
    state = init_adam(work.params, lr=cfg.lr)
    history = LossHistory(test_mse=[] if cfg.eval_test else None)
    clipped = 0

    for epoch in range(cfg.epochs):
        losses = []
        for pair, (window, target) in enumerate(zip(data.train.inputs, data.train.targets)):
            pred, tape = forward(work, window)
            loss = mse(pred, target)
            if not np.isfinite(loss):
                raise NonFiniteError(f"loss diverged at epoch {epoch + 1}, pair {pair}")
            losses.append(loss)
            grads = backward(work, tape, target)
            if cfg.clip_norm is not None and _clip_gradients(grads, cfg.clip_norm):
                clipped += 1
            work.params, state = adam_step(state, work.params, grads)
        history.train_mse.append(float(np.mean(losses)))
        if cfg.eval_test:
            history.test_mse.append(evaluate(work, data.test))

    if clipped:
        log.warning("gradient clipping fired on %d of %d updates", clipped, state.step)
    return work, history


def evaluate(model: SurrogateModel, ds) -> float:
    """Mean one-step MSE over a windowed dataset (scaled units)."""
    if len(ds) == 0:
        return float("nan")
    return float(
        np.mean([mse(forward(model, w)[0], y) for w, y in zip(ds.inputs, ds.targets)])
    )


def predict_one_step(model: SurrogateModel, windows: np.ndarray) -> np.ndarray:
    """One prediction per ground-truth window; (M, L, N) -> (M, N), scaled units."""
    return np.stack([forward(model, w)[0] for w in np.asarray(windows, dtype=float)])


def predict_rollout(model: SurrogateModel, seed_window: np.ndarray, n_steps: int) -> np.ndarray:
    """Autoregressive rollout: each prediction is fed back as the newest frame.

    Output is (n_steps, N) in scaled units; the caller inverse-transforms.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    window = np.array(seed_window, dtype=float)
    out = []
    for _ in range(n_steps):
        pred, _ = forward(model, window)
        out.append(pred)
        window = np.vstack([window[1:], pred])
    return np.stack(out)


def save_checkpoint(model: SurrogateModel, path) -> None:
    """Self-describing text checkpoint; round-trips bitwise via 17-digit floats."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"input_dim={model.input_dim}\n")
        fh.write(f"hidden_dim={model.hidden_dim}\n")
        fh.write(f"seed={model.seed}\n")
        for key in PARAM_KEYS:
            tensor = np.atleast_2d(model.params[key])
            fh.write(f"[{key}]\n")
            for row in tensor:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_checkpoint(path) -> SurrogateModel:
    header: dict[str, int] = {}
    sections: dict[str, list[list[float]]] = {}
    current: list[list[float]] | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1]
                current = sections.setdefault(name, [])
            elif current is None:
                key, _, raw = line.partition("=")
                header[key.strip()] = int(raw)
            else:
                current.append([float(v) for v in line.split()])
    missing = {"input_dim", "hidden_dim", "seed"} - set(header)
    if missing:
        raise ValueError(f"checkpoint {path} is missing header fields {sorted(missing)}")
    if set(sections) != set(PARAM_KEYS):
        raise ValueError(
            f"checkpoint {path} has parameter sections {sorted(sections)}, "
            f"expected {sorted(PARAM_KEYS)}"
        )
    params = {}
    for key, rows in sections.items():
        tensor = np.array(rows, dtype=float)
        if key.startswith("b_"):
            tensor = tensor.reshape(-1)
        params[key] = tensor
    model = SurrogateModel(header["input_dim"], header["hidden_dim"], header["seed"], params)
    _check_shapes(model)
    return model


def _check_shapes(model: SurrogateModel) -> None:
    n, h = model.input_dim, model.hidden_dim
    expected = {f"W_{g}": (h, n) for g in GATES}
    expected.update({f"U_{g}": (h, h) for g in GATES})
    expected.update({f"b_{g}": (h,) for g in GATES})
    expected["W_out"] = (n, h)
    expected["b_out"] = (n,)
    for key, shape in expected.items():
        if model.params[key].shape != shape:
            raise ValueError(
                f"parameter {key} has shape {model.params[key].shape}, expected {shape}"
            )


def write_loss_csv(history: LossHistory, path) -> None:
    """Loss CSV: epoch,train_mse[,test_mse]."""
    with_test = history.test_mse is not None
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,train_mse,test_mse\n" if with_test else "epoch,train_mse\n")
        for epoch, loss in enumerate(history.train_mse, start=1):
            if with_test:
                fh.write(f"{epoch},{loss:.17g},{history.test_mse[epoch - 1]:.17g}\n")
            else:
                fh.write(f"{epoch},{loss:.17g}\n")
